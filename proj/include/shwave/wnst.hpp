// Wavenumber-space transform (WNST): direct Born inversion of a reflection
// spectrum into a depth profile by a band-limited inverse Fourier sum.

#pragma once

#include <vector>

#include "shwave/defect.hpp"
#include "shwave/forward.hpp"

namespace shwave {

/// Trapezoid weights for a strictly increasing abscissa (endpoints halved).
std::vector<double> trapezoid_weights(const std::vector<double>& xs);

/// Complex value of the two-sided (Hermitian-extended) inverse sum,
///   (2b/pi) * sum_{+-xi} w [C(xi)/(i xi)] exp(-2 i xi x),
/// with C(-xi) = conj(C(xi)). Its real part is the WNST profile; the
/// imaginary part is roundoff only.
std::vector<cplx> reconstruct_complex(const PlateSpec& plate, const ReflectionSpectrum& spectrum,
                                      const SpatialGrid& grid);

/// d(x) = (4b/pi) Re sum_m w_m [C(xi_m)/(i xi_m)] exp(-2 i xi_m x). No clamping.
/// Throws Error(band_contains_zero_wavenumber) when some xi_m <= 0.
DepthProfile reconstruct(const PlateSpec& plate, const ReflectionSpectrum& spectrum,
                         const SpatialGrid& grid);

}  // namespace shwave
