// SH-wave modal machinery for a traction-free isotropic plate.
//
// The plate occupies -b <= x2 <= b. Mode n has transverse shape
// f_n(beta_n x2) with beta_n = n*pi/(2b) and axial wavenumber
// xi_n = sqrt(omega^2/Vs^2 - beta_n^2), taken on the branch with
// Re >= 0 and, below cutoff, Im > 0.

#pragma once

#include <complex>
#include <cstddef>

namespace shwave {

using cplx = std::complex<double>;

struct PlateSpec {
  double half_thickness = 0.5;  // b; plate depth is 2b
  double shear_velocity = 1.0;  // Vs
  double shear_modulus = 1.0;   // mu

  double depth() const { return 2.0 * half_thickness; }

  // Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
};

enum class ModeKind { propagating, evanescent, cutoff };

struct Mode {
  int order = 0;
  double beta = 0.0;
  cplx xi;
  ModeKind kind = ModeKind::propagating;
};

/// Transverse wavenumber n*pi/h for a layer of thickness h.
double transverse_wavenumber(double height, int n);

/// Axial wavenumber sqrt(k^2 - beta^2) with k = omega/Vs; evanescent
/// values are returned as +i*|.| so that exp(i*xi*x1) decays for x1 > 0.
cplx axial_wavenumber(const PlateSpec& plate, int n, double omega);

/// Same branch rule for a layer of arbitrary thickness and bulk wavenumber k.
cplx axial_wavenumber_in_layer(double height, int n, double k);

ModeKind classify(cplx xi);

Mode make_mode(const PlateSpec& plate, int n, double omega);

/// cos(arg) for even n, sin(arg) for odd n.
double mode_shape(int n, double argument);

/// Number of modes with strictly real, nonzero xi. Modes sitting exactly at
/// cutoff are not counted.
int propagating_mode_count(const PlateSpec& plate, double omega);

/// Same count for a layer of thickness h at bulk wavenumber k.
int propagating_mode_count_in_layer(double height, double k);

/// Integral of f_n(beta_n x2)^2 across the thickness: 2b for n = 0, b otherwise.
double mode_norm(const PlateSpec& plate, int n);

}  // namespace shwave
