#include "shwave/wnst.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "shwave/error.hpp"

namespace shwave {

std::vector<double> trapezoid_weights(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (xs[i + 1] - xs[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

std::vector<cplx> reconstruct_complex(const PlateSpec& plate, const ReflectionSpectrum& spectrum,
                                      const SpatialGrid& grid) {
  const auto& xi = spectrum.grid.xi;
  for (double v : xi) {
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "sample xi = " << v;
      throw Error(ErrorCode::band_contains_zero_wavenumber, msg.str());
    }
  }
  if (spectrum.coefficients.size() != xi.size())
    throw Error(ErrorCode::dimension_mismatch, "spectrum coefficients do not match its grid");

  const std::vector<double> w = trapezoid_weights(xi);
  const cplx i_unit{0.0, 1.0};
  // Shape spectrum D(xi) = C / (i xi), weighted.
  std::vector<cplx> shape(xi.size());
  for (std::size_t m = 0; m < xi.size(); ++m)
    shape[m] = w[m] * spectrum.coefficients[m] / (i_unit * xi[m]);

  const double scale = plate.depth() / std::numbers::pi;
  std::vector<cplx> out(static_cast<std::size_t>(grid.size));
  for (int i = 0; i < grid.size; ++i) {
    const double x = grid.x(i);
    cplx acc{0.0, 0.0};
    for (std::size_t m = 0; m < xi.size(); ++m) {
      const cplx kernel = std::exp(-2.0 * i_unit * xi[m] * x);
      acc += shape[m] * kernel;                          // +xi
      acc += std::conj(shape[m]) * std::conj(kernel);    // -xi
    }
    out[static_cast<std::size_t>(i)] = scale * acc;
  }
  return out;
}

DepthProfile reconstruct(const PlateSpec& plate, const ReflectionSpectrum& spectrum,
                         const SpatialGrid& grid) {
  const std::vector<cplx> z = reconstruct_complex(plate, spectrum, grid);
  DepthProfile out{grid, std::vector<double>(z.size())};
  for (std::size_t i = 0; i < z.size(); ++i) out.depths[i] = z[i].real();
  return out;
}

}  // namespace shwave
