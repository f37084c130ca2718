#include "shwave/waveguide.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shwave {

namespace {
// Relative band around k^2 = beta^2 treated as exact cutoff.
constexpr double kCutoffTolerance = 1e-12;
}  // namespace

void PlateSpec::validate() const {
  if (!(half_thickness > 0.0) || !(shear_velocity > 0.0) || !(shear_modulus > 0.0))
    throw std::invalid_argument("PlateSpec: thickness, velocity and modulus must be positive");
}

double transverse_wavenumber(double height, int n) {
  return static_cast<double>(n) * std::numbers::pi / height;
}

cplx axial_wavenumber_in_layer(double height, int n, double k) {
  const double beta = transverse_wavenumber(height, n);
  const double k2 = k * k;
  const double b2 = beta * beta;
  const double q = k2 - b2;
  if (std::abs(q) <= kCutoffTolerance * std::max(k2, b2)) return {0.0, 0.0};
  if (q > 0.0) return {std::sqrt(q), 0.0};
  return {0.0, std::sqrt(-q)};
}

cplx axial_wavenumber(const PlateSpec& plate, int n, double omega) {
  return axial_wavenumber_in_layer(plate.depth(), n, omega / plate.shear_velocity);
}

ModeKind classify(cplx xi) {
  if (xi.real() == 0.0 && xi.imag() == 0.0) return ModeKind::cutoff;
  if (xi.imag() == 0.0) return ModeKind::propagating;
  return ModeKind::evanescent;
}

Mode make_mode(const PlateSpec& plate, int n, double omega) {
  Mode m;
  m.order = n;
  m.beta = transverse_wavenumber(plate.depth(), n);
  m.xi = axial_wavenumber(plate, n, omega);
  m.kind = classify(m.xi);
  return m;
}

double mode_shape(int n, double argument) {
  return (n % 2 == 0) ? std::cos(argument) : std::sin(argument);
}

int propagating_mode_count_in_layer(double height, double k) {
  int count = 0;
  for (int n = 0;; ++n) {
    if (classify(axial_wavenumber_in_layer(height, n, k)) != ModeKind::propagating) {
      // n = 0 at k = 0 is cutoff; higher orders only get further from propagating.
      return count;
    }
    ++count;
  }
}

int propagating_mode_count(const PlateSpec& plate, double omega) {
  return propagating_mode_count_in_layer(plate.depth(), omega / plate.shear_velocity);
}

double mode_norm(const PlateSpec& plate, int n) {
  return n == 0 ? plate.depth() : plate.half_thickness;
}

}  // namespace shwave
