#include "shwave/defect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "shwave/error.hpp"

namespace shwave {

namespace {
constexpr double kGaussianFloor = 1e-6;
constexpr double kMaxDepthFraction = 0.8;

double gaussian_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }
}  // namespace

std::string_view to_string(DefectFamily family) {
  switch (family) {
    case DefectFamily::rectangular: return "rectangular";
    case DefectFamily::gaussian: return "gaussian";
    case DefectFamily::vee: return "vee";
  }
  return "unknown";
}

std::optional<DefectFamily> parse_family(std::string_view name) {
  for (DefectFamily f : kAllFamilies)
    if (to_string(f) == name) return f;
  return std::nullopt;
}

double DefectSpec::support_half_width() const {
  switch (family) {
    case DefectFamily::rectangular:
    case DefectFamily::vee: return 0.5 * width;
    case DefectFamily::gaussian:
      return gaussian_sigma(width) * std::sqrt(-2.0 * std::log(kGaussianFloor));
  }
  return 0.0;
}

void DefectSpec::validate(const PlateSpec& plate) const {
  if (!(width > 0.0)) throw std::invalid_argument("DefectSpec: width must be positive");
  if (!(max_depth > 0.0) || max_depth > kMaxDepthFraction * plate.depth())
    throw std::invalid_argument("DefectSpec: max_depth must lie in (0, 0.8 * plate depth]");
}

std::vector<double> SpatialGrid::positions() const {
  std::vector<double> xs(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) xs[static_cast<std::size_t>(i)] = x(i);
  return xs;
}

SpatialGrid SpatialGrid::centered(const PlateSpec& plate, int points, double window_depths) {
  if (points < 2) throw std::invalid_argument("SpatialGrid: need at least two points");
  const double length = window_depths * plate.depth();
  return SpatialGrid{-0.5 * length, length / static_cast<double>(points), points};
}

DepthProfile sample_profile(const DefectSpec& spec, const SpatialGrid& grid) {
  const double half = spec.support_half_width();
  if (spec.center - half < grid.x_min || spec.center + half > grid.x_max()) {
    std::ostringstream msg;
    msg << to_string(spec.family) << " support [" << spec.center - half << ", "
        << spec.center + half << "] exceeds grid window [" << grid.x_min << ", " << grid.x_max()
        << "]";
    throw Error(ErrorCode::grid_not_covering_support, msg.str());
  }

  DepthProfile out{grid, std::vector<double>(static_cast<std::size_t>(grid.size), 0.0)};
  const double sigma = gaussian_sigma(spec.width);
  for (int i = 0; i < grid.size; ++i) {
    const double r = grid.x(i) - spec.center;
    double d = 0.0;
    switch (spec.family) {
      case DefectFamily::rectangular:
        d = std::abs(r) <= 0.5 * spec.width ? spec.max_depth : 0.0;
        break;
      case DefectFamily::vee:
        d = spec.max_depth * std::max(0.0, 1.0 - 2.0 * std::abs(r) / spec.width);
        break;
      case DefectFamily::gaussian: {
        const double e = std::exp(-r * r / (2.0 * sigma * sigma));
        d = e < kGaussianFloor ? 0.0 : spec.max_depth * e;
        break;
      }
    }
    out.depths[static_cast<std::size_t>(i)] = d;
  }
  return out;
}

DefectSpec random_spec(Rng& rng, DefectFamily family, const SpatialInterval& window,
                       const PlateSpec& plate, const DefectRanges& ranges) {
  if (!(window.hi > window.lo)) throw std::invalid_argument("random_spec: empty window");
  const double depth = plate.depth();
  const double quarter = 0.25 * (window.hi - window.lo);
  const double inner_lo = window.lo + quarter;
  const double inner_hi = window.hi - quarter;

  DefectSpec spec;
  spec.family = family;
  spec.max_depth = rng.uniform(ranges.depth_min, ranges.depth_max) * depth;

  // Largest width whose support still fits the central half.
  spec.width = 1.0;
  const double support_per_width = spec.support_half_width();
  const double w_fit = 0.5 * (inner_hi - inner_lo) / support_per_width;
  const double w_lo = std::min(ranges.width_min * depth, w_fit);
  const double w_hi = std::min(ranges.width_max * depth, w_fit);
  spec.width = rng.uniform(w_lo, w_hi);

  const double half = spec.support_half_width();
  spec.center = rng.uniform(inner_lo + half, std::max(inner_lo + half, inner_hi - half));
  return spec;
}

}  // namespace shwave
