// Parametric plate-thinning families and their sampled depth profiles.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shwave/rng.hpp"
#include "shwave/waveguide.hpp"

namespace shwave {

enum class DefectFamily { rectangular = 0, gaussian = 1, vee = 2 };

inline constexpr DefectFamily kAllFamilies[] = {DefectFamily::rectangular,
                                                DefectFamily::gaussian, DefectFamily::vee};

std::string_view to_string(DefectFamily family);
std::optional<DefectFamily> parse_family(std::string_view name);

struct DefectSpec {
  DefectFamily family = DefectFamily::rectangular;
  double center = 0.0;
  double width = 1.0;  // full width; FWHM for the Gaussian family
  double max_depth = 0.1;

  // Half-length of the interval outside which the profile is exactly zero.
  double support_half_width() const;

  // Throws std::invalid_argument on width <= 0 or max_depth outside (0, 0.8 * depth].
  void validate(const PlateSpec& plate) const;
};

// Uniform, cell-centred grid: x_i = x_min + (i + 1/2) dx. Sample i stands for
// the cell [x_min + i dx, x_min + (i + 1) dx].
struct SpatialGrid {
  double x_min = -4.0;
  double dx = 8.0 / 128.0;
  int size = 128;

  double x(int i) const { return x_min + (static_cast<double>(i) + 0.5) * dx; }
  double x_max() const { return x_min + dx * static_cast<double>(size); }
  std::vector<double> positions() const;

  // P points over a window of `window_depths` plate depths centred on 0.
  static SpatialGrid centered(const PlateSpec& plate, int points = 128, double window_depths = 8.0);

  bool operator==(const SpatialGrid&) const = default;
};

struct DepthProfile {
  SpatialGrid grid;
  std::vector<double> depths;
};

/// Samples the family shape on the grid. Throws Error(grid_not_covering_support)
/// when the nonzero support sticks out of the grid window.
DepthProfile sample_profile(const DefectSpec& spec, const SpatialGrid& grid);

struct SpatialInterval {
  double lo = -4.0;
  double hi = 4.0;
};

// Sampling ranges, in units of plate depth.
struct DefectRanges {
  double depth_min = 0.05;
  double depth_max = 0.8;
  double width_min = 0.5;
  double width_max = 4.0;
};

/// Draws a spec whose support fits in the central half of `window`. Width is
/// capped per family so that the support constraint can be met.
DefectSpec random_spec(Rng& rng, DefectFamily family, const SpatialInterval& window,
                       const PlateSpec& plate, const DefectRanges& ranges = {});

}  // namespace shwave
