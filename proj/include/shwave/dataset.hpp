// Synthetic defect/spectrum datasets, regenerable from their manifest.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shwave/defect.hpp"
#include "shwave/forward.hpp"

namespace shwave {

enum class ForwardModel { full_wave, born };

std::string_view to_string(ForwardModel model);
std::optional<ForwardModel> parse_forward_model(std::string_view name);

struct BandSpec {
  double xib_min = 0.1;
  double xib_max = 1.5;
  int samples = 64;
  bool single_mode = true;

  WavenumberGrid grid(const PlateSpec& plate) const {
    return WavenumberGrid::linear(plate, xib_min, xib_max, samples, single_mode);
  }
  bool operator==(const BandSpec&) const = default;
};

struct DatasetManifest {
  PlateSpec plate;
  SpatialGrid grid;
  BandSpec band;
  std::uint64_t seed = 1;
  int count = 800;
  std::vector<DefectFamily> families{kAllFamilies[0], kAllFamilies[1], kAllFamilies[2]};
  DefectRanges ranges;
  SolverSettings solver;
  ForwardModel forward = ForwardModel::full_wave;
};

struct DatasetSample {
  DefectSpec spec;
  DepthProfile profile;
  ReflectionSpectrum spectrum;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<DatasetSample> samples;

  std::vector<DefectFamily> families() const;
};

/// Sample i has family families[i % families.size()]; specs are drawn in
/// order from Rng(seed), then spectra are solved on `workers` threads. The
/// result does not depend on `workers`. `progress`, if set, is called from
/// the calling thread as samples complete.
Dataset generate_dataset(const DatasetManifest& manifest, int workers = 1,
                         const std::function<void(int done, int total)>& progress = {});

}  // namespace shwave
