#include "shwave/dataset.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace shwave {

std::string_view to_string(ForwardModel model) {
  return model == ForwardModel::born ? "born" : "full-wave";
}

std::optional<ForwardModel> parse_forward_model(std::string_view name) {
  if (name == "full-wave") return ForwardModel::full_wave;
  if (name == "born") return ForwardModel::born;
  return std::nullopt;
}

std::vector<DefectFamily> Dataset::families() const {
  std::vector<DefectFamily> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.spec.family);
  return out;
}

Dataset generate_dataset(const DatasetManifest& manifest, int workers,
                         const std::function<void(int, int)>& progress) {
  manifest.plate.validate();
  if (manifest.count < 1) throw std::invalid_argument("generate_dataset: count must be positive");
  if (manifest.families.empty()) throw std::invalid_argument("generate_dataset: no families");
  const WavenumberGrid band = manifest.band.grid(manifest.plate);
  const SpatialInterval window{manifest.grid.x_min, manifest.grid.x_max()};

  Dataset ds;
  ds.manifest = manifest;
  ds.samples.resize(static_cast<std::size_t>(manifest.count));
  Rng rng(manifest.seed);
  for (int i = 0; i < manifest.count; ++i) {
    const DefectFamily f = manifest.families[static_cast<std::size_t>(i) % manifest.families.size()];
    DatasetSample& s = ds.samples[static_cast<std::size_t>(i)];
    s.spec = random_spec(rng, f, window, manifest.plate, manifest.ranges);
    s.profile = sample_profile(s.spec, manifest.grid);
  }

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (int i = next++; i < manifest.count; i = next++) {
      DatasetSample& s = ds.samples[static_cast<std::size_t>(i)];
      try {
        s.spectrum = manifest.forward == ForwardModel::born
                         ? born_forward(manifest.plate, s.profile, band)
                         : solve_reflection(manifest.plate, s.profile, band, manifest.solver);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_lock);
        if (!failure) {
          std::ostringstream msg;
          msg << "sample " << i << ": " << e.what();
          failure = std::make_exception_ptr(std::runtime_error(msg.str()));
        }
        failed = true;
        next = manifest.count;
      }
      ++done;
    }
  };

  const int n_workers = std::max(1, workers);
  if (n_workers == 1 && !progress) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    if (progress) {
      int reported = -1;
      while (done.load() < manifest.count && !failed.load()) {
        const int d = done.load();
        if (d != reported) progress(reported = d, manifest.count);
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (progress) progress(manifest.count, manifest.count);
  return ds;
}

}  // namespace shwave
