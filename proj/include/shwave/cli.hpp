// Command implementations behind the `shwave` tool. Each command takes a
// plain options struct so it can be driven in-process as well as from argv.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shwave/dataset.hpp"
#include "shwave/eval.hpp"
#include "shwave/netinv.hpp"

namespace shwave::cli {

inline constexpr const char* kVersion = "1.0.0";

struct GenerateOptions {
  int count = 800;
  std::vector<std::string> families{"rectangular", "gaussian", "vee"};
  std::uint64_t seed = 1;
  int n_modes = 12;
  int segments = 64;
  double xib_min = 0.1;
  double xib_max = 1.5;
  int wavenumbers = 64;
  int points = 128;
  double window = 8.0;  // plate depths
  std::string forward = "full-wave";
  int workers = 0;  // 0 = hardware concurrency
  std::filesystem::path out = "dataset.shw";
};

struct TrainOptions {
  std::filesystem::path dataset;
  std::filesystem::path out = "netinv.ckpt";
  std::uint64_t seed = 1;
  netinv::TrainConfig config;
};

struct ReconstructOptions {
  std::optional<std::filesystem::path> dataset;
  int sample = 0;
  std::optional<std::filesystem::path> spectrum_file;
  std::string method = "wnst";
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path out = "profile.dat";
  std::optional<std::filesystem::path> plot;
  int points = 128;
  double window = 8.0;
};

struct ReconstructResult {
  DepthProfile profile;
  std::optional<DepthProfile> truth;
  std::optional<double> snr_db;
  double seconds = 0.0;  // reconstruction only, excluding file I/O
};

struct BenchmarkOptions {
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> from_report;
  std::filesystem::path out = "benchmark";
};

struct PlotOptions {
  std::string target;  // spectra | profiles | history
  std::vector<std::string> inputs;
  std::filesystem::path out = "plot";
  double kb_min = 0.05;
  double kb_max = 8.0;
  int frequencies = 240;
  int max_order = 5;
  int n_modes = 16;
  int segments = 64;
};

// Each command writes a "<out>.run.json" manifest next to its outputs.
Dataset cmd_generate(const GenerateOptions& opt, std::ostream& log);
netinv::TrainResult cmd_train(const TrainOptions& opt, std::ostream& log);
ReconstructResult cmd_reconstruct(const ReconstructOptions& opt, std::ostream& log);
eval::BenchmarkReport cmd_benchmark(const BenchmarkOptions& opt, std::ostream& log);
// Returns the columnar files written.
std::vector<std::filesystem::path> cmd_plot(const PlotOptions& opt, std::ostream& log);

/// Dataset manifest implied by generate options.
DatasetManifest manifest_from(const GenerateOptions& opt);

/// Parses "family:center:width:depth", lengths in plate depths.
DefectSpec parse_defect(const std::string& text, const PlateSpec& plate);

/// Reads "xi re im" rows ('#' starts a comment).
ReflectionSpectrum read_spectrum_file(const std::filesystem::path& path, const PlateSpec& plate);
void write_spectrum_file(const std::filesystem::path& path, const ReflectionSpectrum& spectrum);

/// Full argv entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shwave::cli
