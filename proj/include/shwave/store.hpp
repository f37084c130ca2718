// Self-describing artifact containers.
//
// Every file is
//
//   SHWAVE <kind> v<version>\n
//   header-bytes <n>\n
//   <n bytes of JSON header>\n
//   <binary payload>
//
// The JSON header is human-readable and names the byte order
// ("little-endian") and the checksum ("crc32" over the payload bytes).
// Payload numbers are IEEE-754 binary64 / two's-complement integers stored
// little-endian. Files are written to "<path>.tmp" and renamed into place.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shwave/dataset.hpp"
#include "shwave/eval.hpp"
#include "shwave/netinv.hpp"

namespace shwave::store {

inline constexpr int kFormatVersion = 1;

// Writes `bytes` to `path` via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

std::string encode_dataset(const Dataset& dataset);
Dataset decode_dataset(const std::string& bytes);

struct Checkpoint {
  netinv::Model model;  // must carry standardization statistics
  netinv::TrainConfig config;
  double final_validation_loss = 0.0;
  int best_epoch = 0;
  int spectrum_samples = 0;  // M the model was trained for
  SpatialGrid grid;          // output grid
  PlateSpec plate;
  BandSpec band;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_report(const std::filesystem::path& path, const eval::BenchmarkReport& report);
eval::BenchmarkReport load_report(const std::filesystem::path& path);

/// One row per record: id,family,method,snr_db,seconds,failed.
std::string report_records_csv(const eval::BenchmarkReport& report);
/// One row per aggregate: method,family,mean_db,std_db,count.
std::string report_aggregates_csv(const eval::BenchmarkReport& report);

}  // namespace shwave::store
