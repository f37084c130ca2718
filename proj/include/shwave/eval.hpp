// Reconstruction quality metric, dataset protocol and benchmark reports.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shwave/defect.hpp"
#include "shwave/forward.hpp"

namespace shwave::eval {

inline constexpr double kSnrCapDb = 300.0;

/// a* = <x, xhat> / |xhat|^2, or 0 when xhat vanishes.
double optimal_gain(std::span<const double> x, std::span<const double> xhat);

/// max over a of 10 log10(|x|^2 / |x - a xhat|^2), evaluated at a*, capped at
/// kSnrCapDb. Throws Error(zero_reference) if |x| = 0 and
/// Error(dimension_mismatch) on unequal lengths.
double snr_db(std::span<const double> x, std::span<const double> xhat);
double snr_db(const DepthProfile& x, const DepthProfile& xhat);

struct Split {
  std::vector<std::size_t> train, validation, test;
};

/// Family-stratified seeded split with 87.5 / 7.5 / 5 percent proportions
/// (700 / 60 / 40 for 800 samples). Throws Error(dataset_too_small) below 20.
Split split_dataset(const std::vector<DefectFamily>& families, std::uint64_t seed);

struct TestSample {
  int id = 0;
  DefectFamily family = DefectFamily::rectangular;
  DepthProfile truth;
  ReflectionSpectrum spectrum;
};

struct Method {
  std::string name;
  std::function<DepthProfile(const ReflectionSpectrum&)> reconstruct;
};

struct SampleRecord {
  int id = 0;
  DefectFamily family = DefectFamily::rectangular;
  std::string method;
  double snr_db = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct FamilyAggregate {
  std::string method;
  DefectFamily family = DefectFamily::rectangular;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single record
  int count = 0;        // successful records only
};

struct BenchmarkReport {
  std::vector<std::string> methods;  // row order
  std::vector<SampleRecord> records;
  std::vector<FamilyAggregate> aggregates;

  const FamilyAggregate* find(const std::string& method, DefectFamily family) const;
};

/// Per-family mean/stddev/count for every (method, family) pair, methods in
/// the given order and families in enum order. Failed records are skipped.
std::vector<FamilyAggregate> aggregate(const std::vector<SampleRecord>& records,
                                       const std::vector<std::string>& methods);

/// Runs every method on every sample; exceptions are recorded as failed
/// records instead of aborting.
BenchmarkReport benchmark(const std::vector<TestSample>& samples, const std::vector<Method>& methods);

/// Rows = methods, columns = families, cells "mean +/- std (n)" in dB.
std::string render_table(const BenchmarkReport& report);

}  // namespace shwave::eval
