#include "shwave/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "shwave/error.hpp"
#include "shwave/rng.hpp"

namespace shwave::eval {

namespace {

// Splits `total` over groups proportionally to `sizes` by largest remainder.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes) {
  std::size_t all = 0;
  for (std::size_t s : sizes) all += s;
  std::vector<std::size_t> out(sizes.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const double quota = static_cast<double>(total) * static_cast<double>(sizes[g]) / static_cast<double>(all);
    out[g] = static_cast<std::size_t>(std::floor(quota));
    given += out[g];
    rem.emplace_back(quota - std::floor(quota), g);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < total; ++i, ++given) ++out[rem[i % rem.size()].second];
  return out;
}

}  // namespace

double optimal_gain(std::span<const double> x, std::span<const double> xhat) {
  double xy = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * xhat[i];
    yy += xhat[i] * xhat[i];
  }
  return yy > 0.0 ? xy / yy : 0.0;
}

double snr_db(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size()) throw Error(ErrorCode::dimension_mismatch, "snr_db: unequal lengths");
  double xx = 0.0;
  for (double v : x) xx += v * v;
  if (!(xx > 0.0)) throw Error(ErrorCode::zero_reference, "snr_db: reference profile is zero");
  const double a = optimal_gain(x, xhat);
  double rr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = x[i] - a * xhat[i];
    rr += e * e;
  }
  if (!(rr > 0.0)) return kSnrCapDb;
  return std::clamp(10.0 * std::log10(xx / rr), 0.0, kSnrCapDb);
}

double snr_db(const DepthProfile& x, const DepthProfile& xhat) {
  if (!(x.grid == xhat.grid)) throw Error(ErrorCode::dimension_mismatch, "snr_db: grids differ");
  return snr_db(std::span<const double>(x.depths), std::span<const double>(xhat.depths));
}

Split split_dataset(const std::vector<DefectFamily>& families, std::uint64_t seed) {
  const std::size_t n = families.size();
  if (n < 20) throw Error(ErrorCode::dataset_too_small, std::to_string(n) + " samples, need 20");
  const std::size_t n_test = static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(n)));
  const std::size_t n_val = static_cast<std::size_t>(std::llround(0.075 * static_cast<double>(n)));

  std::vector<std::vector<std::size_t>> groups(std::size(kAllFamilies));
  for (std::size_t i = 0; i < n; ++i) groups[static_cast<std::size_t>(families[i])].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> sizes;
  for (auto& g : groups) {
    rng.shuffle(g);
    sizes.push_back(g.size());
  }
  const std::vector<std::size_t> test_counts = apportion(n_test, sizes);
  const std::vector<std::size_t> val_counts = apportion(n_val, sizes);

  Split split;
  for (std::size_t f = 0; f < groups.size(); ++f) {
    const auto& g = groups[f];
    std::size_t k = 0;
    for (; k < test_counts[f]; ++k) split.test.push_back(g[k]);
    for (std::size_t j = 0; j < val_counts[f]; ++j, ++k) split.validation.push_back(g[k]);
    for (; k < g.size(); ++k) split.train.push_back(g[k]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

const FamilyAggregate* BenchmarkReport::find(const std::string& method, DefectFamily family) const {
  for (const auto& a : aggregates)
    if (a.method == method && a.family == family) return &a;
  return nullptr;
}

std::vector<FamilyAggregate> aggregate(const std::vector<SampleRecord>& records,
                                       const std::vector<std::string>& methods) {
  std::vector<FamilyAggregate> out;
  for (const std::string& method : methods) {
    for (DefectFamily family : kAllFamilies) {
      FamilyAggregate agg{method, family};
      double sum = 0.0;
      for (const auto& r : records)
        if (!r.failed && r.method == method && r.family == family) {
          sum += r.snr_db;
          ++agg.count;
        }
      if (agg.count > 0) agg.mean = sum / agg.count;
      if (agg.count > 1) {
        double ss = 0.0;
        for (const auto& r : records)
          if (!r.failed && r.method == method && r.family == family)
            ss += (r.snr_db - agg.mean) * (r.snr_db - agg.mean);
        agg.stddev = std::sqrt(ss / (agg.count - 1));
      }
      out.push_back(agg);
    }
  }
  return out;
}

BenchmarkReport benchmark(const std::vector<TestSample>& samples, const std::vector<Method>& methods) {
  BenchmarkReport report;
  for (const Method& m : methods) report.methods.push_back(m.name);
  for (const TestSample& s : samples) {
    for (const Method& m : methods) {
      SampleRecord rec;
      rec.id = s.id;
      rec.family = s.family;
      rec.method = m.name;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const DepthProfile est = m.reconstruct(s.spectrum);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.snr_db = snr_db(s.truth, est);
      } catch (const std::exception& e) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.failed = true;
        rec.snr_db = std::numeric_limits<double>::quiet_NaN();
        rec.error = e.what();
      }
      report.records.push_back(std::move(rec));
    }
  }
  report.aggregates = aggregate(report.records, report.methods);
  return report;
}

std::string render_table(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "SNR (dB) of reconstructed defects, mean +/- std (n)\n";
  os << std::left << std::setw(12) << "Method";
  for (DefectFamily f : kAllFamilies) os << std::setw(26) << (std::string(to_string(f)) + " defects");
  os << "\n";
  os << std::fixed << std::setprecision(2);
  for (const std::string& m : report.methods) {
    os << std::setw(12) << m;
    for (DefectFamily f : kAllFamilies) {
      const FamilyAggregate* a = report.find(m, f);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2);
      if (a && a->count > 0)
        cell << a->mean << " +/- " << a->stddev << " (" << a->count << ")";
      else
        cell << "n/a";
      os << std::setw(26) << cell.str();
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace shwave::eval
