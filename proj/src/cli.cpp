#include "shwave/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "shwave/error.hpp"
#include "shwave/plot.hpp"
#include "shwave/store.hpp"
#include "shwave/wnst.hpp"

namespace shwave::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  std::filesystem::path out = p;
  out += suffix;
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  store::write_atomic(path, text);
}

void write_run_manifest(const std::filesystem::path& out, const std::string& command, std::uint64_t seed,
                        json options) {
  json j{{"command", command},
         {"tool", "shwave"},
         {"version", kVersion},
         {"format_version", store::kFormatVersion},
         {"seed", seed},
         {"options", std::move(options)}};
  write_text(with_suffix(out, ".run.json"), j.dump(2) + "\n");
}

json config_json(const netinv::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"weight_decay_lambda", c.weight_decay_lambda},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"early_stop_patience", c.early_stop_patience},
          {"seed", c.seed},
          {"workers", c.workers}};
}

struct Columns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;
  std::map<std::string, std::string> tags;  // from "# key: value" lines
};

Columns read_columns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Columns c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const auto colon = body.find(':');
      std::istringstream ss(body);
      if (colon != std::string::npos) {
        auto trim = [](std::string s) {
          s.erase(0, s.find_first_not_of(' '));
          s.erase(s.find_last_not_of(' ') + 1);
          return s;
        };
        c.tags[trim(body.substr(0, colon))] = trim(body.substr(colon + 1));
      } else if (c.names.empty()) {
        std::string name;
        while (ss >> name) c.names.push_back(name);
        c.data.resize(c.names.size());
      }
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) row.push_back(tok == "nan" ? std::nan("") : std::stod(tok));
    if (c.data.empty()) c.data.resize(row.size());
    if (row.size() != c.data.size())
      throw Error(ErrorCode::dimension_mismatch, path.string() + ": ragged row");
    for (std::size_t k = 0; k < row.size(); ++k) c.data[k].push_back(row[k]);
  }
  return c;
}

const std::vector<double>* column(const Columns& c, const std::string& name) {
  for (std::size_t k = 0; k < c.names.size(); ++k)
    if (c.names[k] == name) return &c.data[k];
  return nullptr;
}

void check_compatible(const store::Checkpoint& ck, const PlateSpec& plate, const SpatialGrid& grid,
                      const ReflectionSpectrum& spectrum) {
  if (!(ck.grid == grid)) throw Error(ErrorCode::dimension_mismatch, "checkpoint grid differs from data grid");
  if (ck.spectrum_samples != spectrum.grid.size())
    throw Error(ErrorCode::dimension_mismatch, "checkpoint expects " + std::to_string(ck.spectrum_samples) +
                                                   " wavenumbers, spectrum has " +
                                                   std::to_string(spectrum.grid.size()));
  if (ck.plate.depth() != plate.depth())
    throw Error(ErrorCode::dimension_mismatch, "checkpoint plate differs from data plate");
}

}  // namespace

DatasetManifest manifest_from(const GenerateOptions& opt) {
  if (opt.count < 1) throw std::invalid_argument("--count must be at least 1");
  DatasetManifest m;
  m.seed = opt.seed;
  m.count = opt.count;
  m.families.clear();
  for (const auto& name : opt.families) {
    const auto f = parse_family(name);
    if (!f) throw std::invalid_argument("unknown family '" + name + "'");
    m.families.push_back(*f);
  }
  if (m.families.empty()) throw std::invalid_argument("no families given");
  m.grid = SpatialGrid::centered(m.plate, opt.points, opt.window);
  m.band = {opt.xib_min, opt.xib_max, opt.wavenumbers,
            opt.xib_max / m.plate.half_thickness < transverse_wavenumber(m.plate.depth(), 1)};
  m.solver = {opt.n_modes, opt.segments};
  const auto fwd = parse_forward_model(opt.forward);
  if (!fwd) throw std::invalid_argument("unknown forward model '" + opt.forward + "'");
  m.forward = *fwd;
  return m;
}

DefectSpec parse_defect(const std::string& text, const PlateSpec& plate) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw std::invalid_argument("defect must be family:center:width:depth, got '" + text + "'");
  const auto f = parse_family(parts[0]);
  if (!f) throw std::invalid_argument("unknown family '" + parts[0] + "'");
  DefectSpec s;
  s.family = *f;
  s.center = std::stod(parts[1]) * plate.depth();
  s.width = std::stod(parts[2]) * plate.depth();
  s.max_depth = std::stod(parts[3]) * plate.depth();
  s.validate(plate);
  return s;
}

ReflectionSpectrum read_spectrum_file(const std::filesystem::path& path, const PlateSpec& plate) {
  const Columns c = read_columns(path);
  if (c.data.size() != 3) throw Error(ErrorCode::dimension_mismatch, path.string() + ": expected columns xi re im");
  ReflectionSpectrum s;
  s.grid.xi = c.data[0];
  s.grid.single_mode = s.grid.xi.empty() ? true : s.grid.xi.back() < transverse_wavenumber(plate.depth(), 1);
  s.grid.validate(plate);
  for (std::size_t m = 0; m < s.grid.xi.size(); ++m) s.coefficients.emplace_back(c.data[1][m], c.data[2][m]);
  return s;
}

void write_spectrum_file(const std::filesystem::path& path, const ReflectionSpectrum& spectrum) {
  std::vector<double> re, im;
  for (const cplx& c : spectrum.coefficients) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  write_text(path, plot::columnar({"xi", "re", "im"}, {spectrum.grid.xi, re, im}));
}

Dataset cmd_generate(const GenerateOptions& opt, std::ostream& log) {
  const DatasetManifest manifest = manifest_from(opt);
  const int workers = opt.workers > 0 ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = Clock::now();
  Dataset ds = generate_dataset(manifest, workers);
  const double elapsed = seconds_since(t0);
  store::save_dataset(opt.out, ds);

  std::map<DefectFamily, int> counts;
  for (const auto& s : ds.samples) ++counts[s.spec.family];
  log << "generated " << ds.samples.size() << " samples (" << to_string(manifest.forward) << ", "
      << workers << " workers) in " << std::fixed << std::setprecision(1) << elapsed << " s\n";
  for (const auto& [family, n] : counts) log << "  " << to_string(family) << ": " << n << "\n";
  log << "wrote " << opt.out.string() << "\n";

  write_run_manifest(opt.out, "generate", opt.seed,
                     {{"count", opt.count},
                      {"families", opt.families},
                      {"n_modes", opt.n_modes},
                      {"segments", opt.segments},
                      {"xib_min", opt.xib_min},
                      {"xib_max", opt.xib_max},
                      {"wavenumbers", opt.wavenumbers},
                      {"points", opt.points},
                      {"window", opt.window},
                      {"forward", opt.forward},
                      {"workers", workers},
                      {"out", opt.out.string()},
                      {"elapsed_seconds", elapsed}});
  return ds;
}

netinv::TrainResult cmd_train(const TrainOptions& opt, std::ostream& log) {
  if (opt.dataset.empty() || !std::filesystem::exists(opt.dataset))
    throw std::runtime_error("dataset file not found: '" + opt.dataset.string() + "'");
  const Dataset ds = store::load_dataset(opt.dataset);
  const eval::Split split = eval::split_dataset(ds.families(), opt.seed);
  log << "split: " << split.train.size() << " train / " << split.validation.size() << " validation / "
      << split.test.size() << " test\n";

  std::vector<netinv::Example> examples;
  examples.reserve(ds.samples.size());
  for (const auto& s : ds.samples) examples.push_back({netinv::spectrum_features(s.spectrum), s.profile.depths});

  const int m = ds.manifest.band.samples;
  const int p = ds.manifest.grid.size;
  netinv::Model model = netinv::Model::build(netinv::default_architecture(m, p), 2 * m);
  netinv::initialize(model, opt.seed);
  netinv::TrainConfig config = opt.config;
  config.seed = opt.seed;

  const auto t0 = Clock::now();
  netinv::TrainResult result = netinv::train(model, examples, split.train, split.validation, config);
  const double elapsed = seconds_since(t0);

  store::Checkpoint ck;
  ck.model = result.model;
  ck.config = config;
  ck.final_validation_loss = result.best_validation_mse;
  ck.best_epoch = result.best_epoch;
  ck.spectrum_samples = m;
  ck.grid = ds.manifest.grid;
  ck.plate = ds.manifest.plate;
  ck.band = ds.manifest.band;
  store::save_checkpoint(opt.out, ck);

  std::vector<double> epoch, tr, va;
  for (const auto& h : result.history) {
    epoch.push_back(h.epoch);
    tr.push_back(h.train_mse);
    va.push_back(h.validation_mse);
  }
  write_text(with_suffix(opt.out, ".history.dat"),
             plot::columnar({"epoch", "train_mse", "validation_mse"}, {epoch, tr, va}));

  log << "trained " << result.history.size() << " epochs in " << std::fixed << std::setprecision(1)
      << elapsed << " s; best epoch " << result.best_epoch << ", validation MSE "
      << std::scientific << std::setprecision(4) << result.best_validation_mse << "\n"
      << std::defaultfloat;
  log << "wrote " << opt.out.string() << "\n";

  json options = config_json(config);
  options["dataset"] = opt.dataset.string();
  options["out"] = opt.out.string();
  options["elapsed_seconds"] = elapsed;
  write_run_manifest(opt.out, "train", opt.seed, options);
  return result;
}

ReconstructResult cmd_reconstruct(const ReconstructOptions& opt, std::ostream& log) {
  if (opt.method != "wnst" && opt.method != "netinv")
    throw std::invalid_argument("unknown method '" + opt.method + "' (expected wnst or netinv)");
  if (opt.dataset.has_value() == opt.spectrum_file.has_value())
    throw std::invalid_argument("give exactly one of --dataset or --spectrum");

  std::optional<store::Checkpoint> ck;
  if (opt.method == "netinv") {
    if (!opt.checkpoint) throw std::invalid_argument("--method netinv needs --checkpoint");
    ck = store::load_checkpoint(*opt.checkpoint);
  }

  PlateSpec plate = ck ? ck->plate : PlateSpec{};
  SpatialGrid grid = ck ? ck->grid : SpatialGrid::centered(plate, opt.points, opt.window);
  ReflectionSpectrum spectrum;
  ReconstructResult result;
  if (opt.dataset) {
    const Dataset ds = store::load_dataset(*opt.dataset);
    if (opt.sample < 0 || opt.sample >= static_cast<int>(ds.samples.size()))
      throw std::invalid_argument("--sample out of range (dataset has " + std::to_string(ds.samples.size()) + ")");
    plate = ds.manifest.plate;
    grid = ds.manifest.grid;
    const auto& s = ds.samples[static_cast<std::size_t>(opt.sample)];
    spectrum = s.spectrum;
    result.truth = s.profile;
  } else {
    spectrum = read_spectrum_file(*opt.spectrum_file, plate);
  }

  const auto t0 = Clock::now();
  if (opt.method == "wnst") {
    result.profile = reconstruct(plate, spectrum, grid);
  } else {
    check_compatible(*ck, plate, grid, spectrum);
    result.profile = netinv::predict(ck->model, spectrum, grid, plate);
  }
  result.seconds = seconds_since(t0);

  std::vector<std::string> names{"x", "reconstruction"};
  std::vector<std::vector<double>> cols{grid.positions(), result.profile.depths};
  if (result.truth) {
    names.push_back("truth");
    cols.push_back(result.truth->depths);
    result.snr_db = eval::snr_db(*result.truth, result.profile);
  }
  std::string text = "# method: " + opt.method + "\n";
  if (result.snr_db) {
    std::ostringstream s;
    s << std::setprecision(10) << *result.snr_db;
    text += "# snr_db: " + s.str() + "\n";
  }
  write_text(opt.out, text + plot::columnar(names, cols));

  if (opt.plot) {
    plot::Figure fig{"Reconstructed depth profile", "x1 / plate depth", "depth / plate depth", {}};
    std::vector<double> xs = grid.positions();
    for (double& x : xs) x /= plate.depth();
    auto scaled = [&](const std::vector<double>& d) {
      std::vector<double> out = d;
      for (double& v : out) v /= plate.depth();
      return out;
    };
    if (result.truth) fig.series.push_back({"truth", xs, scaled(result.truth->depths)});
    fig.series.push_back({opt.method, xs, scaled(result.profile.depths)});
    write_text(*opt.plot, plot::render_svg(fig));
  }

  log << opt.method << " reconstruction in " << std::scientific << std::setprecision(3) << result.seconds
      << " s" << std::defaultfloat;
  if (result.snr_db) log << ", SNR " << std::fixed << std::setprecision(2) << *result.snr_db << " dB" << std::defaultfloat;
  log << "\nwrote " << opt.out.string() << "\n";

  json options{{"method", opt.method}, {"sample", opt.sample}, {"out", opt.out.string()}};
  if (opt.dataset) options["dataset"] = opt.dataset->string();
  if (opt.spectrum_file) options["spectrum"] = opt.spectrum_file->string();
  if (opt.checkpoint) options["checkpoint"] = opt.checkpoint->string();
  write_run_manifest(opt.out, "reconstruct", ck ? ck->config.seed : 0, options);
  return result;
}

eval::BenchmarkReport cmd_benchmark(const BenchmarkOptions& opt, std::ostream& log) {
  eval::BenchmarkReport report;
  std::uint64_t seed = 0;
  if (opt.from_report) {
    report = store::load_report(*opt.from_report);
  } else {
    if (!opt.dataset || !opt.checkpoint)
      throw std::invalid_argument("benchmark needs --dataset and --checkpoint (or --from-report)");
    const Dataset ds = store::load_dataset(*opt.dataset);
    const store::Checkpoint ck = store::load_checkpoint(*opt.checkpoint);
    seed = ck.config.seed;
    const eval::Split split = eval::split_dataset(ds.families(), seed);
    const PlateSpec plate = ds.manifest.plate;
    const SpatialGrid grid = ds.manifest.grid;

    std::vector<eval::TestSample> tests;
    for (std::size_t i : split.test) {
      const auto& s = ds.samples[i];
      tests.push_back({static_cast<int>(i), s.spec.family, s.profile, s.spectrum});
    }
    if (!tests.empty()) check_compatible(ck, plate, grid, tests.front().spectrum);
    const std::vector<eval::Method> methods{
        {"WNST", [&](const ReflectionSpectrum& y) { return reconstruct(plate, y, grid); }},
        {"NetInv", [&](const ReflectionSpectrum& y) { return netinv::predict(ck.model, y, grid, plate); }},
    };
    report = eval::benchmark(tests, methods);
    store::save_report(with_suffix(opt.out, ".report"), report);
  }
  const std::string table = eval::render_table(report);
  write_text(with_suffix(opt.out, ".table.txt"), table);
  write_text(with_suffix(opt.out, ".records.csv"), store::report_records_csv(report));
  write_text(with_suffix(opt.out, ".aggregates.csv"), store::report_aggregates_csv(report));
  log << table;
  int failed = 0;
  for (const auto& r : report.records) failed += r.failed ? 1 : 0;
  if (failed) log << failed << " record(s) failed; see " << with_suffix(opt.out, ".records.csv").string() << "\n";

  json options{{"out", opt.out.string()}};
  if (opt.dataset) options["dataset"] = opt.dataset->string();
  if (opt.checkpoint) options["checkpoint"] = opt.checkpoint->string();
  if (opt.from_report) options["from_report"] = opt.from_report->string();
  write_run_manifest(opt.out, "benchmark", seed, options);
  return report;
}

std::vector<std::filesystem::path> cmd_plot(const PlotOptions& opt, std::ostream& log) {
  if (opt.inputs.empty()) throw std::invalid_argument("plot needs at least one input");
  std::vector<std::filesystem::path> written;
  auto out_for = [&](std::size_t i, const std::string& ext) {
    if (opt.inputs.size() == 1 || opt.target == "profiles" || opt.target == "history")
      return with_suffix(opt.out, ext);
    return with_suffix(opt.out, "." + std::to_string(i) + ext);
  };

  if (opt.target == "spectra") {
    const PlateSpec plate;
    const SpatialGrid grid = SpatialGrid::centered(plate);
    if (opt.frequencies < 2) throw std::invalid_argument("--frequencies must be at least 2");
    std::vector<double> omegas, kb;
    for (int i = 0; i < opt.frequencies; ++i) {
      const double t = static_cast<double>(i) / (opt.frequencies - 1);
      const double v = opt.kb_min + (opt.kb_max - opt.kb_min) * t;
      kb.push_back(v);
      omegas.push_back(v / plate.half_thickness * plate.shear_velocity);
    }
    for (std::size_t i = 0; i < opt.inputs.size(); ++i) {
      const DefectSpec spec = parse_defect(opt.inputs[i], plate);
      const DepthProfile profile = sample_profile(spec, grid);
      const ModalReflectionTable table =
          solve_modal_reflection(plate, profile, omegas, opt.max_order, {opt.n_modes, opt.segments});
      std::vector<std::string> names{"kb"};
      std::vector<std::vector<double>> cols{kb};
      plot::Figure fig{"Reflection coefficients, " + opt.inputs[i], "xi_n b", "|C_ref|", {}};
      for (int n = 0; n < opt.max_order; ++n) {
        std::vector<double> xb, mag;
        for (std::size_t w = 0; w < omegas.size(); ++w) {
          xb.push_back(table.xi[w][static_cast<std::size_t>(n)] * plate.half_thickness);
          mag.push_back(std::abs(table.coefficients[w][static_cast<std::size_t>(n)]));
        }
        names.push_back("xib_" + std::to_string(n));
        names.push_back("absC_" + std::to_string(n));
        cols.push_back(xb);
        cols.push_back(mag);
        fig.series.push_back({"n = " + std::to_string(n), xb, mag});
      }
      const auto dat = out_for(i, ".dat");
      write_text(dat, plot::columnar(names, cols));
      write_text(out_for(i, ".svg"), plot::render_svg(fig));
      written.push_back(dat);
    }
  } else if (opt.target == "profiles") {
    plot::Figure fig{"Depth profiles", "x1", "depth", {}};
    std::vector<std::string> names{"x"};
    std::vector<std::vector<double>> cols;
    bool have_truth = false;
    for (const auto& input : opt.inputs) {
      const Columns c = read_columns(input);
      const auto* x = column(c, "x");
      const auto* rec = column(c, "reconstruction");
      if (!x || !rec) throw std::invalid_argument(input + ": not a reconstruction file");
      if (cols.empty()) cols.push_back(*x);
      if (x->size() != cols.front().size())
        throw Error(ErrorCode::dimension_mismatch, input + ": grid differs from the first input");
      if (const auto* truth = column(c, "truth"); truth && !have_truth) {
        have_truth = true;
        names.push_back("truth");
        cols.push_back(*truth);
        fig.series.push_back({"truth", *x, *truth});
      }
      const auto tag = c.tags.find("method");
      const std::string label = tag != c.tags.end() ? tag->second : input;
      names.push_back(label);
      cols.push_back(*rec);
      fig.series.push_back({label, *x, *rec});
    }
    write_text(with_suffix(opt.out, ".dat"), plot::columnar(names, cols));
    write_text(with_suffix(opt.out, ".svg"), plot::render_svg(fig));
    written.push_back(with_suffix(opt.out, ".dat"));
  } else if (opt.target == "history") {
    plot::Figure fig{"Training history", "epoch", "log10 MSE", {}};
    for (const auto& input : opt.inputs) {
      const Columns c = read_columns(input);
      const auto* ep = column(c, "epoch");
      const auto* tr = column(c, "train_mse");
      const auto* va = column(c, "validation_mse");
      if (!ep || !tr || !va) throw std::invalid_argument(input + ": not a history file");
      auto lg = [](std::vector<double> v) {
        for (double& x : v) x = std::log10(x);
        return v;
      };
      fig.series.push_back({"train " + input, *ep, lg(*tr)});
      fig.series.push_back({"validation " + input, *ep, lg(*va)});
      if (written.empty()) {
        write_text(with_suffix(opt.out, ".dat"),
                   plot::columnar({"epoch", "train_mse", "validation_mse"}, {*ep, *tr, *va}));
        written.push_back(with_suffix(opt.out, ".dat"));
      }
    }
    write_text(with_suffix(opt.out, ".svg"), plot::render_svg(fig));
  } else {
    throw std::invalid_argument("unknown plot target '" + opt.target + "'");
  }
  for (const auto& p : written) log << "wrote " << p.string() << "\n";
  write_run_manifest(opt.out, "plot", 0,
                     {{"target", opt.target}, {"inputs", opt.inputs}, {"out", opt.out.string()}});
  return written;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guided SH-wave defect reconstruction: simulate, train, reconstruct, benchmark"};
  app.set_version_flag("--version", std::string("shwave ") + kVersion);
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a defect/spectrum dataset");
  g->add_option("--count", gen.count, "Number of samples")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--families", gen.families, "Defect families")
      ->check(CLI::IsMember({"rectangular", "gaussian", "vee"}))
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--n-modes", gen.n_modes, "Modes per region")->capture_default_str();
  g->add_option("--segments", gen.segments, "Staircase segments")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--xib-min", gen.xib_min, "Band start (xi*b)")->capture_default_str();
  g->add_option("--xib-max", gen.xib_max, "Band end (xi*b)")->capture_default_str();
  g->add_option("--wavenumbers", gen.wavenumbers, "Wavenumber samples M")->capture_default_str();
  g->add_option("--points", gen.points, "Profile grid points P")->capture_default_str();
  g->add_option("--window", gen.window, "Window length in plate depths")->capture_default_str();
  g->add_option("--forward", gen.forward, "Forward model")
      ->check(CLI::IsMember({"full-wave", "born"}))
      ->capture_default_str();
  g->add_option("--workers", gen.workers, "Worker threads (0 = all cores)")->capture_default_str();
  g->add_option("--out", gen.out, "Output dataset file")->capture_default_str();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train NetInv on a dataset");
  t->add_option("--dataset", tr.dataset, "Dataset file")->required();
  t->add_option("--out", tr.out, "Output checkpoint")->capture_default_str();
  t->add_option("--seed", tr.seed, "Split, initialization and shuffle seed")->capture_default_str();
  t->add_option("--learning-rate", tr.config.learning_rate)->capture_default_str();
  t->add_option("--lambda", tr.config.weight_decay_lambda, "Weight decay")->capture_default_str();
  t->add_option("--batch-size", tr.config.batch_size)->capture_default_str();
  t->add_option("--epochs", tr.config.max_epochs)->capture_default_str();
  t->add_option("--patience", tr.config.early_stop_patience)->capture_default_str();
  t->add_option("--workers", tr.config.workers)->capture_default_str();

  // Deterministic commands accept --seed so every subcommand shares one flag set.
  std::uint64_t unused_seed = 0;
  const char* unused_seed_help = "Accepted for a uniform flag set; this command is deterministic";

  ReconstructOptions rc;
  std::string rc_dataset, rc_spectrum, rc_checkpoint, rc_plot;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct one depth profile");
  r->add_option("--dataset", rc_dataset, "Dataset file");
  r->add_option("--sample", rc.sample, "Sample index in the dataset")->capture_default_str();
  r->add_option("--spectrum", rc_spectrum, "Spectrum file (xi re im)");
  r->add_option("--method", rc.method)->check(CLI::IsMember({"wnst", "netinv"}))->capture_default_str();
  r->add_option("--checkpoint", rc_checkpoint, "NetInv checkpoint");
  r->add_option("--out", rc.out, "Output profile file")->capture_default_str();
  r->add_option("--plot", rc_plot, "Optional SVG output");
  r->add_option("--points", rc.points)->capture_default_str();
  r->add_option("--window", rc.window)->capture_default_str();
  r->add_option("--seed", unused_seed, unused_seed_help);

  BenchmarkOptions bm;
  std::string bm_dataset, bm_checkpoint, bm_report;
  auto* b = app.add_subcommand("benchmark", "WNST vs NetInv on the test split");
  b->add_option("--dataset", bm_dataset);
  b->add_option("--checkpoint", bm_checkpoint);
  b->add_option("--from-report", bm_report, "Rebuild tables from a stored report");
  b->add_option("--out", bm.out, "Output prefix")->capture_default_str();
  b->add_option("--seed", unused_seed, unused_seed_help);

  PlotOptions pl;
  auto* p = app.add_subcommand("plot", "Emit plot data and SVG figures");
  p->add_option("target", pl.target, "spectra | profiles | history")
      ->required()
      ->check(CLI::IsMember({"spectra", "profiles", "history"}));
  p->add_option("inputs", pl.inputs, "Defects (family:center:width:depth) or data files")->required();
  p->add_option("--out", pl.out, "Output prefix")->capture_default_str();
  p->add_option("--kb-min", pl.kb_min)->capture_default_str();
  p->add_option("--kb-max", pl.kb_max)->capture_default_str();
  p->add_option("--frequencies", pl.frequencies)->capture_default_str();
  p->add_option("--max-order", pl.max_order)->capture_default_str();
  p->add_option("--n-modes", pl.n_modes)->capture_default_str();
  p->add_option("--segments", pl.segments)->capture_default_str();
  p->add_option("--seed", unused_seed, unused_seed_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*g) {
      cmd_generate(gen, out);
    } else if (*t) {
      cmd_train(tr, out);
    } else if (*r) {
      if (!rc_dataset.empty()) rc.dataset = rc_dataset;
      if (!rc_spectrum.empty()) rc.spectrum_file = rc_spectrum;
      if (!rc_checkpoint.empty()) rc.checkpoint = rc_checkpoint;
      if (!rc_plot.empty()) rc.plot = rc_plot;
      cmd_reconstruct(rc, out);
    } else if (*b) {
      if (!bm_dataset.empty()) bm.dataset = bm_dataset;
      if (!bm_checkpoint.empty()) bm.checkpoint = bm_checkpoint;
      if (!bm_report.empty()) bm.from_report = bm_report;
      cmd_benchmark(bm, out);
    } else if (*p) {
      cmd_plot(pl, out);
    }
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace shwave::cli
