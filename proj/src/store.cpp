#include "shwave/store.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "shwave/error.hpp"

namespace shwave::store {

namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::corrupt_file, what); }
[[noreturn]] void mismatch(const std::string& what) { throw Error(ErrorCode::dimension_mismatch, what); }

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void i32(std::int32_t v) { put(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void f64s(const std::vector<double>& vs) {
    for (double v : vs) f64(v);
  }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::uint64_t get(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > data_.size()) corrupt("payload ends early");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string crc32_hex(std::string_view payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < payload.size()) {
    const std::size_t chunk = std::min<std::size_t>(payload.size() - pos, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data() + pos), static_cast<uInt>(chunk));
    pos += chunk;
  }
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << static_cast<std::uint32_t>(crc);
  return os.str();
}

std::string frame(const std::string& kind, json header, const std::string& payload) {
  header["format"] = kind;
  header["version"] = kFormatVersion;
  header["byte_order"] = "little-endian";
  header["checksum"] = {{"algorithm", "crc32"}, {"value", crc32_hex(payload)}};
  header["payload_bytes"] = payload.size();
  const std::string text = header.dump(2);
  std::ostringstream os;
  os << "SHWAVE " << kind << " v" << kFormatVersion << "\n"
     << "header-bytes " << text.size() << "\n"
     << text << "\n";
  return os.str() + payload;
}

struct Unframed {
  json header;
  std::string_view payload;
};

Unframed unframe(const std::string& kind, std::string_view bytes) {
  const std::size_t l1 = bytes.find('\n');
  if (l1 == std::string_view::npos) corrupt("missing magic line");
  const std::string magic(bytes.substr(0, l1));
  const std::string expected_prefix = "SHWAVE " + kind + " v";
  if (magic.rfind(expected_prefix, 0) != 0) corrupt("not a SHWAVE " + kind + " file");
  int version = 0;
  try {
    version = std::stoi(magic.substr(expected_prefix.size()));
  } catch (const std::exception&) {
    corrupt("unreadable version in magic line");
  }
  if (version != kFormatVersion)
    throw Error(ErrorCode::version_mismatch,
                "file version " + std::to_string(version) + ", reader supports " +
                    std::to_string(kFormatVersion));

  const std::size_t l2 = bytes.find('\n', l1 + 1);
  if (l2 == std::string_view::npos) corrupt("missing header length line");
  const std::string len_line(bytes.substr(l1 + 1, l2 - l1 - 1));
  if (len_line.rfind("header-bytes ", 0) != 0) corrupt("bad header length line");
  std::size_t header_len = 0;
  try {
    header_len = std::stoull(len_line.substr(13));
  } catch (const std::exception&) {
    corrupt("bad header length");
  }
  const std::size_t header_start = l2 + 1;
  if (header_start + header_len + 1 > bytes.size()) corrupt("file ends inside the header");
  if (bytes[header_start + header_len] != '\n') corrupt("header not terminated");

  Unframed out;
  try {
    out.header = json::parse(bytes.substr(header_start, header_len));
    if (out.header.at("format").get<std::string>() != kind) corrupt("header format mismatch");
    if (out.header.at("version").get<int>() != kFormatVersion)
      throw Error(ErrorCode::version_mismatch, "header version differs from magic line");
    out.payload = bytes.substr(header_start + header_len + 1);
    if (out.payload.size() != out.header.at("payload_bytes").get<std::size_t>())
      corrupt("payload is " + std::to_string(out.payload.size()) + " bytes, header says " +
              std::to_string(out.header.at("payload_bytes").get<std::size_t>()));
    const auto& ck = out.header.at("checksum");
    if (ck.at("algorithm").get<std::string>() != "crc32") corrupt("unknown checksum algorithm");
    if (ck.at("value").get<std::string>() != crc32_hex(out.payload)) corrupt("checksum mismatch");
  } catch (const json::exception& e) {
    corrupt(std::string("header: ") + e.what());
  }
  return out;
}

json plate_json(const PlateSpec& p) {
  return {{"half_thickness", p.half_thickness},
          {"shear_velocity", p.shear_velocity},
          {"shear_modulus", p.shear_modulus}};
}
PlateSpec plate_from(const json& j) {
  PlateSpec p;
  p.half_thickness = j.at("half_thickness").get<double>();
  p.shear_velocity = j.at("shear_velocity").get<double>();
  p.shear_modulus = j.at("shear_modulus").get<double>();
  return p;
}
json grid_json(const SpatialGrid& g) { return {{"x_min", g.x_min}, {"dx", g.dx}, {"points", g.size}}; }
SpatialGrid grid_from(const json& j) {
  return {j.at("x_min").get<double>(), j.at("dx").get<double>(), j.at("points").get<int>()};
}
json band_json(const BandSpec& b) {
  return {{"xib_min", b.xib_min},
          {"xib_max", b.xib_max},
          {"samples", b.samples},
          {"single_mode", b.single_mode}};
}
BandSpec band_from(const json& j) {
  return {j.at("xib_min").get<double>(), j.at("xib_max").get<double>(), j.at("samples").get<int>(),
          j.at("single_mode").get<bool>()};
}

DefectFamily family_from(int v) {
  if (v < 0 || v > 2) corrupt("family code " + std::to_string(v));
  return static_cast<DefectFamily>(v);
}

json layer_json(const netinv::LayerSpec& s) {
  json j{{"kind", netinv::to_string(s.kind)}};
  switch (s.kind) {
    case netinv::LayerKind::dense:
      j["in"] = s.in;
      j["out"] = s.out;
      break;
    case netinv::LayerKind::conv1d:
      j["in_channels"] = s.in_channels;
      j["out_channels"] = s.out_channels;
      j["kernel"] = s.kernel;
      break;
    case netinv::LayerKind::reshape:
      j["channels"] = s.channels;
      j["length"] = s.length;
      break;
    case netinv::LayerKind::relu: break;
  }
  return j;
}

netinv::LayerSpec layer_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dense") return netinv::LayerSpec::dense(j.at("in").get<int>(), j.at("out").get<int>());
  if (kind == "conv1d")
    return netinv::LayerSpec::conv1d(j.at("in_channels").get<int>(), j.at("out_channels").get<int>(),
                                     j.at("kernel").get<int>());
  if (kind == "relu") return netinv::LayerSpec::relu();
  if (kind == "reshape")
    return netinv::LayerSpec::reshape(j.at("channels").get<int>(), j.at("length").get<int>());
  corrupt("unknown layer kind '" + kind + "'");
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Dataset -------------------------------------------------------------------

std::string encode_dataset(const Dataset& ds) {
  const DatasetManifest& m = ds.manifest;
  const auto p_points = static_cast<std::size_t>(m.grid.size);
  const auto m_samples = static_cast<std::size_t>(m.band.samples);
  json families = json::array();
  for (DefectFamily f : m.families) families.push_back(std::string(to_string(f)));
  json header{
      {"manifest",
       {{"plate", plate_json(m.plate)},
        {"grid", grid_json(m.grid)},
        {"band", band_json(m.band)},
        {"seed", m.seed},
        {"count", m.count},
        {"families", families},
        {"ranges",
         {{"depth_min", m.ranges.depth_min},
          {"depth_max", m.ranges.depth_max},
          {"width_min", m.ranges.width_min},
          {"width_max", m.ranges.width_max},
          {"units", "plate depths"}}},
        {"solver", {{"n_modes", m.solver.n_modes}, {"segments", m.solver.segments}}},
        {"forward_model", std::string(to_string(m.forward))}}},
      {"samples", ds.samples.size()},
      {"record_layout",
       "int32 family, f64 center, f64 width, f64 max_depth, f64[P] depths, f64[2M] spectrum (re, im "
       "interleaved)"},
  };

  ByteWriter w;
  for (const DatasetSample& s : ds.samples) {
    if (s.profile.depths.size() != p_points || s.spectrum.coefficients.size() != m_samples)
      mismatch("sample arrays do not match manifest dimensions");
    w.i32(static_cast<std::int32_t>(s.spec.family));
    w.f64(s.spec.center);
    w.f64(s.spec.width);
    w.f64(s.spec.max_depth);
    w.f64s(s.profile.depths);
    for (const cplx& c : s.spectrum.coefficients) {
      w.f64(c.real());
      w.f64(c.imag());
    }
  }
  return frame("dataset", std::move(header), w.take());
}

Dataset decode_dataset(const std::string& bytes) {
  const Unframed u = unframe("dataset", bytes);
  Dataset ds;
  std::size_t n_samples = 0;
  try {
    const json& m = u.header.at("manifest");
    DatasetManifest& man = ds.manifest;
    man.plate = plate_from(m.at("plate"));
    man.grid = grid_from(m.at("grid"));
    man.band = band_from(m.at("band"));
    man.seed = m.at("seed").get<std::uint64_t>();
    man.count = m.at("count").get<int>();
    man.families.clear();
    for (const auto& f : m.at("families")) {
      const auto fam = parse_family(f.get<std::string>());
      if (!fam) corrupt("unknown family in manifest");
      man.families.push_back(*fam);
    }
    const json& r = m.at("ranges");
    man.ranges = {r.at("depth_min").get<double>(), r.at("depth_max").get<double>(),
                  r.at("width_min").get<double>(), r.at("width_max").get<double>()};
    man.solver.n_modes = m.at("solver").at("n_modes").get<int>();
    man.solver.segments = m.at("solver").at("segments").get<int>();
    const auto fwd = parse_forward_model(m.at("forward_model").get<std::string>());
    if (!fwd) corrupt("unknown forward model");
    man.forward = *fwd;
    n_samples = u.header.at("samples").get<std::size_t>();
  } catch (const json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  }

  const DatasetManifest& man = ds.manifest;
  if (man.grid.size < 1 || man.band.samples < 2) mismatch("manifest dimensions are invalid");
  const auto p_points = static_cast<std::size_t>(man.grid.size);
  const auto m_samples = static_cast<std::size_t>(man.band.samples);
  const std::size_t record = 4 + 3 * 8 + 8 * p_points + 16 * m_samples;
  if (u.payload.size() != record * n_samples)
    mismatch("payload of " + std::to_string(u.payload.size()) + " bytes does not hold " +
             std::to_string(n_samples) + " records of P=" + std::to_string(p_points) +
             ", M=" + std::to_string(m_samples));

  const WavenumberGrid band = man.band.grid(man.plate);
  ByteReader r(u.payload);
  ds.samples.resize(n_samples);
  for (DatasetSample& s : ds.samples) {
    s.spec.family = family_from(r.i32());
    s.spec.center = r.f64();
    s.spec.width = r.f64();
    s.spec.max_depth = r.f64();
    s.profile.grid = man.grid;
    s.profile.depths = r.f64s(p_points);
    s.spectrum.grid = band;
    s.spectrum.coefficients.resize(m_samples);
    for (cplx& c : s.spectrum.coefficients) {
      const double re = r.f64();
      const double im = r.f64();
      c = {re, im};
    }
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_atomic(path, encode_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

// Checkpoint ----------------------------------------------------------------

std::string encode_checkpoint(const Checkpoint& ck) {
  const netinv::Model& model = ck.model;
  if (!model.standardization)
    throw Error(ErrorCode::unstandardized_model, "checkpoint model carries no input statistics");
  const auto& st = *model.standardization;
  if (st.mean.size() != static_cast<std::size_t>(model.input_width) ||
      st.scale.size() != static_cast<std::size_t>(model.input_width))
    mismatch("standardization width differs from model input");

  json layers = json::array();
  json tensors = json::array();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& s = model.layers[l];
    layers.push_back(layer_json(s));
    const std::size_t n = netinv::layer_parameter_count(s);
    if (n == 0) continue;
    const std::size_t n_bias = s.kind == netinv::LayerKind::dense ? s.out : s.out_channels;
    tensors.push_back({{"layer", l}, {"name", "weight"}, {"offset", model.param_offset[l]}, {"count", n - n_bias}});
    tensors.push_back({{"layer", l}, {"name", "bias"}, {"offset", model.param_offset[l] + n - n_bias}, {"count", n_bias}});
  }
  const auto& c = ck.config;
  json header{
      {"architecture", {{"input_width", model.input_width}, {"layers", layers}}},
      {"parameters", {{"count", model.params.size()}, {"tensors", tensors}}},
      {"standardization", {{"width", model.input_width}}},
      {"train_config",
       {{"learning_rate", c.learning_rate},
        {"weight_decay_lambda", c.weight_decay_lambda},
        {"batch_size", c.batch_size},
        {"max_epochs", c.max_epochs},
        {"early_stop_patience", c.early_stop_patience},
        {"seed", c.seed}}},
      {"final_validation_loss", ck.final_validation_loss},
      {"best_epoch", ck.best_epoch},
      {"spectrum_samples", ck.spectrum_samples},
      {"plate", plate_json(ck.plate)},
      {"grid", grid_json(ck.grid)},
      {"band", band_json(ck.band)},
      {"payload_layout", "f64[count] parameters, f64[width] mean, f64[width] scale"},
  };
  ByteWriter w;
  w.f64s(model.params);
  w.f64s(st.mean);
  w.f64s(st.scale);
  return frame("checkpoint", std::move(header), w.take());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  const Unframed u = unframe("checkpoint", bytes);
  Checkpoint ck;
  std::vector<netinv::LayerSpec> layers;
  int input_width = 0;
  std::size_t count = 0;
  std::size_t width = 0;
  try {
    const json& h = u.header;
    input_width = h.at("architecture").at("input_width").get<int>();
    for (const auto& l : h.at("architecture").at("layers")) layers.push_back(layer_from(l));
    count = h.at("parameters").at("count").get<std::size_t>();
    width = h.at("standardization").at("width").get<std::size_t>();
    const json& c = h.at("train_config");
    ck.config.learning_rate = c.at("learning_rate").get<double>();
    ck.config.weight_decay_lambda = c.at("weight_decay_lambda").get<double>();
    ck.config.batch_size = c.at("batch_size").get<int>();
    ck.config.max_epochs = c.at("max_epochs").get<int>();
    ck.config.early_stop_patience = c.at("early_stop_patience").get<int>();
    ck.config.seed = c.at("seed").get<std::uint64_t>();
    ck.final_validation_loss = h.at("final_validation_loss").get<double>();
    ck.best_epoch = h.at("best_epoch").get<int>();
    ck.spectrum_samples = h.at("spectrum_samples").get<int>();
    ck.plate = plate_from(h.at("plate"));
    ck.grid = grid_from(h.at("grid"));
    ck.band = band_from(h.at("band"));
  } catch (const json::exception& e) {
    corrupt(std::string("checkpoint header: ") + e.what());
  }

  try {
    ck.model = netinv::Model::build(layers, input_width);
  } catch (const Error& e) {
    mismatch(std::string("architecture: ") + e.what());
  }
  if (ck.model.params.size() != count)
    mismatch("architecture has " + std::to_string(ck.model.params.size()) +
             " parameters, header says " + std::to_string(count));
  if (width != static_cast<std::size_t>(input_width)) mismatch("standardization width differs from input");
  if (u.payload.size() != 8 * (count + 2 * width))
    mismatch("payload size does not match parameter and statistics counts");
  ByteReader r(u.payload);
  ck.model.params = r.f64s(count);
  netinv::Standardization st;
  st.mean = r.f64s(width);
  st.scale = r.f64s(width);
  ck.model.standardization = std::move(st);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_atomic(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

// Report --------------------------------------------------------------------

void save_report(const std::filesystem::path& path, const eval::BenchmarkReport& report) {
  json errors = json::array();
  ByteWriter w;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    const auto it = std::find(report.methods.begin(), report.methods.end(), r.method);
    if (it == report.methods.end()) mismatch("record method '" + r.method + "' not in report");
    w.i32(r.id);
    w.u8(static_cast<std::uint8_t>(r.family));
    w.u8(static_cast<std::uint8_t>(it - report.methods.begin()));
    w.u8(r.failed ? 1 : 0);
    w.f64(r.snr_db);
    w.f64(r.seconds);
    if (r.failed) errors.push_back({{"record", i}, {"message", r.error}});
  }
  json header{{"methods", report.methods},
              {"records", report.records.size()},
              {"errors", errors},
              {"record_layout", "int32 id, u8 family, u8 method index, u8 failed, f64 snr_db, f64 seconds"}};
  write_atomic(path, frame("report", std::move(header), w.take()));
}

eval::BenchmarkReport load_report(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const Unframed u = unframe("report", bytes);
  eval::BenchmarkReport report;
  std::size_t n = 0;
  json errors;
  try {
    report.methods = u.header.at("methods").get<std::vector<std::string>>();
    n = u.header.at("records").get<std::size_t>();
    errors = u.header.at("errors");
  } catch (const json::exception& e) {
    corrupt(std::string("report header: ") + e.what());
  }
  if (u.payload.size() != n * (4 + 3 + 16)) mismatch("report payload does not match record count");
  ByteReader r(u.payload);
  for (std::size_t i = 0; i < n; ++i) {
    eval::SampleRecord rec;
    rec.id = r.i32();
    rec.family = family_from(r.u8());
    const std::size_t m = r.u8();
    if (m >= report.methods.size()) corrupt("method index out of range");
    rec.method = report.methods[m];
    rec.failed = r.u8() != 0;
    rec.snr_db = r.f64();
    rec.seconds = r.f64();
    report.records.push_back(std::move(rec));
  }
  for (const auto& e : errors) {
    const std::size_t i = e.at("record").get<std::size_t>();
    if (i < report.records.size()) report.records[i].error = e.at("message").get<std::string>();
  }
  report.aggregates = eval::aggregate(report.records, report.methods);
  return report;
}

std::string report_records_csv(const eval::BenchmarkReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "id,family,method,snr_db,seconds,failed\n";
  for (const auto& r : report.records)
    os << r.id << ',' << to_string(r.family) << ',' << r.method << ',' << r.snr_db << ','
       << r.seconds << ',' << (r.failed ? 1 : 0) << '\n';
  return os.str();
}

std::string report_aggregates_csv(const eval::BenchmarkReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "method,family,mean_db,std_db,count\n";
  for (const auto& a : report.aggregates)
    os << a.method << ',' << to_string(a.family) << ',' << a.mean << ',' << a.stddev << ','
       << a.count << '\n';
  return os.str();
}

}  // namespace shwave::store
