#pragma once

// File formats: prior / schedule / degradation JSON, sample and album CSV,
// canonical JSON for digests, and run manifests.

#include "genrestore/analysis.hpp"
#include "genrestore/guidance.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace genrestore::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// 17 significant digits; round-trips every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_json(std::string &out, const Json &j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char *nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
  case Json::value_t::object: {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{";
    out += nl;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) {
        out += ",";
        out += nl;
      }
      first = false;
      out += pad;
      out += Json(it.key()).dump();
      out += indent > 0 ? ": " : ":";
      write_json(out, it.value(), indent, depth + 1);
    }
    out += nl;
    out += close_pad;
    out += "}";
    return;
  }
  case Json::value_t::array: {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool scalar = true;
    for (const auto &v : j) scalar = scalar && !v.is_structured();
    out += "[";
    bool first = true;
    for (const auto &v : j) {
      if (!first) out += scalar ? (indent > 0 ? ", " : ",") : ",";
      first = false;
      if (!scalar) {
        out += nl;
        out += pad;
      }
      write_json(out, v, indent, depth + 1);
    }
    if (!scalar) {
      out += nl;
      out += close_pad;
    }
    out += "]";
    return;
  }
  case Json::value_t::number_float: {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      out += "null";
      return;
    }
    out += format_double(v);
    return;
  }
  default:
    out += j.dump();
  }
}

} // namespace detail

/// Sorted keys (nlohmann objects are ordered maps), %.17g floats.
/// indent = 0 gives the compact canonical form used for digests.
inline std::string dump_json(const Json &j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  if (indent > 0) out += "\n";
  return out;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

inline Json parse_json(const std::string &text, const std::string &source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error &e) {
    throw ValidationError(source + ": malformed JSON (" + e.what() + ")");
  }
}

inline Json read_json(const fs::path &path) { return parse_json(read_text(path), path.string()); }

inline void write_json(const fs::path &path, const Json &j) { write_text(path, dump_json(j)); }

// ---------------------------------------------------------------------------
// Field access with path diagnostics.

namespace detail {

inline const Json &field(const Json &obj, const std::string &key, const std::string &path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "." + key + ": missing field");
  return *it;
}

inline double number(const Json &j, const std::string &path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": not finite");
  return v;
}

inline long long integer(const Json &j, const std::string &path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<long long>();
}

inline Vector vector(const Json &j, const std::string &path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Json to_json(const Vector &v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Prior JSON: {"dim", "components": [{"weight", "mean", "cov"}]}.

inline Json prior_to_json(const MixturePrior &prior) {
  Json comps = Json::array();
  for (const auto &c : prior.components()) {
    Json cov = Json::array();
    for (Index r = 0; r < c.cov.rows(); ++r) cov.push_back(detail::to_json(c.cov.row(r).transpose()));
    comps.push_back({{"weight", c.weight}, {"mean", detail::to_json(c.mean)}, {"cov", cov}});
  }
  return {{"dim", static_cast<long long>(prior.dim())}, {"components", comps}};
}

inline MixturePrior prior_from_json(const Json &j, const std::string &source = "prior") {
  const long long dim = detail::integer(detail::field(j, "dim", source), source + ".dim");
  if (dim < 1) throw ValidationError(source + ".dim: must be positive");
  const Json &comps = detail::field(j, "components", source);
  if (!comps.is_array() || comps.empty()) throw ValidationError(source + ".components: expected a non-empty array");
  std::vector<GaussianComponent> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string p = source + ".components[" + std::to_string(i) + "]";
    GaussianComponent c;
    c.weight = detail::number(detail::field(comps[i], "weight", p), p + ".weight");
    c.mean = detail::vector(detail::field(comps[i], "mean", p), p + ".mean");
    if (c.mean.size() != dim) {
      throw ValidationError(p + ".mean: expected length " + std::to_string(dim) + ", got " +
                            std::to_string(c.mean.size()));
    }
    const Json &cov = detail::field(comps[i], "cov", p);
    if (!cov.is_array() || static_cast<long long>(cov.size()) != dim) {
      throw ValidationError(p + ".cov: expected " + std::to_string(dim) + " rows");
    }
    c.cov.resize(dim, dim);
    for (std::size_t r = 0; r < cov.size(); ++r) {
      const Vector row = detail::vector(cov[r], p + ".cov[" + std::to_string(r) + "]");
      if (row.size() != dim) {
        throw ValidationError(p + ".cov[" + std::to_string(r) + "]: expected " + std::to_string(dim) + " entries");
      }
      c.cov.row(static_cast<Index>(r)) = row.transpose();
    }
    out.push_back(std::move(c));
  }
  try {
    return MixturePrior(std::move(out));
  } catch (const ValidationError &e) {
    throw ValidationError(source + "." + e.what());
  }
}

inline MixturePrior read_prior(const fs::path &path) { return prior_from_json(read_json(path), path.string()); }

inline void write_prior(const fs::path &path, const MixturePrior &prior) { write_json(path, prior_to_json(prior)); }

// ---------------------------------------------------------------------------
// Schedule JSON: {"kind": "linear", "T", "beta_start", "beta_end"}. Derived
// arrays are recomputed on load; an "alpha_bars" array, if present, must
// match the recomputed values.

inline Json schedule_to_json(const NoiseSchedule &s) {
  return {{"kind", "linear"}, {"T", s.steps()}, {"beta_start", s.beta_start()}, {"beta_end", s.beta_end()}};
}

inline NoiseSchedule schedule_from_json(const Json &j, const std::string &source = "schedule") {
  const Json &kind = detail::field(j, "kind", source);
  if (!kind.is_string() || kind.get<std::string>() != "linear") {
    throw ValidationError(source + ".kind: expected \"linear\"");
  }
  const long long T = detail::integer(detail::field(j, "T", source), source + ".T");
  if (T < 1 || T > 1'000'000) throw ValidationError(source + ".T: must lie in [1, 1000000]");
  NoiseSchedule s = NoiseSchedule::linear(static_cast<int>(T),
                                          detail::number(detail::field(j, "beta_start", source), source + ".beta_start"),
                                          detail::number(detail::field(j, "beta_end", source), source + ".beta_end"));
  if (auto it = j.find("alpha_bars"); it != j.end()) {
    const Vector ab = detail::vector(*it, source + ".alpha_bars");
    if (ab.size() != T) throw ValidationError(source + ".alpha_bars: expected " + std::to_string(T) + " entries");
    double prev = 1.0;
    for (Index i = 0; i < ab.size(); ++i) {
      const std::string p = source + ".alpha_bars[" + std::to_string(i) + "]";
      if (!(ab[i] > 0.0 && ab[i] < 1.0)) throw ValidationError(p + ": outside (0,1)");
      if (!(ab[i] < prev)) throw ValidationError(p + ": alpha_bars not strictly decreasing");
      prev = ab[i];
      const double ref = s.alpha_bars()[static_cast<std::size_t>(i)];
      if (std::abs(ab[i] - ref) > 1e-12 * ref) {
        throw ValidationError(p + ": does not match the value derived from the betas");
      }
    }
  }
  return s;
}

inline NoiseSchedule read_schedule(const fs::path &path) { return schedule_from_json(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// Degradation JSON: {"kind", "params": {"dim", "width", "stride"}, "sigma"}.

inline Json degradation_to_json(const DegradationOp &op) {
  return {{"kind", to_string(op.kind)},
          {"params", {{"dim", static_cast<long long>(op.params.dim)}, {"width", op.params.width},
                      {"stride", op.params.stride}}},
          {"sigma", op.noise_sigma}};
}

inline DegradationOp degradation_from_json(const Json &j, const std::string &source = "degradation") {
  const Json &kind = detail::field(j, "kind", source);
  if (!kind.is_string()) throw ValidationError(source + ".kind: expected a string");
  const Json &params = detail::field(j, "params", source);
  DegradationParams p;
  p.dim = static_cast<Index>(detail::integer(detail::field(params, "dim", source + ".params"), source + ".params.dim"));
  if (params.contains("width")) p.width = detail::number(params["width"], source + ".params.width");
  if (params.contains("stride")) {
    p.stride = static_cast<int>(detail::integer(params["stride"], source + ".params.stride"));
  }
  p.sigma = detail::number(detail::field(j, "sigma", source), source + ".sigma");
  return make_degradation(parse_degradation_kind(kind.get<std::string>()), p);
}

inline DegradationOp read_degradation(const fs::path &path) {
  return degradation_from_json(read_json(path), path.string());
}

// ---------------------------------------------------------------------------
// Sample CSV: header x0..x{d-1}, one row per sample.

inline std::string samples_to_csv(const Matrix &m) {
  std::string out;
  for (Index c = 0; c < m.cols(); ++c) {
    if (c) out += ",";
    out += "x" + std::to_string(c);
  }
  out += "\n";
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += ",";
      out += format_double(m(r, c));
    }
    out += "\n";
  }
  return out;
}

inline Matrix samples_from_csv(const std::string &text, const std::string &source = "csv") {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string &s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && s[b] == ' ') ++b;
    return s.substr(b);
  };
  if (!std::getline(in, line)) throw ValidationError(source + ": empty file (expected header x0..x{d-1})");
  const auto header = split(trim(line));
  if (header.empty()) throw ValidationError(source + ": empty header");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) != "x" + std::to_string(c)) {
      throw ValidationError(source + ": header column " + std::to_string(c) + " must be 'x" + std::to_string(c) +
                            "', got '" + header[c] + "'");
    }
  }
  const auto d = static_cast<Index>(header.size());
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = source + ": row " + std::to_string(row + 1);
    if (static_cast<Index>(cells.size()) != d) {
      throw ValidationError(where + ": expected " + std::to_string(d) + " columns, got " +
                            std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      char *end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw ValidationError(where + ", column x" + std::to_string(c) + ": not a finite number ('" + cell + "')");
      }
      values.push_back(v);
    }
    ++row;
  }
  if (row == 0) throw ValidationError(source + ": no data rows");
  Matrix m(static_cast<Index>(row), d);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < d; ++c) m(r, c) = values[static_cast<std::size_t>(r * d + c)];
  }
  return m;
}

inline Matrix read_samples(const fs::path &path) { return samples_from_csv(read_text(path), path.string()); }

inline void write_samples(const fs::path &path, const Matrix &m) { write_text(path, samples_to_csv(m)); }

// ---------------------------------------------------------------------------
// Album: sample CSV plus a sidecar JSON with the same stem.

inline fs::path album_sidecar(const fs::path &csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

inline Json album_provenance_json(const Album &album) {
  Json j{{"source", to_string(album.source)}, {"M", static_cast<long long>(album.size())}};
  if (album.provenance) {
    const auto &p = *album.provenance;
    j["observation_id"] = p.observation_id;
    j["K_album"] = p.K_album;
    j["lambda"] = p.guidance.lambda;
    j["skip_n"] = p.guidance.skip_n;
    j["jacobian_mode"] = to_string(p.guidance.jacobian_mode);
    j["sampler"] = to_string(p.sampler);
    j["seed"] = p.seed;
  }
  return j;
}

inline void write_album(const fs::path &csv, const Album &album) {
  write_samples(csv, album.samples);
  write_json(album_sidecar(csv), album_provenance_json(album));
}

/// Reads the sidecar when present; without one the album is treated as personal.
inline Album read_album(const fs::path &csv) {
  Album album;
  album.samples = read_samples(csv);
  const fs::path side = album_sidecar(csv);
  if (side != csv && fs::exists(side)) {
    const Json j = read_json(side);
    const std::string src = side.string();
    const Json &source = detail::field(j, "source", src);
    if (!source.is_string()) throw ValidationError(src + ".source: expected a string");
    album.source = parse_album_source(source.get<std::string>());
    if (j.contains("K_album")) {
      AlbumProvenance p;
      p.K_album = static_cast<int>(detail::integer(j["K_album"], src + ".K_album"));
      if (j.contains("lambda")) p.guidance.lambda = detail::number(j["lambda"], src + ".lambda");
      if (j.contains("skip_n")) p.guidance.skip_n = static_cast<int>(detail::integer(j["skip_n"], src + ".skip_n"));
      if (j.contains("jacobian_mode")) p.guidance.jacobian_mode = parse_jacobian_mode(j["jacobian_mode"]);
      if (j.contains("sampler")) p.sampler = parse_sampler(j["sampler"]);
      if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
          throw ValidationError(src + ".seed: expected an integer");
        }
        p.seed = j["seed"].get<std::uint64_t>();
      }
      if (j.contains("observation_id") && j["observation_id"].is_string()) p.observation_id = j["observation_id"];
      album.provenance = p;
    }
  }
  album.validate();
  return album;
}

// ---------------------------------------------------------------------------
// Digests and manifests.

/// Content digest independent of formatting: JSON is canonicalized, sample
/// CSV is re-rendered from its parsed values, anything else hashes raw bytes.
inline std::string content_digest(const fs::path &path) {
  const std::string text = read_text(path);
  const auto ext = path.extension().string();
  if (ext == ".json") return hex64(fnv1a64(dump_json(parse_json(text, path.string()), 0)));
  if (ext == ".csv") {
    try {
      return hex64(fnv1a64(samples_to_csv(samples_from_csv(text, path.string()))));
    } catch (const ValidationError &) {
      // Not a sample CSV (e.g. a sweep table): fall back to bytes.
    }
  }
  return hex64(fnv1a64(text));
}

inline std::string byte_digest(const fs::path &path) { return hex64(fnv1a64(read_text(path))); }

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ManifestInput {
  std::string role;
  fs::path path;
};

/// Run manifest. `argv` is the full command line (without the program name);
/// `output_flags` names the flags whose values are output locations so replay
/// can redirect them.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::string> argv;
  std::vector<std::string> output_flags;
  Json config = Json::object();
  std::vector<ManifestInput> inputs;
  std::vector<fs::path> artifacts;

  [[nodiscard]] Json to_json() const {
    Json in = Json::object();
    for (const auto &i : inputs) in[i.role] = {{"path", i.path.string()}, {"digest", content_digest(i.path)}};
    const Json digest_basis{{"command", command}, {"config", config}, {"inputs", in}, {"seed", seed}};
    Json arts = Json::array(), art_digests = Json::object();
    for (const auto &a : artifacts) {
      arts.push_back(a.string());
      art_digests[a.string()] = byte_digest(a);
    }
    return {{"command", command},
            {"seed", seed},
            {"argv", argv},
            {"output_flags", output_flags},
            {"config", config},
            {"inputs", in},
            {"config_digest", hex64(fnv1a64(dump_json(digest_basis, 0)))},
            {"artifact_paths", arts},
            {"artifact_digests", art_digests},
            {"timestamp", utc_timestamp()}};
  }
};

} // namespace genrestore::io
