#ifndef PPD_IO_HPP
#define PPD_IO_HPP

/*!@file
 * File formats: numeric CSV matrices (rows = shared samples), result and truth
 * JSON documents, and the key=value benchmark grid configuration. All writers
 * go through a temp file followed by rename.
 */

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ppd/decompose.hpp"
#include "ppd/error.hpp"
#include "ppd/json_text.hpp"
#include "ppd/simulation.hpp"

namespace ppd {

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `contents` next to `path` and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw InvalidInput("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidInput("cannot move output into '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

/// Parses comma-separated numeric text. Blank lines are ignored; line numbers
/// in errors count every physical line from 1.
inline DenseMatrix parse_matrix_csv(const std::string& text, bool has_header = false) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (!rows.empty() && fields.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) throw ParseError("non-numeric cell '" + std::string(detail::trim(fields[c])) + "'", line_no, c + 1);
      row.push_back(*v);
    }
    width = fields.size();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("no numeric rows in CSV input");
  DenseMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

inline DenseMatrix read_matrix_csv(const std::string& path, bool has_header = false) {
  const std::string text = read_text_file(path);
  try {
    return parse_matrix_csv(text, has_header);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line(), e.column());
  }
}

inline std::string format_matrix_csv(const DenseMatrix& m) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
  write_file_atomic(path, format_matrix_csv(m));
}

// ---------------------------------------------------------------------------
// JSON helpers

inline nlohmann::json matrix_to_json(const DenseMatrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());  // column-major
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline DenseMatrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw InvalidInput("matrix entry has " + std::to_string(data.size()) + " values for a " + std::to_string(rows) +
                       " x " + std::to_string(cols) + " shape");
  DenseMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline OrthonormalBasis basis_from_json(const nlohmann::json& j) {
  return OrthonormalBasis::from_columns(matrix_from_json(j), 1e-6);
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector from_std(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

inline nlohmann::json law_to_json(const NoiseSpectrumLaw& law) {
  return {{"q1", law.q1},
          {"q2", law.q2},
          {"lambda_minus", law.lambda_minus},
          {"lambda_plus", law.lambda_plus},
          {"mass_at_zero", law.mass_at_zero},
          {"mass_at_one", law.mass_at_one}};
}

inline NoiseSpectrumLaw law_from_json(const nlohmann::json& j) {
  NoiseSpectrumLaw law;
  law.q1 = j.at("q1").get<double>();
  law.q2 = j.at("q2").get<double>();
  law.lambda_minus = j.at("lambda_minus").get<double>();
  law.lambda_plus = j.at("lambda_plus").get<double>();
  law.mass_at_zero = j.at("mass_at_zero").get<double>();
  law.mass_at_one = j.at("mass_at_one").get<double>();
  return law;
}

// ---------------------------------------------------------------------------
// Decomposition result

struct ResultMetadata {
  std::vector<Index> dims;
  std::size_t bootstrap_replicates = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string variant = "rotational";
};

inline nlohmann::json result_to_json(const DecompositionResult& r, const ResultMetadata& meta) {
  nlohmann::json j;
  j["format"] = "ppd-result";
  j["version"] = 1;
  j["n"] = r.joint.ambient_dim();
  j["dims"] = meta.dims;
  j["marginal_ranks"] = r.marginal_ranks;
  j["joint_rank"] = r.joint_rank;
  j["individual_ranks"] = [&] {
    std::vector<Index> v;
    for (const auto& b : r.individuals) v.push_back(b.rank());
    return v;
  }();
  j["sigma_hats"] = r.sigma_hats;
  j["epsilon1_hat"] = r.epsilon1_hat;
  if (r.epsilon2_hat) j["epsilon2_hat"] = *r.epsilon2_hat;
  j["thresholds"] = {{"bootstrap", r.spectrum.bootstrap_threshold},
                     {"noise", r.spectrum.noise_threshold},
                     {"cutoff", r.spectrum.cutoff()}};
  j["spectrum"] = to_std(r.spectrum.values);
  j["noise_law"] = law_to_json(r.noise_law);
  j["bootstrap"] = {{"replicates", meta.bootstrap_replicates}, {"seed", meta.seed}, {"variant", meta.variant}};
  j["reporting_pair"] = r.reporting_pair;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"views", {p.first, p.second}},
                     {"joint_rank", p.joint_rank},
                     {"epsilon1_hat", p.epsilon.epsilon1_hat},
                     {"spectrum", to_std(p.spectrum.values)},
                     {"thresholds", {{"bootstrap", p.spectrum.bootstrap_threshold}, {"noise", p.spectrum.noise_threshold}}},
                     {"noise_law", law_to_json(p.law)}});
  }
  j["pairs"] = std::move(pairs);
  j["joint"] = matrix_to_json(r.joint.columns());
  nlohmann::json ind = nlohmann::json::array();
  for (const auto& b : r.individuals) ind.push_back(matrix_to_json(b.columns()));
  j["individuals"] = std::move(ind);
  nlohmann::json marg = nlohmann::json::array();
  for (const auto& b : r.marginal_bases) marg.push_back(matrix_to_json(b.columns()));
  j["marginal_bases"] = std::move(marg);
  return j;
}

inline std::string format_result_json(const DecompositionResult& r, const ResultMetadata& meta) {
  return result_to_json(r, meta).dump(2) + "\n";
}

/// Inverse of result_to_json for the fields used by diagnostics and scoring.
inline DecompositionResult result_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "ppd-result") throw InvalidInput("not a decomposition result document");
    DecompositionResult r;
    r.marginal_ranks = j.at("marginal_ranks").get<std::vector<Index>>();
    r.joint_rank = j.at("joint_rank").get<Index>();
    r.sigma_hats = j.at("sigma_hats").get<std::vector<double>>();
    r.epsilon1_hat = j.at("epsilon1_hat").get<double>();
    if (j.contains("epsilon2_hat")) r.epsilon2_hat = j.at("epsilon2_hat").get<double>();
    r.spectrum.values = from_std(j.at("spectrum").get<std::vector<double>>());
    r.spectrum.bootstrap_threshold = j.at("thresholds").at("bootstrap").get<double>();
    r.spectrum.noise_threshold = j.at("thresholds").at("noise").get<double>();
    r.noise_law = law_from_json(j.at("noise_law"));
    r.reporting_pair = j.at("reporting_pair").get<std::size_t>();
    for (const auto& p : j.at("pairs")) {
      PairAnalysis pa;
      pa.first = p.at("views").at(0).get<std::size_t>();
      pa.second = p.at("views").at(1).get<std::size_t>();
      pa.joint_rank = p.at("joint_rank").get<Index>();
      pa.epsilon.epsilon1_hat = p.at("epsilon1_hat").get<double>();
      pa.spectrum.values = from_std(p.at("spectrum").get<std::vector<double>>());
      pa.spectrum.bootstrap_threshold = p.at("thresholds").at("bootstrap").get<double>();
      pa.spectrum.noise_threshold = p.at("thresholds").at("noise").get<double>();
      pa.law = law_from_json(p.at("noise_law"));
      r.pairs.push_back(std::move(pa));
    }
    if (!r.pairs.empty() && r.reporting_pair >= r.pairs.size()) throw InvalidInput("reporting_pair out of range");
    r.joint = basis_from_json(j.at("joint"));
    for (const auto& b : j.at("individuals")) r.individuals.push_back(basis_from_json(b));
    for (const auto& b : j.at("marginal_bases")) r.marginal_bases.push_back(basis_from_json(b));
    if (r.marginal_bases.size() != r.marginal_ranks.size() || r.individuals.size() != r.marginal_ranks.size())
      throw InvalidInput("per-view arrays disagree in length");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed result document: ") + e.what());
  }
}

inline DecompositionResult read_result_json(const std::string& path) {
  return result_from_json(parse_json_text(read_text_file(path), path));
}

// ---------------------------------------------------------------------------
// Planted truth sidecar

inline nlohmann::json truth_to_json(const SimTruth& t) {
  nlohmann::json j;
  j["format"] = "ppd-truth";
  j["version"] = 1;
  j["planted_angle"] = t.planted_angle;
  j["noise_sigmas"] = t.noise_sigmas;
  j["joint"] = matrix_to_json(t.joint.columns());
  nlohmann::json ind = nlohmann::json::array();
  for (const auto& b : t.individuals) ind.push_back(matrix_to_json(b.columns()));
  j["individuals"] = std::move(ind);
  return j;
}

inline SimTruth truth_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "ppd-truth") throw InvalidInput("not a truth document");
    SimTruth t;
    t.planted_angle = j.at("planted_angle").get<double>();
    t.noise_sigmas = j.at("noise_sigmas").get<std::vector<double>>();
    t.joint = basis_from_json(j.at("joint"));
    for (const auto& b : j.at("individuals")) t.individuals.push_back(basis_from_json(b));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed truth document: ") + e.what());
  }
}

inline SimTruth read_truth_json(const std::string& path) {
  return truth_from_json(parse_json_text(read_text_file(path), path));
}

// ---------------------------------------------------------------------------
// Benchmark grid configuration
//
//   # comment
//   [grid]
//   n = 50
//   p = 80, 100
//   joint_rank = 4
//   individual_ranks = 5, 4
//   angles = 90, 30
//   snrs = 2, 0.5
//   rank_modes = estimated, under, over
//   reps = 50
//   seed = 42
//   bootstrap_reps = 100
//   sv_range = 1, 2
//
// Section headers are accepted and ignored; every key may appear once.

struct GridConfig {
  SimConfig base;
  std::vector<double> angles{90.0};
  std::vector<double> snrs{2.0};
  std::vector<RankMode> rank_modes{RankMode::estimated};
  BenchmarkOptions options;

  /// Cells in angle-major, then snr, then rank-mode order.
  std::vector<SimConfig> cells() const {
    std::vector<SimConfig> out;
    for (double a : angles)
      for (double s : snrs)
        for (RankMode m : rank_modes) {
          SimConfig c = base;
          c.angle_deg = a;
          c.snr = s;
          c.rank_mode = m;
          out.push_back(c);
        }
    return out;
  }
};

namespace detail {

[[noreturn]] inline void bad_key(const std::string& key, std::size_t line, const std::string& why) {
  throw InvalidInput("config key '" + key + "' (line " + std::to_string(line) + "): " + why);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto part : split(v, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline double parse_real_token(const std::string& tok, const std::string& key, std::size_t line) {
  if (tok == "inf" || tok == "Inf" || tok == "infinity") return std::numeric_limits<double>::infinity();
  const auto v = parse_double(tok);
  if (!v) bad_key(key, line, "'" + tok + "' is not a number");
  return *v;
}

inline long long parse_int_token(const std::string& tok, const std::string& key, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) bad_key(key, line, "'" + tok + "' is not an integer");
  return v;
}

}  // namespace detail

inline GridConfig parse_grid_config(const std::string& text) {
  GridConfig g;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("missing key before '='", line_no);
    if (seen.count(key)) detail::bad_key(key, line_no, "repeated (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    const auto items = detail::split_list(value);
    if (items.empty()) detail::bad_key(key, line_no, "empty value");

    const auto one = [&]() -> const std::string& {
      if (items.size() != 1) detail::bad_key(key, line_no, "expects a single value");
      return items.front();
    };
    const auto count = [&](const std::string& tok) -> Index {
      const long long v = detail::parse_int_token(tok, key, line_no);
      if (v < 0) detail::bad_key(key, line_no, "must be nonnegative");
      return static_cast<Index>(v);
    };
    const auto counts = [&] {
      std::vector<Index> v;
      for (const auto& t : items) v.push_back(count(t));
      return v;
    };
    const auto reals = [&] {
      std::vector<double> v;
      for (const auto& t : items) v.push_back(detail::parse_real_token(t, key, line_no));
      return v;
    };

    if (key == "n") {
      g.base.n = count(one());
    } else if (key == "p" || key == "dims") {
      g.base.dims = counts();
    } else if (key == "joint_rank") {
      g.base.joint_rank = count(one());
    } else if (key == "individual_ranks" || key == "ranks") {
      g.base.individual_ranks = counts();
    } else if (key == "angles" || key == "angle") {
      g.angles = reals();
    } else if (key == "snrs" || key == "snr") {
      g.snrs = reals();
    } else if (key == "rank_modes" || key == "rank_mode") {
      g.rank_modes.clear();
      for (const auto& t : items) {
        try {
          g.rank_modes.push_back(parse_rank_mode(t));
        } catch (const InvalidInput&) {
          detail::bad_key(key, line_no, "unknown rank mode '" + t + "'");
        }
      }
    } else if (key == "reps") {
      g.options.reps = static_cast<std::size_t>(count(one()));
    } else if (key == "seed") {
      const long long v = detail::parse_int_token(one(), key, line_no);
      if (v < 0) detail::bad_key(key, line_no, "must be nonnegative");
      g.options.master_seed = static_cast<std::uint64_t>(v);
    } else if (key == "bootstrap_reps") {
      g.options.bootstrap_replicates = static_cast<std::size_t>(count(one()));
    } else if (key == "sv_range") {
      const auto v = reals();
      if (v.size() != 2) detail::bad_key(key, line_no, "expects two values: low, high");
      g.base.sv_low = v[0];
      g.base.sv_high = v[1];
    } else if (key == "threads") {
      g.options.threads = static_cast<std::size_t>(count(one()));
    } else if (key == "score_averaging") {
      const auto& v = one();
      if (v == "per_view")
        g.options.averaging = ScoreAveraging::per_view;
      else if (v == "distinct")
        g.options.averaging = ScoreAveraging::distinct;
      else
        detail::bad_key(key, line_no, "expected per_view or distinct");
    } else {
      detail::bad_key(key, line_no, "unknown key");
    }
  }

  if (g.options.reps < 1) throw InvalidInput("config key 'reps': must be at least 1");
  if (g.options.bootstrap_replicates < 1) throw InvalidInput("config key 'bootstrap_reps': must be at least 1");
  if (g.base.individual_ranks.size() != g.base.dims.size())
    throw InvalidInput("config key 'individual_ranks': expected " + std::to_string(g.base.dims.size()) +
                       " values to match 'p'");
  for (const auto& c : g.cells()) {
    try {
      validate(c);
    } catch (const InvalidInput& e) {
      throw InvalidInput(std::string("config: ") + e.what());
    }
  }
  return g;
}

inline std::string format_benchmark_csv(const std::vector<CellResult>& cells) {
  std::string out = "angle,snr,rank_mode,mean_F_raw,mean_F_x10,stderr,reps\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%.17g,%.17g,%zu\n", c.config.angle_deg, c.config.snr,
                  to_string(c.config.rank_mode), c.mean_f_raw, c.mean_f_x10, c.stderr_x10, c.completed);
    out += buf;
  }
  return out;
}

/// One line per replication: which seed produced which score, or why it failed.
inline std::string format_seed_audit(const std::vector<CellResult>& cells) {
  std::string out = "cell,angle,snr,rank_mode,rep,seed,status\n";
  char buf[256];
  for (const auto& c : cells) {
    std::vector<std::string> status(c.seeds.size(), "ok");
    for (const auto& f : c.failures) {
      std::string msg = f.message;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      status[f.rep] = "failed: " + msg;
    }
    for (std::size_t r = 0; r < c.seeds.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%s,%zu,%llu,", c.cell_index, c.config.angle_deg, c.config.snr,
                    to_string(c.config.rank_mode), r, static_cast<unsigned long long>(c.seeds[r]));
      out += buf;
      out += status[r];
      out += '\n';
    }
  }
  return out;
}

}  // namespace ppd

#endif  // PPD_IO_HPP
