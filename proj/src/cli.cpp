// Subcommand implementations for the ppd executable.

#include "ppd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

namespace ppd::cli {

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const BootstrapInfeasible& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: invalid input: " << one_line(e.what()) << "\n";
    return kExitInput;
  }
}

std::optional<std::vector<Index>> parse_ranks(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  std::vector<Index> out;
  for (auto part : detail::split(text, ',')) {
    const std::string tok(detail::trim(part));
    long long v = -1;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
      throw InvalidInput("--ranks expects 'auto' or nonnegative integers, got '" + text + "'");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::vector<DenseMatrix> read_views(const std::vector<std::string>& paths, bool has_header) {
  std::vector<DenseMatrix> views;
  for (const auto& p : paths) views.push_back(read_matrix_csv(p, has_header));
  return views;
}

void write_diagnostics(const DiagnosticReport& report, const std::string& svg_path, const std::string& json_path,
                       int width, int height) {
  if (!svg_path.empty()) write_file_atomic(svg_path, render_svg(report, width, height));
  if (!json_path.empty()) write_file_atomic(json_path, export_json(report));
}

BootstrapVariant parse_variant(const std::string& s) {
  if (s == "rotational") return BootstrapVariant::rotational;
  if (s == "naive") return BootstrapVariant::naive;
  throw InvalidInput("--variant expects rotational or naive, got '" + s + "'");
}

int cmd_decompose(const DecomposeArgs& a, std::ostream& err) {
  return guarded(err, [&] {
    if (a.views.size() < 2) throw InvalidInput("decompose needs at least two --view files");
    if (a.bootstrap_reps < 1) throw InvalidInput("--bootstrap-reps must be at least 1");
    DecomposeOptions opt;
    opt.ranks = parse_ranks(a.ranks);
    opt.bootstrap.replicates = a.bootstrap_reps;
    opt.bootstrap.seed = a.seed;
    opt.bootstrap.variant = parse_variant(a.variant);
    opt.bootstrap.threads = a.threads;
    opt.averaging = a.pairwise ? ProductAveraging::pairwise : ProductAveraging::all_orderings;
    const auto views = read_views(a.views, a.header);
    const DecompositionResult result = decompose_multiview(views, opt);

    ResultMetadata meta;
    for (const auto& v : views) meta.dims.push_back(v.cols());
    meta.bootstrap_replicates = a.bootstrap_reps;
    meta.seed = a.seed;
    meta.variant = a.variant;
    write_file_atomic(a.out, format_result_json(result, meta));

    if (!a.diagnostic_svg.empty() || !a.diagnostic_json.empty()) {
      std::optional<SimTruth> truth;
      if (!a.truth.empty()) truth = read_truth_json(a.truth);
      write_diagnostics(build_report(result, truth), a.diagnostic_svg, a.diagnostic_json, a.width, a.height);
    }
  });
}

void emit_dataset(const std::string& dir, const SimConfig& cfg) {
  std::filesystem::create_directories(dir);
  const SimData data = generate(cfg);
  for (std::size_t k = 0; k < data.views.size(); ++k)
    write_matrix_csv((std::filesystem::path(dir) / ("view_" + std::to_string(k + 1) + ".csv")).string(),
                     data.views[k]);
  write_file_atomic((std::filesystem::path(dir) / "truth.json").string(), truth_to_json(data.truth).dump(2) + "\n");
  nlohmann::json meta = {{"n", cfg.n},
                         {"dims", cfg.dims},
                         {"joint_rank", cfg.joint_rank},
                         {"individual_ranks", cfg.individual_ranks},
                         {"angle", cfg.angle_deg},
                         {"snr", std::isfinite(cfg.snr) ? nlohmann::json(cfg.snr) : nlohmann::json("inf")},
                         {"seed", cfg.seed},
                         {"true_marginal_ranks", data.truth.marginal_ranks()}};
  write_file_atomic((std::filesystem::path(dir) / "dataset.json").string(), meta.dump(2) + "\n");
}

int cmd_simulate(const SimulateArgs& a, std::ostream& err) {
  return guarded(err, [&] {
    if (a.config.empty()) throw InvalidInput("simulate needs --config");
    GridConfig grid = parse_grid_config(read_text_file(a.config));
    if (a.reps) {
      if (*a.reps < 1) throw InvalidInput("--reps must be at least 1");
      grid.options.reps = *a.reps;
    }
    if (a.seed) grid.options.master_seed = *a.seed;
    if (a.threads) grid.options.threads = *a.threads;
    const auto cells = grid.cells();

    if (!a.emit_dataset.empty()) {
      SimConfig first = cells.front();
      first.seed = derive_seed(grid.options.master_seed, 0, 0);
      emit_dataset(a.emit_dataset, first);
      return;
    }
    const auto results = run_benchmark(cells, grid.options);
    write_file_atomic(a.out, format_benchmark_csv(results));
    write_file_atomic(a.seeds_out.empty() ? a.out + ".seeds.csv" : a.seeds_out, format_seed_audit(results));
  });
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& err) {
  return guarded(err, [&] {
    if (a.svg.empty() && a.json.empty()) throw InvalidInput("diagnose needs --svg and/or --json");
    if (a.result.empty() == a.views.empty()) throw InvalidInput("diagnose needs either --result or --view files");
    DecompositionResult result;
    if (!a.result.empty()) {
      result = read_result_json(a.result);
    } else {
      if (a.views.size() < 2) throw InvalidInput("diagnose needs at least two --view files");
      DecomposeOptions opt;
      opt.ranks = parse_ranks(a.ranks);
      opt.bootstrap.replicates = a.bootstrap_reps;
      opt.bootstrap.seed = a.seed;
      result = decompose_multiview(read_views(a.views, a.header), opt);
    }
    std::optional<SimTruth> truth;
    if (!a.truth.empty()) {
      truth = read_truth_json(a.truth);
      if (truth->joint.ambient_dim() != result.joint.ambient_dim())
        throw DimensionMismatch("truth and result describe different sample sizes");
      if (truth->individuals.size() != result.marginal_bases.size())
        throw DimensionMismatch("truth and result describe different numbers of views");
    }
    write_diagnostics(build_report(result, truth), a.svg, a.json, a.width, a.height);
  });
}

int cmd_noise_spectrum(const NoiseSpectrumArgs& a, std::ostream& err) {
  return guarded(err, [&] {
    const bool by_ratio = a.q1 || a.q2;
    const bool by_rank = a.n || a.r1 || a.r2;
    if (by_ratio == by_rank) throw InvalidInput("give either --q1/--q2 or --n/--r1/--r2");
    if (a.samples < 2) throw InvalidInput("--samples must be at least 2");
    NoiseSpectrumLaw law;
    nlohmann::json j;
    if (by_ratio) {
      if (!a.q1 || !a.q2) throw InvalidInput("--q1 and --q2 are both required");
      if (!(*a.q1 >= 0.0 && *a.q1 <= 1.0)) throw InvalidInput("--q1 must lie in [0, 1]");
      if (!(*a.q2 >= 0.0 && *a.q2 <= 1.0)) throw InvalidInput("--q2 must lie in [0, 1]");
      law = noise_law(*a.q1, *a.q2);
    } else {
      if (!a.n || !a.r1 || !a.r2) throw InvalidInput("--n, --r1 and --r2 are all required");
      if (*a.n < 1) throw InvalidInput("--n must be positive");
      if (*a.r1 < 0 || *a.r1 > *a.n) throw InvalidInput("--r1 must lie in [0, n]");
      if (*a.r2 < 0 || *a.r2 > *a.n) throw InvalidInput("--r2 must lie in [0, n]");
      law = noise_law_for_ranks(*a.n, *a.r1, *a.r2);
      const Vector sample = sample_noise_spectrum(*a.n, *a.r1, *a.r2, a.seed);
      j["sample"] = {{"n", *a.n},
                     {"r1", *a.r1},
                     {"r2", *a.r2},
                     {"seed", a.seed},
                     {"squared_singular_values", to_std(sample)}};
    }
    j["law"] = law_to_json(law);
    j["singular_value_threshold"] = singular_value_threshold(law);
    j["continuous_mass"] = continuous_mass(law);
    nlohmann::json dens = nlohmann::json::array();
    if (law.lambda_plus > law.lambda_minus) {
      const double span = law.lambda_plus - law.lambda_minus;
      for (int i = 0; i < a.samples; ++i) {
        const double lam =
            std::clamp(law.lambda_minus + span * i / (a.samples - 1), law.lambda_minus + 1e-9 * span,
                       law.lambda_plus - 1e-9 * span);
        dens.push_back({lam, noise_density(law, lam)});
      }
    }
    j["density"] = std::move(dens);
    write_file_atomic(a.out, j.dump(2) + "\n");
  });
}

}  // namespace ppd::cli
