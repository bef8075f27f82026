// Command-line front end: decompose, simulate, diagnose, noise-spectrum.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "ppd/cli.hpp"

namespace {

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ppd::cli;
  CLI::App app{"Joint and individual subspace decomposition of multi-view data"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "decompose two or more views given as CSV files");
  d->add_option("--view", dec.views, "view CSV (rows = samples); repeat for each view")->required();
  d->add_flag("--header", dec.header, "skip one header row in every CSV");
  d->add_option("--ranks", dec.ranks, "'auto' or comma-separated marginal ranks")->capture_default_str();
  d->add_option("--bootstrap-reps", dec.bootstrap_reps, "bootstrap replicates")->capture_default_str();
  d->add_option("--seed", dec.seed, "master seed")->capture_default_str();
  d->add_option("--variant", dec.variant, "bootstrap variant: rotational or naive")->capture_default_str();
  d->add_flag("--pairwise", dec.pairwise, "average pairwise products instead of all view orderings");
  d->add_option("--threads", dec.threads, "bootstrap worker threads (0 = all cores)")->capture_default_str();
  d->add_option("--out", dec.out, "result JSON path")->capture_default_str();
  d->add_option("--diagnostic", dec.diagnostic_svg, "diagnostic SVG path");
  d->add_option("--diagnostic-json", dec.diagnostic_json, "diagnostic report JSON path");
  d->add_option("--truth", dec.truth, "planted-truth JSON for the diagnostic overlay");
  d->add_option("--width", dec.width, "SVG width")->capture_default_str();
  d->add_option("--height", dec.height, "SVG height")->capture_default_str();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run the simulation benchmark grid");
  s->add_option("--config", sim.config, "grid configuration (key = value)")->required();
  s->add_option("--out", sim.out, "results table CSV")->capture_default_str();
  s->add_option("--seeds-out", sim.seeds_out, "per-replication seed audit CSV (default <out>.seeds.csv)");
  optional_flag(s, "--reps", sim.reps, "override replications per cell");
  optional_flag(s, "--seed", sim.seed, "override master seed");
  optional_flag(s, "--threads", sim.threads, "parallel replications (0 = all cores)");
  s->add_option("--emit-dataset", sim.emit_dataset, "write the first cell's first data set to this directory");

  DiagnoseArgs dia;
  auto* g = app.add_subcommand("diagnose", "render the spectrum diagnostic");
  g->add_option("--result", dia.result, "result JSON written by decompose");
  g->add_option("--truth", dia.truth, "planted-truth JSON (adds noiseless spectrum and intervals)");
  g->add_option("--view", dia.views, "recompute from view CSVs instead of --result");
  g->add_flag("--header", dia.header, "skip one header row in every CSV");
  g->add_option("--ranks", dia.ranks, "ranks when recomputing")->capture_default_str();
  g->add_option("--bootstrap-reps", dia.bootstrap_reps, "bootstrap replicates when recomputing")
      ->capture_default_str();
  g->add_option("--seed", dia.seed, "master seed when recomputing")->capture_default_str();
  g->add_option("--svg", dia.svg, "SVG output path");
  g->add_option("--json", dia.json, "report JSON output path");
  g->add_option("--width", dia.width, "SVG width")->capture_default_str();
  g->add_option("--height", dia.height, "SVG height")->capture_default_str();

  NoiseSpectrumArgs ns;
  auto* z = app.add_subcommand("noise-spectrum", "limiting spectrum of two random projections");
  optional_flag(z, "--q1", ns.q1, "rank-to-dimension ratio of the first subspace");
  optional_flag(z, "--q2", ns.q2, "rank-to-dimension ratio of the second subspace");
  optional_flag(z, "--n", ns.n, "ambient dimension for the empirical sample");
  optional_flag(z, "--r1", ns.r1, "first subspace rank for the empirical sample");
  optional_flag(z, "--r2", ns.r2, "second subspace rank for the empirical sample");
  z->add_option("--seed", ns.seed, "sampler seed")->capture_default_str();
  z->add_option("--samples", ns.samples, "density sample points")->capture_default_str();
  z->add_option("--out", ns.out, "output JSON path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return kExitInput;
  }

  if (*d) return cmd_decompose(dec);
  if (*s) return cmd_simulate(sim);
  if (*g) return cmd_diagnose(dia);
  if (*z) return cmd_noise_spectrum(ns);
  return kExitInput;
}
