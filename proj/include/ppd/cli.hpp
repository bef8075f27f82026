#ifndef PPD_CLI_HPP
#define PPD_CLI_HPP

/*!@file
 * Subcommands behind the `ppd` executable. Each takes a plain options struct,
 * writes its files atomically and returns the process exit code:
 * 0 success, 2 usage or input error, 3 numerical infeasibility. Failures print
 * one line `error: <kind>: <message>` to the error stream.
 */

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ppd/decompose.hpp"
#include "ppd/diagnostics.hpp"
#include "ppd/io.hpp"
#include "ppd/noise_spectrum.hpp"
#include "ppd/simulation.hpp"

namespace ppd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;

std::string one_line(std::string s);

/// Runs `body`, mapping library errors to exit codes and a single stderr line.
int guarded(std::ostream& err, const std::function<void()>& body);

/// "auto" or a comma-separated list of nonnegative ranks.
std::optional<std::vector<Index>> parse_ranks(const std::string& text);

std::vector<DenseMatrix> read_views(const std::vector<std::string>& paths, bool has_header);

void write_diagnostics(const DiagnosticReport& report, const std::string& svg_path, const std::string& json_path,
                       int width, int height);

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::vector<std::string> views;
  bool header = false;
  std::string ranks = "auto";
  std::size_t bootstrap_reps = 100;
  std::uint64_t seed = kDefaultSeed;
  std::string variant = "rotational";
  bool pairwise = false;
  std::size_t threads = 1;
  std::string out = "result.json";
  std::string diagnostic_svg;
  std::string diagnostic_json;
  std::string truth;  ///< optional planted-truth sidecar for the diagnostic overlay
  int width = 640;
  int height = 400;
};

BootstrapVariant parse_variant(const std::string& s);

int cmd_decompose(const DecomposeArgs& a, std::ostream& err = std::cerr);

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out = "benchmark.csv";
  std::string seeds_out;  ///< defaults to <out>.seeds.csv
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string emit_dataset;  ///< directory for the first cell's first replication
};

/// Writes view_<k>.csv, truth.json and dataset.json for one generated data set.
void emit_dataset(const std::string& dir, const SimConfig& cfg);

int cmd_simulate(const SimulateArgs& a, std::ostream& err = std::cerr);

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string result;
  std::string truth;
  std::vector<std::string> views;  ///< recompute from raw views instead of --result
  bool header = false;
  std::string ranks = "auto";
  std::size_t bootstrap_reps = 100;
  std::uint64_t seed = kDefaultSeed;
  std::string svg;
  std::string json;
  int width = 640;
  int height = 400;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& err = std::cerr);

// ---------------------------------------------------------------------------

struct NoiseSpectrumArgs {
  std::optional<double> q1, q2;
  std::optional<long long> n, r1, r2;
  std::uint64_t seed = kDefaultSeed;
  int samples = kDensitySamples;
  std::string out = "noise_spectrum.json";
};

int cmd_noise_spectrum(const NoiseSpectrumArgs& a, std::ostream& err = std::cerr);

}  // namespace ppd::cli

#endif  // PPD_CLI_HPP
