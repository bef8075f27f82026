#ifndef PPD_SIMULATION_HPP
#define PPD_SIMULATION_HPP

/*!@file
 * Synthetic multi-view data with planted joint/individual structure, subspace
 * recovery scores and the replicated benchmark grid.
 *
 * Column spaces come from the left singular vectors U of a Gaussian n x n
 * matrix: the joint space is U[:, 0:rJ], the first individual space is the next
 * r1 columns, and view k >= 2 takes a fresh block F_k of r_k columns and uses
 * cos(phi) U1_c + sin(phi) F_k,c for c < r1 (F_k,c otherwise). Each component
 * gets i.i.d. Uniform(a, b) singular values and Haar row factors; noise is
 * N(0, s_k^2) with s_k = ||X_k||_2 / (snr (sqrt(n) + sqrt(p_k))).
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ppd/decompose.hpp"
#include "ppd/linalg.hpp"
#include "ppd/oracle.hpp"
#include "ppd/parallel.hpp"
#include "ppd/random.hpp"

namespace ppd {

enum class RankMode { truth, estimated, under, over };

inline const char* to_string(RankMode m) {
  switch (m) {
    case RankMode::truth: return "true";
    case RankMode::estimated: return "estimated";
    case RankMode::under: return "under";
    case RankMode::over: return "over";
  }
  return "?";
}

inline RankMode parse_rank_mode(const std::string& s) {
  if (s == "true" || s == "truth") return RankMode::truth;
  if (s == "estimated") return RankMode::estimated;
  if (s == "under") return RankMode::under;
  if (s == "over") return RankMode::over;
  throw InvalidInput("unknown rank mode '" + s + "' (expected true, estimated, under or over)");
}

struct SimConfig {
  Index n = 50;
  std::vector<Index> dims{80, 100};
  Index joint_rank = 4;
  std::vector<Index> individual_ranks{5, 4};
  double angle_deg = 90.0;
  double snr = 2.0;  ///< +infinity gives noiseless views
  std::uint64_t seed = kDefaultSeed;
  RankMode rank_mode = RankMode::estimated;
  double sv_low = 1.0;  ///< singular values of each component ~ Uniform(sv_low, sv_high)
  double sv_high = 2.0;

  std::size_t views() const noexcept { return dims.size(); }
};

struct SimTruth {
  OrthonormalBasis joint;
  std::vector<OrthonormalBasis> individuals;
  std::vector<DenseMatrix> signals;
  std::vector<double> noise_sigmas;
  double planted_angle = 0.0;  ///< degrees

  std::vector<Index> marginal_ranks() const {
    std::vector<Index> r;
    for (const auto& b : individuals) r.push_back(joint.rank() + b.rank());
    return r;
  }

  /// Planted structure of views a and b.
  PlantedSubspaces pair(std::size_t a = 0, std::size_t b = 1) const {
    return {joint, {individuals.at(a), individuals.at(b)}};
  }
};

struct SimData {
  std::vector<DenseMatrix> views;
  SimTruth truth;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.views() < 2) throw InvalidInput("simulation needs at least two views");
  if (cfg.individual_ranks.size() != cfg.views())
    throw InvalidInput("expected " + std::to_string(cfg.views()) + " individual ranks, got " +
                       std::to_string(cfg.individual_ranks.size()));
  if (cfg.n < 1) throw InvalidInput("n must be positive");
  if (cfg.joint_rank < 0) throw InvalidInput("joint rank must be nonnegative");
  if (!(cfg.angle_deg > 0.0 && cfg.angle_deg <= 90.0)) throw InvalidInput("angle must lie in (0, 90] degrees");
  if (!(cfg.snr > 0.0)) throw InvalidInput("snr must be positive");
  if (!(cfg.sv_low > 0.0 && cfg.sv_high >= cfg.sv_low) || !std::isfinite(cfg.sv_high))
    throw InvalidInput("singular value range must satisfy 0 < low <= high");
  Index used = cfg.joint_rank;
  for (std::size_t k = 0; k < cfg.views(); ++k) {
    if (cfg.individual_ranks[k] < 0) throw InvalidInput("individual ranks must be nonnegative");
    if (cfg.dims[k] < cfg.joint_rank + cfg.individual_ranks[k])
      throw InvalidInput("view " + std::to_string(k) + " has fewer features than its signal rank");
    used += cfg.individual_ranks[k];
  }
  if (used > cfg.n)
    throw InvalidInput("planted subspaces need " + std::to_string(used) + " directions but n = " +
                       std::to_string(cfg.n));
}

namespace detail {

inline DenseMatrix low_rank_component(const OrthonormalBasis& left, Index p, double lo, double hi, Rng& rng) {
  const Index r = left.rank();
  if (r == 0) return DenseMatrix::Zero(left.ambient_dim(), p);
  Vector s(r);
  for (Index i = 0; i < r; ++i) s(i) = uniform_real(rng, lo, hi);
  const OrthonormalBasis right = haar_basis(p, r, rng);
  return left.columns() * s.asDiagonal() * right.columns().transpose();
}

}  // namespace detail

inline SimData generate(const SimConfig& cfg) {
  validate(cfg);
  const Index n = cfg.n;
  const Index rj = cfg.joint_rank;
  const Index r1 = cfg.individual_ranks[0];

  Rng basis_rng(derive_seed(cfg.seed, 0));
  const DenseMatrix g = gaussian_matrix(n, n, basis_rng);
  const Eigen::BDCSVD<DenseMatrix> svd(g, Eigen::ComputeFullU);
  const DenseMatrix& u = svd.matrixU();

  SimData data;
  SimTruth& truth = data.truth;
  truth.planted_angle = cfg.angle_deg;
  truth.joint = OrthonormalBasis::trusted(u.leftCols(rj));
  const DenseMatrix first = u.middleCols(rj, r1);
  truth.individuals.push_back(OrthonormalBasis::trusted(first));

  const double phi = cfg.angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(phi);
  const double s = cfg.angle_deg == 90.0 ? 1.0 : std::sin(phi);
  const double cc = cfg.angle_deg == 90.0 ? 0.0 : c;
  Index offset = rj + r1;
  for (std::size_t k = 1; k < cfg.views(); ++k) {
    const Index rk = cfg.individual_ranks[k];
    DenseMatrix block = u.middleCols(offset, rk);
    for (Index col = 0; col < std::min(rk, r1); ++col) block.col(col) = cc * first.col(col) + s * block.col(col);
    truth.individuals.push_back(OrthonormalBasis::trusted(std::move(block)));
    offset += rk;
  }

  for (std::size_t k = 0; k < cfg.views(); ++k) {
    Rng rng(derive_seed(cfg.seed, 1, k));
    const Index p = cfg.dims[k];
    DenseMatrix x = detail::low_rank_component(truth.joint, p, cfg.sv_low, cfg.sv_high, rng);
    x += detail::low_rank_component(truth.individuals[k], p, cfg.sv_low, cfg.sv_high, rng);
    double sk = 0.0;
    if (std::isfinite(cfg.snr))
      sk = spectral_norm(x) / (cfg.snr * (std::sqrt(static_cast<double>(n)) + std::sqrt(static_cast<double>(p))));
    DenseMatrix y = x;
    if (sk > 0.0) {
      Rng noise_rng(derive_seed(cfg.seed, 2, k));
      y += gaussian_matrix(n, p, noise_rng, sk);
    }
    truth.signals.push_back(std::move(x));
    truth.noise_sigmas.push_back(sk);
    data.views.push_back(std::move(y));
  }
  return data;
}

struct MisspecifiedRanks {
  std::vector<Index> ranks;
  bool clamped = false;  ///< some rank fell below 1 and was raised to 1
};

/// Shifts each rank by an independent u ~ Uniform{1, 2, 3}, down for `under`
/// and up for `over`.
inline MisspecifiedRanks misspecify_ranks(const std::vector<Index>& true_ranks, RankMode mode, std::uint64_t seed) {
  if (mode != RankMode::under && mode != RankMode::over)
    throw InvalidInput("rank misspecification needs mode under or over");
  Rng rng(seed);
  MisspecifiedRanks out;
  for (Index r : true_ranks) {
    const Index u = uniform_int(rng, 1, 3);
    Index v = mode == RankMode::over ? r + u : r - u;
    if (v < 1) {
      v = 1;
      out.clamped = true;
    }
    out.ranks.push_back(v);
  }
  return out;
}

struct ScoreTriple {
  double tpp = 0.0;
  double fdp = 0.0;
  double f_score = 0.0;
};

inline double f_measure(double tpp, double fdp) {
  const double den = 1.0 - fdp + tpp;
  return den > 0.0 ? 2.0 * (1.0 - fdp) * tpp / den : 0.0;
}

/// TPP = tr(P_est P_true) / dim(true), FDP = tr((I - P_true) P_est) / dim(est).
inline ScoreTriple score(const OrthonormalBasis& estimate, const OrthonormalBasis& truth) {
  if (estimate.ambient_dim() != truth.ambient_dim())
    throw DimensionMismatch("estimate lives in R^" + std::to_string(estimate.ambient_dim()) + ", truth in R^" +
                            std::to_string(truth.ambient_dim()));
  double overlap = 0.0;
  if (!estimate.empty() && !truth.empty())
    overlap = (truth.columns().transpose() * estimate.columns()).squaredNorm();
  ScoreTriple t;
  t.tpp = truth.empty() ? 1.0 : std::clamp(overlap / static_cast<double>(truth.rank()), 0.0, 1.0);
  t.fdp = estimate.empty() ? 0.0 : std::clamp(1.0 - overlap / static_cast<double>(estimate.rank()), 0.0, 1.0);
  t.f_score = f_measure(t.tpp, t.fdp);
  return t;
}

/// How per-subspace F-scores are combined into one accuracy value.
enum class ScoreAveraging {
  per_view,  ///< joint and individual subspace of every view (2K terms; the joint term repeats)
  distinct,  ///< the joint subspace once plus every individual subspace (K + 1 terms)
};

/// Average F-score of a decomposition against the planted subspaces.
inline double decomposition_score(const DecompositionResult& result, const SimTruth& truth,
                                  ScoreAveraging averaging = ScoreAveraging::per_view) {
  const std::size_t k = truth.individuals.size();
  const double joint = score(result.joint, truth.joint).f_score;
  double sum = averaging == ScoreAveraging::per_view ? static_cast<double>(k) * joint : joint;
  for (std::size_t v = 0; v < k; ++v) sum += score(result.individuals.at(v), truth.individuals[v]).f_score;
  const std::size_t terms = averaging == ScoreAveraging::per_view ? 2 * k : k + 1;
  return sum / static_cast<double>(terms);
}

/// Options shared by every benchmark cell.
struct BenchmarkOptions {
  std::size_t reps = 50;
  std::uint64_t master_seed = kDefaultSeed;
  std::size_t bootstrap_replicates = 100;
  BootstrapVariant variant = BootstrapVariant::rotational;
  std::size_t threads = 1;  ///< parallel replications; results do not depend on it
  ScoreAveraging averaging = ScoreAveraging::per_view;
};

struct FailedSeed {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct CellResult {
  SimConfig config;  ///< seed field holds the cell-level seed
  std::size_t cell_index = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> scores;  ///< per successful replication
  std::vector<FailedSeed> failures;
  double mean_f_raw = 0.0;
  double mean_f_x10 = 0.0;
  double stderr_x10 = 0.0;
  std::size_t completed = 0;
};

/// Ranks handed to the decomposition for one replication.
inline std::optional<std::vector<Index>> benchmark_ranks(const SimConfig& cfg, const SimTruth& truth,
                                                         std::uint64_t data_seed) {
  switch (cfg.rank_mode) {
    case RankMode::estimated: return std::nullopt;
    case RankMode::truth: return truth.marginal_ranks();
    case RankMode::under:
    case RankMode::over: return misspecify_ranks(truth.marginal_ranks(), cfg.rank_mode, derive_seed(data_seed, 4)).ranks;
  }
  return std::nullopt;
}

/// One replication: generate, decompose, score.
inline double run_replication(SimConfig cfg, std::uint64_t data_seed, const BenchmarkOptions& opts) {
  cfg.seed = data_seed;
  const SimData data = generate(cfg);
  DecomposeOptions dopt;
  dopt.ranks = benchmark_ranks(cfg, data.truth, data_seed);
  dopt.bootstrap.replicates = opts.bootstrap_replicates;
  dopt.bootstrap.seed = derive_seed(data_seed, 5);
  dopt.bootstrap.variant = opts.variant;
  const DecompositionResult result = decompose_multiview(data.views, dopt);
  return decomposition_score(result, data.truth, opts.averaging);
}

inline CellResult run_cell(const SimConfig& cfg, std::size_t cell_index, const BenchmarkOptions& opts) {
  if (opts.reps < 1) throw InvalidInput("benchmark needs at least one replication");
  validate(cfg);
  CellResult cell;
  cell.config = cfg;
  cell.cell_index = cell_index;
  for (std::size_t r = 0; r < opts.reps; ++r) cell.seeds.push_back(derive_seed(opts.master_seed, cell_index, r));

  std::vector<double> raw(opts.reps, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(opts.reps);
  parallel_for(opts.reps, opts.threads, [&](std::size_t r) {
    try {
      raw[r] = run_replication(cfg, cell.seeds[r], opts);
    } catch (const Error& e) {
      errors[r] = std::string(e.kind()) + ": " + e.what();
    }
  });

  for (std::size_t r = 0; r < opts.reps; ++r) {
    if (errors[r].empty())
      cell.scores.push_back(raw[r]);
    else
      cell.failures.push_back({r, cell.seeds[r], errors[r]});
  }
  cell.completed = cell.scores.size();
  if (cell.completed > 0) {
    double sum = 0.0;
    for (double v : cell.scores) sum += v;
    cell.mean_f_raw = sum / static_cast<double>(cell.completed);
    double ss = 0.0;
    for (double v : cell.scores) ss += (v - cell.mean_f_raw) * (v - cell.mean_f_raw);
    const double m = static_cast<double>(cell.completed);
    const double sd = cell.completed > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    cell.mean_f_x10 = 10.0 * cell.mean_f_raw;
    cell.stderr_x10 = 10.0 * sd / std::sqrt(m);
  } else {
    cell.mean_f_raw = cell.mean_f_x10 = cell.stderr_x10 = std::numeric_limits<double>::quiet_NaN();
  }
  return cell;
}

/// Runs every cell; cell i draws its replication seeds from (master_seed, i, rep).
inline std::vector<CellResult> run_benchmark(const std::vector<SimConfig>& grid, const BenchmarkOptions& opts) {
  std::vector<CellResult> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out.push_back(run_cell(grid[i], i, opts));
  return out;
}

/// Two-view configuration of the simulation study (n = 50, p = (80, 100), joint rank 4, individual ranks 5 and 4).
inline SimConfig two_view_config(double angle_deg, double snr, RankMode mode) {
  SimConfig cfg;
  cfg.angle_deg = angle_deg;
  cfg.snr = snr;
  cfg.rank_mode = mode;
  return cfg;
}

/// Three-view configuration (n = 35, p = (40, 45, 50), joint rank 3, individual ranks 4 each).
inline SimConfig three_view_config(double angle_deg, double snr, RankMode mode) {
  SimConfig cfg;
  cfg.n = 35;
  cfg.dims = {40, 45, 50};
  cfg.joint_rank = 3;
  cfg.individual_ranks = {4, 4, 4};
  cfg.angle_deg = angle_deg;
  cfg.snr = snr;
  cfg.rank_mode = mode;
  return cfg;
}

}  // namespace ppd

#endif  // PPD_SIMULATION_HPP
