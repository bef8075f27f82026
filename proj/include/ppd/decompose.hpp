#ifndef PPD_DECOMPOSE_HPP
#define PPD_DECOMPOSE_HPP

/*!@file
 * Product-of-projections decomposition of matched-sample views into joint,
 * individual and noise subspaces.
 *
 * Steps for two views:
 *  1. estimate each signal column space by truncated SVD (automatic or given ranks);
 *  2. bootstrap epsilon_1 (rotational bootstrap);
 *  3. noise bound lambda_+ with q_k = rank_k / n;
 *  4. joint rank = #{ sigma(P1h P2h) > max(sqrt(lambda_+), 1 - eps1_hat) };
 *  5. joint basis = leading eigenvectors of (P1h P2h + P2h P1h) / 2;
 *  6. individual bases = leading left singular vectors of (I - P_joint) Pkh.
 *
 * With K > 2 views, step 2-4 run on every pair and the smallest pairwise joint
 * rank is kept; step 5 averages the K-fold projector product over all orderings.
 * All spectral work happens inside the span of the estimated bases.
 */

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ppd/bootstrap.hpp"
#include "ppd/linalg.hpp"
#include "ppd/noise_spectrum.hpp"
#include "ppd/rank_select.hpp"

namespace ppd {

struct ProductSpectrum {
  Vector values;                    ///< sigma(M_hat), descending, in [0, 1]
  double bootstrap_threshold = 1.0; ///< 1 - eps1_hat
  double noise_threshold = 0.0;     ///< sqrt(lambda_+)

  double cutoff() const noexcept { return std::max(bootstrap_threshold, noise_threshold); }
};

inline ProductSpectrum product_spectrum(const OrthonormalBasis& u1_hat, const OrthonormalBasis& u2_hat,
                                        double eps1_hat, double lambda_plus) {
  if (!(eps1_hat >= 0.0 && eps1_hat <= 1.0) || !(lambda_plus >= 0.0 && lambda_plus <= 1.0))
    throw InvalidInput("thresholds must lie in [0, 1]");
  return {principal_spectrum(u1_hat, u2_hat), 1.0 - eps1_hat, std::sqrt(lambda_plus)};
}

/// Cosines within this distance of 1 are numerically equal to 1.
inline constexpr double kUnitCosineTolerance = 1e-12;

/// Number of values strictly above both thresholds. The cutoff never exceeds
/// 1 - kUnitCosineTolerance, so exactly shared directions count as joint even
/// when a near-zero eps1_hat lands on their rounded cosines.
inline Index joint_rank(const ProductSpectrum& spectrum) {
  const double cut = std::min(spectrum.cutoff(), 1.0 - kUnitCosineTolerance);
  Index r = 0;
  for (Index i = 0; i < spectrum.values.size(); ++i)
    if (spectrum.values(i) > cut) ++r;
  return r;
}

/// How the K-fold projector product is symmetrized for the joint basis.
enum class ProductAveraging {
  all_orderings,  ///< average over all K! orderings
  pairwise,       ///< average of P_i P_j over ordered pairs i != j
};

inline constexpr std::size_t kMaxViewsForAllOrderings = 5;

/// Leading r_joint eigenvectors (by algebraic eigenvalue) of the symmetrized
/// product of the projectors onto the given subspaces.
inline OrthonormalBasis joint_basis(const std::vector<const OrthonormalBasis*>& bases, Index r_joint,
                                    ProductAveraging averaging = ProductAveraging::all_orderings) {
  if (bases.size() < 2) throw InvalidInput("joint basis needs at least two subspaces");
  const Index n = bases.front()->ambient_dim();
  Index min_rank = bases.front()->rank();
  for (const auto* b : bases) {
    require_same_ambient(*bases.front(), *b);
    min_rank = std::min(min_rank, b->rank());
  }
  if (r_joint < 0 || r_joint > min_rank)
    throw InvalidInput("joint rank " + std::to_string(r_joint) + " exceeds the smallest marginal rank " +
                       std::to_string(min_rank));
  if (averaging == ProductAveraging::all_orderings && bases.size() > kMaxViewsForAllOrderings)
    throw InvalidInput("averaging over all orderings of " + std::to_string(bases.size()) +
                       " views is too costly; use the pairwise average");
  if (r_joint == 0) return OrthonormalBasis(n);

  const ReducedFrame frame(bases);
  std::vector<DenseMatrix> proj;
  proj.reserve(bases.size());
  for (const auto* b : bases) proj.push_back(frame.projector(*b));

  const Index d = frame.dim();
  DenseMatrix s = DenseMatrix::Zero(d, d);
  std::size_t terms = 0;
  if (averaging == ProductAveraging::all_orderings) {
    std::vector<std::size_t> order(bases.size());
    std::iota(order.begin(), order.end(), 0);
    do {
      DenseMatrix prod = proj[order[0]];
      for (std::size_t i = 1; i < order.size(); ++i) prod = prod * proj[order[i]];
      s += prod;
      ++terms;
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    for (std::size_t i = 0; i < proj.size(); ++i)
      for (std::size_t j = 0; j < proj.size(); ++j)
        if (i != j) {
          s += proj[i] * proj[j];
          ++terms;
        }
  }
  s /= static_cast<double>(terms);
  s = 0.5 * (s + s.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(s);
  const DenseMatrix top = eig.eigenvectors().rightCols(r_joint).rowwise().reverse();
  return OrthonormalBasis::trusted(frame.lift(top));
}

inline OrthonormalBasis joint_basis(const OrthonormalBasis& u1_hat, const OrthonormalBasis& u2_hat, Index r_joint) {
  return joint_basis({&u1_hat, &u2_hat}, r_joint);
}

/// Leading rk - r_joint left singular vectors of (I - P_joint) P_k. They lie in
/// the orthogonal complement of the joint estimate by construction.
inline OrthonormalBasis individual_basis(const OrthonormalBasis& uk_hat, const OrthonormalBasis& joint, Index rk,
                                         Index r_joint) {
  require_same_ambient(uk_hat, joint);
  if (rk != uk_hat.rank()) throw InvalidInput("marginal rank does not match the basis");
  if (r_joint != joint.rank()) throw InvalidInput("joint rank does not match the joint basis");
  if (r_joint > rk) throw InvalidInput("joint rank exceeds the marginal rank");
  const Index m = rk - r_joint;
  if (m == 0) return OrthonormalBasis(uk_hat.ambient_dim());
  DenseMatrix c = uk_hat.columns();
  if (!joint.empty()) c -= joint.columns() * (joint.columns().transpose() * c);
  const Eigen::JacobiSVD<DenseMatrix> svd(c, Eigen::ComputeThinU);
  return OrthonormalBasis::trusted(svd.matrixU().leftCols(m));
}

struct DecomposeOptions {
  std::optional<std::vector<Index>> ranks;  ///< nullopt selects ranks automatically
  BootstrapConfig bootstrap;
  ProductAveraging averaging = ProductAveraging::all_orderings;
};

/// Joint-rank analysis of one pair of views.
struct PairAnalysis {
  std::size_t first = 0;
  std::size_t second = 1;
  ProductSpectrum spectrum;
  NoiseSpectrumLaw law;
  EpsilonEstimate epsilon;
  Index joint_rank = 0;
};

struct DecompositionResult {
  OrthonormalBasis joint;
  std::vector<OrthonormalBasis> individuals;
  std::vector<OrthonormalBasis> marginal_bases;
  std::vector<Index> marginal_ranks;
  Index joint_rank = 0;
  ProductSpectrum spectrum;      ///< spectrum of the pair that fixed the joint rank
  NoiseSpectrumLaw noise_law;    ///< law behind spectrum.noise_threshold
  double epsilon1_hat = 0.0;
  std::optional<double> epsilon2_hat;
  std::vector<double> sigma_hats;
  std::vector<PairAnalysis> pairs;
  std::size_t reporting_pair = 0;
};

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> view_pairs(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace detail

/// Decomposition of K >= 2 views sharing their rows.
inline DecompositionResult decompose_multiview(const std::vector<DenseMatrix>& views, const DecomposeOptions& options) {
  const std::size_t k = views.size();
  if (k < 2) throw InvalidInput("decomposition needs at least two views");
  const Index n = views.front().rows();
  for (const auto& y : views) {
    if (y.rows() != n)
      throw DimensionMismatch("views have " + std::to_string(n) + " and " + std::to_string(y.rows()) + " rows");
    if (y.rows() < 1 || y.cols() < 1) throw InvalidInput("empty view");
    require_finite(y, "view");
  }
  if (options.averaging == ProductAveraging::all_orderings && k > kMaxViewsForAllOrderings)
    throw InvalidInput("averaging over all orderings of " + std::to_string(k) +
                       " views is too costly; use the pairwise average");
  if (options.ranks && options.ranks->size() != k)
    throw InvalidInput("expected " + std::to_string(k) + " ranks, got " + std::to_string(options.ranks->size()));

  DecompositionResult result;
  std::vector<Truncation> trunc;
  trunc.reserve(k);
  for (std::size_t v = 0; v < k; ++v) {
    const Vector spectrum = detail::singular_values(views[v]);
    const RankSelection sel = select_rank_from_spectrum(spectrum, n, views[v].cols());
    const Index rank = options.ranks ? (*options.ranks)[v] : sel.rank;
    trunc.push_back(truncate(views[v], rank));
    result.sigma_hats.push_back(sel.sigma_hat);
    result.marginal_ranks.push_back(rank);
    result.marginal_bases.push_back(trunc.back().basis);
  }

  const auto pairs = detail::view_pairs(k);
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto [i, j] = pairs[pi];
    PairAnalysis pa;
    pa.first = i;
    pa.second = j;
    BootstrapConfig boot = options.bootstrap;
    boot.seed = derive_seed(options.bootstrap.seed, 3, pi);
    pa.epsilon = estimate_epsilon1(views[i], views[j], trunc[i], trunc[j], result.sigma_hats[i],
                                   result.sigma_hats[j], boot);
    pa.law = noise_law_for_ranks(n, result.marginal_ranks[i], result.marginal_ranks[j]);
    pa.spectrum = product_spectrum(trunc[i].basis, trunc[j].basis, std::clamp(pa.epsilon.epsilon1_hat, 0.0, 1.0),
                                   pa.law.lambda_plus);
    pa.joint_rank = joint_rank(pa.spectrum);
    result.pairs.push_back(std::move(pa));
  }

  result.reporting_pair = 0;
  for (std::size_t pi = 1; pi < result.pairs.size(); ++pi)
    if (result.pairs[pi].joint_rank < result.pairs[result.reporting_pair].joint_rank) result.reporting_pair = pi;
  const PairAnalysis& rep = result.pairs[result.reporting_pair];
  result.joint_rank = rep.joint_rank;
  result.spectrum = rep.spectrum;
  result.noise_law = rep.law;
  result.epsilon1_hat = rep.epsilon.epsilon1_hat;
  result.epsilon2_hat = rep.epsilon.epsilon2_hat;

  std::vector<const OrthonormalBasis*> bases;
  for (const auto& b : result.marginal_bases) bases.push_back(&b);
  result.joint = result.joint_rank == 0 ? OrthonormalBasis(n) : joint_basis(bases, result.joint_rank, options.averaging);
  for (std::size_t v = 0; v < k; ++v)
    result.individuals.push_back(
        individual_basis(result.marginal_bases[v], result.joint, result.marginal_ranks[v], result.joint_rank));
  return result;
}

inline DecompositionResult decompose(const DenseMatrix& y1, const DenseMatrix& y2, const DecomposeOptions& options) {
  return decompose_multiview({y1, y2}, options);
}

}  // namespace ppd

#endif  // PPD_DECOMPOSE_HPP
