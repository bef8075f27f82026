#ifndef PPD_BOOTSTRAP_HPP
#define PPD_BOOTSTRAP_HPP

/*!@file
 * Rotational bootstrap estimate of the joint perturbation bound epsilon_1.
 *
 * Each replicate draws a pair of mutually orthogonal Haar bases, rotates the
 * second so that its principal cosines with the first reproduce the observed
 * spectrum sigma(M_hat), rebuilds both views from the estimated singular
 * values, fresh Haar row factors and the adjusted noise estimate, re-truncates,
 * and measures
 *
 *     || P1 (D1 + D2 + D1 D2) P2 ||_2 = || P1 P1h P2h P2 - P1 P2 ||_2,
 *
 * with Dk = Pkh - Pk (estimated minus replicate truth). Because P1 and P2 are
 * U1 U1^T and U2 U2^T this equals the spectral norm of the r1 x r2 matrix
 * U1^T P1h P2h U2 - U1^T U2. The naive variant skips the rotation.
 */

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppd/linalg.hpp"
#include "ppd/parallel.hpp"
#include "ppd/random.hpp"
#include "ppd/rank_select.hpp"

namespace ppd {

enum class BootstrapVariant { rotational, naive };

inline const char* to_string(BootstrapVariant v) { return v == BootstrapVariant::rotational ? "rotational" : "naive"; }

struct BootstrapConfig {
  std::size_t replicates = 100;
  std::uint64_t seed = kDefaultSeed;
  BootstrapVariant variant = BootstrapVariant::rotational;
  /// Experimental: also bootstrap the noise-side bound epsilon_2.
  bool estimate_epsilon2 = false;
  /// Worker threads for replicates (0 = hardware concurrency). Output does not depend on it.
  std::size_t threads = 1;
};

struct EpsilonEstimate {
  double epsilon1_hat = 0.0;
  std::vector<double> per_replicate;
  BootstrapVariant variant = BootstrapVariant::rotational;
  std::optional<double> epsilon2_hat;
  std::vector<double> per_replicate_epsilon2;
};

/// First r1 and next r2 left singular vectors of a seeded n x n Gaussian matrix.
inline std::pair<OrthonormalBasis, OrthonormalBasis> haar_pair(Index n, Index r1, Index r2, std::uint64_t seed) {
  if (r1 < 0 || r2 < 0 || r1 + r2 > n)
    throw InvalidInput("haar_pair needs r1 + r2 <= n (got " + std::to_string(r1) + " + " + std::to_string(r2) +
                       " > " + std::to_string(n) + ")");
  Rng rng(seed);
  const DenseMatrix g = gaussian_matrix(n, n, rng);
  const Eigen::BDCSVD<DenseMatrix> svd(g, Eigen::ComputeFullU);
  const DenseMatrix& u = svd.matrixU();
  return {OrthonormalBasis::trusted(u.leftCols(r1)), OrthonormalBasis::trusted(u.middleCols(r1, r2))};
}

/// Rotates U2b towards U1b so that the principal cosines equal sigma_m:
/// column i becomes sigma_i U1b_i + sqrt(1 - sigma_i^2) U2b_i for i < min(r1, r2).
inline OrthonormalBasis rotate_align(const OrthonormalBasis& u1b, const OrthonormalBasis& u2b, const Vector& sigma_m) {
  require_same_ambient(u1b, u2b);
  const Index m = std::min(u1b.rank(), u2b.rank());
  if (sigma_m.size() != m) throw InvalidInput("rotate_align needs min(r1, r2) cosines");
  if (m > 0 && (u1b.columns().transpose() * u2b.columns()).cwiseAbs().maxCoeff() > 1e-6)
    throw InvalidInput("rotate_align needs mutually orthogonal bases");
  DenseMatrix out = u2b.columns();
  for (Index i = 0; i < m; ++i) {
    const double c = sigma_m(i);
    if (!(c >= -1e-12 && c <= 1.0 + 1e-12)) throw InvalidInput("principal cosines must lie in [0, 1]");
    const double cc = std::clamp(c, 0.0, 1.0);
    out.col(i) = cc * u1b.columns().col(i) + std::sqrt(1.0 - cc * cc) * u2b.columns().col(i);
  }
  return OrthonormalBasis::trusted(std::move(out));
}

/// Adjusted noise estimate: the truncation residual Y - X_hat plus i.i.d.
/// N(0, sigma_hat^2) noise projected onto the signal directions removed by
/// the truncation.
inline DenseMatrix noise_replicate(const DenseMatrix& y, const DenseMatrix& x_hat, const OrthonormalBasis& signal_basis,
                                   double sigma_hat, std::uint64_t seed) {
  if (y.rows() != x_hat.rows() || y.cols() != x_hat.cols()) throw DimensionMismatch("Y and X_hat differ in shape");
  if (signal_basis.ambient_dim() != y.rows()) throw DimensionMismatch("signal basis does not match Y");
  if (!(sigma_hat >= 0.0)) throw InvalidInput("sigma_hat must be nonnegative");
  DenseMatrix e = y - x_hat;
  if (sigma_hat > 0.0 && !signal_basis.empty()) {
    Rng rng(seed);
    const DenseMatrix g = gaussian_matrix(y.rows(), y.cols(), rng, sigma_hat);
    e.noalias() += signal_basis.columns() * (signal_basis.columns().transpose() * g);
  }
  return e;
}

inline DenseMatrix noise_replicate(const DenseMatrix& y, const DenseMatrix& x_hat, double sigma_hat,
                                   std::uint64_t seed) {
  return noise_replicate(y, x_hat, orthonormalize(x_hat), sigma_hat, seed);
}

namespace detail {

/// Leading r left singular vectors of y (via the n x n Gram matrix when n <= p).
inline OrthonormalBasis leading_left_vectors(const DenseMatrix& y, Index r) {
  const Index n = y.rows();
  if (r == 0) return OrthonormalBasis(n);
  if (n <= y.cols()) {
    const DenseMatrix gram = y * y.transpose();
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(gram);
    return OrthonormalBasis::trusted(eig.eigenvectors().rightCols(r).rowwise().reverse());
  }
  const Eigen::BDCSVD<DenseMatrix> svd(y, Eigen::ComputeThinU);
  return OrthonormalBasis::trusted(svd.matrixU().leftCols(r));
}

/// ||P1 P1h P2h P2 - P1 P2||_2 through r1 x r2 cross-Grams.
inline double joint_perturbation(const OrthonormalBasis& u1, const OrthonormalBasis& u2, const OrthonormalBasis& u1h,
                                 const OrthonormalBasis& u2h) {
  if (u1.empty() || u2.empty()) return 0.0;
  const DenseMatrix& a = u1.columns();
  const DenseMatrix& b = u2.columns();
  const DenseMatrix& ah = u1h.columns();
  const DenseMatrix& bh = u2h.columns();
  const DenseMatrix k = (a.transpose() * ah) * (ah.transpose() * bh) * (bh.transpose() * b) - a.transpose() * b;
  return spectral_norm(k);
}

/// ||P1h P2h - P1 P2||_2 in the frame spanned by all four bases.
inline double noise_perturbation(const OrthonormalBasis& u1, const OrthonormalBasis& u2, const OrthonormalBasis& u1h,
                                 const OrthonormalBasis& u2h) {
  const ReducedFrame frame{&u1, &u2, &u1h, &u2h};
  if (frame.dim() == 0) return 0.0;
  const DenseMatrix diff =
      frame.projector(u1h) * frame.projector(u2h) - frame.projector(u1) * frame.projector(u2);
  return spectral_norm(diff);
}

/// Data for one view entering the bootstrap.
struct BootstrapView {
  Index rank;
  Vector values;          ///< leading singular values of the truncation
  DenseMatrix noise;      ///< adjusted noise estimate E_hat
  Index features;         ///< p
};

struct ReplicateOutcome {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
};

inline ReplicateOutcome run_replicate(Index n, const BootstrapView& v1, const BootstrapView& v2, const Vector& sigma_m,
                                      BootstrapVariant variant, bool with_epsilon2, std::uint64_t seed) {
  auto [u1b, u2b] = haar_pair(n, v1.rank, v2.rank, derive_seed(seed, 0));
  if (variant == BootstrapVariant::rotational) u2b = rotate_align(u1b, u2b, sigma_m);
  Rng rng1(derive_seed(seed, 1));
  Rng rng2(derive_seed(seed, 2));
  const OrthonormalBasis v1b = haar_basis(v1.features, v1.rank, rng1);
  const OrthonormalBasis v2b = haar_basis(v2.features, v2.rank, rng2);
  const DenseMatrix y1 = u1b.columns() * v1.values.asDiagonal() * v1b.columns().transpose() + v1.noise;
  const DenseMatrix y2 = u2b.columns() * v2.values.asDiagonal() * v2b.columns().transpose() + v2.noise;
  const OrthonormalBasis u1h = leading_left_vectors(y1, v1.rank);
  const OrthonormalBasis u2h = leading_left_vectors(y2, v2.rank);
  ReplicateOutcome out;
  out.epsilon1 = std::min(1.0, joint_perturbation(u1b, u2b, u1h, u2h));
  if (with_epsilon2) out.epsilon2 = std::min(1.0, noise_perturbation(u1b, u2b, u1h, u2h));
  return out;
}

}  // namespace detail

namespace detail {

/// Strict order on (view, truncation, sigma) used to put the two views in a
/// canonical order. Both epsilons are symmetric in the views, the replicate
/// construction is not, so the estimate is computed in this order.
inline bool view_precedes(const DenseMatrix& ya, const Truncation& ta, double sa, const DenseMatrix& yb,
                          const Truncation& tb, double sb) {
  if (ta.basis.rank() != tb.basis.rank()) return ta.basis.rank() < tb.basis.rank();
  if (ya.cols() != yb.cols()) return ya.cols() < yb.cols();
  const auto va = std::span(ta.values.data(), static_cast<std::size_t>(ta.values.size()));
  const auto vb = std::span(tb.values.data(), static_cast<std::size_t>(tb.values.size()));
  if (!std::ranges::equal(va, vb)) return std::ranges::lexicographical_compare(va, vb);
  if (sa != sb) return sa < sb;
  const auto da = std::span(ya.data(), static_cast<std::size_t>(ya.size()));
  const auto db = std::span(yb.data(), static_cast<std::size_t>(yb.size()));
  return std::ranges::lexicographical_compare(da, db);
}

}  // namespace detail

/// Bootstrap estimate of epsilon_1 from two views and their rank-r truncations.
/// sigma1/sigma2 are the noise-level estimates used to refill the truncated
/// directions. The result does not depend on the order of the two views.
inline EpsilonEstimate estimate_epsilon1(const DenseMatrix& y1, const DenseMatrix& y2, const Truncation& t1,
                                         const Truncation& t2, double sigma1, double sigma2,
                                         const BootstrapConfig& cfg) {
  const Index n = y1.rows();
  if (y2.rows() != n) throw DimensionMismatch("views do not share the sample dimension");
  if (cfg.replicates < 1) throw InvalidInput("bootstrap needs at least one replicate");
  const Index r1 = t1.basis.rank();
  const Index r2 = t2.basis.rank();
  if (r1 + r2 > n)
    throw BootstrapInfeasible("marginal ranks " + std::to_string(r1) + " + " + std::to_string(r2) +
                              " exceed the sample size " + std::to_string(n) + "; lower the ranks (--ranks)");
  if (detail::view_precedes(y2, t2, sigma2, y1, t1, sigma1)) return estimate_epsilon1(y2, y1, t2, t1, sigma2, sigma1, cfg);

  EpsilonEstimate est;
  est.variant = cfg.variant;
  est.per_replicate.assign(cfg.replicates, 0.0);
  if (cfg.estimate_epsilon2) est.per_replicate_epsilon2.assign(cfg.replicates, 0.0);

  if (r1 > 0 && r2 > 0) {
    const Vector sigma_m = principal_spectrum(t1.basis, t2.basis);
    const detail::BootstrapView v1{r1, t1.values,
                                   noise_replicate(y1, t1.x_hat, t1.basis, sigma1, derive_seed(cfg.seed, 2, 0)),
                                   y1.cols()};
    const detail::BootstrapView v2{r2, t2.values,
                                   noise_replicate(y2, t2.x_hat, t2.basis, sigma2, derive_seed(cfg.seed, 2, 1)),
                                   y2.cols()};
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t b) {
      const auto outcome = detail::run_replicate(n, v1, v2, sigma_m, cfg.variant, cfg.estimate_epsilon2,
                                                 derive_seed(cfg.seed, 1, b));
      est.per_replicate[b] = outcome.epsilon1;
      if (cfg.estimate_epsilon2) est.per_replicate_epsilon2[b] = outcome.epsilon2;
    });
  }

  double sum = 0.0;
  for (double v : est.per_replicate) sum += v;
  est.epsilon1_hat = sum / static_cast<double>(cfg.replicates);
  if (cfg.estimate_epsilon2) {
    double s2 = 0.0;
    for (double v : est.per_replicate_epsilon2) s2 += v;
    est.epsilon2_hat = s2 / static_cast<double>(cfg.replicates);
  }
  return est;
}

/// Same pipeline and seed stream as estimate_epsilon1 without the alignment step.
inline EpsilonEstimate estimate_epsilon1_naive(const DenseMatrix& y1, const DenseMatrix& y2, const Truncation& t1,
                                               const Truncation& t2, double sigma1, double sigma2,
                                               BootstrapConfig cfg) {
  cfg.variant = BootstrapVariant::naive;
  return estimate_epsilon1(y1, y2, t1, t2, sigma1, sigma2, cfg);
}

}  // namespace ppd

#endif  // PPD_BOOTSTRAP_HPP
