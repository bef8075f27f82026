#ifndef PPD_RANK_SELECT_HPP
#define PPD_RANK_SELECT_HPP

/*!@file
 * Marginal signal rank selection by singular value hard thresholding.
 *
 * The noise level is estimated robustly as the median singular value of Y
 * divided by the median singular value of a unit-variance noise matrix of the
 * same shape under the Marchenko-Pastur law. The threshold is
 *
 *     coeff(beta) * y_med,   coeff(beta) = 0.56 beta^3 - 0.95 beta^2 + 1.82 beta + 1.43,
 *
 * with beta = min(n, p) / max(n, p), the usual unknown-noise hard threshold.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ppd/linalg.hpp"

namespace ppd {

struct RankSelection {
  Index rank = 0;
  double threshold = 0.0;   ///< on the singular-value scale of Y
  double sigma_hat = 0.0;   ///< noise standard deviation estimate
  double beta = 1.0;        ///< min(n, p) / max(n, p)
  double mp_median = 1.0;   ///< median singular value of unit-variance noise
};

inline double aspect_ratio(Index n, Index p) {
  return static_cast<double>(std::min(n, p)) / static_cast<double>(std::max(n, p));
}

/// Polynomial approximation of the optimal hard-threshold coefficient for unknown noise.
inline double threshold_coefficient(double beta) {
  return 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
}

namespace detail {

/// Marchenko-Pastur eigenvalue law with ratio beta <= 1 and unit variance,
/// parametrized by x(t) = a + (b - a)(1 - cos t) / 2 so the square-root edges
/// (and the 1/x pole at beta = 1) cancel analytically.
struct MarchenkoPastur {
  double beta, a, b;

  explicit MarchenkoPastur(double beta_)
      : beta(beta_), a((1.0 - std::sqrt(beta_)) * (1.0 - std::sqrt(beta_))),
        b((1.0 + std::sqrt(beta_)) * (1.0 + std::sqrt(beta_))) {}

  double x(double t) const { return a + 0.5 * (b - a) * (1.0 - std::cos(t)); }

  double integrand(double t) const {
    const double half = 0.5 * (b - a);
    const double s = std::sin(t);
    const double xt = x(t);
    // a = 0 only when beta = 1; at t = 0, sin^2 t / x(t) -> 2 / half.
    if (xt <= 0.0) return half / (std::numbers::pi * beta);
    return half * half * s * s / (2.0 * std::numbers::pi * beta * xt);
  }

  /// Composite Simpson on [0, theta] with `panels` (even) subintervals.
  double cdf_angle(double theta, int panels) const {
    if (theta <= 0.0) return 0.0;
    const double h = theta / panels;
    double acc = integrand(0.0) + integrand(theta);
    for (int i = 1; i < panels; ++i) acc += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
  }
};

}  // namespace detail

/// Median of the Marchenko-Pastur eigenvalue law with ratio beta in (0, 1].
/// `panels` controls the quadrature grid; bisection stops at 1e-12 in angle.
inline double mp_median_eigenvalue(double beta, int panels = 2000) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("Marchenko-Pastur ratio must lie in (0, 1]");
  panels += panels % 2;
  const detail::MarchenkoPastur law(beta);
  double lo = 0.0;
  double hi = std::numbers::pi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (law.cdf_angle(mid, panels) < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  return law.x(0.5 * (lo + hi));
}

/// Median singular value of an n x p matrix with i.i.d. unit-variance entries.
inline double mp_median_sv(Index n, Index p, int panels = 2000) {
  if (n < 1 || p < 1) throw InvalidInput("matrix dimensions must be positive");
  return std::sqrt(static_cast<double>(std::max(n, p)) * mp_median_eigenvalue(aspect_ratio(n, p), panels));
}

/// Robust noise level: median(singular_values) / mp_median_sv(n, p).
inline double estimate_noise_sigma(const Vector& singular_values, Index n, Index p) {
  if (singular_values.size() == 0) throw InvalidInput("empty spectrum");
  if (singular_values.size() != std::min(n, p))
    throw InvalidInput("noise estimate needs the full spectrum of min(n, p) singular values");
  const std::vector<double> values(singular_values.data(), singular_values.data() + singular_values.size());
  return median(values) / mp_median_sv(n, p);
}

/// Rank selection from an already computed full spectrum of an n x p matrix.
inline RankSelection select_rank_from_spectrum(const Vector& singular_values, Index n, Index p) {
  RankSelection out;
  out.beta = aspect_ratio(n, p);
  out.mp_median = mp_median_sv(n, p);
  out.sigma_hat = estimate_noise_sigma(singular_values, n, p);
  out.threshold = threshold_coefficient(out.beta) * out.sigma_hat * out.mp_median;
  out.rank = 0;
  for (Index i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > out.threshold) ++out.rank;
  return out;
}

inline RankSelection select_rank(const DenseMatrix& y) {
  require_finite(y, "data matrix");
  return select_rank_from_spectrum(detail::singular_values(y), y.rows(), y.cols());
}

/// Best rank-r approximation of Y and its factors.
struct Truncation {
  DenseMatrix x_hat;
  OrthonormalBasis basis;  ///< leading left singular vectors
  Vector values;           ///< leading singular values
  OrthonormalBasis right;  ///< leading right singular vectors
  Vector spectrum;         ///< all min(n, p) singular values of Y
};

inline Truncation truncate(const DenseMatrix& y, Index rank) {
  require_finite(y, "data matrix");
  if (rank < 0 || rank > std::min(y.rows(), y.cols()))
    throw InvalidInput("truncation rank " + std::to_string(rank) + " exceeds min(n, p)");
  const auto svd = detail::thin_svd(y);
  Truncation t;
  t.spectrum = svd.singularValues();
  t.values = t.spectrum.head(rank);
  t.basis = OrthonormalBasis::trusted(svd.matrixU().leftCols(rank));
  t.right = OrthonormalBasis::trusted(svd.matrixV().leftCols(rank));
  t.x_hat = t.basis.columns() * t.values.asDiagonal() * t.right.columns().transpose();
  return t;
}

}  // namespace ppd

#endif  // PPD_RANK_SELECT_HPP
