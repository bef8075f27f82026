#ifndef PPD_LINALG_HPP
#define PPD_LINALG_HPP

/*!@file
 * Dense matrix and subspace primitives.
 *
 * Every subspace is carried as an orthonormal basis; projectors P = U U^T are
 * never formed. Spectra of products of projectors are computed through the
 * small cross-Gram matrices U1^T U2, whose singular values are the cosines of
 * the principal angles between the two column spaces.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "ppd/error.hpp"

namespace ppd {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultDropTol = 1e-12;
inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kOrthonormalityTol = 1e-8;

inline void require_finite(const DenseMatrix& a, const char* what = "matrix") {
  if (!a.allFinite()) throw InvalidInput(std::string(what) + " contains non-finite entries");
}

/// n x r matrix with orthonormal columns. Rank 0 represents the trivial subspace {0}.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;

  /// Trivial subspace of R^n.
  explicit OrthonormalBasis(Index ambient_dim) : columns_(ambient_dim, 0) {}

  /// Validates C^T C = I within `tol` per entry.
  static OrthonormalBasis from_columns(DenseMatrix columns, double tol = kOrthonormalityTol) {
    require_finite(columns, "basis");
    const Index r = columns.cols();
    if (r > columns.rows()) throw InvalidInput("basis has more columns than rows");
    if (r > 0) {
      const double dev = (columns.transpose() * columns - DenseMatrix::Identity(r, r)).cwiseAbs().maxCoeff();
      if (dev > tol) throw InvalidInput("columns are not orthonormal (max deviation " + std::to_string(dev) + ")");
    }
    return OrthonormalBasis(std::move(columns), Trusted{});
  }

  /// For columns produced by an orthogonal factorization; no check.
  static OrthonormalBasis trusted(DenseMatrix columns) { return OrthonormalBasis(std::move(columns), Trusted{}); }

  Index ambient_dim() const noexcept { return columns_.rows(); }
  Index rank() const noexcept { return columns_.cols(); }
  bool empty() const noexcept { return columns_.cols() == 0; }
  const DenseMatrix& columns() const noexcept { return columns_; }

  /// Basis spanned by the first `count` columns.
  OrthonormalBasis leading(Index count) const {
    return OrthonormalBasis(columns_.leftCols(std::min(count, rank())), Trusted{});
  }

 private:
  struct Trusted {};
  OrthonormalBasis(DenseMatrix columns, Trusted) : columns_(std::move(columns)) {}
  DenseMatrix columns_;
};

struct CompactSvd {
  OrthonormalBasis left;
  Vector singular_values;
  OrthonormalBasis right;
};

namespace detail {

inline Eigen::BDCSVD<DenseMatrix> thin_svd(const DenseMatrix& a) {
  return Eigen::BDCSVD<DenseMatrix>(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline Vector singular_values(const DenseMatrix& a) {
  if (a.size() == 0) return Vector(0);
  return Eigen::BDCSVD<DenseMatrix>(a).singularValues();
}

/// Number of leading values strictly above tol * values[0].
inline Index numerical_rank(const Vector& s, double tol) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  const double cut = tol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

}  // namespace detail

/// Compact SVD of `a`; singular values <= drop_tol * sigma_1 are discarded.
inline CompactSvd compact_svd(const DenseMatrix& a, double drop_tol = kDefaultDropTol) {
  require_finite(a);
  if (drop_tol < 0.0) throw InvalidInput("drop_tol must be nonnegative");
  if (a.size() == 0) return {OrthonormalBasis(a.rows()), Vector(0), OrthonormalBasis(a.cols())};
  const auto svd = detail::thin_svd(a);
  const Index r = detail::numerical_rank(svd.singularValues(), drop_tol);
  return {OrthonormalBasis::trusted(svd.matrixU().leftCols(r)), svd.singularValues().head(r),
          OrthonormalBasis::trusted(svd.matrixV().leftCols(r))};
}

/// Orthonormal basis of col(a); numerical rank counts sigma_i > rank_tol * sigma_1.
inline OrthonormalBasis orthonormalize(const DenseMatrix& a, double rank_tol = kDefaultRankTol) {
  require_finite(a);
  if (a.cols() == 0) return OrthonormalBasis(a.rows());
  const Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU);
  const Index r = detail::numerical_rank(svd.singularValues(), rank_tol);
  return OrthonormalBasis::trusted(svd.matrixU().leftCols(r));
}

/// Largest singular value; 0 for empty matrices.
inline double spectral_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<DenseMatrix>(a).singularValues()(0);
}

inline void require_same_ambient(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("bases live in R^" + std::to_string(a.ambient_dim()) + " and R^" +
                            std::to_string(b.ambient_dim()));
}

/// Cosines of the principal angles between col(U1) and col(U2), descending,
/// min(r1, r2) values clamped to [0, 1]. Equal to the nonzero spectrum of P1 P2.
inline Vector principal_spectrum(const OrthonormalBasis& u1, const OrthonormalBasis& u2) {
  require_same_ambient(u1, u2);
  if (u1.empty() || u2.empty()) return Vector(0);
  const DenseMatrix gram = u1.columns().transpose() * u2.columns();
  Vector s = Eigen::JacobiSVD<DenseMatrix>(gram).singularValues();
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

/// ||P1 - P2||_2. For equal ranks this is the sine of the largest principal
/// angle, computed as ||(I - P1) U2||_2 to keep precision near zero; differing
/// ranks give 1.
inline double subspace_distance(const OrthonormalBasis& u1, const OrthonormalBasis& u2) {
  require_same_ambient(u1, u2);
  if (u1.rank() != u2.rank()) return 1.0;
  if (u1.empty()) return 0.0;
  const DenseMatrix residual = u2.columns() - u1.columns() * (u1.columns().transpose() * u2.columns());
  return std::min(1.0, spectral_norm(residual));
}

/// Horizontal concatenation of bases (not orthonormal in general).
inline DenseMatrix stack_columns(const std::vector<const OrthonormalBasis*>& bases) {
  if (bases.empty()) return DenseMatrix(0, 0);
  const Index n = bases.front()->ambient_dim();
  Index total = 0;
  for (const auto* b : bases) {
    if (b->ambient_dim() != n) throw DimensionMismatch("bases do not share an ambient dimension");
    total += b->rank();
  }
  DenseMatrix out(n, total);
  Index at = 0;
  for (const auto* b : bases) {
    out.middleCols(at, b->rank()) = b->columns();
    at += b->rank();
  }
  return out;
}

/// Orthonormal frame W spanning the union of several subspaces. Any polynomial
/// in their projectors (and in I - P for those projectors) that annihilates
/// span(W)^perp has the same nonzero spectrum as its compression W^T (.) W, so
/// spectral norms are evaluated on a (sum of ranks)-dimensional problem.
class ReducedFrame {
 public:
  explicit ReducedFrame(std::initializer_list<const OrthonormalBasis*> bases)
      : ReducedFrame(std::vector<const OrthonormalBasis*>(bases)) {}

  explicit ReducedFrame(const std::vector<const OrthonormalBasis*>& bases)
      : frame_(orthonormalize(stack_columns(bases))) {}

  Index dim() const noexcept { return frame_.rank(); }
  const OrthonormalBasis& basis() const noexcept { return frame_; }

  /// Coordinates of the columns of `u` in the frame.
  DenseMatrix coords(const OrthonormalBasis& u) const { return frame_.columns().transpose() * u.columns(); }

  /// Compressed projector W^T P_u W.
  DenseMatrix projector(const OrthonormalBasis& u) const {
    const DenseMatrix c = coords(u);
    return c * c.transpose();
  }

  DenseMatrix identity() const { return DenseMatrix::Identity(dim(), dim()); }

  /// Lift frame coordinates back to R^n.
  DenseMatrix lift(const DenseMatrix& local) const { return frame_.columns() * local; }

 private:
  OrthonormalBasis frame_;
};

/// Median of a sample (average of the two middle values for even sizes).
inline double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

}  // namespace ppd

#endif  // PPD_LINALG_HPP
