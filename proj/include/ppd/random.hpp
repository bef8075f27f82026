#ifndef PPD_RANDOM_HPP
#define PPD_RANDOM_HPP

// Seeded random primitives. Distributions come from Boost.Random so streams
// are identical across standard library implementations.

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <random>

#include "ppd/linalg.hpp"

namespace ppd {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 42;

/// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: depends only on (parent, index), never on how
/// many siblings were drawn before, so serial and parallel runs agree.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(parent, a), b);
}

/// i.i.d. N(0, sd^2) entries, filled column by column.
inline DenseMatrix gaussian_matrix(Index rows, Index cols, Rng& rng, double sd = 1.0) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = sd * normal(rng);
  return m;
}

/// Haar-distributed n x r orthonormal basis: Q factor of a Gaussian matrix with
/// the signs fixed so that diag(R) > 0.
inline OrthonormalBasis haar_basis(Index n, Index r, Rng& rng) {
  if (r < 0 || r > n) throw InvalidInput("Haar basis rank exceeds ambient dimension");
  if (r == 0) return OrthonormalBasis(n);
  const DenseMatrix g = gaussian_matrix(n, r, rng);
  const Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, r);
  const auto& packed = qr.matrixQR();
  for (Index j = 0; j < r; ++j)
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  return OrthonormalBasis::trusted(std::move(q));
}

/// Uniform draw on [lo, hi); a degenerate range returns lo and still advances
/// the stream by one draw (the Boost distribution never terminates on it).
inline double uniform_real(Rng& rng, double lo, double hi) {
  if (lo == hi) {
    rng();
    return lo;
  }
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return boost::random::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace ppd

#endif  // PPD_RANDOM_HPP
