#ifndef PPD_TESTS_SUPPORT_HPP
#define PPD_TESTS_SUPPORT_HPP

// Shared test helpers: hand-rolled generators and brute-force oracles that
// materialize full n x n projectors instead of the library's reduced forms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "ppd/linalg.hpp"
#include "ppd/noise_spectrum.hpp"
#include "ppd/random.hpp"

namespace ppd::test {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Random orthonormal basis via Gram-Schmidt on Gaussian columns (independent
/// of the library's Householder-based sampler).
inline OrthonormalBasis gs_basis(Index n, Index r, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix g = gaussian_matrix(n, r, rng);
  for (Index j = 0; j < r; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < j; ++i) g.col(j) -= g.col(i).dot(g.col(j)) * g.col(i);
    g.col(j).normalize();
  }
  return OrthonormalBasis::from_columns(g);
}

/// Full n x n orthogonal projector.
inline DenseMatrix full_projector(const OrthonormalBasis& u) {
  return u.columns() * u.columns().transpose();
}

/// All singular values of the full matrix by two-sided Jacobi, descending.
inline std::vector<double> full_singular_values(const DenseMatrix& a) {
  const Vector s = Eigen::JacobiSVD<DenseMatrix>(a).singularValues();
  return {s.data(), s.data() + s.size()};
}

/// Spectral norm of a full matrix.
inline double brute_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return full_singular_values(a).front();
}

/// Pair of rank-r bases in R^n whose principal angles are exactly `angles`
/// (radians): u2_c = cos(a) u1_c + sin(a) w_c with w orthogonal to u1.
struct PlantedPair {
  OrthonormalBasis u1, u2;
};

inline PlantedPair planted_pair(Index n, const std::vector<double>& angles, std::uint64_t seed) {
  const Index r = static_cast<Index>(angles.size());
  const OrthonormalBasis frame = gs_basis(n, 2 * r, seed);
  DenseMatrix a = frame.columns().leftCols(r);
  DenseMatrix b(n, r);
  for (Index c = 0; c < r; ++c)
    b.col(c) = std::cos(angles[c]) * a.col(c) + std::sin(angles[c]) * frame.columns().col(r + c);
  return {OrthonormalBasis::from_columns(a), OrthonormalBasis::from_columns(b)};
}

/// Kolmogorov-Smirnov distance between a sample and the continuous part of a law.
inline double ks_distance(std::vector<double> sample, const NoiseSpectrumLaw& law) {
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = noise_continuous_cdf(law, sample[i]);
    d = std::max({d, std::abs(c - static_cast<double>(i) / m), std::abs(c - static_cast<double>(i + 1) / m)});
  }
  return d;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(PPD_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ppd::test

#endif  // PPD_TESTS_SUPPORT_HPP
