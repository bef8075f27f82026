#ifndef PPD_NOISE_SPECTRUM_HPP
#define PPD_NOISE_SPECTRUM_HPP

/*!@file
 * Asymptotic spectrum of the product of two independent Haar projections.
 *
 * For projections of ranks r1, r2 in R^n with q_k = r_k / n, the squared
 * singular values lambda of P1 P2 follow (n -> infinity)
 *
 *     f(lambda) = sqrt((l+ - lambda)(lambda - l-)) / (2 pi lambda (1 - lambda))
 *     l+- = q1 + q2 - 2 q1 q2 +- 2 sqrt(q1 q2 (1 - q1)(1 - q2))
 *
 * plus point masses A0 = 1 - min(q1, q2) at 0 and A1 = max(q1 + q2 - 1, 0) at 1.
 * The square root of l+ is the threshold separating random alignments from signal.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "ppd/linalg.hpp"
#include "ppd/random.hpp"

namespace ppd {

struct NoiseSpectrumLaw {
  double q1 = 0.0;
  double q2 = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double mass_at_zero = 1.0;
  double mass_at_one = 0.0;

  friend bool operator==(const NoiseSpectrumLaw&, const NoiseSpectrumLaw&) = default;
};

inline NoiseSpectrumLaw noise_law(double q1, double q2) {
  if (!(q1 >= 0.0 && q1 <= 1.0 && q2 >= 0.0 && q2 <= 1.0))
    throw InvalidInput("rank-to-dimension ratios must lie in [0, 1]");
  NoiseSpectrumLaw law;
  law.q1 = q1;
  law.q2 = q2;
  // (sqrt(q1 (1 - q2)) +- sqrt(q2 (1 - q1)))^2 expands to the edge formula and
  // keeps the symmetric lower edge at exactly zero.
  const double u = std::sqrt(q1 * (1.0 - q2));
  const double v = std::sqrt(q2 * (1.0 - q1));
  law.lambda_plus = std::clamp((u + v) * (u + v), 0.0, 1.0);
  law.lambda_minus = std::clamp((u - v) * (u - v), 0.0, law.lambda_plus);
  law.mass_at_zero = 1.0 - std::min(q1, q2);
  law.mass_at_one = std::max(q1 + q2 - 1.0, 0.0);
  // Without a continuous part the edges collapse onto the atom carrying the
  // nonzero spectrum: nothing when a ratio is 0, exact ones when a ratio is 1.
  if (std::min(q1, q2) == 0.0) {
    law.lambda_minus = law.lambda_plus = 0.0;
  } else if (std::max(q1, q2) == 1.0) {
    law.lambda_minus = law.lambda_plus = 1.0;
  }
  return law;
}

inline NoiseSpectrumLaw noise_law_for_ranks(Index n, Index r1, Index r2) {
  if (n < 1) throw InvalidInput("ambient dimension must be positive");
  return noise_law(static_cast<double>(r1) / static_cast<double>(n), static_cast<double>(r2) / static_cast<double>(n));
}

/// Continuous density on the squared scale; zero outside (l-, l+).
inline double noise_density(const NoiseSpectrumLaw& law, double lambda) {
  if (!(lambda > law.lambda_minus && lambda < law.lambda_plus)) return 0.0;
  if (lambda <= 0.0 || lambda >= 1.0) return 0.0;
  const double num = std::sqrt((law.lambda_plus - lambda) * (lambda - law.lambda_minus));
  return num / (2.0 * std::numbers::pi * lambda * (1.0 - lambda));
}

/// Density on the singular-value scale, g(s) = 2 s f(s^2).
inline double noise_density_sv(const NoiseSpectrumLaw& law, double s) { return 2.0 * s * noise_density(law, s * s); }

/// sqrt(lambda_plus): largest singular value expected from random alignment.
inline double singular_value_threshold(const NoiseSpectrumLaw& law) { return std::sqrt(law.lambda_plus); }

/// Total mass of the continuous part, 1 - A0 - A1.
inline double continuous_mass(const NoiseSpectrumLaw& law) {
  return std::max(0.0, 1.0 - law.mass_at_zero - law.mass_at_one);
}

/// Integral of the continuous density from l- to `lambda`, by composite
/// Simpson in the angle t with lambda(t) = l- + (l+ - l-)(1 - cos t) / 2.
inline double noise_continuous_integral(const NoiseSpectrumLaw& law, double lambda, int panels = 4000) {
  const double lo = law.lambda_minus;
  const double hi = law.lambda_plus;
  if (!(hi > lo) || lambda <= lo) return 0.0;
  const double half = 0.5 * (hi - lo);
  const double x = std::min(lambda, hi);
  const double theta = std::acos(std::clamp(1.0 - (x - lo) / half, -1.0, 1.0));
  panels += panels % 2;
  // The square-root factor times d(lambda) is half^2 sin^2 t dt. The remaining
  // 1 / (lambda (1 - lambda)) is singular only at an edge sitting at 0 or 1,
  // where sin^2 t vanishes at the same rate; the limit is taken by nudging t.
  const auto integrand = [&](double t) {
    const double tt = std::clamp(t, 1e-7, std::numbers::pi - 1e-7);
    const double l = lo + half * (1.0 - std::cos(tt));
    const double s = std::sin(tt);
    return half * half * s * s / (2.0 * std::numbers::pi * l * (1.0 - l));
  };
  const double h = theta / panels;
  double acc = integrand(0.0) + integrand(theta);
  for (int i = 1; i < panels; ++i) acc += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// CDF of the continuous part renormalized to a probability distribution.
inline double noise_continuous_cdf(const NoiseSpectrumLaw& law, double lambda) {
  const double total = noise_continuous_integral(law, law.lambda_plus);
  if (!(total > 0.0)) return lambda >= law.lambda_plus ? 1.0 : 0.0;
  return std::clamp(noise_continuous_integral(law, lambda) / total, 0.0, 1.0);
}

/// Squared singular values of U1^T U2 for independent Haar bases of ranks r1, r2
/// in R^n, descending; min(r1, r2) values.
inline Vector sample_noise_spectrum(Index n, Index r1, Index r2, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("ambient dimension must be positive");
  if (r1 < 0 || r2 < 0 || r1 > n || r2 > n) throw InvalidInput("subspace rank exceeds ambient dimension");
  Rng rng(seed);
  const OrthonormalBasis u1 = haar_basis(n, r1, rng);
  const OrthonormalBasis u2 = haar_basis(n, r2, rng);
  const Vector s = principal_spectrum(u1, u2);
  return s.cwiseProduct(s);
}

}  // namespace ppd

#endif  // PPD_NOISE_SPECTRUM_HPP
