#ifndef PPD_ORACLE_HPP
#define PPD_ORACLE_HPP

/*!@file
 * Deterministic perturbation quantities for planted (simulated) structures.
 *
 * With P_k the projector onto the true col(X_k) and Ph_k onto the estimate,
 *
 *   eps1 = || P1 Ph1 Ph2 P2 - P1 P2 ||_2       (downward shift of joint values)
 *   eps2 = || Ph1 Ph2 - P1 P2 ||_2             (upward shift of noise values)
 *
 * i.e. || P1 (D1 + D2 + D1 D2) P2 || and || P1 D2 + D1 P2 + D1 D2 || with
 * Dk = Ph_k - P_k, the sign under which the spectral clustering intervals
 * follow from Weyl's inequality. The subspace bounds use
 *
 *   R_J  = Ph1 Ph2 - P1 P2,   joint bound  = || R_J + R_J^T || / (1 - ||P_N1 P_N2||)
 *   R_Ik = (I - P_J) P_k - (I - P_Jh) Ph_k,   individual bound = 2 || R_Ik ||.
 *
 * Everything is evaluated in the span of the participating bases.
 */

#include <array>
#include <limits>
#include <vector>

#include "ppd/bootstrap.hpp"
#include "ppd/linalg.hpp"

namespace ppd {

struct EpsilonPair {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
};

inline EpsilonPair true_epsilons(const OrthonormalBasis& u1, const OrthonormalBasis& u2, const OrthonormalBasis& u1_hat,
                                 const OrthonormalBasis& u2_hat) {
  require_same_ambient(u1, u2);
  require_same_ambient(u1, u1_hat);
  require_same_ambient(u1, u2_hat);
  return {detail::joint_perturbation(u1, u2, u1_hat, u2_hat), detail::noise_perturbation(u1, u2, u1_hat, u2_hat)};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double slack = 0.0) const noexcept { return x >= lo - slack && x <= hi + slack; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Planted joint and individual subspaces of two views.
struct PlantedSubspaces {
  OrthonormalBasis joint;
  std::array<OrthonormalBasis, 2> individuals;

  /// Orthonormal basis of col(X_k) = J (+) I_k.
  OrthonormalBasis signal(std::size_t k) const {
    return OrthonormalBasis::trusted(stack_columns({&joint, &individuals.at(k)}));
  }
};

struct TruthOracle {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  std::array<Interval, 3> cluster_intervals;  ///< joint, non-orthogonal individual, remaining
  Index joint_dim = 0;
  Index nonorth_rank = 0;  ///< rank(P_N1 P_N2)
  double tau_min = 0.0;
  double tau_max = 0.0;
};

/// Nonzero principal cosines between the individual subspaces, i.e. sigma(P_N1 P_N2).
inline Vector nonorthogonal_cosines(const OrthonormalBasis& indiv1, const OrthonormalBasis& indiv2, double tol = 1e-8) {
  const Vector c = principal_spectrum(indiv1, indiv2);
  Index m = 0;
  while (m < c.size() && c(m) > tol) ++m;
  return c.head(m);
}

inline TruthOracle theorem1_intervals(const PlantedSubspaces& truth, double eps1, double eps2) {
  TruthOracle t;
  t.epsilon1 = eps1;
  t.epsilon2 = eps2;
  t.joint_dim = truth.joint.rank();
  const Vector tau = nonorthogonal_cosines(truth.individuals[0], truth.individuals[1]);
  t.nonorth_rank = tau.size();
  if (tau.size() > 0) {
    t.tau_max = tau(0);
    t.tau_min = tau(tau.size() - 1);
  }
  t.cluster_intervals[0] = {std::max(1.0 - eps1, 0.0), 1.0};
  t.cluster_intervals[1] = {std::max(t.tau_min - eps1, 0.0), std::min(t.tau_max + eps2, 1.0)};
  t.cluster_intervals[2] = {0.0, std::min(eps2, 1.0)};
  return t;
}

/// Splits the descending spectrum (padded with the zero singular values of the
/// n x n product) into groups of joint_dim, nonorth_rank and the rest, and
/// checks each group against its interval.
inline bool theorem1_contains(const TruthOracle& oracle, const Vector& spectrum, double slack = 1e-10) {
  const Index groups = oracle.joint_dim + oracle.nonorth_rank;
  const Index len = std::max(spectrum.size(), groups);
  for (Index i = 0; i < len; ++i) {
    const double v = i < spectrum.size() ? spectrum(i) : 0.0;
    const std::size_t g = i < oracle.joint_dim ? 0 : (i < groups ? 1 : 2);
    if (!oracle.cluster_intervals[g].contains(v, slack)) return false;
  }
  return true;
}

struct Theorem2Report {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double alignment = 0.0;  ///< ||P_N1 P_N2||_2
  bool hypothesis_holds = false;
  bool ranks_correct = false;
  double joint_bound = 0.0;
  double joint_distance = 0.0;
  std::array<double, 2> individual_bounds{};
  std::array<double, 2> individual_distances{};
};

/// Right-hand sides of the joint/individual subspace error bounds together with
/// the realized distances. The hypothesis eps1 < 1 - ||P_N1 P_N2|| - eps2 is
/// reported, not enforced.
inline Theorem2Report theorem2_bounds(const PlantedSubspaces& truth, const std::array<OrthonormalBasis, 2>& marginal_hat,
                                      const OrthonormalBasis& joint_hat,
                                      const std::array<OrthonormalBasis, 2>& individual_hat) {
  const OrthonormalBasis u1 = truth.signal(0);
  const OrthonormalBasis u2 = truth.signal(1);
  const auto& u1h = marginal_hat[0];
  const auto& u2h = marginal_hat[1];
  require_same_ambient(u1, u1h);
  require_same_ambient(u1, u2h);
  require_same_ambient(u1, joint_hat);

  Theorem2Report rep;
  const EpsilonPair eps = true_epsilons(u1, u2, u1h, u2h);
  rep.epsilon1 = eps.epsilon1;
  rep.epsilon2 = eps.epsilon2;
  const Vector tau = nonorthogonal_cosines(truth.individuals[0], truth.individuals[1]);
  rep.alignment = tau.size() > 0 ? tau(0) : 0.0;
  rep.hypothesis_holds = rep.epsilon1 < 1.0 - rep.alignment - rep.epsilon2;
  rep.ranks_correct = u1h.rank() == u1.rank() && u2h.rank() == u2.rank() && joint_hat.rank() == truth.joint.rank();

  const ReducedFrame frame{&u1, &u2, &u1h, &u2h, &joint_hat};
  const DenseMatrix p1 = frame.projector(u1);
  const DenseMatrix p2 = frame.projector(u2);
  const DenseMatrix p1h = frame.projector(u1h);
  const DenseMatrix p2h = frame.projector(u2h);
  const DenseMatrix pj = frame.projector(truth.joint);
  const DenseMatrix pjh = frame.projector(joint_hat);
  const DenseMatrix id = frame.identity();

  const DenseMatrix rj = p1h * p2h - p1 * p2;
  const double gap = 1.0 - rep.alignment;
  rep.joint_bound = gap > 0.0 ? spectral_norm(rj + rj.transpose()) / gap : std::numeric_limits<double>::infinity();
  rep.joint_distance = subspace_distance(truth.joint, joint_hat);

  const std::array<const DenseMatrix*, 2> p{&p1, &p2};
  const std::array<const DenseMatrix*, 2> ph{&p1h, &p2h};
  for (std::size_t k = 0; k < 2; ++k) {
    const DenseMatrix rik = (id - pj) * (*p[k]) - (id - pjh) * (*ph[k]);
    rep.individual_bounds[k] = 2.0 * spectral_norm(rik);
    rep.individual_distances[k] = subspace_distance(truth.individuals[k], individual_hat[k]);
  }
  return rep;
}

}  // namespace ppd

#endif  // PPD_ORACLE_HPP
