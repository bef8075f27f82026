#include <gtest/gtest.h>

#include <algorithm>

#include "ppd/decompose.hpp"
#include "ppd/oracle.hpp"
#include "ppd/simulation.hpp"
#include "support.hpp"

using namespace ppd;
using ppd::test::brute_norm;
using ppd::test::full_projector;
using ppd::test::gs_basis;

namespace {

// Noiseless view with the given column space and singular values 1, 2, ..., r.
DenseMatrix exact_view(const OrthonormalBasis& u, Index p, std::uint64_t seed) {
  Rng rng(seed);
  const OrthonormalBasis v = haar_basis(p, u.rank(), rng);
  Vector s(u.rank());
  for (Index i = 0; i < u.rank(); ++i) s(i) = 1.0 + static_cast<double>(i);
  return u.columns() * s.asDiagonal() * v.columns().transpose();
}

OrthonormalBasis columns_of(const OrthonormalBasis& b, Index start, Index count) {
  return OrthonormalBasis::trusted(b.columns().middleCols(start, count));
}

DecomposeOptions with_ranks(std::vector<Index> ranks, std::size_t reps = 20) {
  DecomposeOptions o;
  o.ranks = std::move(ranks);
  o.bootstrap.replicates = reps;
  return o;
}

// Brute-force symmetrized K-fold projector product with full n x n matrices.
DenseMatrix brute_symmetric_product(const std::vector<OrthonormalBasis>& bases) {
  const Index n = bases.front().ambient_dim();
  std::vector<std::size_t> order(bases.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DenseMatrix sum = DenseMatrix::Zero(n, n);
  double terms = 0.0;
  do {
    DenseMatrix prod = DenseMatrix::Identity(n, n);
    for (std::size_t i : order) prod = prod * full_projector(bases[i]);
    sum += prod;
    terms += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  sum /= terms;
  return 0.5 * (sum + sum.transpose());
}

// Leading r eigenvectors of a full symmetric matrix.
OrthonormalBasis brute_top_eigenvectors(const DenseMatrix& s, Index r) {
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(s);
  return OrthonormalBasis::from_columns(eig.eigenvectors().rightCols(r));
}

void expect_result_invariants(const DecompositionResult& r) {
  EXPECT_EQ(r.joint.rank(), r.joint_rank);
  for (std::size_t k = 0; k < r.individuals.size(); ++k) {
    EXPECT_EQ(r.individuals[k].rank(), r.marginal_ranks[k] - r.joint_rank);
    if (!r.joint.empty() && !r.individuals[k].empty()) {
      EXPECT_LE((r.joint.columns().transpose() * r.individuals[k].columns()).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
  for (Index i = 0; i < r.spectrum.values.size(); ++i) {
    EXPECT_GE(r.spectrum.values(i), 0.0);
    EXPECT_LE(r.spectrum.values(i), 1.0);
    if (i > 0) {
      EXPECT_LE(r.spectrum.values(i), r.spectrum.values(i - 1));
    }
  }
  EXPECT_GE(r.spectrum.bootstrap_threshold, 0.0);
  EXPECT_LE(r.spectrum.bootstrap_threshold, 1.0);
  EXPECT_GE(r.spectrum.noise_threshold, 0.0);
  EXPECT_LE(r.spectrum.noise_threshold, 1.0);
}

}  // namespace

TEST(ProductSpectrum, IdenticalEstimates) {
  const OrthonormalBasis u = gs_basis(10, 3, 1);
  const ProductSpectrum s = product_spectrum(u, u, 0.1, 0.25);
  ASSERT_EQ(s.values.size(), 3);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(s.values(i), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.bootstrap_threshold, 0.9);
  EXPECT_DOUBLE_EQ(s.noise_threshold, 0.5);
}

TEST(ProductSpectrum, OrthogonalEstimates) {
  const OrthonormalBasis frame = gs_basis(10, 5, 2);
  const ProductSpectrum s = product_spectrum(columns_of(frame, 0, 2), columns_of(frame, 2, 3), 0.0, 0.0);
  for (Index i = 0; i < s.values.size(); ++i) EXPECT_NEAR(s.values(i), 0.0, 1e-12);
}

TEST(ProductSpectrum, NoiselessConstructionAt50Degrees) {
  SimConfig cfg = two_view_config(50.0, std::numeric_limits<double>::infinity(), RankMode::truth);
  cfg.seed = 11;
  const SimData d = generate(cfg);
  const auto ranks = d.truth.marginal_ranks();
  const OrthonormalBasis u1 = truncate(d.views[0], ranks[0]).basis;
  const OrthonormalBasis u2 = truncate(d.views[1], ranks[1]).basis;
  const ProductSpectrum s = product_spectrum(u1, u2, 0.0, 0.0);
  ASSERT_EQ(s.values.size(), 8);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(s.values(i), 1.0, 1e-10);
  for (Index i = 4; i < 8; ++i) EXPECT_NEAR(s.values(i), std::cos(ppd::test::deg(50.0)), 1e-10);
}

TEST(ProductSpectrum, RejectsBadInput) {
  const OrthonormalBasis u = gs_basis(6, 2, 3);
  EXPECT_THROW(product_spectrum(u, u, 1.5, 0.1), InvalidInput);
  EXPECT_THROW(product_spectrum(u, u, 0.1, -0.1), InvalidInput);
  EXPECT_THROW(product_spectrum(u, gs_basis(7, 2, 3), 0.1, 0.1), DimensionMismatch);
}

TEST(JointRank, CountsStrictlyAboveBothThresholds) {
  ProductSpectrum s;
  s.values = Vector(4);
  s.values << 1.0, 1.0, 0.6, 0.1;
  s.bootstrap_threshold = 0.8;
  s.noise_threshold = 0.7;
  EXPECT_EQ(joint_rank(s), 2);
  s.noise_threshold = 0.95;
  EXPECT_EQ(joint_rank(s), 2);
  s.bootstrap_threshold = 0.99;
  s.values << 0.995, 0.99, 0.6, 0.1;
  EXPECT_EQ(joint_rank(s), 1);
  s.values << 1.0, 1.0, 0.6, 0.1;
  s.bootstrap_threshold = 0.6;
  s.noise_threshold = 0.0;
  EXPECT_EQ(joint_rank(s), 2);
}

TEST(JointRank, UnitCosinesSurviveZeroEpsilon) {
  ProductSpectrum s;
  s.values = Vector(3);
  s.values << 1.0, 1.0 - 2e-15, 1.0 - 1e-9;
  s.bootstrap_threshold = 1.0;
  EXPECT_EQ(joint_rank(s), 2);
  s.bootstrap_threshold = 1.0 - 2e-15;
  EXPECT_EQ(joint_rank(s), 2);
}

TEST(JointRank, AllBelowThresholds) {
  ProductSpectrum s;
  s.values = Vector::Constant(5, 0.3);
  s.bootstrap_threshold = 0.5;
  s.noise_threshold = 0.4;
  EXPECT_EQ(joint_rank(s), 0);
}

TEST(JointRank, TrueRanksAtHighSnrFindFourMostOfTheTime) {
  int found = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SimConfig cfg = two_view_config(90.0, 2.0, RankMode::truth);
    cfg.seed = seed;
    const SimData d = generate(cfg);
    DecomposeOptions o = with_ranks(d.truth.marginal_ranks(), 100);
    o.bootstrap.seed = derive_seed(seed, 5);
    if (decompose(d.views[0], d.views[1], o).joint_rank == 4) ++found;
  }
  EXPECT_GE(found, 45);
}

TEST(JointBasis, IdenticalBasesSpanThemselves) {
  const OrthonormalBasis u = gs_basis(12, 4, 4);
  EXPECT_LT(subspace_distance(joint_basis(u, u, 4), u), 1e-8);
}

TEST(JointBasis, ZeroRankIsEmpty) {
  const OrthonormalBasis u = gs_basis(12, 4, 5);
  const OrthonormalBasis j = joint_basis(u, gs_basis(12, 3, 6), 0);
  EXPECT_TRUE(j.empty());
  EXPECT_EQ(j.ambient_dim(), 12);
}

TEST(JointBasis, RejectsRankAboveSmallestView) {
  EXPECT_THROW(joint_basis(gs_basis(12, 4, 7), gs_basis(12, 2, 8), 3), InvalidInput);
  EXPECT_THROW(joint_basis(gs_basis(12, 4, 7), gs_basis(12, 2, 8), -1), InvalidInput);
}

TEST(JointBasis, NoiselessPlantedJointRecovered) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const OrthonormalBasis frame = gs_basis(30, 7, seed);
    const OrthonormalBasis joint = columns_of(frame, 0, 2);
    const OrthonormalBasis u1 = columns_of(frame, 0, 4);
    DenseMatrix b2(30, 5);
    b2 << frame.columns().leftCols(2), frame.columns().middleCols(4, 3);
    const OrthonormalBasis u2 = OrthonormalBasis::from_columns(b2);
    EXPECT_LT(subspace_distance(joint_basis(u1, u2, 2), joint), 1e-8) << seed;
  }
}

TEST(JointBasis, ThreeViewsMatchBruteForcePermutationAverage) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const OrthonormalBasis shared = gs_basis(11, 2, seed);
    std::vector<OrthonormalBasis> bases;
    for (std::uint64_t v = 0; v < 3; ++v) {
      DenseMatrix c(11, 4);
      c << shared.columns(), gs_basis(11, 2, 100 * seed + v).columns();
      bases.push_back(orthonormalize(c));
    }
    const OrthonormalBasis lib = joint_basis({&bases[0], &bases[1], &bases[2]}, 2);
    const OrthonormalBasis brute = brute_top_eigenvectors(brute_symmetric_product(bases), 2);
    EXPECT_LT(subspace_distance(lib, brute), 1e-10) << seed;
    EXPECT_LT(subspace_distance(lib, shared), 1e-8) << seed;
  }
}

TEST(JointBasis, TwoViewsPairwiseEqualsAllOrderings) {
  const OrthonormalBasis a = gs_basis(15, 5, 9);
  const OrthonormalBasis b = gs_basis(15, 6, 10);
  const OrthonormalBasis x = joint_basis({&a, &b}, 3, ProductAveraging::all_orderings);
  const OrthonormalBasis y = joint_basis({&a, &b}, 3, ProductAveraging::pairwise);
  EXPECT_LT(subspace_distance(x, y), 1e-10);
}

TEST(JointBasis, GuardsManyViews) {
  std::vector<OrthonormalBasis> bases;
  for (std::uint64_t v = 0; v < 6; ++v) bases.push_back(gs_basis(20, 3, 40 + v));
  std::vector<const OrthonormalBasis*> ptrs;
  for (const auto& b : bases) ptrs.push_back(&b);
  EXPECT_THROW(joint_basis(ptrs, 1), InvalidInput);
  EXPECT_EQ(joint_basis(ptrs, 1, ProductAveraging::pairwise).rank(), 1);
}

TEST(IndividualBasis, EmptyJointKeepsMarginal) {
  const OrthonormalBasis u = gs_basis(10, 4, 11);
  EXPECT_LT(subspace_distance(individual_basis(u, OrthonormalBasis(10), 4, 0), u), 1e-10);
}

TEST(IndividualBasis, FullJointLeavesNothing) {
  const OrthonormalBasis u = gs_basis(10, 3, 12);
  EXPECT_TRUE(individual_basis(u, u, 3, 3).empty());
}

TEST(IndividualBasis, NoiselessPlantedIndividualRecovered) {
  const OrthonormalBasis frame = gs_basis(25, 9, 13);
  const OrthonormalBasis joint = columns_of(frame, 0, 3);
  const OrthonormalBasis indiv = columns_of(frame, 3, 4);
  const OrthonormalBasis u1 = columns_of(frame, 0, 7);
  const OrthonormalBasis i1 = individual_basis(u1, joint, 7, 3);
  EXPECT_LT(subspace_distance(i1, indiv), 1e-8);
  EXPECT_LE((i1.columns().transpose() * joint.columns()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(IndividualBasis, RejectsRankViolations) {
  const OrthonormalBasis u = gs_basis(10, 3, 14);
  const OrthonormalBasis j = gs_basis(10, 2, 15);
  EXPECT_THROW(individual_basis(u, j, 4, 2), InvalidInput);
  EXPECT_THROW(individual_basis(u, j, 3, 1), InvalidInput);
  EXPECT_THROW(individual_basis(columns_of(u, 0, 1), j, 1, 2), InvalidInput);
}

TEST(Decompose, DuplicatedViewIsAllJoint) {
  const DenseMatrix y = exact_view(gs_basis(30, 3, 16), 20, 17);
  const DecompositionResult r = decompose(y, y, with_ranks({3, 3}));
  EXPECT_EQ(r.joint_rank, 3);
  EXPECT_TRUE(r.individuals[0].empty());
  EXPECT_TRUE(r.individuals[1].empty());
  expect_result_invariants(r);
}

TEST(Decompose, OrthogonalSignalsHaveNoJoint) {
  const OrthonormalBasis frame = gs_basis(30, 6, 18);
  const DenseMatrix y1 = exact_view(columns_of(frame, 0, 3), 20, 19);
  const DenseMatrix y2 = exact_view(columns_of(frame, 3, 3), 25, 20);
  const DecompositionResult r = decompose(y1, y2, with_ranks({3, 3}));
  EXPECT_EQ(r.joint_rank, 0);
  EXPECT_EQ(r.individuals[0].rank(), 3);
  expect_result_invariants(r);
}

TEST(Decompose, RowMismatch) {
  EXPECT_THROW(decompose(DenseMatrix::Ones(5, 4), DenseMatrix::Ones(6, 4), with_ranks({1, 1})), DimensionMismatch);
}

TEST(Decompose, RanksExceedingSampleSize) {
  Rng rng(21);
  const DenseMatrix y1 = gaussian_matrix(10, 15, rng);
  const DenseMatrix y2 = gaussian_matrix(10, 12, rng);
  EXPECT_THROW(decompose(y1, y2, with_ranks({6, 5})), BootstrapInfeasible);
}

TEST(Decompose, ZeroRankViewIsWellFormed) {
  Rng rng(22);
  const DenseMatrix y1 = gaussian_matrix(20, 15, rng);
  const DenseMatrix y2 = gaussian_matrix(20, 12, rng);
  const DecompositionResult r = decompose(y1, y2, with_ranks({0, 3}));
  EXPECT_EQ(r.joint_rank, 0);
  EXPECT_TRUE(r.joint.empty());
  EXPECT_TRUE(r.individuals[0].empty());
  EXPECT_EQ(r.individuals[1].rank(), 3);
  expect_result_invariants(r);
}

TEST(Decompose, WrongNumberOfRanks) {
  Rng rng(23);
  const DenseMatrix y = gaussian_matrix(10, 8, rng);
  EXPECT_THROW(decompose(y, y, with_ranks({1, 1, 1})), InvalidInput);
}

TEST(Decompose, OrderInvariance) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig cfg = two_view_config(seed % 2 ? 90.0 : 30.0, 2.0, RankMode::truth);
    cfg.seed = seed;
    const SimData d = generate(cfg);
    DecomposeOptions o;
    o.bootstrap.seed = seed;
    o.bootstrap.replicates = 40;
    const DecompositionResult a = decompose(d.views[0], d.views[1], o);
    const DecompositionResult b = decompose(d.views[1], d.views[0], o);
    ASSERT_EQ(a.joint_rank, b.joint_rank) << seed;
    EXPECT_LE(subspace_distance(a.joint, b.joint), 1e-8) << seed;
    EXPECT_EQ(a.epsilon1_hat, b.epsilon1_hat) << seed;
  }
}

TEST(Decompose, InvariantsAcrossRegimes) {
  std::uint64_t seed = 0;
  for (double angle : {30.0, 90.0})
    for (double snr : {0.5, 2.0, 22.0})
      for (RankMode mode : {RankMode::estimated, RankMode::under, RankMode::over}) {
        SimConfig cfg = two_view_config(angle, snr, mode);
        cfg.seed = ++seed;
        const SimData d = generate(cfg);
        DecomposeOptions o;
        o.ranks = benchmark_ranks(cfg, d.truth, cfg.seed);
        o.bootstrap.replicates = 10;
        const DecompositionResult r = decompose(d.views[0], d.views[1], o);
        expect_result_invariants(r);
        EXPECT_LE(r.joint_rank, std::min(r.marginal_ranks[0], r.marginal_ranks[1]));
      }
}

TEST(Decompose, NoiselessExactness) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig cfg = two_view_config(30.0 + 6.0 * static_cast<double>(seed), std::numeric_limits<double>::infinity(),
                                    RankMode::truth);
    cfg.seed = seed;
    const SimData d = generate(cfg);
    const DecompositionResult r = decompose(d.views[0], d.views[1], with_ranks(d.truth.marginal_ranks()));
    ASSERT_EQ(r.joint_rank, 4) << seed;
    EXPECT_LE(subspace_distance(r.joint, d.truth.joint), 1e-8) << seed;
    EXPECT_LE(subspace_distance(r.individuals[0], d.truth.individuals[0]), 1e-8) << seed;
    EXPECT_LE(subspace_distance(r.individuals[1], d.truth.individuals[1]), 1e-8) << seed;
  }
}

TEST(DecomposeMultiview, TwoViewsMatchDecompose) {
  SimConfig cfg = two_view_config(60.0, 2.0, RankMode::truth);
  cfg.seed = 24;
  const SimData d = generate(cfg);
  DecomposeOptions o;
  o.bootstrap.replicates = 30;
  const DecompositionResult a = decompose(d.views[0], d.views[1], o);
  o.averaging = ProductAveraging::pairwise;
  const DecompositionResult b = decompose_multiview(d.views, o);
  EXPECT_EQ(a.joint_rank, b.joint_rank);
  EXPECT_LE(subspace_distance(a.joint, b.joint), 1e-10);
  EXPECT_EQ(a.epsilon1_hat, b.epsilon1_hat);
}

TEST(DecomposeMultiview, MinimumPairwiseJointRank) {
  const OrthonormalBasis frame = gs_basis(40, 12, 25);
  DenseMatrix c1(40, 5), c2(40, 5), c3(40, 4);
  c1 << frame.columns().leftCols(3), frame.columns().middleCols(3, 2);
  c2 << frame.columns().leftCols(3), frame.columns().middleCols(5, 2);
  c3 << frame.columns().leftCols(2), frame.columns().middleCols(7, 2);
  const std::vector<DenseMatrix> views{exact_view(OrthonormalBasis::from_columns(c1), 20, 26),
                                       exact_view(OrthonormalBasis::from_columns(c2), 22, 27),
                                       exact_view(OrthonormalBasis::from_columns(c3), 24, 28)};
  const DecompositionResult r = decompose_multiview(views, with_ranks({5, 5, 4}));
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.pairs[0].joint_rank, 3);
  EXPECT_EQ(r.pairs[1].joint_rank, 2);
  EXPECT_EQ(r.pairs[2].joint_rank, 2);
  EXPECT_EQ(r.joint_rank, 2);
  EXPECT_EQ(r.reporting_pair, 1u);
  EXPECT_LE(subspace_distance(r.joint, columns_of(frame, 0, 2)), 1e-8);
  expect_result_invariants(r);
}

TEST(DecomposeMultiview, GuardsManyViewsUnlessPairwise) {
  Rng rng(29);
  std::vector<DenseMatrix> views;
  for (int v = 0; v < 6; ++v) views.push_back(gaussian_matrix(30, 10, rng));
  EXPECT_THROW(decompose_multiview(views, with_ranks({1, 1, 1, 1, 1, 1}, 5)), InvalidInput);
  DecomposeOptions o = with_ranks({1, 1, 1, 1, 1, 1}, 5);
  o.averaging = ProductAveraging::pairwise;
  const DecompositionResult r = decompose_multiview(views, o);
  EXPECT_EQ(r.pairs.size(), 15u);
  expect_result_invariants(r);
}

TEST(DecomposeMultiview, NeedsTwoViews) {
  EXPECT_THROW(decompose_multiview({DenseMatrix::Ones(4, 4)}, DecomposeOptions{}), InvalidInput);
}

namespace {

// Perturbation quantities straight from their definitions with full
// projectors, D_k = Ph_k - P_k.
EpsilonPair brute_epsilons(const OrthonormalBasis& u1, const OrthonormalBasis& u2, const OrthonormalBasis& u1h,
                           const OrthonormalBasis& u2h) {
  const DenseMatrix p1 = full_projector(u1), p2 = full_projector(u2);
  const DenseMatrix d1 = full_projector(u1h) - p1, d2 = full_projector(u2h) - p2;
  return {brute_norm(p1 * (d1 + d2 + d1 * d2) * p2), brute_norm(p1 * d2 + d1 * p2 + d1 * d2)};
}

// Random small planted truth: joint of rank 1 and individuals of rank 1 in R^12.
PlantedSubspaces small_truth(std::uint64_t seed) {
  const OrthonormalBasis frame = gs_basis(12, 4, seed);
  DenseMatrix i2(12, 1);
  i2.col(0) = 0.6 * frame.columns().col(1) + 0.8 * frame.columns().col(2);
  return {columns_of(frame, 0, 1), {columns_of(frame, 1, 1), OrthonormalBasis::from_columns(i2)}};
}

OrthonormalBasis tilt(const OrthonormalBasis& u, double size, std::uint64_t seed) {
  Rng rng(seed);
  return orthonormalize(u.columns() + size * gaussian_matrix(u.ambient_dim(), u.rank(), rng));
}

}  // namespace

TEST(TrueEpsilons, ZeroPerturbation) {
  const OrthonormalBasis u1 = gs_basis(12, 3, 30), u2 = gs_basis(12, 2, 31);
  const EpsilonPair e = true_epsilons(u1, u2, u1, u2);
  EXPECT_NEAR(e.epsilon1, 0.0, 1e-12);
  EXPECT_NEAR(e.epsilon2, 0.0, 1e-12);
}

TEST(TrueEpsilons, MissedJointDirectionGivesOne) {
  const OrthonormalBasis frame = gs_basis(12, 3, 32);
  const OrthonormalBasis joint = columns_of(frame, 0, 1);
  const OrthonormalBasis elsewhere = columns_of(frame, 1, 1);
  EXPECT_NEAR(true_epsilons(joint, joint, elsewhere, joint).epsilon1, 1.0, 1e-12);
}

TEST(TrueEpsilons, MatchBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const OrthonormalBasis u1 = gs_basis(12, 2, seed), u2 = gs_basis(12, 2, seed + 100);
    const OrthonormalBasis u1h = tilt(u1, 0.3, seed + 200);
    const OrthonormalBasis u2h = seed % 3 == 0 ? gs_basis(12, 3, seed + 300) : tilt(u2, 0.3, seed + 300);
    const EpsilonPair lib = true_epsilons(u1, u2, u1h, u2h);
    const EpsilonPair brute = brute_epsilons(u1, u2, u1h, u2h);
    EXPECT_NEAR(lib.epsilon1, brute.epsilon1, 1e-10) << seed;
    EXPECT_NEAR(lib.epsilon2, brute.epsilon2, 1e-10) << seed;
  }
}

TEST(TrueEpsilons, DimensionMismatch) {
  EXPECT_THROW(true_epsilons(gs_basis(5, 1, 1), gs_basis(6, 1, 1), gs_basis(5, 1, 1), gs_basis(5, 1, 1)),
               DimensionMismatch);
}

TEST(Theorem1Intervals, CollapseWithoutPerturbation) {
  const PlantedSubspaces truth = small_truth(33);
  const TruthOracle t = theorem1_intervals(truth, 0.0, 0.0);
  EXPECT_EQ(t.cluster_intervals[0], (Interval{1.0, 1.0}));
  EXPECT_NEAR(t.cluster_intervals[1].lo, 0.6, 1e-12);
  EXPECT_NEAR(t.cluster_intervals[1].hi, 0.6, 1e-12);
  EXPECT_EQ(t.cluster_intervals[2], (Interval{0.0, 0.0}));
  EXPECT_EQ(t.joint_dim, 1);
  EXPECT_EQ(t.nonorth_rank, 1);
}

TEST(Theorem1Intervals, ClampsLargePerturbation) {
  const TruthOracle t = theorem1_intervals(small_truth(34), 1.3, 1.2);
  EXPECT_EQ(t.cluster_intervals[0], (Interval{0.0, 1.0}));
  EXPECT_EQ(t.cluster_intervals[1].lo, 0.0);
  EXPECT_EQ(t.cluster_intervals[1].hi, 1.0);
  EXPECT_EQ(t.cluster_intervals[2], (Interval{0.0, 1.0}));
}

TEST(Theorem1Intervals, ContainmentOnSimulatedSeeds) {
  std::uint64_t seed = 0;
  for (double angle : {30.0, 50.0, 90.0})
    for (double snr : {0.5, 2.0, 22.0})
      for (int rep = 0; rep < 3; ++rep) {
        SimConfig cfg = two_view_config(angle, snr, RankMode::truth);
        cfg.seed = ++seed;
        const SimData d = generate(cfg);
        const auto ranks = d.truth.marginal_ranks();
        const PlantedSubspaces planted = d.truth.pair();
        const OrthonormalBasis u1h = truncate(d.views[0], ranks[0]).basis;
        const OrthonormalBasis u2h = truncate(d.views[1], ranks[1]).basis;
        const EpsilonPair e = true_epsilons(planted.signal(0), planted.signal(1), u1h, u2h);
        const TruthOracle t = theorem1_intervals(planted, e.epsilon1, e.epsilon2);
        EXPECT_TRUE(theorem1_contains(t, principal_spectrum(u1h, u2h))) << angle << " " << snr << " " << seed;
      }
}

TEST(Theorem1Intervals, ContainmentDetectsViolation) {
  const TruthOracle t = theorem1_intervals(small_truth(35), 0.0, 0.0);
  Vector bad(3);
  bad << 1.0, 0.6, 0.2;
  EXPECT_FALSE(theorem1_contains(t, bad));
  Vector good(3);
  good << 1.0, 0.6, 0.0;
  EXPECT_TRUE(theorem1_contains(t, good));
}

TEST(Theorem2Bounds, ZeroPerturbation) {
  const PlantedSubspaces truth = small_truth(36);
  const Theorem2Report r =
      theorem2_bounds(truth, {truth.signal(0), truth.signal(1)}, truth.joint, {truth.individuals[0], truth.individuals[1]});
  EXPECT_NEAR(r.joint_bound, 0.0, 1e-12);
  EXPECT_NEAR(r.joint_distance, 0.0, 1e-12);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(r.individual_bounds[k], 0.0, 1e-12);
    EXPECT_NEAR(r.individual_distances[k], 0.0, 1e-12);
  }
  EXPECT_TRUE(r.hypothesis_holds);
  EXPECT_TRUE(r.ranks_correct);
  EXPECT_NEAR(r.alignment, 0.6, 1e-12);
}

TEST(Theorem2Bounds, MatchBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PlantedSubspaces truth = small_truth(seed + 400);
    const OrthonormalBasis u1h = tilt(truth.signal(0), 0.1, seed + 500);
    const OrthonormalBasis u2h = tilt(truth.signal(1), 0.1, seed + 600);
    const OrthonormalBasis jh = joint_basis(u1h, u2h, 1);
    const OrthonormalBasis i1h = individual_basis(u1h, jh, 2, 1);
    const OrthonormalBasis i2h = individual_basis(u2h, jh, 2, 1);
    const Theorem2Report r = theorem2_bounds(truth, {u1h, u2h}, jh, {i1h, i2h});

    // Joint residual with D_k = Ph_k - P_k; individual residual with the
    // opposite orientation D_k = P_k - Ph_k, D_J = P_J - Ph_J.
    const DenseMatrix p1 = full_projector(truth.signal(0)), p2 = full_projector(truth.signal(1));
    const DenseMatrix p1h = full_projector(u1h), p2h = full_projector(u2h);
    const DenseMatrix pj = full_projector(truth.joint), pjh = full_projector(jh);
    const DenseMatrix id = DenseMatrix::Identity(12, 12);
    const DenseMatrix d1 = p1h - p1, d2 = p2h - p2;
    const DenseMatrix rj = p1 * d2 + d1 * p2 + d1 * d2;
    const DenseMatrix pn1 = full_projector(truth.individuals[0]), pn2 = full_projector(truth.individuals[1]);
    EXPECT_NEAR(r.alignment, brute_norm(pn1 * pn2), 1e-10);
    EXPECT_NEAR(r.joint_bound, brute_norm(rj + rj.transpose()) / (1.0 - brute_norm(pn1 * pn2)), 1e-10) << seed;
    EXPECT_NEAR(r.joint_distance, brute_norm(pj - pjh), 1e-10) << seed;
    const DenseMatrix dj = pj - pjh;
    const std::array<DenseMatrix, 2> dk{p1 - p1h, p2 - p2h};
    const std::array<DenseMatrix, 2> pk{p1, p2};
    const std::array<OrthonormalBasis, 2> ih{i1h, i2h};
    for (std::size_t k = 0; k < 2; ++k) {
      const DenseMatrix rik = (id - pj) * dk[k] - dj * pk[k] + dj * dk[k];
      EXPECT_NEAR(r.individual_bounds[k], 2.0 * brute_norm(rik), 1e-10) << seed;
      EXPECT_NEAR(r.individual_distances[k], brute_norm(full_projector(truth.individuals[k]) - full_projector(ih[k])),
                  1e-10)
          << seed;
    }
    const EpsilonPair e = brute_epsilons(truth.signal(0), truth.signal(1), u1h, u2h);
    EXPECT_EQ(r.hypothesis_holds, e.epsilon1 < 1.0 - brute_norm(pn1 * pn2) - e.epsilon2) << seed;
  }
}

TEST(Theorem2Bounds, DominationWhenHypothesisHolds) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SimConfig cfg = two_view_config(90.0, 2.0, RankMode::truth);
    cfg.seed = seed;
    const SimData d = generate(cfg);
    DecomposeOptions o = with_ranks(d.truth.marginal_ranks(), 30);
    o.bootstrap.seed = seed;
    const DecompositionResult res = decompose(d.views[0], d.views[1], o);
    const Theorem2Report r =
        theorem2_bounds(d.truth.pair(), {res.marginal_bases[0], res.marginal_bases[1]}, res.joint,
                        {res.individuals[0], res.individuals[1]});
    if (!(r.hypothesis_holds && r.ranks_correct)) continue;
    ++checked;
    EXPECT_LE(r.joint_distance, r.joint_bound + 1e-12) << seed;
    for (std::size_t k = 0; k < 2; ++k) EXPECT_LE(r.individual_distances[k], r.individual_bounds[k] + 1e-12) << seed;
  }
  EXPECT_GT(checked, 0);
}
