// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pareto_beam/optimizer.hpp"
#include "pareto_beam/verify.hpp"

namespace pb = pareto_beam;
using pb::CMatrix;
using pb::CVector;

namespace {

pb::Covariance random_covariance(int n, double budget, std::mt19937_64& rng) {
  const CMatrix a = oracle::gaussian(n, n, rng);
  CMatrix q = a * a.adjoint();
  q *= budget / q.trace().real();
  return {q};
}

}  // namespace

TEST(ParetoNecessary, ParameterizedCovarianceInSubspace) {
  std::mt19937_64 rng(1);
  const auto ch = pb::generate_channels(8, {2, 1}, {4.0, 4.0}, 1);
  const pb::BeamProblem problem(ch, std::make_shared<pb::WeightedSumRate>(pb::equal_weights(2)));
  const auto q = problem.covariances(problem.random_params(rng));
  for (const auto& rep : pb::check_pareto_necessary(ch, q)) {
    EXPECT_LE(rep.subspace_residual, 1e-10);
    EXPECT_NEAR(rep.power_gap, 0.0, 1e-10);
  }
}

TEST(ParetoNecessary, FullSupportViolates) {
  const auto ch = pb::generate_channels(6, {2, 2}, {3.0, 3.0}, 2);
  const std::vector<pb::Covariance> q(2, pb::Covariance{0.5 * CMatrix::Identity(6, 6)});
  for (const auto& rep : pb::check_pareto_necessary(ch, q)) EXPECT_GT(rep.subspace_residual, 1e-3);
}

TEST(ParetoNecessary, ReportsPowerGap) {
  const auto ch = pb::generate_channels(4, {1, 1}, {3.0, 3.0}, 3);
  CMatrix half = ch.channel(0, 0).adjoint() * ch.channel(0, 0);
  half *= 1.0 / half.trace().real();
  const auto reps = pb::check_pareto_necessary(ch, {pb::Covariance{half}, pb::Covariance{CMatrix::Zero(4, 4)}});
  EXPECT_NEAR(reps[0].power_gap, 2.0, 1e-12);
  EXPECT_NEAR(reps[1].power_gap, 3.0, 1e-12);
}

TEST(ParetoNecessary, SolverOutputUsesFullPower) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ch = pb::generate_channels(6, {2, 2}, {5.0, 5.0}, seed);
    const auto t = pb::solve(ch, pb::SolverConfig{});
    for (const auto& rep : pb::check_pareto_necessary(ch, t.covariances)) {
      EXPECT_LE(rep.subspace_residual, 1e-8);
      EXPECT_LE(std::abs(rep.power_gap), 1e-6);
    }
  }
}

TEST(PrincipalAngle, KnownAngle) {
  CMatrix a = CMatrix::Zero(3, 1);
  a(0, 0) = 1.0;
  CMatrix b = CMatrix::Zero(3, 1);
  b(0, 0) = std::cos(0.3);
  b(1, 0) = std::sin(0.3);
  EXPECT_NEAR(pb::largest_principal_angle(a, b), 0.3, 1e-12);
  EXPECT_NEAR(pb::largest_principal_angle(a, CMatrix::Identity(3, 2)), std::numbers::pi / 2, 1e-12);
}

TEST(TwoUserSubspace, RandomInstances) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto rep = pb::check_two_user_subspace(pb::generate_channels(6, {2, 2}, {1.0, 1.0}, seed));
    EXPECT_LE(rep.max_angle, 1e-8);
    EXPECT_EQ(rep.lhs_dim, 4);
    EXPECT_EQ(rep.rhs_dim, 4);
  }
}

TEST(TwoUserSubspace, DuplicatedChannel) {
  const auto base = pb::generate_channels(6, {2, 2}, {1.0, 1.0}, 4);
  const pb::ChannelSet ch(6, {2, 2}, {1.0, 1.0},
                          {{base.channel(0, 0), base.channel(0, 1)}, {base.channel(0, 0), base.channel(1, 1)}});
  const auto rep = pb::check_two_user_subspace(ch);
  EXPECT_LE(rep.max_angle, 1e-10);
  EXPECT_EQ(rep.lhs_dim, 2);
}

TEST(TwoUserSubspace, RejectsOtherShapes) {
  EXPECT_THROW(pb::check_two_user_subspace(pb::generate_channels(6, {2, 2, 2}, {1.0, 1.0, 1.0}, 1)),
               pb::ConfigError);
  EXPECT_THROW(pb::check_two_user_subspace(pb::generate_channels(6, {2, 1}, {1.0, 1.0}, 1)), pb::ConfigError);
  EXPECT_THROW(pb::check_two_user_subspace(pb::generate_channels(3, {2, 2}, {1.0, 1.0}, 1)), pb::ConfigError);
}

TEST(InterferencePlusNoise, SumsCrossTerms) {
  std::mt19937_64 rng(5);
  const auto ch = pb::generate_channels(4, {2, 1, 2}, {1.0, 1.0, 1.0}, 5);
  std::vector<pb::Covariance> q;
  for (int i = 0; i < 3; ++i) q.push_back(random_covariance(4, 1.0, rng));
  CMatrix expected = CMatrix::Identity(2, 2);
  for (int j : {1, 2}) expected += ch.channel(0, j) * q[j].matrix * ch.channel(0, j).adjoint();
  EXPECT_LE((pb::interference_plus_noise(ch, 0, q) - expected).norm(), 1e-13);
}

TEST(Lemma, ScalarCase) {
  const pb::ChannelSet ch(1, {1}, {1.0}, {{CMatrix::Ones(1, 1)}});
  const auto rep = pb::check_lemma_strict_gain(ch, 0, CMatrix::Ones(1, 1), pb::Covariance{CMatrix::Zero(1, 1)},
                                               CVector::Ones(1), 1.0);
  EXPECT_NEAR(rep.lhs, std::log(2.0), 1e-15);
  EXPECT_NEAR(rep.rhs, 0.0, 1e-15);
  EXPECT_TRUE(rep.strict);
}

TEST(Lemma, VanishingDelta) {
  std::mt19937_64 rng(6);
  const auto ch = pb::generate_channels(4, {2, 2}, {3.0, 3.0}, 6);
  const std::vector<pb::Covariance> q{random_covariance(4, 3.0, rng), random_covariance(4, 3.0, rng)};
  const CMatrix phi = pb::interference_plus_noise(ch, 0, q);
  const CVector v = oracle::gaussian(4, 1, rng);
  double prev = 1e300;
  for (double delta : {1.0, 1e-2, 1e-4, 1e-6}) {
    const auto rep = pb::check_lemma_strict_gain(ch, 0, phi, q[0], v, delta);
    EXPECT_GT(rep.gain, 0.0);
    EXPECT_LT(rep.gain, prev);
    prev = rep.gain;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Lemma, RandomTriplesMatchDeterminants) {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = pb::generate_channels(5, {2, 2}, {4.0, 4.0}, trial);
    const std::vector<pb::Covariance> q{random_covariance(5, 4.0, rng), random_covariance(5, 4.0, rng)};
    const CMatrix phi = pb::interference_plus_noise(ch, 1, q);
    const CVector v = oracle::gaussian(5, 1, rng);
    const double delta = e(rng);
    const auto rep = pb::check_lemma_strict_gain(ch, 1, phi, q[1], v, delta);
    const CMatrix& h = ch.channel(1, 1);
    const CMatrix base = phi + h * q[1].matrix * h.adjoint();
    const CMatrix raised = base + delta * (h * v) * (h * v).adjoint();
    EXPECT_NEAR(rep.lhs, std::log(std::abs(oracle::determinant(raised))), 1e-9);
    EXPECT_NEAR(rep.rhs, std::log(std::abs(oracle::determinant(base))), 1e-9);
    EXPECT_GT(rep.lhs, rep.rhs);
    EXPECT_NEAR(rep.gain, rep.lhs - rep.rhs, 1e-9);
  }
}

TEST(Lemma, Preconditions) {
  CMatrix h = CMatrix::Zero(1, 2);
  h(0, 0) = 1.0;
  const pb::ChannelSet ch(2, {1}, {1.0}, {{h}});
  CVector null_dir = CVector::Zero(2);
  null_dir(1) = 1.0;
  const pb::Covariance q{CMatrix::Zero(2, 2)};
  EXPECT_THROW(pb::check_lemma_strict_gain(ch, 0, CMatrix::Ones(1, 1), q, null_dir, 1.0), pb::ContractViolation);
  EXPECT_THROW(pb::check_lemma_strict_gain(ch, 0, CMatrix::Ones(1, 1), q, CVector::Ones(2), 0.0),
               pb::ContractViolation);
}
