// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pareto_beam/baselines.hpp"

namespace pb = pareto_beam;
using pb::CMatrix;
using pb::RVector;

namespace {

void expect_feasible(const pb::Covariance& q, double budget, int max_rank) {
  EXPECT_NO_THROW(q.validate(budget));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q.matrix);
  int rank = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 1e-9 * budget) ++rank;
  EXPECT_LE(rank, max_rank);
}

}  // namespace

TEST(WaterFilling, MatchesBisection) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RVector g(4);
    for (int k = 0; k < 4; ++k) g(k) = e(rng);
    const double p = 0.1 + 20.0 * e(rng);
    const RVector got = pb::water_filling(g, p);
    EXPECT_LE((got - oracle::water_filling(g, p)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(got.sum(), p, 1e-10);
  }
}

TEST(WaterFilling, ZeroGainGetsNothing) {
  RVector g(3);
  g << 2.0, 0.0, 1.0;
  const RVector p = pb::water_filling(g, 5.0);
  EXPECT_EQ(p(1), 0.0);
  EXPECT_NEAR(p.sum(), 5.0, 1e-12);
}

TEST(EigenBeamforming, IdentityChannelEqualPower) {
  const pb::ChannelSet ch(2, {2}, {3.0}, {{CMatrix::Identity(2, 2)}});
  const auto b = pb::eigen_beamforming(ch, 0);
  EXPECT_FALSE(b.degenerate);
  EXPECT_LE((b.covariance.matrix - 1.5 * CMatrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(EigenBeamforming, LowPowerTopModeOnly) {
  CMatrix h = CMatrix::Zero(2, 3);
  h(0, 1) = 10.0;
  h(1, 2) = 0.1;
  const pb::ChannelSet ch(3, {2}, {0.5}, {{h}});
  const auto q = pb::eigen_beamforming(ch, 0).covariance.matrix;
  EXPECT_NEAR(q(1, 1).real(), 0.5, 1e-12);
  EXPECT_NEAR(q.norm(), 0.5, 1e-12);
}

TEST(EigenBeamforming, KktOnRandomChannel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = pb::generate_channels(5, {2, 2}, {2.0, 2.0}, seed);
    const auto q = pb::eigen_beamforming(ch, 0).covariance.matrix;
    expect_feasible({q}, 2.0, 2);
    EXPECT_NEAR(q.trace().real(), 2.0, 1e-10);
    const auto s = pb::svd_spaces(ch.channel(0, 0));
    double level = -1.0;
    for (int k = 0; k < 2; ++k) {
      const double g = s.singular_values(k) * s.singular_values(k);
      const double pk = (s.v_parallel.col(k).adjoint() * q * s.v_parallel.col(k))(0, 0).real();
      if (pk > 1e-12) {
        const double l = pk + 1.0 / g;
        if (level < 0.0) level = l;
        EXPECT_NEAR(l, level, 1e-8);
      } else {
        EXPECT_GE(1.0 / g, level - 1e-8);
      }
    }
    EXPECT_NEAR(pb::rates(ch, {pb::Covariance{q}, pb::Covariance{CMatrix::Zero(5, 5)}}).rates[0],
                oracle::water_filling_capacity(ch.channel(0, 0), 2.0), 1e-9);
  }
}

TEST(EigenBeamforming, ZeroChannelDegenerate) {
  const pb::ChannelSet ch(3, {1}, {2.0}, {{CMatrix::Zero(1, 3)}});
  const auto b = pb::eigen_beamforming(ch, 0);
  EXPECT_TRUE(b.degenerate);
  EXPECT_NEAR(b.covariance.matrix.trace().real(), 2.0, 1e-12);
}

TEST(ZeroForcing, VacuousConstraint) {
  const auto base = pb::generate_channels(4, {2, 2}, {3.0, 3.0}, 5);
  const pb::ChannelSet ch(4, {2, 2}, {3.0, 3.0},
                          {{base.channel(0, 0), base.channel(0, 1)}, {CMatrix::Zero(2, 4), base.channel(1, 1)}});
  const auto zf = pb::zero_forcing(ch, 0).covariance.matrix;
  const auto eig = pb::eigen_beamforming(ch, 0).covariance.matrix;
  EXPECT_LE((zf - eig).norm(), 1e-10);
}

TEST(ZeroForcing, NoLeakage) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = pb::generate_channels(8, {2, 2, 2}, {10.0, 10.0, 10.0}, seed);
    for (int i = 0; i < 3; ++i) {
      const auto q = pb::zero_forcing(ch, i).covariance;
      expect_feasible(q, 10.0, 2);
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        const CMatrix leak = ch.channel(j, i) * q.matrix * ch.channel(j, i).adjoint();
        EXPECT_LE(leak.trace().real(), 1e-10 * 10.0);
      }
    }
  }
}

TEST(ZeroForcing, VictimSeesNoInterference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ch = pb::generate_channels(6, {2, 2}, {5.0, 5.0}, seed);
    const auto q = pb::zero_forcing_all(ch);
    const auto r = pb::rates(ch, q);
    const auto alone = pb::rates(ch, {q[0], pb::Covariance{CMatrix::Zero(6, 6)}});
    EXPECT_NEAR(r.rates[0], alone.rates[0], 1e-9);
    const auto alone2 = pb::rates(ch, {pb::Covariance{CMatrix::Zero(6, 6)}, q[1]});
    EXPECT_NEAR(r.rates[1], alone2.rates[1], 1e-9);
  }
}

TEST(ZeroForcing, InfeasibleWithoutNullSpace) {
  const auto ch = pb::generate_channels(4, {2, 2, 2}, {1.0, 1.0, 1.0}, 1);
  EXPECT_THROW(pb::zero_forcing(ch, 0), pb::InfeasibleError);
}

TEST(Baselines, AllFeasible) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ch = pb::generate_channels(5, {2, 2}, {10.0, 10.0}, seed);
    for (const auto& q : pb::eigen_beamforming_all(ch)) expect_feasible(q, 10.0, 2);
    for (const auto& q : pb::zero_forcing_all(ch)) expect_feasible(q, 10.0, 2);
  }
}
