// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pareto_beam/channel.hpp"

namespace pareto_beam {

/// Water-filling over parallel channels with power gains `gains`:
/// p_k = max(0, mu - 1/g_k) with sum p_k == budget. Zero gains get no power.
RVector water_filling(const RVector& gains, double budget);

struct BaselineCovariance {
  Covariance covariance;
  bool degenerate = false;  // the effective channel was zero
};

/// Single-user eigen-beamforming: water-filling over the right singular
/// vectors of H_ii, ignoring interference.
BaselineCovariance eigen_beamforming(const ChannelSet& ch, int tx);

/// Zero-forcing: water-filling on H_ii B where B spans the common null space
/// of every cross channel H_ji, j != i. Throws InfeasibleError when that null
/// space is empty.
BaselineCovariance zero_forcing(const ChannelSet& ch, int tx);

/// Convenience: the baseline for every transmitter.
std::vector<Covariance> eigen_beamforming_all(const ChannelSet& ch);
std::vector<Covariance> zero_forcing_all(const ChannelSet& ch);

}  // namespace pareto_beam
