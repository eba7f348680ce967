// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The supermux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SUPERMUX_ORACLE_HPP
#define SUPERMUX_ORACLE_HPP

// Reference solvers that share no code path with the surrogate allocator:
// exhaustive search over scalar powers, projected-gradient ascent over full
// diagonal covariances, and high-SNR slope fits.

#include "supermux/allocation.hpp"
#include "supermux/allocator.hpp"
#include "supermux/channel_stats.hpp"
#include "supermux/kernels.hpp"
#include "supermux/mimo_rates.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace supermux {

struct OracleResult {
  double best_wsr = 0.0;
  /// Brute force: P^(0..M-1) then P1^(0..M-1). Direct solver: the (K+1) n_t
  /// diagonal entries, block 0 = Q0, block 1 + k = Q_k of user k.
  std::vector<double> best_point;
  std::string trace;
};

/// Maximises mu * r0 + sum_k r_k over the per-subchannel total and unicast
/// powers (unicast to the strongest user), grid search followed by local
/// zooming. The minimum over the weight simplex is attained at a vertex and
/// is taken exactly. Limited to M <= 2, K <= 3.
OracleResult brute_force_wsr(const ChannelStats& stats, double mu_total, double p_t,
                             int grid_resolution, const RateEstimator& est,
                             int refine_rounds = 12);

/// Allocation corresponding to a brute-force point.
Allocation brute_force_allocation(const ChannelStats& stats, const OracleResult& r);

struct DirectOptions {
  int n_random_starts = 5;
  int max_iters = 300;
  double step_tol = 1e-9;  ///< relative to p_t
  std::uint64_t seed = 1;  ///< random starts
};

struct DirectResult {
  OracleResult result;
  std::vector<std::vector<double>> q;  ///< K + 1 blocks of n_t entries
  std::vector<double> start_values;    ///< objective reached from each start
  int winning_start = 0;               ///< 0 = structured start
  int iterations = 0;                  ///< of the winning start
};

/// Objective mu-weighted multicast rates plus SIC unicast rates, in bits,
/// evaluated on a fixed sample set; gradient by the trace formula.
struct DirectObjective {
  double value = 0.0;
  std::vector<double> grad;
};

DirectObjective direct_objective(const ChannelStats& stats, std::span<const double> mu_vec,
                                 const kernels::ChannelSamples& samples,
                                 std::span<const double> q, bool with_gradient);

/// Projected-gradient ascent over (K + 1) nonnegative diagonal covariances
/// with trace budget p_t on one subchannel (M = 1, K <= 3, n_t <= 4).
DirectResult direct_covariance_solver(const ChannelStats& stats, std::span<const double> mu_vec,
                                      double p_t, const kernels::ChannelSamples& samples,
                                      const DirectOptions& opts = {});

enum class DofScheme { kMulticastOnly, kUnicastOnly, kMixed };

struct DofSpec {
  DofScheme scheme = DofScheme::kMulticastOnly;
  int m_prime = 1;                 ///< kMixed: subchannels carrying superposition
  double unicast_fraction = 0.5;   ///< kMixed: P1 / P on those subchannels
};

struct DofResult {
  double slope = 0.0;  ///< bits/s/Hz per log2 P
  std::vector<double> p_db;
  std::vector<double> sum_rate;
};

/// Least-squares slope of the sum rate against log2 P_t. Multicast-only and
/// unicast-only use the surrogate allocators; kMixed spreads power evenly and
/// gives the first m_prime subchannels a fixed unicast share.
DofResult dof_slope(const DofSpec& spec, const ChannelStats& stats,
                    std::span<const double> p_grid_db, double mu_total, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts = {});

std::string dof_scheme_name(const DofSpec& spec);

}  // namespace supermux

#endif  // SUPERMUX_ORACLE_HPP
