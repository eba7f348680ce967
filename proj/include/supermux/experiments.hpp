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

#ifndef SUPERMUX_EXPERIMENTS_HPP
#define SUPERMUX_EXPERIMENTS_HPP

// Drop-level experiments: every scheme on the same drops, sum-rate samples,
// CDFs, 5th-percentile user spectral efficiency, mode fractions and
// high-SNR slope sweeps.

#include "supermux/allocation.hpp"
#include "supermux/allocator.hpp"
#include "supermux/oracle.hpp"
#include "supermux/surrogate.hpp"
#include "supermux/sysim.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace supermux {

enum class Scheme { kAlg1, kAlg2, kUnicastOnly, kMulticastOnly, kOrthogonal };

std::string_view scheme_name(Scheme s);  ///< alg1, alg2, uo, mo, om
Scheme parse_scheme(std::string_view name);

struct ExperimentConfig {
  NetworkScenario scenario;
  std::vector<int> user_counts = {10, 20, 30, 40, 50};
  std::vector<Scheme> schemes = {Scheme::kAlg1, Scheme::kAlg2, Scheme::kUnicastOnly,
                                 Scheme::kMulticastOnly, Scheme::kOrthogonal};
  int n_drops = 200;
  /// Drops per user count overriding n_drops, aligned with user_counts (optional).
  std::vector<int> drops_per_count;
  /// "K" for mu = K (sum rate), otherwise a number.
  std::string mu_policy = "K";
  std::vector<MimoShape> shapes = {MimoShape(8, 4)};
  std::uint64_t seed = 1;
  std::size_t mc_samples = RateEstimator::kDefaultSamples;
  double p_t = 1.0;
  double om_split = 0.5;
  int outer_iters = 200;
  std::string alpha_table;  ///< optional SurrogateTable file; published values otherwise
  std::string out_dir = "out";

  // high-SNR slope sweep
  std::vector<MimoShape> dof_shapes = {MimoShape(2, 2)};
  std::vector<double> dof_grid_db = {30, 35, 40, 45, 50, 55, 60};
  int dof_users = 3;

  void validate() const;
  double mu_for(int k_users) const;
  int drops_for(std::size_t count_index) const;
};

/// Sum rate and per-user SE samples of one (scheme, shape, K) cell.
struct CellSamples {
  Scheme scheme = Scheme::kAlg1;
  MimoShape shape;
  int k_users = 0;
  std::vector<double> sum_rate;  ///< one per drop
  std::vector<double> user_se;   ///< r0 + r_k for every user of every drop
};

struct ModeFractions {
  int k_users = 0;
  std::array<double, 4> fraction{};  ///< indexed by Mode
  std::size_t subchannels = 0;
};

struct ExperimentResult {
  std::vector<CellSamples> cells;
  std::vector<ModeFractions> modes;  ///< algorithm1 on the first shape
  int failed_drops = 0;
  std::vector<std::string> failures;              ///< solver errors, drop skipped
  std::vector<std::string> invariant_violations;  ///< allocation checks that failed
  double runtime_s = 0.0;
};

/// Empirical CDF: sorted samples with probabilities (j + 1) / n.
struct CdfPoint {
  double value;
  double probability;
};
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples);
/// Fraction of samples <= x.
double cdf_at(std::span<const double> samples, double x);

/// Percentile p in [0, 100]: linear interpolation of the empirical CDF, i.e.
/// order statistic number n p / 100 (one-based) with fractional positions
/// interpolated. Needs >= 20 samples.
double percentile(std::span<const double> samples, double p);

ModeFractions mode_fractions(std::span<const Allocation> allocs);

/// Per-drop scheme solution; exposed so a single drop can be replayed.
Solution solve_scheme(Scheme scheme, const ChannelStats& stats, double mu_total, double p_t,
                      double alpha, double om_split, const RateEstimator& est,
                      const AllocatorOptions& opts);

ExperimentResult run_experiment(const ExperimentConfig& config);

struct DofRow {
  std::string scheme;
  MimoShape shape;
  double slope = 0.0;
  double expected = 0.0;
};

/// MO, UO and the one-of-two-subchannels superposition scheme per shape.
std::vector<DofRow> dof_experiment(const ExperimentConfig& config);

/// Writes cdf.csv, percentile.csv, modes.csv, summary.csv and manifest.json.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::string& dir);
void write_dof(const std::vector<DofRow>& rows, const std::string& dir);

/// Label of a cell in the CSV files: the scheme name, suffixed with the shape
/// when the config has more than one shape.
std::string cell_label(const ExperimentConfig& config, const CellSamples& cell);

}  // namespace supermux

#endif  // SUPERMUX_EXPERIMENTS_HPP
