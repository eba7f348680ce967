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

#ifndef SUPERMUX_MIMO_RATES_HPP
#define SUPERMUX_MIMO_RATES_HPP

// Ergodic rate functions of an n_r x n_t i.i.d. Rayleigh link:
//
//   Phi(x) = E[log2 det(I + (x / n_t) H H^H)]                (bits/s/Hz)
//   phi(x) = (1 / n_r) sum_m E[(x + n_t / d_m)^-1]  = (ln 2 / n_r) Phi'(x)
//
// with d_m the eigenvalues of H H^H. Both are estimated from one cached set of
// eigenvalue samples, so any two evaluations share their random numbers.

#include "supermux/allocation.hpp"
#include "supermux/channel_stats.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace supermux {

enum class RateMode { kMonteCarlo, kLookup };

/// Tabulated Phi and phi on a log-spaced x grid.
struct LookupTable {
  static constexpr std::size_t kPoints = 256;
  static constexpr double kXMin = 1e-3;
  static constexpr double kXMax = 1e5;

  MimoShape shape;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> x;
  std::vector<double> capacity;
  std::vector<double> aux;

  /// Text format: a header line "shape n_t n_r samples N seed S" followed by
  /// one "x Phi(x) phi(x)" line per grid point.
  void save(std::ostream& os) const;
  static LookupTable load(std::istream& is);

  /// Checks grid monotonicity and sizes; throws std::invalid_argument.
  void validate() const;
};

/// Grid used by every lookup table.
std::vector<double> lookup_grid();

class RateEstimator {
 public:
  static constexpr std::size_t kDefaultSamples = 10000;

  /// Draws n_samples channel matrices keyed by seed. In lookup mode the
  /// samples are reduced to a table right away.
  RateEstimator(MimoShape shape, std::size_t n_samples = kDefaultSamples, std::uint64_t seed = 1,
                RateMode mode = RateMode::kMonteCarlo);

  /// Lookup-mode estimator over a stored table.
  explicit RateEstimator(LookupTable table);

  MimoShape shape() const { return shape_; }
  std::size_t n_samples() const { return n_samples_; }
  std::uint64_t seed() const { return seed_; }
  RateMode mode() const { return mode_; }
  /// Null in Monte-Carlo mode.
  const LookupTable* table() const { return table_.get(); }

  double capacity(double x) const;
  double aux(double x) const;
  /// Phi(hi) - Phi(lo) for hi >= lo; per-sample nonnegative in Monte-Carlo mode.
  double capacity_gap(double hi, double lo) const;

  void capacity_curve(std::span<const double> xs, std::span<double> out) const;
  void aux_curve(std::span<const double> xs, std::span<double> out) const;

  /// Cached eigenvalues (row-major n_samples x min_dim); empty in lookup mode.
  std::span<const double> eigenvalues() const;

  /// Standard error of the aux estimate at x (Monte-Carlo mode only).
  double aux_standard_error(double x) const;

 private:
  double interp_capacity(double x) const;
  double interp_aux(double x) const;

  MimoShape shape_;
  std::size_t n_samples_;
  std::uint64_t seed_;
  RateMode mode_;
  std::shared_ptr<const std::vector<double>> eig_;
  std::shared_ptr<const LookupTable> table_;
  std::vector<double> log_grid_;  // log1p of the table grid
};

double phi_capacity(double x, const RateEstimator& est);
double phi_aux(double x, const RateEstimator& est);

/// Phi(snr * p_total) - Phi(snr * p1) for user k on subchannel i.
double multicast_rate_term(const ChannelStats& stats, int i, int k, double p_total, double p1,
                           const RateEstimator& est);

/// Phi at the strongest user's SNR on subchannel i.
double unicast_rate_term(const ChannelStats& stats, int i, double p1, const RateEstimator& est);

/// Multicast rate (minimum over users), unicast rates per user and the two
/// weighted sums. sum_rate uses mu = K.
RateResult rate_tuple(const ChannelStats& stats, const Allocation& alloc, double mu_total,
                      const RateEstimator& est);

}  // namespace supermux

#endif  // SUPERMUX_MIMO_RATES_HPP
