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

#ifndef SUPERMUX_ALLOCATOR_HPP
#define SUPERMUX_ALLOCATOR_HPP

// Surrogate water-filling over subchannels with per-subchannel superposition
// of a multicast layer and one unicast layer (the strongest user), and the
// outer minimisation over the multicast weights mu_k.
//
// Notation: alpha is the surrogate parameter of the link shape, n_r its
// receive antenna count, lambda the power dual. Powers are per subchannel.

#include "supermux/allocation.hpp"
#include "supermux/channel_stats.hpp"
#include "supermux/mimo_rates.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace supermux {

struct AllocatorOptions {
  double tol_power = 1e-6;   ///< relative to p_t
  double tol_root = 1e-10;   ///< relative to the root equation's constant term
  int max_newton_iters = 50;
  int max_bisection_iters = 200;
  int max_outer_iters = 200;
  double outer_step = 0.5;   ///< step at t = 1 is outer_step * mu / sqrt(t)
  void validate() const;
};

/// Raised when an iterative solver gives up; carries its bracketing state.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Surrogate parameters of one link shape.
struct Surrogate {
  double alpha = 1.0;
  int n_r = 1;
};

/// Which layers a subchannel may carry.
enum class Branches { kBoth, kMulticastOnly, kUnicastOnly };

double utility_u0_hat(double x, int i, std::span<const double> mu_vec, double lambda,
                      const ChannelStats& stats, Surrogate sg);
double utility_u1_hat(double x, int i, double lambda, const ChannelStats& stats, Surrogate sg);

/// Root of u1_hat; may be negative.
double z1_closed_form(int i, double lambda, const ChannelStats& stats, Surrogate sg);

/// Root in x >= 0 of u0_hat; 0 when u0_hat(0) <= 0.
double z0_root(int i, std::span<const double> mu_vec, double lambda, const ChannelStats& stats,
               Surrogate sg, const AllocatorOptions& opts);

/// g_hat(x) = -1 + sum_k mu_k (1/s_best + alpha x) / (1/s_k + alpha x).
double g_hat(double x, int i, std::span<const double> mu_vec, const ChannelStats& stats,
             double alpha);

/// Zero of g_hat in x > 0 (requires g_hat(0) < 0 and mu > 1).
double g_hat_root(int i, std::span<const double> mu_vec, const ChannelStats& stats, double alpha,
                  const AllocatorOptions& opts);

struct Waterline {
  double lambda = 0.0;
  std::vector<double> p_total;
  std::vector<bool> from_z1;  ///< subchannel power set by the unicast branch
};

/// Bisection on lambda so that sum_i max{z0, z1, 0} = p_t, restricted per
/// subchannel by branches (empty = kBoth everywhere). The result is scaled
/// to use exactly p_t.
Waterline solve_waterline(const ChannelStats& stats, std::span<const double> mu_vec, Surrogate sg,
                          double p_t, const AllocatorOptions& opts,
                          std::span<const Branches> branches = {});

struct PowerSplit {
  double p0 = 0.0;
  double p1 = 0.0;
  Mode mode = Mode::kOff;
};

PowerSplit split_power(int i, double p_i, bool from_z1, std::span<const double> mu_vec,
                       const ChannelStats& stats, double alpha, const AllocatorOptions& opts);

/// Value of the Lagrangian and its mu-subgradient at an allocation (exact Phi).
struct LagrangianValue {
  double value = 0.0;
  std::vector<double> subgradient;  ///< sum_i eta_i (Phi(s P) - Phi(s P1)) per user
};

LagrangianValue lagrangian(const ChannelStats& stats, const Allocation& alloc,
                           std::span<const double> mu_vec, const RateEstimator& est);

/// Inner evaluator for the outer loop: allocation for a given mu_vec.
using InnerSolver = std::function<Allocation(std::span<const double> mu_vec)>;

struct OuterResult {
  std::vector<double> mu_vec;  ///< smallest observed V
  double value = 0.0;
  int iterations = 0;
  /// Every visited point, in order (mu_vec, V, allocation).
  struct Visit {
    std::vector<double> mu_vec;
    double value;
    Allocation alloc;
  };
  std::vector<Visit> trace;
};

/// Projected subgradient descent of V(mu) over {mu_k >= 0, sum mu_k = mu_total}
/// starting from mu_k = mu_total / K.
OuterResult outer_minimize(const InnerSolver& inner, const ChannelStats& stats, double mu_total,
                           const RateEstimator& est, const AllocatorOptions& opts);

/// Euclidean projection onto {x >= 0, sum x = total}.
std::vector<double> project_simplex(std::span<const double> v, double total);

struct Solution {
  Allocation alloc;
  RateResult rates;
};

/// Allocation for fixed weights: waterline, then the per-subchannel split.
Allocation allocate_for_weights(const ChannelStats& stats, std::span<const double> mu_vec,
                                Surrogate sg, double p_t, const AllocatorOptions& opts,
                                std::span<const Branches> branches = {});

Solution algorithm1(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts = {});

/// Uniform power with the closed-form unicast power.
Allocation algorithm2_for_weights(const ChannelStats& stats, std::span<const double> mu_vec,
                                  double alpha, double p_t);

Solution algorithm2(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts = {});

Solution baseline_unicast_only(const ChannelStats& stats, double p_t, double alpha,
                               const RateEstimator& est, const AllocatorOptions& opts = {});

Solution baseline_multicast_only(const ChannelStats& stats, double mu_total, double p_t,
                                 double alpha, const RateEstimator& est,
                                 const AllocatorOptions& opts = {});

/// ceil(split_fraction * M) subchannels multicast-only, the rest unicast-only.
Solution baseline_orthogonal(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                             double split_fraction, const RateEstimator& est,
                             const AllocatorOptions& opts = {});

/// Checks power conservation and mode/guard consistency. Returns an empty
/// string when all invariants hold, else a description of the first failure.
/// check_root also applies the split rule of algorithm1 on superposition
/// subchannels (guard fails, g_hat(P1) = 0); the closed-form split of
/// algorithm2 does not follow it.
std::string check_allocation(const ChannelStats& stats, const Allocation& alloc, double p_t,
                             double alpha, const AllocatorOptions& opts = {},
                             bool check_root = true);

}  // namespace supermux

#endif  // SUPERMUX_ALLOCATOR_HPP
