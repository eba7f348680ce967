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

#include "supermux/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace supermux {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kOff:
      return "off";
    case Mode::kUnicastOnly:
      return "unicast-only";
    case Mode::kMulticastOnly:
      return "multicast-only";
    case Mode::kSuperposition:
      return "superposition";
  }
  return "?";
}

Mode classify_mode(double p_total, double p1) {
  if (p_total <= 0.0) return Mode::kOff;
  if (p1 <= 0.0) return Mode::kMulticastOnly;
  if (p1 >= p_total) return Mode::kUnicastOnly;
  return Mode::kSuperposition;
}

void AllocatorOptions::validate() const {
  if (!(tol_power > 0.0) || !(tol_root > 0.0) || max_newton_iters < 1 ||
      max_bisection_iters < 1 || max_outer_iters < 0 || !(outer_step > 0.0)) {
    throw std::invalid_argument("AllocatorOptions: tolerances and limits must be positive");
  }
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

double mu_sum(std::span<const double> mu_vec) {
  return std::accumulate(mu_vec.begin(), mu_vec.end(), 0.0);
}

void check_mu(const ChannelStats& stats, std::span<const double> mu_vec) {
  if (static_cast<int>(mu_vec.size()) != stats.n_users()) {
    throw std::invalid_argument("allocator: mu_vec must have one entry per user");
  }
  for (double m : mu_vec) {
    if (!(m >= 0.0)) throw std::invalid_argument("allocator: mu entries must be >= 0");
  }
}

// Root in x >= 0 of sum_k w_k / (1 + a_k x) = c, w_k >= 0, a_k > 0, c > 0.
// The left side is decreasing and log-convex, so Newton on its logarithm
// started left of the root climbs monotonically; a bracket guards rounding.
double solve_decreasing_sum(std::span<const double> w, std::span<const double> a, double c,
                            const AllocatorOptions& opts) {
  double f0 = 0.0, upper = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    f0 += w[k];
    if (w[k] > 0.0) upper += w[k] / a[k];
  }
  if (f0 <= c) return 0.0;
  double lo = 0.0;
  double hi = upper / c;  // sum w/(1+ax) < sum w/(a x)
  double x = 0.0;
  for (int it = 0; it < opts.max_newton_iters + opts.max_bisection_iters; ++it) {
    double s = 0.0, ds = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double inv = 1.0 / (1.0 + a[k] * x);
      s += w[k] * inv;
      ds -= w[k] * a[k] * inv * inv;
    }
    if (std::abs(s - c) <= opts.tol_root * c) return x;
    if (s > c) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x;
    if (it < opts.max_newton_iters && ds < 0.0) {
      // Newton on log s - log c
      next = x - (std::log(s) - std::log(c)) * s / ds;
    }
    if (!(next > lo && next < hi) || it >= opts.max_newton_iters) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);
    x = next;
  }
  std::ostringstream msg;
  msg << "root solver did not converge: bracket [" << lo << ", " << hi << "], target " << c;
  throw ConvergenceError(msg.str());
}

double best_snr(const ChannelStats& stats, int i) { return stats.snr(i, stats.strongest(i)); }

}  // namespace

double utility_u0_hat(double x, int i, std::span<const double> mu_vec, double lambda,
                      const ChannelStats& stats, Surrogate sg) {
  check_mu(stats, mu_vec);
  double acc = 0.0;
  for (int k = 0; k < stats.n_users(); ++k) {
    const double s = stats.snr(i, k);
    acc += mu_vec[static_cast<std::size_t>(k)] * s * sg.n_r / (1.0 + sg.alpha * s * x);
  }
  return acc - lambda * kLn2 / stats.eta(i);
}

double utility_u1_hat(double x, int i, double lambda, const ChannelStats& stats, Surrogate sg) {
  const double s = best_snr(stats, i);
  return s * sg.n_r / (1.0 + sg.alpha * s * x) - lambda * kLn2 / stats.eta(i);
}

double z1_closed_form(int i, double lambda, const ChannelStats& stats, Surrogate sg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("z1_closed_form: lambda must be positive");
  const double s = best_snr(stats, i);
  return (sg.n_r * stats.eta(i) / (lambda * kLn2) - 1.0 / s) / sg.alpha;
}

double z0_root(int i, std::span<const double> mu_vec, double lambda, const ChannelStats& stats,
               Surrogate sg, const AllocatorOptions& opts) {
  check_mu(stats, mu_vec);
  if (!(lambda > 0.0)) throw std::invalid_argument("z0_root: lambda must be positive");
  const auto k_users = static_cast<std::size_t>(stats.n_users());
  std::vector<double> w(k_users), a(k_users);
  for (std::size_t k = 0; k < k_users; ++k) {
    const double s = stats.snr(i, static_cast<int>(k));
    w[k] = mu_vec[k] * s * sg.n_r;
    a[k] = sg.alpha * s;
    if (!(a[k] > 0.0)) w[k] = 0.0, a[k] = 1.0;  // zero-SNR users add nothing
  }
  return solve_decreasing_sum(w, a, lambda * kLn2 / stats.eta(i), opts);
}

double g_hat(double x, int i, std::span<const double> mu_vec, const ChannelStats& stats,
             double alpha) {
  check_mu(stats, mu_vec);
  const double b = 1.0 / best_snr(stats, i);
  double acc = -1.0;
  for (int k = 0; k < stats.n_users(); ++k) {
    const double ak = 1.0 / stats.snr(i, k);
    acc += mu_vec[static_cast<std::size_t>(k)] * (b + alpha * x) / (ak + alpha * x);
  }
  return acc;
}

// g_hat = (mu - 1) - sum_k mu_k (a_k - b) / (a_k + alpha x), so its zero is
// the root of sum_k W_k / (1 + A_k x) = mu - 1 with W_k = mu_k (1 - b / a_k),
// A_k = alpha / a_k.
double g_hat_root(int i, std::span<const double> mu_vec, const ChannelStats& stats, double alpha,
                  const AllocatorOptions& opts) {
  check_mu(stats, mu_vec);
  const double mu = mu_sum(mu_vec);
  if (!(mu > 1.0)) throw std::invalid_argument("g_hat_root: needs mu > 1");
  const double s_best = best_snr(stats, i);
  const auto k_users = static_cast<std::size_t>(stats.n_users());
  std::vector<double> w(k_users), a(k_users);
  for (std::size_t k = 0; k < k_users; ++k) {
    const double sk = stats.snr(i, static_cast<int>(k));
    w[k] = mu_vec[k] * (1.0 - sk / s_best);
    a[k] = alpha * sk;
    if (!(a[k] > 0.0)) a[k] = 1e-300;
  }
  return solve_decreasing_sum(w, a, mu - 1.0, opts);
}

Waterline solve_waterline(const ChannelStats& stats, std::span<const double> mu_vec, Surrogate sg,
                          double p_t, const AllocatorOptions& opts,
                          std::span<const Branches> branches) {
  check_mu(stats, mu_vec);
  opts.validate();
  if (!(p_t > 0.0)) throw std::invalid_argument("solve_waterline: p_t must be positive");
  const int m = stats.n_subchannels();
  if (!branches.empty() && static_cast<int>(branches.size()) != m) {
    throw std::invalid_argument("solve_waterline: one branch policy per subchannel");
  }
  const auto branch = [&](int i) {
    return branches.empty() ? Branches::kBoth : branches[static_cast<std::size_t>(i)];
  };

  // above lambda_hi every root is <= 0
  double lambda_hi = 0.0;
  for (int i = 0; i < m; ++i) {
    double weighted = 0.0;
    for (int k = 0; k < stats.n_users(); ++k) {
      weighted += mu_vec[static_cast<std::size_t>(k)] * stats.snr(i, k);
    }
    double top = 0.0;
    if (branch(i) != Branches::kUnicastOnly) top = std::max(top, weighted);
    if (branch(i) != Branches::kMulticastOnly) top = std::max(top, best_snr(stats, i));
    lambda_hi = std::max(lambda_hi, stats.eta(i) * sg.n_r * top / kLn2);
  }
  if (!(lambda_hi > 0.0)) {
    throw std::invalid_argument("solve_waterline: no subchannel can take power");
  }

  Waterline out;
  out.p_total.assign(static_cast<std::size_t>(m), 0.0);
  out.from_z1.assign(static_cast<std::size_t>(m), false);
  const auto fill = [&](double lambda) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto si = static_cast<std::size_t>(i);
      double z0 = 0.0, z1 = 0.0;
      if (branch(i) != Branches::kUnicastOnly) z0 = z0_root(i, mu_vec, lambda, stats, sg, opts);
      if (branch(i) != Branches::kMulticastOnly) z1 = z1_closed_form(i, lambda, stats, sg);
      out.from_z1[si] = z1 > z0 && z1 > 0.0;
      out.p_total[si] = std::max({z0, z1, 0.0});
      total += out.p_total[si];
    }
    return total;
  };

  double lambda_lo = 0.5 * lambda_hi;
  int grow = 0;
  while (fill(lambda_lo) <= p_t) {
    lambda_hi = lambda_lo;
    lambda_lo *= 0.5;
    if (++grow > 2000) throw ConvergenceError("solve_waterline: cannot bracket the waterline");
  }
  // bisection in log lambda; total power is decreasing in lambda
  double lambda = lambda_lo;
  double total = 0.0;
  bool converged = false;
  for (int it = 0; it < opts.max_bisection_iters; ++it) {
    lambda = std::sqrt(lambda_lo * lambda_hi);
    total = fill(lambda);
    if (std::abs(total - p_t) <= opts.tol_power * p_t) {
      converged = true;
      break;
    }
    if (total > p_t) {
      lambda_lo = lambda;
    } else {
      lambda_hi = lambda;
    }
    if (lambda_hi / lambda_lo - 1.0 < 1e-15) break;
  }
  if (!converged) {
    // a waterline that jumps past p_t (ties between subchannels) still
    // leaves the lower end of the bracket with a feasible surplus
    lambda = lambda_lo;
    total = fill(lambda);
    if (!(total > 0.0)) {
      std::ostringstream msg;
      msg << "solve_waterline: no convergence, lambda in [" << lambda_lo << ", " << lambda_hi
          << "], power " << total << " vs " << p_t;
      throw ConvergenceError(msg.str());
    }
  }
  for (double& p : out.p_total) p *= p_t / total;
  out.lambda = lambda;
  return out;
}

PowerSplit split_power(int i, double p_i, bool from_z1, std::span<const double> mu_vec,
                       const ChannelStats& stats, double alpha, const AllocatorOptions& opts) {
  check_mu(stats, mu_vec);
  if (!(p_i >= 0.0)) throw std::invalid_argument("split_power: power must be >= 0");
  if (p_i == 0.0) return {0.0, 0.0, Mode::kOff};
  if (from_z1) return {0.0, p_i, Mode::kUnicastOnly};
  // guard: sum_k mu_k s_k >= s_best  <=>  g_hat(0) >= 0
  double weighted = 0.0;
  for (int k = 0; k < stats.n_users(); ++k) {
    weighted += mu_vec[static_cast<std::size_t>(k)] * stats.snr(i, k);
  }
  if (weighted >= best_snr(stats, i) || mu_sum(mu_vec) <= 1.0) {
    return {p_i, 0.0, Mode::kMulticastOnly};
  }
  const double z = g_hat_root(i, mu_vec, stats, alpha, opts);
  const double p1 = std::min(z, p_i);
  if (p1 <= 0.0) return {p_i, 0.0, Mode::kMulticastOnly};
  return {p_i - p1, p1, classify_mode(p_i, p1)};
}

LagrangianValue lagrangian(const ChannelStats& stats, const Allocation& alloc,
                           std::span<const double> mu_vec, const RateEstimator& est) {
  check_mu(stats, mu_vec);
  const int m = stats.n_subchannels();
  LagrangianValue out;
  out.subgradient.assign(static_cast<std::size_t>(stats.n_users()), 0.0);
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double p = alloc.p_total[si];
    const double p1 = alloc.p1[si];
    for (int k = 0; k < stats.n_users(); ++k) {
      const double s = stats.snr(i, k);
      out.subgradient[static_cast<std::size_t>(k)] +=
          stats.eta(i) * est.capacity_gap(s * p, s * p1);
    }
    if (p1 > 0.0) out.value += stats.eta(i) * est.capacity(best_snr(stats, i) * p1);
  }
  for (std::size_t k = 0; k < out.subgradient.size(); ++k) {
    out.value += mu_vec[k] * out.subgradient[k];
  }
  return out;
}

std::vector<double> project_simplex(std::span<const double> v, double total) {
  if (v.empty()) return {};
  if (!(total >= 0.0)) throw std::invalid_argument("project_simplex: total must be >= 0");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cum += sorted[j];
    const double t = (cum - total) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
  // absorb rounding so the sum is exact to the last bit that matters
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  if (s > 0.0) {
    for (double& x : out) x *= total / s;
  }
  return out;
}

OuterResult outer_minimize(const InnerSolver& inner, const ChannelStats& stats, double mu_total,
                           const RateEstimator& est, const AllocatorOptions& opts) {
  if (!(mu_total > 0.0)) throw std::invalid_argument("outer_minimize: mu_total must be > 0");
  const auto k_users = static_cast<std::size_t>(stats.n_users());
  std::vector<double> mu(k_users, mu_total / static_cast<double>(k_users));
  OuterResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= std::max(1, opts.max_outer_iters); ++t) {
    Allocation alloc = inner(mu);
    const auto lv = lagrangian(stats, alloc, mu, est);
    if (lv.value < out.value) {
      out.value = lv.value;
      out.mu_vec = mu;
    }
    out.trace.push_back({mu, lv.value, std::move(alloc)});
    out.iterations = t;
    if (k_users == 1 || t == opts.max_outer_iters) break;
    // centred, normalised subgradient; only directions inside the simplex matter
    std::vector<double> g = lv.subgradient;
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(k_users);
    double norm = 0.0;
    for (double& x : g) {
      x -= mean;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    const double step = opts.outer_step * mu_total / std::sqrt(static_cast<double>(t));
    std::vector<double> next(k_users);
    for (std::size_t k = 0; k < k_users; ++k) next[k] = mu[k] - step * g[k] / norm;
    mu = project_simplex(next, mu_total);
  }
  return out;
}

Allocation allocate_for_weights(const ChannelStats& stats, std::span<const double> mu_vec,
                                Surrogate sg, double p_t, const AllocatorOptions& opts,
                                std::span<const Branches> branches) {
  const auto wl = solve_waterline(stats, mu_vec, sg, p_t, opts, branches);
  const int m = stats.n_subchannels();
  Allocation a;
  a.lambda = wl.lambda;
  a.mu_vec.assign(mu_vec.begin(), mu_vec.end());
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Branches b = branches.empty() ? Branches::kBoth : branches[si];
    PowerSplit ps;
    const double p = wl.p_total[si];
    if (p <= 0.0) {
      ps = {0.0, 0.0, Mode::kOff};
    } else if (b == Branches::kMulticastOnly) {
      ps = {p, 0.0, Mode::kMulticastOnly};
    } else if (b == Branches::kUnicastOnly) {
      ps = {0.0, p, Mode::kUnicastOnly};
    } else {
      ps = split_power(i, p, wl.from_z1[si], mu_vec, stats, sg.alpha, opts);
    }
    a.p_total.push_back(p);
    a.p1.push_back(ps.p1);
    a.p0.push_back(p - ps.p1);
    a.selected_user.push_back(ps.p1 > 0.0 ? stats.strongest(i) : -1);
    a.mode.push_back(ps.mode);
  }
  return a;
}

namespace {

// Runs the outer loop and keeps the visited allocation with the largest
// actual weighted sum rate.
Solution best_visited(const InnerSolver& inner, const ChannelStats& stats, double mu_total,
                      const RateEstimator& est, const AllocatorOptions& opts) {
  const auto outer = outer_minimize(inner, stats, mu_total, est, opts);
  Solution best;
  best.rates.wsr = -std::numeric_limits<double>::infinity();
  for (const auto& visit : outer.trace) {
    auto rates = rate_tuple(stats, visit.alloc, mu_total, est);
    if (rates.wsr > best.rates.wsr) {
      best.alloc = visit.alloc;
      best.rates = std::move(rates);
    }
  }
  return best;
}

void check_problem(const ChannelStats& stats, double mu_total, double p_t, double alpha) {
  (void)stats;
  if (!(mu_total >= 0.0)) throw std::invalid_argument("allocator: mu_total must be >= 0");
  if (!(p_t > 0.0)) throw std::invalid_argument("allocator: p_t must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("allocator: alpha must be positive");
}

std::vector<double> uniform_mu(const ChannelStats& stats, double mu_total) {
  return std::vector<double>(static_cast<std::size_t>(stats.n_users()),
                             mu_total / stats.n_users());
}

Solution unicast_only(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                      const RateEstimator& est, const AllocatorOptions& opts) {
  const std::vector<Branches> branches(static_cast<std::size_t>(stats.n_subchannels()),
                                       Branches::kUnicastOnly);
  const auto zeros = std::vector<double>(static_cast<std::size_t>(stats.n_users()), 0.0);
  Solution s;
  s.alloc = allocate_for_weights(stats, zeros, {alpha, est.shape().n_r}, p_t, opts, branches);
  s.alloc.mu_vec = uniform_mu(stats, mu_total);
  s.rates = rate_tuple(stats, s.alloc, mu_total, est);
  return s;
}

}  // namespace

Solution algorithm1(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts) {
  check_problem(stats, mu_total, p_t, alpha);
  if (mu_total <= 1.0) return unicast_only(stats, mu_total, p_t, alpha, est, opts);
  const Surrogate sg{alpha, est.shape().n_r};
  const InnerSolver inner = [&](std::span<const double> mu) {
    return allocate_for_weights(stats, mu, sg, p_t, opts);
  };
  return best_visited(inner, stats, mu_total, est, opts);
}

Allocation algorithm2_for_weights(const ChannelStats& stats, std::span<const double> mu_vec,
                                  double alpha, double p_t) {
  check_mu(stats, mu_vec);
  const double mu = mu_sum(mu_vec);
  const int m = stats.n_subchannels();
  const double p = p_t / m;
  Allocation a;
  a.mu_vec.assign(mu_vec.begin(), mu_vec.end());
  for (int i = 0; i < m; ++i) {
    double p1 = 0.0;
    if (mu > 1.0) {
      double inv = 0.0;
      for (int k = 0; k < stats.n_users(); ++k) {
        inv += mu_vec[static_cast<std::size_t>(k)] / mu / stats.snr(i, k);
      }
      const double z = (inv - mu / best_snr(stats, i)) / (alpha * (mu - 1.0));
      p1 = std::max(0.0, std::min(z, p));
    } else {
      p1 = p;
    }
    a.p_total.push_back(p);
    a.p1.push_back(p1);
    a.p0.push_back(p - p1);
    a.selected_user.push_back(p1 > 0.0 ? stats.strongest(i) : -1);
    a.mode.push_back(classify_mode(p, p1));
  }
  return a;
}

Solution algorithm2(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts) {
  check_problem(stats, mu_total, p_t, alpha);
  if (mu_total <= 1.0) return unicast_only(stats, mu_total, p_t, alpha, est, opts);
  const InnerSolver inner = [&](std::span<const double> mu) {
    return algorithm2_for_weights(stats, mu, alpha, p_t);
  };
  return best_visited(inner, stats, mu_total, est, opts);
}

Solution baseline_unicast_only(const ChannelStats& stats, double p_t, double alpha,
                               const RateEstimator& est, const AllocatorOptions& opts) {
  check_problem(stats, 0.0, p_t, alpha);
  return unicast_only(stats, 0.0, p_t, alpha, est, opts);
}

Solution baseline_multicast_only(const ChannelStats& stats, double mu_total, double p_t,
                                 double alpha, const RateEstimator& est,
                                 const AllocatorOptions& opts) {
  check_problem(stats, mu_total, p_t, alpha);
  if (!(mu_total > 0.0)) throw std::invalid_argument("multicast-only: mu_total must be > 0");
  const Surrogate sg{alpha, est.shape().n_r};
  const std::vector<Branches> branches(static_cast<std::size_t>(stats.n_subchannels()),
                                       Branches::kMulticastOnly);
  const InnerSolver inner = [&](std::span<const double> mu) {
    return allocate_for_weights(stats, mu, sg, p_t, opts, branches);
  };
  return best_visited(inner, stats, mu_total, est, opts);
}

namespace {

// Subchannels with identical statistics are interchangeable; an assignment
// is then fixed by how many multicast subchannels each class receives.
std::vector<std::vector<int>> equivalence_classes(const ChannelStats& stats) {
  std::vector<std::vector<int>> classes;
  for (int i = 0; i < stats.n_subchannels(); ++i) {
    bool placed = false;
    for (auto& c : classes) {
      const int j = c.front();
      if (stats.eta(i) == stats.eta(j) && stats.snr_matrix().row(i) == stats.snr_matrix().row(j)) {
        c.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({i});
  }
  return classes;
}

void enumerate_counts(const std::vector<std::vector<int>>& classes, std::size_t c, int remaining,
                      std::vector<int>& counts, std::vector<std::vector<int>>& out) {
  if (c == classes.size()) {
    if (remaining == 0) out.push_back(counts);
    return;
  }
  const int cap = std::min<int>(remaining, static_cast<int>(classes[c].size()));
  for (int n = cap; n >= 0; --n) {
    counts[c] = n;
    enumerate_counts(classes, c + 1, remaining - n, counts, out);
  }
}

}  // namespace

Solution baseline_orthogonal(const ChannelStats& stats, double mu_total, double p_t, double alpha,
                             double split_fraction, const RateEstimator& est,
                             const AllocatorOptions& opts) {
  check_problem(stats, mu_total, p_t, alpha);
  if (!(split_fraction > 0.0) || split_fraction > 1.0) {
    throw std::invalid_argument("orthogonal: split_fraction must lie in (0, 1]");
  }
  if (!(mu_total > 0.0)) throw std::invalid_argument("orthogonal: mu_total must be > 0");
  const int m = stats.n_subchannels();
  const int n_mc = std::min(m, static_cast<int>(std::ceil(split_fraction * m - 1e-12)));
  const Surrogate sg{alpha, est.shape().n_r};

  const auto solve = [&](const std::vector<Branches>& branches) {
    const InnerSolver inner = [&](std::span<const double> mu) {
      return allocate_for_weights(stats, mu, sg, p_t, opts, branches);
    };
    return best_visited(inner, stats, mu_total, est, opts);
  };

  Solution best;
  best.rates.wsr = -std::numeric_limits<double>::infinity();
  if (m <= 12) {
    const auto classes = equivalence_classes(stats);
    std::vector<std::vector<int>> assignments;
    std::vector<int> counts(classes.size(), 0);
    enumerate_counts(classes, 0, n_mc, counts, assignments);
    for (const auto& a : assignments) {
      std::vector<Branches> branches(static_cast<std::size_t>(m), Branches::kUnicastOnly);
      for (std::size_t c = 0; c < classes.size(); ++c) {
        for (int r = 0; r < a[c]; ++r) {
          branches[static_cast<std::size_t>(classes[c][static_cast<std::size_t>(r)])] =
              Branches::kMulticastOnly;
        }
      }
      auto s = solve(branches);
      if (s.rates.wsr > best.rates.wsr) best = std::move(s);
    }
    return best;
  }

  // greedy: start from the subchannels best for the weakest user, then swap
  // pairs while the rate improves
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return stats.snr(x, stats.weakest(x)) > stats.snr(y, stats.weakest(y));
  });
  std::vector<Branches> branches(static_cast<std::size_t>(m), Branches::kUnicastOnly);
  for (int r = 0; r < n_mc; ++r) {
    branches[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = Branches::kMulticastOnly;
  }
  best = solve(branches);
  for (bool improved = true; improved;) {
    improved = false;
    for (int x = 0; x < m && !improved; ++x) {
      for (int y = 0; y < m && !improved; ++y) {
        const auto sx = static_cast<std::size_t>(x), sy = static_cast<std::size_t>(y);
        if (branches[sx] != Branches::kMulticastOnly || branches[sy] != Branches::kUnicastOnly) {
          continue;
        }
        std::swap(branches[sx], branches[sy]);
        auto s = solve(branches);
        if (s.rates.wsr > best.rates.wsr * (1.0 + 1e-9)) {
          best = std::move(s);
          improved = true;
        } else {
          std::swap(branches[sx], branches[sy]);
        }
      }
    }
  }
  return best;
}

std::string check_allocation(const ChannelStats& stats, const Allocation& alloc, double p_t,
                             double alpha, const AllocatorOptions& opts, bool check_root) {
  std::ostringstream msg;
  const int m = stats.n_subchannels();
  if (alloc.n_subchannels() != m || alloc.p1.size() != alloc.p_total.size() ||
      alloc.p0.size() != alloc.p_total.size() || alloc.mode.size() != alloc.p_total.size() ||
      alloc.selected_user.size() != alloc.p_total.size()) {
    return "allocation size does not match the subchannel count";
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double p = alloc.p_total[si], p1 = alloc.p1[si];
    total += p;
    if (p1 < 0.0 || p1 > p) {
      msg << "subchannel " << i << ": p1 " << p1 << " outside [0, " << p << "]";
      return msg.str();
    }
    if (alloc.mode[si] != classify_mode(p, p1)) {
      msg << "subchannel " << i << ": mode " << mode_name(alloc.mode[si])
          << " inconsistent with powers";
      return msg.str();
    }
    if (check_root && alloc.mode[si] == Mode::kSuperposition && !alloc.mu_vec.empty()) {
      double weighted = 0.0;
      for (int k = 0; k < stats.n_users(); ++k) {
        weighted += alloc.mu_vec[static_cast<std::size_t>(k)] * stats.snr(i, k);
      }
      if (weighted >= best_snr(stats, i)) {
        msg << "subchannel " << i << ": superposition although the multicast guard holds";
        return msg.str();
      }
      const double g = g_hat(p1, i, alloc.mu_vec, stats, alpha);
      if (std::abs(g) > 1e3 * opts.tol_root * std::max(1.0, mu_sum(alloc.mu_vec))) {
        msg << "subchannel " << i << ": g_hat(p1) = " << g << " is not zero";
        return msg.str();
      }
    }
  }
  if (std::abs(total - p_t) > opts.tol_power * p_t) {
    msg << "power sum " << total << " differs from " << p_t;
    return msg.str();
  }
  return {};
}

}  // namespace supermux
