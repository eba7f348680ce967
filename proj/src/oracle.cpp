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

#include "supermux/oracle.hpp"

#include "supermux/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace supermux {

// ------------------------------------------------------------------------
// brute force

namespace {

// Point in the unit cube: M = 1 -> (f0), M = 2 -> (t, f0, f1) with
// P^(0) = t p_t and P1^(i) = f_i P^(i).
struct BrutePoint {
  std::array<double, 3> c{};
};

void powers_of(const BrutePoint& pt, int m, double p_t, double* p, double* p1) {
  if (m == 1) {
    p[0] = p_t;
    p1[0] = pt.c[0] * p_t;
    return;
  }
  p[0] = pt.c[0] * p_t;
  p[1] = p_t - p[0];
  p1[0] = pt.c[1] * p[0];
  p1[1] = pt.c[2] * p[1];
}

}  // namespace

OracleResult brute_force_wsr(const ChannelStats& stats, double mu_total, double p_t,
                             int grid_resolution, const RateEstimator& est, int refine_rounds) {
  const int m = stats.n_subchannels();
  const int k_users = stats.n_users();
  if (m > 2 || k_users > 3) throw std::invalid_argument("brute_force_wsr: needs M <= 2, K <= 3");
  if (grid_resolution < 8) throw std::invalid_argument("brute_force_wsr: resolution must be >= 8");
  if (!(p_t > 0.0) || !(mu_total >= 0.0)) {
    throw std::invalid_argument("brute_force_wsr: needs p_t > 0 and mu_total >= 0");
  }
  const int dims = 2 * m - 1;
  const double cells = std::pow(grid_resolution + 1.0, dims);
  if (cells > 5e6) throw std::length_error("brute_force_wsr: grid exceeds 5e6 points");

  std::int64_t evaluations = 0;
  const auto wsr = [&](const BrutePoint& pt) {
    ++evaluations;
    double p[2], p1[2];
    powers_of(pt, m, p_t, p, p1);
    double r0 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_users; ++k) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        const double s = stats.snr(i, k);
        acc += stats.eta(i) * est.capacity_gap(s * p[i], s * p1[i]);
      }
      r0 = std::min(r0, acc);
    }
    double uni = 0.0;
    for (int i = 0; i < m; ++i) {
      uni += stats.eta(i) * est.capacity(stats.snr(i, stats.strongest(i)) * p1[i]);
    }
    return mu_total * r0 + uni;
  };

  BrutePoint best;
  double best_value = -std::numeric_limits<double>::infinity();
  const int n = grid_resolution + 1;
  std::array<int, 3> idx{};
  const auto total = static_cast<std::int64_t>(cells);
  for (std::int64_t cell = 0; cell < total; ++cell) {
    std::int64_t rem = cell;
    BrutePoint pt;
    for (int d = 0; d < dims; ++d) {
      idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % n);
      rem /= n;
      pt.c[static_cast<std::size_t>(d)] = static_cast<double>(idx[static_cast<std::size_t>(d)]) / grid_resolution;
    }
    const double v = wsr(pt);
    if (v > best_value) {
      best_value = v;
      best = pt;
    }
  }

  // zoom: 5 points per axis around the incumbent, spacing halved per round
  double h = 1.0 / grid_resolution;
  const int local = static_cast<int>(std::pow(5, dims));
  for (int round = 0; round < refine_rounds; ++round) {
    h *= 0.5;
    const BrutePoint centre = best;
    for (int cell = 0; cell < local; ++cell) {
      int rem = cell;
      BrutePoint pt;
      for (int d = 0; d < dims; ++d) {
        const int off = rem % 5 - 2;
        rem /= 5;
        const auto sd = static_cast<std::size_t>(d);
        pt.c[sd] = std::clamp(centre.c[sd] + off * h, 0.0, 1.0);
      }
      const double v = wsr(pt);
      if (v > best_value) {
        best_value = v;
        best = pt;
      }
    }
  }

  OracleResult out;
  out.best_wsr = best_value;
  double p[2], p1[2];
  powers_of(best, m, p_t, p, p1);
  for (int i = 0; i < m; ++i) out.best_point.push_back(p[i]);
  for (int i = 0; i < m; ++i) out.best_point.push_back(p1[i]);
  std::ostringstream tr;
  tr << "grid " << n << "^" << dims << ", zoom rounds " << refine_rounds << ", evaluations "
     << evaluations;
  out.trace = tr.str();
  return out;
}

Allocation brute_force_allocation(const ChannelStats& stats, const OracleResult& r) {
  const int m = stats.n_subchannels();
  if (static_cast<int>(r.best_point.size()) != 2 * m) {
    throw std::invalid_argument("brute_force_allocation: point does not match stats");
  }
  Allocation a;
  for (int i = 0; i < m; ++i) {
    const double p = r.best_point[static_cast<std::size_t>(i)];
    const double p1 = r.best_point[static_cast<std::size_t>(m + i)];
    a.p_total.push_back(p);
    a.p1.push_back(p1);
    a.p0.push_back(p - p1);
    a.selected_user.push_back(p1 > 0.0 ? stats.strongest(i) : -1);
    a.mode.push_back(classify_mode(p, p1));
  }
  return a;
}

// ------------------------------------------------------------------------
// direct covariance solver

DirectObjective direct_objective(const ChannelStats& stats, std::span<const double> mu_vec,
                                 const kernels::ChannelSamples& samples,
                                 std::span<const double> q, bool with_gradient) {
  const int k_users = stats.n_users();
  const auto n_t = static_cast<std::size_t>(samples.shape.n_t);
  const auto blocks = static_cast<std::size_t>(k_users + 1);
  if (q.size() != blocks * n_t || static_cast<int>(mu_vec.size()) != k_users) {
    throw std::invalid_argument("direct_objective: size mismatch");
  }
  const auto block = [&](std::size_t b) { return q.subspan(b * n_t, n_t); };

  DirectObjective out;
  if (with_gradient) out.grad.assign(q.size(), 0.0);
  const auto add_grad = [&](std::size_t b, const std::vector<double>& g, double w) {
    if (!with_gradient) return;
    for (std::size_t j = 0; j < n_t; ++j) out.grad[b * n_t + j] += w * g[j];
  };

  std::vector<double> unicast_sum(n_t, 0.0);
  for (std::size_t b = 1; b < blocks; ++b) {
    for (std::size_t j = 0; j < n_t; ++j) unicast_sum[j] += block(b)[j];
  }
  std::vector<double> all = unicast_sum;
  for (std::size_t j = 0; j < n_t; ++j) all[j] += block(0)[j];

  // multicast: every unicast layer is interference
  for (int k = 0; k < k_users; ++k) {
    const double mu = mu_vec[static_cast<std::size_t>(k)];
    if (mu == 0.0) continue;
    const double s = stats.snr(0, k);
    const auto hi = kernels::parallel::log_det_mean(samples, s, all, with_gradient);
    const auto lo = kernels::parallel::log_det_mean(samples, s, unicast_sum, with_gradient);
    out.value += mu * (hi.value - lo.value);
    add_grad(0, hi.grad, mu);
    for (std::size_t b = 1; b < blocks; ++b) {
      add_grad(b, hi.grad, mu);
      add_grad(b, lo.grad, -mu);
    }
  }
  // unicast with SIC: user at position j sees positions < j as interference
  const auto order = stats.ordering(0);
  std::vector<double> partial(n_t, 0.0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int user = order[pos];
    const double s = stats.snr(0, user);
    const std::vector<double> before = partial;
    for (std::size_t j = 0; j < n_t; ++j) partial[j] += block(static_cast<std::size_t>(user) + 1)[j];
    const auto hi = kernels::parallel::log_det_mean(samples, s, partial, with_gradient);
    out.value += hi.value;
    for (std::size_t r = 0; r <= pos; ++r) add_grad(static_cast<std::size_t>(order[r]) + 1, hi.grad, 1.0);
    if (pos > 0) {
      const auto lo = kernels::parallel::log_det_mean(samples, s, before, with_gradient);
      out.value -= lo.value;
      for (std::size_t r = 0; r < pos; ++r) {
        add_grad(static_cast<std::size_t>(order[r]) + 1, lo.grad, -1.0);
      }
    }
  }
  return out;
}

namespace {

struct AscentRun {
  std::vector<double> q;
  double value = 0.0;
  int iterations = 0;
};

AscentRun projected_ascent(const ChannelStats& stats, std::span<const double> mu_vec,
                           const kernels::ChannelSamples& samples, std::vector<double> q,
                           double p_t, const DirectOptions& opts) {
  auto cur = direct_objective(stats, mu_vec, samples, q, true);
  double gmax = 0.0;
  for (double g : cur.grad) gmax = std::max(gmax, std::abs(g));
  double step = gmax > 0.0 ? 0.1 * p_t / gmax : 1.0;
  AscentRun run;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<double> trial(q.size());
      for (std::size_t j = 0; j < q.size(); ++j) trial[j] = q[j] + step * cur.grad[j];
      trial = project_simplex(trial, p_t);
      double dmax = 0.0, ascent = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        dmax = std::max(dmax, std::abs(trial[j] - q[j]));
        ascent += cur.grad[j] * (trial[j] - q[j]);
      }
      if (dmax < opts.step_tol * p_t) break;
      auto next = direct_objective(stats, mu_vec, samples, trial, true);
      if (next.value >= cur.value + 1e-4 * ascent) {
        q = std::move(trial);
        cur = std::move(next);
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  run.q = std::move(q);
  run.value = cur.value;
  run.iterations = it;
  return run;
}

}  // namespace

DirectResult direct_covariance_solver(const ChannelStats& stats, std::span<const double> mu_vec,
                                      double p_t, const kernels::ChannelSamples& samples,
                                      const DirectOptions& opts) {
  const int k_users = stats.n_users();
  const int n_t = samples.shape.n_t;
  if (stats.n_subchannels() != 1 || k_users > 3 || n_t > 4) {
    throw std::invalid_argument("direct_covariance_solver: needs M = 1, K <= 3, n_t <= 4");
  }
  if (!(p_t > 0.0)) throw std::invalid_argument("direct_covariance_solver: p_t must be > 0");
  if (opts.n_random_starts < 0 || opts.max_iters < 1) {
    throw std::invalid_argument("direct_covariance_solver: bad options");
  }
  const auto nt = static_cast<std::size_t>(n_t);
  const std::size_t size = static_cast<std::size_t>(k_users + 1) * nt;
  const int strongest = stats.strongest(0);

  // structured start: scalar Q0 and Q of the strongest user, split by a 1-D search
  const auto structured = [&](double p1) {
    std::vector<double> q(size, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
      q[j] = (p_t - p1) / n_t;
      q[(static_cast<std::size_t>(strongest) + 1) * nt + j] = p1 / n_t;
    }
    return q;
  };
  const auto value_at = [&](double p1) {
    return direct_objective(stats, mu_vec, samples, structured(p1), false).value;
  };
  double a = 0.0, b = p_t;
  const double inv_gold = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_gold * (b - a), d = a + inv_gold * (b - a);
  double fc = value_at(c), fd = value_at(d);
  for (int it = 0; it < 40; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - inv_gold * (b - a);
      fc = value_at(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + inv_gold * (b - a);
      fd = value_at(d);
    }
  }
  double p1_best = 0.5 * (a + b);
  double f_best = value_at(p1_best);
  for (double edge : {0.0, p_t}) {
    const double f = value_at(edge);
    if (f > f_best) f_best = f, p1_best = edge;
  }

  DirectResult out;
  auto best = projected_ascent(stats, mu_vec, samples, structured(p1_best), p_t, opts);
  out.start_values.push_back(best.value);
  out.winning_start = 0;

  CounterRng rng(opts.seed, 0x5eed);
  for (int start = 1; start <= opts.n_random_starts; ++start) {
    std::vector<double> q(size);
    double sum = 0.0;
    for (double& x : q) sum += (x = -std::log(rng.uniform()));
    for (double& x : q) x *= p_t / sum;
    auto run = projected_ascent(stats, mu_vec, samples, std::move(q), p_t, opts);
    out.start_values.push_back(run.value);
    // a random start has to beat the incumbent by more than rounding
    if (run.value > best.value + 1e-7 * (1.0 + std::abs(best.value))) {
      best = std::move(run);
      out.winning_start = start;
    }
  }

  out.result.best_wsr = best.value;
  out.result.best_point = best.q;
  out.iterations = best.iterations;
  for (int bl = 0; bl <= k_users; ++bl) {
    out.q.emplace_back(best.q.begin() + bl * n_t, best.q.begin() + (bl + 1) * n_t);
  }
  std::ostringstream tr;
  tr << "starts " << out.start_values.size() << ", winner " << out.winning_start
     << ", iterations " << out.iterations << ", structured p1 " << p1_best;
  out.result.trace = tr.str();
  return out;
}

// ------------------------------------------------------------------------
// degrees of freedom

std::string dof_scheme_name(const DofSpec& spec) {
  switch (spec.scheme) {
    case DofScheme::kMulticastOnly:
      return "MO";
    case DofScheme::kUnicastOnly:
      return "UO";
    case DofScheme::kMixed: {
      std::ostringstream os;
      os << "Mixed(m'=" << spec.m_prime << ")";
      return os.str();
    }
  }
  return "?";
}

DofResult dof_slope(const DofSpec& spec, const ChannelStats& stats,
                    std::span<const double> p_grid_db, double mu_total, double alpha,
                    const RateEstimator& est, const AllocatorOptions& opts) {
  if (p_grid_db.size() < 2) throw std::invalid_argument("dof_slope: need >= 2 grid points");
  const auto [lo, hi] = std::minmax_element(p_grid_db.begin(), p_grid_db.end());
  if (*hi - *lo < 20.0) throw std::invalid_argument("dof_slope: grid must span >= 20 dB");
  const int m = stats.n_subchannels();
  if (spec.scheme == DofScheme::kMixed &&
      (spec.m_prime < 0 || spec.m_prime > m || !(spec.unicast_fraction > 0.0) ||
       !(spec.unicast_fraction < 1.0))) {
    throw std::invalid_argument("dof_slope: mixed needs 0 <= m' <= M and fraction in (0, 1)");
  }

  DofResult out;
  for (double db : p_grid_db) {
    const double p_t = std::pow(10.0, db / 10.0);
    RateResult r;
    switch (spec.scheme) {
      case DofScheme::kMulticastOnly:
        r = baseline_multicast_only(stats, mu_total, p_t, alpha, est, opts).rates;
        break;
      case DofScheme::kUnicastOnly:
        r = baseline_unicast_only(stats, p_t, alpha, est, opts).rates;
        break;
      case DofScheme::kMixed: {
        Allocation a;
        for (int i = 0; i < m; ++i) {
          const double p = p_t / m;
          const double p1 = i < spec.m_prime ? spec.unicast_fraction * p : 0.0;
          a.p_total.push_back(p);
          a.p1.push_back(p1);
          a.p0.push_back(p - p1);
          a.selected_user.push_back(p1 > 0.0 ? stats.strongest(i) : -1);
          a.mode.push_back(classify_mode(p, p1));
        }
        r = rate_tuple(stats, a, mu_total, est);
        break;
      }
    }
    out.p_db.push_back(db);
    out.sum_rate.push_back(r.sum_rate);
  }
  // least squares against log2 P = db / (10 log10 2)
  const double n = static_cast<double>(out.p_db.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < out.p_db.size(); ++j) {
    mx += out.p_db[j] / (10.0 * std::log10(2.0));
    my += out.sum_rate[j];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < out.p_db.size(); ++j) {
    const double x = out.p_db[j] / (10.0 * std::log10(2.0)) - mx;
    sxy += x * (out.sum_rate[j] - my);
    sxx += x * x;
  }
  out.slope = sxy / sxx;
  return out;
}

}  // namespace supermux
