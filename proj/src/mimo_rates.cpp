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

#include "supermux/mimo_rates.hpp"

#include "supermux/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace supermux {

namespace {

void check_nonnegative(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + ": argument must be finite and >= 0");
  }
}

}  // namespace

std::vector<double> lookup_grid() {
  std::vector<double> x(LookupTable::kPoints);
  const double lo = std::log10(LookupTable::kXMin);
  const double hi = std::log10(LookupTable::kXMax);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(x.size() - 1);
    x[j] = std::pow(10.0, lo + t * (hi - lo));
  }
  return x;
}

void LookupTable::validate() const {
  if (x.size() < 2 || capacity.size() != x.size() || aux.size() != x.size()) {
    throw std::invalid_argument("LookupTable: inconsistent sizes");
  }
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (!(x[j] > x[j - 1])) throw std::invalid_argument("LookupTable: grid not increasing");
    if (capacity[j] < capacity[j - 1]) {
      throw std::invalid_argument("LookupTable: capacity not nondecreasing");
    }
  }
  if (!(x.front() > 0.0)) throw std::invalid_argument("LookupTable: grid must be positive");
}

void LookupTable::save(std::ostream& os) const {
  os << "shape " << shape.n_t << ' ' << shape.n_r << " samples " << n_samples << " seed "
     << seed << '\n';
  os << std::setprecision(17);
  for (std::size_t j = 0; j < x.size(); ++j) {
    os << x[j] << ' ' << capacity[j] << ' ' << aux[j] << '\n';
  }
}

LookupTable LookupTable::load(std::istream& is) {
  LookupTable t;
  std::string tag_shape, tag_samples, tag_seed;
  int n_t = 0, n_r = 0;
  if (!(is >> tag_shape >> n_t >> n_r >> tag_samples >> t.n_samples >> tag_seed >> t.seed) ||
      tag_shape != "shape" || tag_samples != "samples" || tag_seed != "seed") {
    throw std::invalid_argument("LookupTable: malformed header");
  }
  t.shape = MimoShape(n_t, n_r);
  double x = 0, c = 0, a = 0;
  while (is >> x >> c >> a) {
    t.x.push_back(x);
    t.capacity.push_back(c);
    t.aux.push_back(a);
  }
  t.validate();
  return t;
}

RateEstimator::RateEstimator(MimoShape shape, std::size_t n_samples, std::uint64_t seed,
                             RateMode mode)
    : shape_(shape), n_samples_(n_samples), seed_(seed), mode_(mode) {
  if (n_samples == 0) throw std::invalid_argument("RateEstimator: n_samples must be >= 1");
  auto eig = std::make_shared<std::vector<double>>(
      kernels::parallel::wishart_eigenvalues(shape, n_samples, seed));
  if (mode == RateMode::kMonteCarlo) {
    eig_ = std::move(eig);
    return;
  }
  auto table = std::make_shared<LookupTable>();
  table->shape = shape;
  table->n_samples = n_samples;
  table->seed = seed;
  table->x = lookup_grid();
  table->capacity.resize(table->x.size());
  table->aux.resize(table->x.size());
  kernels::parallel::capacity_curve(*eig, shape.min_dim(), shape.n_t, table->x, table->capacity);
  kernels::parallel::aux_curve(*eig, shape.min_dim(), shape.n_t, shape.n_r, table->x, table->aux);
  table->validate();
  for (double x : table->x) log_grid_.push_back(std::log1p(x));
  table_ = std::move(table);
}

RateEstimator::RateEstimator(LookupTable table)
    : shape_(table.shape),
      n_samples_(table.n_samples),
      seed_(table.seed),
      mode_(RateMode::kLookup) {
  table.validate();
  for (double x : table.x) log_grid_.push_back(std::log1p(x));
  table_ = std::make_shared<const LookupTable>(std::move(table));
}

std::span<const double> RateEstimator::eigenvalues() const {
  if (!eig_) return {};
  return *eig_;
}

// Linear in u = log(1 + x). Below the grid the curve runs to (0, Phi(0) = 0);
// above it the last segment is extended, which follows Phi's n log x growth.
double RateEstimator::interp_capacity(double x) const {
  const auto& t = *table_;
  const double u = std::log1p(x);
  const std::size_t n = log_grid_.size();
  if (u <= log_grid_[0]) return t.capacity[0] * u / log_grid_[0];
  if (u >= log_grid_[n - 1]) {
    const double slope =
        (t.capacity[n - 1] - t.capacity[n - 2]) / (log_grid_[n - 1] - log_grid_[n - 2]);
    return t.capacity[n - 1] + slope * (u - log_grid_[n - 1]);
  }
  const auto it = std::upper_bound(log_grid_.begin(), log_grid_.end(), u);
  const auto j = static_cast<std::size_t>(it - log_grid_.begin()) - 1;
  const double w = (u - log_grid_[j]) / (log_grid_[j + 1] - log_grid_[j]);
  return t.capacity[j] + w * (t.capacity[j + 1] - t.capacity[j]);
}

double RateEstimator::interp_aux(double x) const {
  const auto& t = *table_;
  const double u = std::log1p(x);
  const std::size_t n = log_grid_.size();
  if (u <= log_grid_[0]) return 1.0 + (t.aux[0] - 1.0) * u / log_grid_[0];
  if (u >= log_grid_[n - 1]) return t.aux[n - 1] * t.x[n - 1] / x;
  const auto it = std::upper_bound(log_grid_.begin(), log_grid_.end(), u);
  const auto j = static_cast<std::size_t>(it - log_grid_.begin()) - 1;
  const double w = (u - log_grid_[j]) / (log_grid_[j + 1] - log_grid_[j]);
  return t.aux[j] + w * (t.aux[j + 1] - t.aux[j]);
}

double RateEstimator::capacity(double x) const {
  check_nonnegative(x, "phi_capacity");
  if (x == 0.0) return 0.0;
  if (mode_ == RateMode::kLookup) return interp_capacity(x);
  double out = 0.0;
  const double xs[1] = {x};
  kernels::parallel::capacity_curve(*eig_, shape_.min_dim(), shape_.n_t, xs, {&out, 1});
  return out;
}

double RateEstimator::aux(double x) const {
  check_nonnegative(x, "phi_aux");
  if (mode_ == RateMode::kLookup) return x == 0.0 ? 1.0 : interp_aux(x);
  double out = 0.0;
  const double xs[1] = {x};
  kernels::parallel::aux_curve(*eig_, shape_.min_dim(), shape_.n_t, shape_.n_r, xs, {&out, 1});
  return out;
}

double RateEstimator::capacity_gap(double hi, double lo) const {
  check_nonnegative(lo, "capacity_gap");
  if (hi < lo) throw std::invalid_argument("capacity_gap: hi must be >= lo");
  if (hi == lo) return 0.0;
  if (mode_ == RateMode::kLookup) {
    return std::max(0.0, interp_capacity(hi) - (lo == 0.0 ? 0.0 : interp_capacity(lo)));
  }
  return kernels::parallel::capacity_gap(*eig_, shape_.min_dim(), shape_.n_t, hi, lo);
}

void RateEstimator::capacity_curve(std::span<const double> xs, std::span<double> out) const {
  if (xs.size() != out.size()) throw std::invalid_argument("capacity_curve: size mismatch");
  for (double x : xs) check_nonnegative(x, "capacity_curve");
  if (mode_ == RateMode::kLookup) {
    for (std::size_t q = 0; q < xs.size(); ++q) out[q] = xs[q] == 0.0 ? 0.0 : interp_capacity(xs[q]);
    return;
  }
  kernels::parallel::capacity_curve(*eig_, shape_.min_dim(), shape_.n_t, xs, out);
}

void RateEstimator::aux_curve(std::span<const double> xs, std::span<double> out) const {
  if (xs.size() != out.size()) throw std::invalid_argument("aux_curve: size mismatch");
  for (double x : xs) check_nonnegative(x, "aux_curve");
  if (mode_ == RateMode::kLookup) {
    for (std::size_t q = 0; q < xs.size(); ++q) out[q] = xs[q] == 0.0 ? 1.0 : interp_aux(xs[q]);
    return;
  }
  kernels::parallel::aux_curve(*eig_, shape_.min_dim(), shape_.n_t, shape_.n_r, xs, out);
}

double RateEstimator::aux_standard_error(double x) const {
  check_nonnegative(x, "aux_standard_error");
  if (!eig_) throw std::logic_error("aux_standard_error: needs Monte-Carlo mode");
  const int dim = shape_.min_dim();
  const double n_t = shape_.n_t;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < n_samples_; ++s) {
    double v = 0.0;
    for (int m = 0; m < dim; ++m) {
      const double d = (*eig_)[s * static_cast<std::size_t>(dim) + static_cast<std::size_t>(m)];
      if (d > 0.0) v += d / (x * d + n_t);
    }
    v /= shape_.n_r;
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  if (n_samples_ < 2) return std::numeric_limits<double>::infinity();
  return std::sqrt(m2 / static_cast<double>(n_samples_ - 1) / static_cast<double>(n_samples_));
}

double phi_capacity(double x, const RateEstimator& est) { return est.capacity(x); }

double phi_aux(double x, const RateEstimator& est) { return est.aux(x); }

double multicast_rate_term(const ChannelStats& stats, int i, int k, double p_total, double p1,
                           const RateEstimator& est) {
  check_nonnegative(p1, "multicast_rate_term");
  if (p1 > p_total) throw std::invalid_argument("multicast_rate_term: p1 exceeds p_total");
  const double s = stats.snr(i, k);
  return est.capacity_gap(s * p_total, s * p1);
}

double unicast_rate_term(const ChannelStats& stats, int i, double p1, const RateEstimator& est) {
  check_nonnegative(p1, "unicast_rate_term");
  return est.capacity(stats.snr(i, stats.strongest(i)) * p1);
}

RateResult rate_tuple(const ChannelStats& stats, const Allocation& alloc, double mu_total,
                      const RateEstimator& est) {
  const int m = stats.n_subchannels();
  const int k_users = stats.n_users();
  const auto sz = static_cast<std::size_t>(m);
  if (alloc.p_total.size() != sz || alloc.p1.size() != sz || alloc.selected_user.size() != sz) {
    throw std::invalid_argument("rate_tuple: allocation does not match channel stats");
  }
  RateResult out;
  out.r_k.assign(static_cast<std::size_t>(k_users), 0.0);
  out.r0 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_users; ++k) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto si = static_cast<std::size_t>(i);
      acc += stats.eta(i) *
             multicast_rate_term(stats, i, k, alloc.p_total[si], alloc.p1[si], est);
    }
    out.r0 = std::min(out.r0, acc);
  }
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const int user = alloc.selected_user[si];
    if (user < 0 || alloc.p1[si] <= 0.0) continue;
    if (user >= k_users) throw std::invalid_argument("rate_tuple: selected user out of range");
    out.r_k[static_cast<std::size_t>(user)] +=
        stats.eta(i) * est.capacity(stats.snr(i, user) * alloc.p1[si]);
  }
  double unicast_sum = 0.0;
  for (double r : out.r_k) unicast_sum += r;
  out.sum_rate = k_users * out.r0 + unicast_sum;
  out.wsr = mu_total * out.r0 + unicast_sum;
  return out;
}

}  // namespace supermux
