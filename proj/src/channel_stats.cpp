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

#include "supermux/channel_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace supermux {

MimoShape::MimoShape(int nt, int nr) : n_t(nt), n_r(nr) {
  if (nt < 1 || nr < 1) {
    throw std::invalid_argument("MimoShape: antenna counts must be >= 1");
  }
}

namespace {

std::vector<int> descending_order(const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& row) {
  std::vector<int> order(static_cast<std::size_t>(row.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return row(a) > row(b); });
  return order;
}

// Lowers tied entries until the row is strictly ordered. Within a group of
// equal values the user with the lowest index keeps its value, the next one
// loses epsilon * value, the next 2 * epsilon * value, and so on. A pass can
// create fresh ties with the next group down, hence the loop.
void break_ties(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double epsilon) {
  const int k_users = static_cast<int>(row.size());
  for (int pass = 0; pass < 4 * k_users + 4; ++pass) {
    const auto order = descending_order(row);
    bool changed = false;
    for (int a = 0; a < k_users;) {
      int b = a + 1;
      while (b < k_users && row(order[b]) == row(order[a])) ++b;
      if (b - a > 1) {
        const double value = row(order[a]);
        if (value <= 0.0) {
          throw std::invalid_argument("ChannelStats: tied zero SNRs cannot be ordered");
        }
        // stable_sort keeps ascending user index inside the tie group
        for (int r = 1; r < b - a; ++r) {
          row(order[a + r]) = value - epsilon * r * value;
        }
        changed = true;
      }
      a = b;
    }
    if (!changed) return;
  }
  throw std::invalid_argument("ChannelStats: tie breaking did not converge");
}

}  // namespace

ChannelStats::ChannelStats(Eigen::MatrixXd snr, std::vector<double> eta,
                           std::vector<std::vector<int>> order)
    : snr_(std::move(snr)), eta_(std::move(eta)), order_(std::move(order)) {
  rank_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    rank_[i].assign(order_[i].size(), 0);
    for (std::size_t r = 0; r < order_[i].size(); ++r) {
      rank_[i][static_cast<std::size_t>(order_[i][r])] = static_cast<int>(r);
    }
  }
}

ChannelStats ChannelStats::build(const Eigen::MatrixXd& raw_snr, std::vector<double> eta,
                                 double epsilon) {
  const auto m = raw_snr.rows();
  const auto k = raw_snr.cols();
  if (m < 1 || k < 1) {
    throw std::invalid_argument("ChannelStats: need at least one subchannel and one user");
  }
  if (static_cast<Eigen::Index>(eta.size()) != m) {
    throw std::invalid_argument("ChannelStats: eta has " + std::to_string(eta.size()) +
                                " entries for " + std::to_string(m) + " subchannels");
  }
  if (!(epsilon > 0.0) || epsilon >= 1.0) {
    throw std::invalid_argument("ChannelStats: epsilon must lie in (0, 1)");
  }
  double eta_sum = 0.0;
  for (double e : eta) {
    if (!(e > 0.0)) throw std::invalid_argument("ChannelStats: eta entries must be positive");
    eta_sum += e;
  }
  if (std::abs(eta_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("ChannelStats: eta must sum to 1");
  }
  // renormalise so the stored fractions sum to 1 within rounding
  for (double& e : eta) e /= eta_sum;

  if (!raw_snr.allFinite() || (raw_snr.array() < 0.0).any()) {
    throw std::invalid_argument("ChannelStats: SNRs must be finite and non-negative");
  }

  Eigen::MatrixXd snr = raw_snr;
  std::vector<std::vector<int>> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    break_ties(snr.row(i), epsilon);
    order[static_cast<std::size_t>(i)] = descending_order(snr.row(i));
  }
  return ChannelStats(std::move(snr), std::move(eta), std::move(order));
}

ChannelStats ChannelStats::build_uniform(const Eigen::MatrixXd& raw_snr, double epsilon) {
  const auto m = static_cast<std::size_t>(raw_snr.rows());
  return build(raw_snr, std::vector<double>(m, 1.0 / static_cast<double>(m)), epsilon);
}

void ChannelStats::check_indices(int i, int k) const {
  if (i < 0 || i >= n_subchannels()) {
    throw std::out_of_range("ChannelStats: subchannel index " + std::to_string(i));
  }
  if (k < 0 || k >= n_users()) {
    throw std::out_of_range("ChannelStats: user index " + std::to_string(k));
  }
}

std::span<const int> ChannelStats::ordering(int i) const {
  check_indices(i, 0);
  return order_[static_cast<std::size_t>(i)];
}

int ChannelStats::rank(int i, int k) const {
  check_indices(i, k);
  return rank_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
}

std::vector<int> ChannelStats::stronger_set(int i, int k) const {
  const auto order = ordering(i);
  const int r = rank(i, k);
  std::vector<int> out(order.begin(), order.begin() + r);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace supermux
