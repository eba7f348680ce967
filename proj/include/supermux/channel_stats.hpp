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

#ifndef SUPERMUX_CHANNEL_STATS_HPP
#define SUPERMUX_CHANNEL_STATS_HPP

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace supermux {

/// Antenna configuration of one link: n_t transmit, n_r receive antennas.
struct MimoShape {
  int n_t = 1;
  int n_r = 1;

  MimoShape() = default;
  MimoShape(int nt, int nr);

  int min_dim() const { return n_t < n_r ? n_t : n_r; }
  bool operator==(const MimoShape&) const = default;
  auto operator<=>(const MimoShape&) const = default;
};

/// Statistical channel knowledge of the transmitter: linear channel SNRs per
/// (subchannel, user), the subchannel resource fractions and the SIC order
/// of every subchannel. Immutable once built.
///
/// Indices are zero-based: subchannel i in [0, M), user k in [0, K).
class ChannelStats {
 public:
  static constexpr double kDefaultEpsilon = 1e-9;

  /// raw_snr is M x K (one row per subchannel). Ties inside a row are broken
  /// by lowering the later (higher-index) users by epsilon * rank * value so
  /// every row is strictly ordered.
  static ChannelStats build(const Eigen::MatrixXd& raw_snr, std::vector<double> eta,
                            double epsilon = kDefaultEpsilon);

  /// Equal resource fractions 1/M.
  static ChannelStats build_uniform(const Eigen::MatrixXd& raw_snr,
                                    double epsilon = kDefaultEpsilon);

  int n_subchannels() const { return static_cast<int>(snr_.rows()); }
  int n_users() const { return static_cast<int>(snr_.cols()); }

  double snr(int i, int k) const { return snr_(i, k); }
  const Eigen::MatrixXd& snr_matrix() const { return snr_; }
  double eta(int i) const { return eta_[static_cast<std::size_t>(i)]; }
  std::span<const double> eta() const { return eta_; }

  /// Users of subchannel i sorted by descending SNR; ordering(i)[0] is the
  /// strongest user.
  std::span<const int> ordering(int i) const;
  int strongest(int i) const { return ordering(i).front(); }
  int weakest(int i) const { return ordering(i).back(); }
  /// Position of user k in the ordering of subchannel i (0 = strongest).
  int rank(int i, int k) const;

  /// Users whose SNR on subchannel i exceeds that of user k.
  std::vector<int> stronger_set(int i, int k) const;

 private:
  ChannelStats(Eigen::MatrixXd snr, std::vector<double> eta, std::vector<std::vector<int>> order);

  void check_indices(int i, int k) const;

  Eigen::MatrixXd snr_;
  std::vector<double> eta_;
  std::vector<std::vector<int>> order_;
  std::vector<std::vector<int>> rank_;
};

}  // namespace supermux

#endif  // SUPERMUX_CHANNEL_STATS_HPP
