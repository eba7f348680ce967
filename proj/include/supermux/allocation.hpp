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

#ifndef SUPERMUX_ALLOCATION_HPP
#define SUPERMUX_ALLOCATION_HPP

#include <string>
#include <string_view>
#include <vector>

namespace supermux {

/// Per-subchannel transmission mode.
enum class Mode { kOff, kUnicastOnly, kMulticastOnly, kSuperposition };

std::string_view mode_name(Mode mode);

/// Mode implied by a (total, unicast) power pair. Exact comparisons: the
/// allocators write p1 = 0 or p1 = p_total explicitly at the boundaries.
Mode classify_mode(double p_total, double p1);

/// Power split over M subchannels plus the dual variables that produced it.
struct Allocation {
  std::vector<double> p_total;     ///< P^(i)
  std::vector<double> p1;          ///< unicast power P_1^(i)
  std::vector<double> p0;          ///< multicast power P^(i) - P_1^(i)
  std::vector<int> selected_user;  ///< strongest user of subchannel i, or -1
  std::vector<Mode> mode;
  double lambda = 0.0;             ///< waterline dual
  std::vector<double> mu_vec;      ///< per-user multicast weights, sum = mu

  int n_subchannels() const { return static_cast<int>(p_total.size()); }
};

/// Rates of one allocation, in bits/s/Hz.
struct RateResult {
  double r0 = 0.0;
  std::vector<double> r_k;
  double sum_rate = 0.0;  ///< K * r0 + sum r_k
  double wsr = 0.0;       ///< mu * r0 + sum r_k
};

}  // namespace supermux

#endif  // SUPERMUX_ALLOCATION_HPP
