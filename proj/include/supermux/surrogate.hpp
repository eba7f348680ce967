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

#ifndef SUPERMUX_SURROGATE_HPP
#define SUPERMUX_SURROGATE_HPP

// One-parameter surrogate phi_hat(x) = 1 / (1 + alpha x) for the auxiliary
// rate function phi, and the per-shape table of fitted alphas.

#include "supermux/channel_stats.hpp"
#include "supermux/mimo_rates.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace supermux {

double surrogate_phi(double x, double alpha);

/// Uniformly spaced fit points on [lo, hi].
struct FitGrid {
  double lo = 0.1;
  double hi = 100.0;
  std::size_t n = 1000;

  std::vector<double> points() const;
  /// e.g. "uniform:0.1:100:1000"
  std::string descriptor() const;
  static FitGrid parse(const std::string& descriptor);
};

struct AlphaFit {
  double alpha = 0.0;
  double mse = 0.0;
};

/// Mean squared error of the surrogate against tabulated phi values.
double surrogate_mse(std::span<const double> xs, std::span<const double> phi, double alpha);

/// Least-squares alpha: golden section on [0.5, 2 n_r max(1, n_r / n_t)],
/// then Newton steps on the derivative of the MSE.
AlphaFit fit_alpha(MimoShape shape, const RateEstimator& est, const FitGrid& grid = {});

class SurrogateTable {
 public:
  struct Entry {
    double alpha = 0.0;
    double mse = 0.0;
    std::string grid;
    std::uint64_t seed = 0;
  };

  /// The 30 shapes n_t in {1,2,4,8,16,32} x n_r in {1,2,4,8,16} with the
  /// published alphas and MSEs.
  static SurrogateTable published();

  void set(MimoShape shape, Entry entry);
  std::optional<Entry> find(MimoShape shape) const;
  const std::map<std::pair<int, int>, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// One line per shape: "n_t n_r alpha mse grid seed". Lines starting with
  /// '#' are comments.
  void save(std::ostream& os) const;
  static SurrogateTable load(std::istream& is);

 private:
  std::map<std::pair<int, int>, Entry> entries_;
};

/// Shapes of the published table, row by row.
std::vector<MimoShape> published_shapes();

/// Stored alpha for shape, or a fresh Monte-Carlo fit when the shape is missing.
double alpha_lookup(MimoShape shape, const SurrogateTable& table,
                    std::size_t fallback_samples = 100000, std::uint64_t fallback_seed = 1);

}  // namespace supermux

#endif  // SUPERMUX_SURROGATE_HPP
