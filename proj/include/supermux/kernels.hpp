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

#ifndef SUPERMUX_KERNELS_HPP
#define SUPERMUX_KERNELS_HPP

// Monte-Carlo kernels over i.i.d. Rayleigh channel samples.
//
// Each kernel exists twice: `parallel::` is the OpenMP implementation used by
// the library, `serial::` is a plain loop kept as the reference the tests
// and the benchmark compare against. Both draw sample s from
// CounterRng(seed, s), so they consume identical channel realisations.
// Parallel reductions sum fixed-size blocks in block order, so their result
// does not depend on the thread count.

#include "supermux/channel_stats.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace supermux::kernels {

/// Samples summed per block in the parallel reductions.
inline constexpr std::size_t kReductionBlock = 2048;

/// Channel matrices H (n_r x n_t, CN(0,1) entries), stored sample after
/// sample in column-major order.
struct ChannelSamples {
  MimoShape shape;
  std::size_t n = 0;
  std::vector<std::complex<double>> h;

  std::span<const std::complex<double>> sample(std::size_t s) const {
    const auto len = static_cast<std::size_t>(shape.n_r * shape.n_t);
    return {h.data() + s * len, len};
  }
};

/// Draws n_base matrices. With cyclic_symmetrise, every draw is followed by
/// its n_t - 1 cyclic column shifts, which makes sample averages exactly
/// invariant to cyclic relabelling of the transmit antennas.
ChannelSamples draw_channel_samples(MimoShape shape, std::size_t n_base, std::uint64_t seed,
                                    bool cyclic_symmetrise);

/// Value and gradient of E[log2 det(I + snr * H diag(d) H^H)] over a sample set.
struct LogDetMean {
  double value = 0.0;
  std::vector<double> grad;  ///< d value / d d_j, one entry per transmit antenna
};

namespace serial {

/// Nonzero eigenvalues of H H^H for samples [0, n): row-major, n x min(n_t, n_r),
/// ascending within each sample.
std::vector<double> wishart_eigenvalues(MimoShape shape, std::size_t n, std::uint64_t seed);

/// Mean over samples of sum_m log2(1 + x d_m / n_t) for every x in xs.
void capacity_curve(std::span<const double> eig, int dim, int n_t, std::span<const double> xs,
                    std::span<double> out);

/// Mean over samples of (1/n_r) sum_m (x + n_t / d_m)^-1 for every x in xs.
void aux_curve(std::span<const double> eig, int dim, int n_t, int n_r,
               std::span<const double> xs, std::span<double> out);

/// Mean over samples of sum_m log2((1 + hi d_m / n_t) / (1 + lo d_m / n_t)).
double capacity_gap(std::span<const double> eig, int dim, int n_t, double hi, double lo);

LogDetMean log_det_mean(const ChannelSamples& samples, double snr, std::span<const double> d,
                        bool with_gradient);

}  // namespace serial

namespace parallel {

std::vector<double> wishart_eigenvalues(MimoShape shape, std::size_t n, std::uint64_t seed);

void capacity_curve(std::span<const double> eig, int dim, int n_t, std::span<const double> xs,
                    std::span<double> out);

void aux_curve(std::span<const double> eig, int dim, int n_t, int n_r,
               std::span<const double> xs, std::span<double> out);

double capacity_gap(std::span<const double> eig, int dim, int n_t, double hi, double lo);

LogDetMean log_det_mean(const ChannelSamples& samples, double snr, std::span<const double> d,
                        bool with_gradient);

}  // namespace parallel

}  // namespace supermux::kernels

#endif  // SUPERMUX_KERNELS_HPP
