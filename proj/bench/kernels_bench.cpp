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

// Serial reference vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.

#include "supermux/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

namespace {

using namespace supermux;
namespace k = supermux::kernels;

const MimoShape kShape(8, 4);
constexpr std::size_t kSamples = 20000;

std::vector<double> grid() {
  std::vector<double> xs(256);
  for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = std::pow(10.0, -3.0 + 8.0 * j / 255.0);
  return xs;
}

const std::vector<double>& eig() {
  static const auto e = k::serial::wishart_eigenvalues(kShape, kSamples, 1);
  return e;
}

void BM_wishart_eigenvalues(benchmark::State& st) {
  for (auto _ : st) {
    auto e = st.range(0) ? k::parallel::wishart_eigenvalues(kShape, 2000, 1)
                         : k::serial::wishart_eigenvalues(kShape, 2000, 1);
    benchmark::DoNotOptimize(e.data());
  }
}

void BM_capacity_curve(benchmark::State& st) {
  const auto xs = grid();
  std::vector<double> out(xs.size());
  const int dim = kShape.min_dim();
  for (auto _ : st) {
    if (st.range(0)) {
      k::parallel::capacity_curve(eig(), dim, kShape.n_t, xs, out);
    } else {
      k::serial::capacity_curve(eig(), dim, kShape.n_t, xs, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_aux_curve(benchmark::State& st) {
  const auto xs = grid();
  std::vector<double> out(xs.size());
  const int dim = kShape.min_dim();
  for (auto _ : st) {
    if (st.range(0)) {
      k::parallel::aux_curve(eig(), dim, kShape.n_t, kShape.n_r, xs, out);
    } else {
      k::serial::aux_curve(eig(), dim, kShape.n_t, kShape.n_r, xs, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_log_det_mean(benchmark::State& st) {
  const MimoShape shape(4, 4);
  const auto h = k::draw_channel_samples(shape, 512, 2, true);
  const std::vector<double> d = {0.4, 0.3, 0.2, 0.1};
  for (auto _ : st) {
    auto r = st.range(0) ? k::parallel::log_det_mean(h, 10.0, d, true)
                         : k::serial::log_det_mean(h, 10.0, d, true);
    benchmark::DoNotOptimize(r.value);
  }
}

}  // namespace

BENCHMARK(BM_wishart_eigenvalues)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_capacity_curve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_aux_curve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_log_det_mean)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
