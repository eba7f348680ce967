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
#include "supermux/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace supermux;

TEST_SUITE("oracle") {
  TEST_CASE("brute force agrees with algorithm1 on the two-user example") {
    Eigen::MatrixXd snr(1, 2);
    snr << 4.0, 1.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const RateEstimator est(MimoShape(8, 4), 10000, 1, RateMode::kLookup);
    const auto bf = brute_force_wsr(stats, 2.0, 10.0, 16, est);
    const auto a1 = algorithm1(stats, 2.0, 10.0, 1.164, est);
    CHECK(a1.rates.wsr == doctest::Approx(bf.best_wsr).epsilon(0.02));
    const auto alloc = brute_force_allocation(stats, bf);
    CHECK(alloc.p_total[0] == doctest::Approx(10.0));
  }

  TEST_CASE("brute force: finer grids do not lose") {
    Eigen::MatrixXd snr(2, 2);
    snr << 30.0, 2.0, 5.0, 60.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const RateEstimator est(MimoShape(2, 2), 5000, 1, RateMode::kLookup);
    const auto coarse = brute_force_wsr(stats, 2.0, 1.0, 8, est, 0);
    const auto fine = brute_force_wsr(stats, 2.0, 1.0, 16, est, 0);
    CHECK(fine.best_wsr >= coarse.best_wsr - 1e-12);
    const auto refined = brute_force_wsr(stats, 2.0, 1.0, 8, est);
    CHECK(refined.best_wsr >= coarse.best_wsr - 1e-12);
  }

  TEST_CASE("brute force refuses large problems") {
    Eigen::MatrixXd snr(3, 2);
    snr.setOnes();
    const auto stats = ChannelStats::build_uniform(snr);
    const RateEstimator est(MimoShape(1, 1), 100, 1, RateMode::kLookup);
    CHECK_THROWS(brute_force_wsr(stats, 2.0, 1.0, 8, est));
  }

  TEST_CASE("direct solver: weaker users get nothing, blocks are scalar") {
    Eigen::MatrixXd snr(1, 3);
    snr << 200.0, 20.0, 3.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const auto samples = kernels::draw_channel_samples(MimoShape(2, 2), 256, 3, true);
    const std::vector<double> mu = {0.5, 0.5, 2.0};
    DirectOptions o;
    o.n_random_starts = 5;
    const auto r = direct_covariance_solver(stats, mu, 1.0, samples, o);
    CHECK(r.start_values.size() == 6);
    CHECK(r.q.size() == 4);
    const double leak = std::accumulate(r.q[2].begin(), r.q[2].end(), 0.0) +
                        std::accumulate(r.q[3].begin(), r.q[3].end(), 0.0);
    CHECK(leak < 1e-3);
    for (const auto* blk : {&r.q[0], &r.q[1]}) {
      const double tr = (*blk)[0] + (*blk)[1];
      if (tr > 1e-3) CHECK((*blk)[0] == doctest::Approx((*blk)[1]).epsilon(0.01));
    }
  }

  TEST_CASE("direct solver: low multicast weight sends unicast only") {
    Eigen::MatrixXd snr(1, 2);
    snr << 50.0, 5.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const auto samples = kernels::draw_channel_samples(MimoShape(2, 2), 256, 5, true);
    const std::vector<double> mu = {0.3, 0.5};
    const auto r = direct_covariance_solver(stats, mu, 1.0, samples);
    CHECK(r.q[0][0] + r.q[0][1] < 1e-3);
    CHECK(r.q[1][0] == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.q[1][1] == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("direct objective gradient matches finite differences") {
    Eigen::MatrixXd snr(1, 2);
    snr << 10.0, 2.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const auto samples = kernels::draw_channel_samples(MimoShape(2, 2), 64, 1, false);
    const std::vector<double> mu = {0.7, 1.3};
    std::vector<double> q = {0.2, 0.1, 0.3, 0.15, 0.05, 0.2};
    const auto g = direct_objective(stats, mu, samples, q, true);
    for (std::size_t j = 0; j < q.size(); ++j) {
      auto up = q, dn = q;
      up[j] += 1e-6;
      dn[j] -= 1e-6;
      const double fd = (direct_objective(stats, mu, samples, up, false).value -
                         direct_objective(stats, mu, samples, dn, false).value) /
                        2e-6;
      CHECK(g.grad[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("dof slopes of the three schemes") {
    Eigen::MatrixXd snr(2, 3);
    for (int k = 0; k < 3; ++k) snr(0, k) = snr(1, k) = std::pow(2.0, -k);
    const auto stats = ChannelStats::build_uniform(snr);
    const RateEstimator est(MimoShape(2, 2), 4000, 1);
    const std::vector<double> grid = {30, 40, 50, 60};
    const auto mo = dof_slope({DofScheme::kMulticastOnly, 0, 0.5}, stats, grid, 3.0, 1.402, est);
    const auto uo = dof_slope({DofScheme::kUnicastOnly, 0, 0.5}, stats, grid, 3.0, 1.402, est);
    const auto mix = dof_slope({DofScheme::kMixed, 1, 0.5}, stats, grid, 3.0, 1.402, est);
    CHECK(mo.slope == doctest::Approx(6.0).epsilon(0.05));
    CHECK(uo.slope == doctest::Approx(2.0).epsilon(0.05));
    CHECK(mix.slope == doctest::Approx(4.0).epsilon(0.07));
    CHECK_THROWS(dof_slope({DofScheme::kUnicastOnly, 0, 0.5}, stats,
                           std::vector<double>{30, 40}, 3.0, 1.402, est));
  }
}
