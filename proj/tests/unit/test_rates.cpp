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
#include "supermux/kernels.hpp"
#include "supermux/mimo_rates.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace supermux;

namespace {

// 1x1 Rayleigh: Phi(x) = e^{1/x} E1(1/x) / ln 2, values frozen from that form.
constexpr double kPhi1x1[][2] = {
    {0.5, 0.521287003716}, {1.0, 0.860347382271}, {2.0, 1.33147859267},
    {8.0, 2.65395619414},  {10.0, 2.90651480841}, {40.0, 4.63957667529},
};

double phi_1x1_closed(double x) {
  return std::exp(1.0 / x) * -std::expint(-1.0 / x) / std::log(2.0);
}

}  // namespace

TEST_SUITE("channel-stats") {
  TEST_CASE("ordering is by descending snr") {
    Eigen::MatrixXd snr(2, 3);
    snr << 1.0, 5.0, 3.0, 9.0, 2.0, 4.0;
    const auto s = ChannelStats::build_uniform(snr);
    CHECK(s.strongest(0) == 1);
    CHECK(s.weakest(0) == 0);
    CHECK(s.strongest(1) == 0);
    CHECK(s.rank(0, 2) == 1);
    CHECK(s.stronger_set(0, 0) == std::vector<int>{1, 2});
    CHECK(s.eta(0) == doctest::Approx(0.5));
  }

  TEST_CASE("ties are broken towards the lower index") {
    Eigen::MatrixXd snr(1, 3);
    snr << 2.0, 2.0, 2.0;
    const auto s = ChannelStats::build_uniform(snr);
    CHECK(s.ordering(0)[0] == 0);
    CHECK(s.ordering(0)[2] == 2);
    CHECK(s.snr(0, 0) > s.snr(0, 1));
    CHECK(s.snr(0, 1) > s.snr(0, 2));
    CHECK(s.snr(0, 2) == doctest::Approx(2.0).epsilon(1e-8));
  }

  TEST_CASE("bad inputs are rejected") {
    Eigen::MatrixXd snr(2, 1);
    snr << 1.0, -1.0;
    CHECK_THROWS_AS(ChannelStats::build_uniform(snr), std::invalid_argument);
    snr << 1.0, 1.0;
    CHECK_THROWS_AS(ChannelStats::build(snr, {0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(ChannelStats::build(snr, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MimoShape(0, 2), std::invalid_argument);
  }
}

TEST_SUITE("mimo-rates") {
  TEST_CASE("1x1 capacity matches the exponential-integral form") {
    const RateEstimator est(MimoShape(1, 1), 100000, 11);
    for (const auto& [x, phi] : kPhi1x1) {
      CHECK(phi_1x1_closed(x) == doctest::Approx(phi).epsilon(1e-10));
      CHECK(est.capacity(x) == doctest::Approx(phi).epsilon(0.01));
    }
  }

  TEST_CASE("weak user is the binding one in the 1x1 two-user example") {
    // Phi(10) - Phi(2) < Phi(40) - Phi(8)
    CHECK(kPhi1x1[4][1] - kPhi1x1[2][1] < kPhi1x1[5][1] - kPhi1x1[3][1]);
    const RateEstimator est(MimoShape(1, 1), 20000, 3);
    CHECK(est.capacity_gap(10.0, 2.0) < est.capacity_gap(40.0, 8.0));
    CHECK(est.capacity_gap(1.0, 0.5) == doctest::Approx(0.339060).epsilon(0.02));
  }

  TEST_CASE("capacity basics") {
    for (const auto& shape : {MimoShape(1, 1), MimoShape(2, 4), MimoShape(8, 4)}) {
      const RateEstimator est(shape, 5000, 2);
      CHECK(est.capacity(0.0) == 0.0);
      CHECK(est.aux(0.0) == doctest::Approx(1.0).epsilon(0.05));
      double prev = 0.0;
      for (double x : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double c = est.capacity(x);
        CHECK(c > prev);
        prev = c;
      }
      // gap is never negative with shared samples
      CHECK(est.capacity_gap(3.0, 3.0) == 0.0);
      CHECK(est.capacity_gap(5.0, 1.0) > 0.0);
      CHECK_THROWS_AS(est.capacity(-1.0), std::invalid_argument);
    }
  }

  TEST_CASE("high-snr slope is min(n_t, n_r)") {
    const RateEstimator est(MimoShape(4, 2), 20000, 5);
    const double slope = (est.capacity(1e6) - est.capacity(1e5)) / std::log2(10.0);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.01));
  }

  TEST_CASE("lookup table tracks Monte-Carlo and round-trips") {
    const MimoShape shape(8, 4);
    const RateEstimator mc(shape, 10000, 7);
    const RateEstimator lk(shape, 10000, 7, RateMode::kLookup);
    for (double x : {0.002, 0.3, 4.0, 55.0, 900.0, 5e4}) {
      CHECK(lk.capacity(x) == doctest::Approx(mc.capacity(x)).epsilon(2e-3));
      CHECK(lk.aux(x) == doctest::Approx(mc.aux(x)).epsilon(2e-2));
    }
    // beyond the grid: linear capacity extension, aux ~ 1/x
    CHECK(lk.capacity(1e6) > lk.capacity(1e5));
    CHECK(lk.aux(2e5) == doctest::Approx(lk.aux(1e5) / 2.0).epsilon(1e-6));
    CHECK(lk.capacity(0.0) == 0.0);
    CHECK(lk.aux(0.0) == 1.0);

    std::stringstream ss;
    lk.table()->save(ss);
    const auto back = LookupTable::load(ss);
    CHECK(back.shape == shape);
    CHECK(back.n_samples == 10000);
    const RateEstimator re(back);
    CHECK(re.capacity(3.3) == doctest::Approx(lk.capacity(3.3)).epsilon(1e-9));
  }

  TEST_CASE("table loader rejects junk") {
    std::stringstream bad("shape 2 2 samples 10 seed 1\n1 2 3\n");
    CHECK_THROWS(LookupTable::load(bad));
  }

  TEST_CASE("serial and parallel kernels agree") {
    const MimoShape shape(4, 3);
    const auto es = kernels::serial::wishart_eigenvalues(shape, 5000, 9);
    const auto ep = kernels::parallel::wishart_eigenvalues(shape, 5000, 9);
    CHECK(es == ep);
    const std::vector<double> xs = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> cs(4), cp(4), as(4), ap(4);
    kernels::serial::capacity_curve(es, 3, 4, xs, cs);
    kernels::parallel::capacity_curve(ep, 3, 4, xs, cp);
    kernels::serial::aux_curve(es, 3, 4, 3, xs, as);
    kernels::parallel::aux_curve(ep, 3, 4, 3, xs, ap);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(cs[j] == doctest::Approx(cp[j]).epsilon(1e-12));
      CHECK(as[j] == doctest::Approx(ap[j]).epsilon(1e-12));
    }
    CHECK(kernels::serial::capacity_gap(es, 3, 4, 20.0, 2.0) ==
          doctest::Approx(kernels::parallel::capacity_gap(ep, 3, 4, 20.0, 2.0)).epsilon(1e-12));

    const auto h = kernels::draw_channel_samples(shape, 300, 4, true);
    CHECK(h.n == 1200);
    const std::vector<double> d = {0.1, 0.4, 0.2, 0.3};
    const auto ls = kernels::serial::log_det_mean(h, 5.0, d, true);
    const auto lp = kernels::parallel::log_det_mean(h, 5.0, d, true);
    CHECK(ls.value == doctest::Approx(lp.value).epsilon(1e-12));
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(ls.grad[j] == doctest::Approx(lp.grad[j]).epsilon(1e-12));
    }
  }

  TEST_CASE("log-det gradient matches finite differences") {
    const MimoShape shape(3, 2);
    const auto h = kernels::draw_channel_samples(shape, 200, 8, false);
    std::vector<double> d = {0.5, 0.2, 0.3};
    const auto g = kernels::serial::log_det_mean(h, 4.0, d, true);
    for (std::size_t j = 0; j < 3; ++j) {
      auto up = d, dn = d;
      up[j] += 1e-6;
      dn[j] -= 1e-6;
      const double fd = (kernels::serial::log_det_mean(h, 4.0, up, false).value -
                         kernels::serial::log_det_mean(h, 4.0, dn, false).value) /
                        2e-6;
      CHECK(g.grad[j] == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("cyclic symmetrisation makes equal-power directions equivalent") {
    const MimoShape shape(3, 2);
    const auto h = kernels::draw_channel_samples(shape, 100, 6, true);
    const auto a = kernels::serial::log_det_mean(h, 2.0, std::vector<double>{0.6, 0.3, 0.1}, false);
    const auto b = kernels::serial::log_det_mean(h, 2.0, std::vector<double>{0.1, 0.6, 0.3}, false);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  }

  TEST_CASE("rate tuple of a simple allocation") {
    Eigen::MatrixXd snr(1, 2);
    snr << 40.0, 10.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const RateEstimator est(MimoShape(1, 1), 50000, 1);
    Allocation a;
    a.p_total = {1.0};
    a.p1 = {0.2};
    a.p0 = {0.8};
    a.selected_user = {0};
    a.mode = {Mode::kSuperposition};
    a.mu_vec = {0.0, 2.0};
    const auto r = rate_tuple(stats, a, 2.0, est);
    // weak user binds: min over users of Phi(s P) - Phi(s P1)
    CHECK(r.r0 == doctest::Approx(est.capacity_gap(10.0, 2.0)).epsilon(1e-12));
    CHECK(r.r_k[0] == doctest::Approx(est.capacity(8.0)).epsilon(1e-12));
    CHECK(r.r_k[1] == 0.0);
    CHECK(r.sum_rate == doctest::Approx(2.0 * r.r0 + r.r_k[0]));
  }
}
