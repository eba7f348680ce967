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
#include "supermux/surrogate.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace supermux;

namespace {

ChannelStats one_row(std::initializer_list<double> s) {
  Eigen::MatrixXd snr(1, static_cast<Eigen::Index>(s.size()));
  Eigen::Index k = 0;
  for (double v : s) snr(0, k++) = v;
  return ChannelStats::build_uniform(snr);
}

const RateEstimator& est84() {
  static const RateEstimator est(MimoShape(8, 4), 10000, 1, RateMode::kLookup);
  return est;
}

constexpr double kAlpha84 = 1.164;

}  // namespace

TEST_SUITE("surrogate-fit") {
  TEST_CASE("surrogate values") {
    CHECK(surrogate_phi(0.0, 1.7) == 1.0);
    CHECK(surrogate_phi(99.0, 1.0) == doctest::Approx(0.01));
    CHECK(1e6 * surrogate_phi(1e6, 1.0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(surrogate_phi(1.0, 0.0), std::invalid_argument);
    // decreasing and convex on a grid
    for (double x = 0.0; x < 50.0; x += 0.5) {
      const double a = surrogate_phi(x, 1.3), b = surrogate_phi(x + 0.5, 1.3),
                   c = surrogate_phi(x + 1.0, 1.3);
      CHECK(b < a);
      CHECK(a + c - 2.0 * b >= 0.0);
    }
  }

  TEST_CASE("fit reproduces the tabulated alphas") {
    const auto pub = SurrogateTable::published();
    CHECK(pub.size() == 30);
    for (const auto& shape : {MimoShape(1, 1), MimoShape(8, 4), MimoShape(32, 1)}) {
      const RateEstimator est(shape, 30000, 4);
      const auto f = fit_alpha(shape, est);
      CHECK(f.alpha == doctest::Approx(pub.find(shape)->alpha).epsilon(0.03));
      CHECK(f.mse >= 0.0);
      CHECK(f.mse <= 2.0 * pub.find(shape)->mse);
    }
  }

  TEST_CASE("fit is stable across seeds") {
    const MimoShape shape(2, 2);
    const auto a = fit_alpha(shape, RateEstimator(shape, 100000, 1));
    const auto b = fit_alpha(shape, RateEstimator(shape, 100000, 2));
    CHECK(a.alpha == doctest::Approx(b.alpha).epsilon(0.01));
  }

  TEST_CASE("fit rejects a mismatched estimator") {
    CHECK_THROWS(fit_alpha(MimoShape(2, 2), RateEstimator(MimoShape(2, 4), 100, 1)));
  }

  TEST_CASE("alpha lookup and table persistence") {
    const auto pub = SurrogateTable::published();
    CHECK(alpha_lookup(MimoShape(8, 2), pub) == doctest::Approx(1.071));
    CHECK(alpha_lookup(MimoShape(4, 8), pub) == doctest::Approx(2.324));
    CHECK(alpha_lookup(MimoShape(2, 2), pub) == doctest::Approx(1.402));
    // missing shape falls back to a fit
    const double a33 = alpha_lookup(MimoShape(3, 3), pub, 20000, 1);
    CHECK(a33 > 1.2);
    CHECK(a33 < 1.6);

    std::stringstream ss;
    pub.save(ss);
    const auto back = SurrogateTable::load(ss);
    CHECK(back.size() == 30);
    CHECK(back.find(MimoShape(16, 8))->alpha == doctest::Approx(1.165));
    std::stringstream bad("1 1 -2 0.1 g 1\n");
    CHECK_THROWS(SurrogateTable::load(bad));
  }

  TEST_CASE("grid descriptor round-trips") {
    const auto g = FitGrid::parse("uniform:0.5:20:40");
    CHECK(g.points().size() == 40);
    CHECK(g.points().front() == doctest::Approx(0.5));
    CHECK(g.points().back() == doctest::Approx(20.0));
    CHECK(FitGrid::parse(g.descriptor()).descriptor() == g.descriptor());
    CHECK_THROWS(FitGrid::parse("log:1:2:3"));
  }
}

TEST_SUITE("wsr-allocator") {
  TEST_CASE("utility functions") {
    const auto stats = one_row({1.0});
    const Surrogate sg{1.0, 2};
    const std::vector<double> mu = {2.0};
    const double lambda = 1.0 / std::log(2.0);
    // 4 / (1 + x) - 1, zero at x = 3
    CHECK(utility_u0_hat(0.0, 0, mu, lambda, stats, sg) == doctest::Approx(3.0));
    CHECK(utility_u0_hat(3.0, 0, mu, lambda, stats, sg) == doctest::Approx(0.0));
    CHECK(z0_root(0, mu, lambda, stats, sg, {}) == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("closed-form unicast power") {
    const auto stats = one_row({0.25});
    const Surrogate sg{1.0, 2};
    // n_r eta / (lambda ln 2) = 20
    const double lambda = 2.0 / (20.0 * std::log(2.0));
    CHECK(z1_closed_form(0, lambda, stats, sg) == doctest::Approx(16.0));
    CHECK(utility_u1_hat(16.0, 0, lambda, stats, sg) == doctest::Approx(0.0).scale(1.0));
    CHECK(z1_closed_form(0, 10.0, stats, sg) < 0.0);
    CHECK_THROWS(z1_closed_form(0, 0.0, stats, sg));
    const auto strong = one_row({1e12});
    CHECK(z1_closed_form(0, lambda, strong, sg) == doctest::Approx(20.0).epsilon(1e-9));
  }

  TEST_CASE("g_hat root") {
    const auto stats = one_row({9.0, 1.0});
    const std::vector<double> mu = {0.0, 3.0};
    // -1 + 3 (1/9 + x) / (1 + x) = 0  ->  x = 1/3
    CHECK(g_hat(0.0, 0, mu, stats, 1.0) < 0.0);
    CHECK(g_hat_root(0, mu, stats, 1.0, {}) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }

  TEST_CASE("waterline: single subchannel takes everything") {
    const auto stats = one_row({5.0, 2.0});
    const std::vector<double> mu = {1.0, 1.0};
    const auto w = solve_waterline(stats, mu, {kAlpha84, 4}, 7.0, {});
    CHECK(w.p_total[0] == doctest::Approx(7.0).epsilon(1e-12));
  }

  TEST_CASE("waterline: symmetric subchannels split evenly") {
    Eigen::MatrixXd snr(2, 2);
    snr << 5.0, 2.0, 5.0, 2.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const std::vector<double> mu = {1.0, 1.0};
    const auto w = solve_waterline(stats, mu, {kAlpha84, 4}, 3.0, {});
    CHECK(w.p_total[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(w.p_total[1] == doctest::Approx(1.5).epsilon(1e-9));
  }

  TEST_CASE("waterline: pure unicast is scalar water-filling") {
    Eigen::MatrixXd snr(2, 1);
    snr << 4.0, 1.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const std::vector<double> mu = {0.0};
    const double alpha = kAlpha84, p_t = 10.0;
    // (c - 1/4)/alpha + (c - 1)/alpha = P_t
    const double c = (alpha * p_t + 1.25) / 2.0;
    const auto w = solve_waterline(stats, mu, {alpha, 4}, p_t, {});
    CHECK(w.p_total[0] == doctest::Approx((c - 0.25) / alpha).epsilon(1e-6));
    CHECK(w.p_total[1] == doctest::Approx((c - 1.0) / alpha).epsilon(1e-6));
    // weak channel shut off at low power: c < 1
    const auto lo = solve_waterline(stats, mu, {alpha, 4}, 0.3, {});
    CHECK(lo.p_total[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(lo.p_total[1] == 0.0);
  }

  TEST_CASE("mode regions for two users with snr ratio 4") {
    const auto stats = one_row({4.0, 1.0});
    const std::pair<double, Mode> cases[] = {{0.5, Mode::kUnicastOnly},
                                             {1.0, Mode::kUnicastOnly},
                                             {2.0, Mode::kSuperposition},
                                             {3.9, Mode::kSuperposition},
                                             {4.1, Mode::kMulticastOnly},
                                             {8.0, Mode::kMulticastOnly}};
    for (const auto& [mu, mode] : cases) {
      const auto sol = algorithm1(stats, mu, 10.0, kAlpha84, est84());
      CHECK(sol.alloc.mode[0] == mode);
      CHECK(check_allocation(stats, sol.alloc, 10.0, kAlpha84).empty());
    }
  }

  TEST_CASE("invariants hold for every scheme") {
    Eigen::MatrixXd snr(4, 3);
    snr << 100.0, 3.0, 20.0, 1.0, 50.0, 400.0, 7.0, 7.0, 2.0, 900.0, 1.5, 30.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const double p_t = 2.0;
    auto check = [&](const Solution& s, bool root) {
      const double sum = std::accumulate(s.alloc.p_total.begin(), s.alloc.p_total.end(), 0.0);
      CHECK(sum == doctest::Approx(p_t).epsilon(1e-9));
      CHECK(check_allocation(stats, s.alloc, p_t, kAlpha84, {}, root) == "");
      const double mu = std::accumulate(s.alloc.mu_vec.begin(), s.alloc.mu_vec.end(), 0.0);
      CHECK(mu == doctest::Approx(3.0).epsilon(1e-9));
    };
    const auto a1 = algorithm1(stats, 3.0, p_t, kAlpha84, est84());
    check(a1, true);
    const auto a2 = algorithm2(stats, 3.0, p_t, kAlpha84, est84());
    check(a2, false);
    for (double p : a2.alloc.p_total) CHECK(p == doctest::Approx(p_t / 4.0));
    const auto mo = baseline_multicast_only(stats, 3.0, p_t, kAlpha84, est84());
    check(mo, true);
    for (double p1 : mo.alloc.p1) CHECK(p1 == 0.0);
    const auto om = baseline_orthogonal(stats, 3.0, p_t, kAlpha84, 0.5, est84());
    check(om, true);
    int multicast = 0;
    for (auto m : om.alloc.mode) multicast += m == Mode::kMulticastOnly;
    CHECK(multicast == 2);
    const auto uo = baseline_unicast_only(stats, p_t, kAlpha84, est84());
    for (std::size_t i = 0; i < 4; ++i) CHECK(uo.alloc.p1[i] == uo.alloc.p_total[i]);
    CHECK(uo.rates.r0 == 0.0);
    // superposition never loses to the special cases it contains
    CHECK(a1.rates.sum_rate >= mo.rates.sum_rate - 1e-6);
    CHECK(a1.rates.sum_rate >= uo.rates.sum_rate - 1e-6);
    CHECK(a1.rates.sum_rate >= om.rates.sum_rate - 1e-6);
  }

  TEST_CASE("mu at most one is unicast-only") {
    Eigen::MatrixXd snr(2, 2);
    snr << 10.0, 1.0, 2.0, 8.0;
    const auto stats = ChannelStats::build_uniform(snr);
    const auto sol = algorithm1(stats, 1.0, 1.0, kAlpha84, est84());
    for (auto m : sol.alloc.mode) CHECK(m == Mode::kUnicastOnly);
  }

  TEST_CASE("check_allocation catches broken allocations") {
    const auto stats = one_row({4.0, 1.0});
    auto sol = algorithm1(stats, 2.0, 1.0, kAlpha84, est84());
    auto a = sol.alloc;
    a.p_total[0] = 0.9;
    CHECK(check_allocation(stats, a, 1.0, kAlpha84) != "");
    a = sol.alloc;
    a.mode[0] = Mode::kMulticastOnly;
    CHECK(check_allocation(stats, a, 1.0, kAlpha84) != "");
    a = sol.alloc;
    a.p1[0] = a.p_total[0] * 1.5;
    CHECK(check_allocation(stats, a, 1.0, kAlpha84) != "");
  }

  TEST_CASE("simplex projection") {
    const std::vector<double> v = {0.5, 2.0, -1.0};
    const auto p = project_simplex(v, 2.0);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(1.75));
    CHECK(p[2] == 0.0);
  }

  TEST_CASE("options are validated") {
    AllocatorOptions o;
    o.tol_root = 0.0;
    CHECK_THROWS(o.validate());
    const auto stats = one_row({1.0});
    CHECK_THROWS(algorithm1(stats, 2.0, -1.0, kAlpha84, est84()));
  }
}
