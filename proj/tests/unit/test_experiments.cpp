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

#include "supermux/experiments.hpp"
#include "supermux/text_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace supermux;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.user_counts = {4, 9};
  c.n_drops = 4;
  c.mc_samples = 4000;
  return c;
}

}  // namespace

TEST_SUITE("cli-experiments") {
  TEST_CASE("percentile and cdf") {
    std::vector<double> x(100);
    std::iota(x.begin(), x.end(), 1.0);
    CHECK(percentile(x, 5.0) == doctest::Approx(5.0));
    CHECK(percentile(x, 50.0) == doctest::Approx(50.0));
    CHECK(percentile(x, 100.0) == 100.0);
    const std::vector<double> flat(30, 2.5);
    CHECK(percentile(flat, 5.0) == 2.5);
    CHECK(percentile(flat, 95.0) == 2.5);
    CHECK(cdf_at(x, 100.0) == 1.0);
    CHECK(cdf_at(x, 0.5) == 0.0);
    CHECK(cdf_at(flat, 2.5) == 1.0);
    const auto cdf = empirical_cdf(x);
    CHECK(cdf.back().probability == 1.0);
    for (std::size_t j = 1; j < cdf.size(); ++j) {
      CHECK(cdf[j].value >= cdf[j - 1].value);
      CHECK(cdf[j].probability > cdf[j - 1].probability);
    }
    CHECK_THROWS(percentile(std::vector<double>(19, 1.0), 5.0));
  }

  TEST_CASE("mode fractions") {
    Allocation a;
    a.p_total = {1.0, 2.0};
    a.p1 = {0.0, 0.0};
    a.mode = {Mode::kMulticastOnly, Mode::kMulticastOnly};
    const std::vector<Allocation> all(3, a);
    const auto f = mode_fractions(all);
    CHECK(f.fraction[static_cast<std::size_t>(Mode::kMulticastOnly)] == 1.0);
    CHECK(f.subchannels == 6);
    Allocation b = a;
    b.mode = {Mode::kSuperposition, Mode::kOff};
    const std::vector<Allocation> mixed = {a, b};
    const auto g = mode_fractions(mixed);
    CHECK(std::accumulate(g.fraction.begin(), g.fraction.end(), 0.0) == doctest::Approx(1.0));
    CHECK(g.fraction[static_cast<std::size_t>(Mode::kSuperposition)] == 0.25);
    CHECK_THROWS(mode_fractions(std::vector<Allocation>{}));
  }

  TEST_CASE("scheme names") {
    for (auto s : {Scheme::kAlg1, Scheme::kAlg2, Scheme::kUnicastOnly, Scheme::kMulticastOnly,
                   Scheme::kOrthogonal}) {
      CHECK(parse_scheme(scheme_name(s)) == s);
    }
    CHECK_THROWS(parse_scheme("best"));
  }

  TEST_CASE("config json round trip and strictness") {
    auto c = small_config();
    c.mu_policy = "2.5";
    c.shapes = {MimoShape(8, 4), MimoShape(8, 2)};
    c.scenario.indoor_loss_db = 12.0;
    const auto j = config_to_json(c);
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.mu_for(10) == 2.5);
    CHECK(small_config().mu_for(10) == 10.0);
    auto bad = j;
    bad["n_dropz"] = 3;
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["scenario"]["isd"] = 3;
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["n_drops"] = 0;
    CHECK_THROWS(config_from_json(bad));
    bad = j;
    bad["schemes"] = nlohmann::json::array();
    CHECK_THROWS(config_from_json(bad));
  }

  TEST_CASE("snr matrix text format") {
    std::stringstream in("# two subchannels\n1 2.5 3\n4 5 6e2  # trailing\n\n");
    const auto m = read_snr_matrix(in);
    CHECK(m.rows() == 2);
    CHECK(m(1, 2) == 600.0);
    std::stringstream out;
    write_snr_matrix(out, m);
    const auto again = read_snr_matrix(out);
    CHECK(again == m);
    std::stringstream ragged("1 2\n3\n");
    CHECK_THROWS(read_snr_matrix(ragged));
    std::stringstream junk("1 x\n");
    CHECK_THROWS(read_snr_matrix(junk));
  }

  TEST_CASE("one drop, one scheme equals a direct allocation") {
    auto c = small_config();
    c.user_counts = {1};
    c.n_drops = 1;
    c.schemes = {Scheme::kAlg1};
    const auto res = run_experiment(c);
    REQUIRE(res.cells.size() == 1);
    REQUIRE(res.cells[0].sum_rate.size() == 1);
    const auto lay = layout_sites(c.scenario);
    const auto drop = drop_users(c.scenario, lay, 1, c.seed, (std::uint64_t{1} << 32) | 0);
    const auto stats = drop_to_channel_stats(drop, c.scenario, 1);
    const RateEstimator est(MimoShape(8, 4), c.mc_samples, c.seed, RateMode::kLookup);
    const auto sol = solve_scheme(Scheme::kAlg1, stats, 1.0, 1.0, 1.164, 0.5, est, {});
    CHECK(res.cells[0].sum_rate[0] == doctest::Approx(sol.rates.sum_rate).epsilon(1e-12));
  }

  TEST_CASE("unicast-only does not depend on the weight policy") {
    auto c = small_config();
    c.schemes = {Scheme::kUnicastOnly};
    const auto a = run_experiment(c);
    c.mu_policy = "0.5";
    const auto b = run_experiment(c);
    for (std::size_t j = 0; j < a.cells.size(); ++j) {
      CHECK(a.cells[j].sum_rate == b.cells[j].sum_rate);
    }
  }

  TEST_CASE("experiment output files and reproducibility") {
    const auto c = small_config();
    const auto base = std::filesystem::temp_directory_path() / "supermux_unit_exp";
    std::filesystem::remove_all(base);
    const auto r1 = run_experiment(c);
    const auto r2 = run_experiment(c);
    write_experiment(c, r1, (base / "a").string());
    write_experiment(c, r2, (base / "b").string());
    for (const char* f : {"cdf.csv", "percentile.csv", "modes.csv", "summary.csv"}) {
      CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
    }
    CHECK(slurp(base / "a" / "cdf.csv").rfind("scheme,k_users,sum_rate_bps_hz\n", 0) == 0);
    CHECK(slurp(base / "a" / "percentile.csv").rfind("scheme,k_users,p5_se\n", 0) == 0);
    CHECK(slurp(base / "a" / "modes.csv").rfind("k_users,mode,fraction\n", 0) == 0);
    const auto manifest = read_json_file((base / "a" / "manifest.json").string());
    CHECK(manifest.at("failed_drops") == 0);
    CHECK(manifest.at("invariant_violations").empty());
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
    CHECK(r1.cells.size() == 10);
    CHECK(r1.modes.size() == 2);
    for (const auto& cell : r1.cells) {
      CHECK(cell.sum_rate.size() == 4);
      CHECK(cell.user_se.size() == 4u * static_cast<std::size_t>(cell.k_users));
    }
    std::filesystem::remove_all(base);
  }

  TEST_CASE("dof csv") {
    ExperimentConfig c;
    c.mc_samples = 3000;
    c.dof_grid_db = {30, 40, 50, 60};
    const auto rows = dof_experiment(c);
    CHECK(rows.size() == 3);
    const auto dir = std::filesystem::temp_directory_path() / "supermux_unit_dof";
    write_dof(rows, dir.string());
    const auto text = slurp(dir / "dof.csv");
    CHECK(text.rfind("scheme,shape,slope\n", 0) == 0);
    CHECK(text.find("MO,2x2,") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}
