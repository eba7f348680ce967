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

// supermux command line: fit-alpha | allocate | oracle | dof | simulate | report

#include "supermux/allocator.hpp"
#include "supermux/experiments.hpp"
#include "supermux/mimo_rates.hpp"
#include "supermux/oracle.hpp"
#include "supermux/surrogate.hpp"
#include "supermux/sysim.hpp"
#include "supermux/text_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace sm = supermux;
using nlohmann::json;

namespace {

constexpr int kExitViolation = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c, const std::string& out_help) {
  app->add_option("--config", c.config, "JSON experiment config");
  app->add_option("--seed", c.seed, "seed (overrides the config)");
  app->add_option("--out", c.out, out_help);
}

sm::ExperimentConfig load_config(const Common& c) {
  sm::ExperimentConfig cfg;
  if (!c.config.empty()) cfg = sm::config_from_json(sm::read_json_file(c.config));
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

sm::MimoShape parse_shape(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("shape must look like 8x4");
  return sm::MimoShape(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
}

sm::SurrogateTable table_from(const std::string& path) {
  if (path.empty()) return sm::SurrogateTable::published();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return sm::SurrogateTable::load(in);
}

sm::ChannelStats stats_from(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return sm::ChannelStats::build_uniform(sm::read_snr_matrix(in));
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    sm::write_text_file(out, text);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supermux: superposed multicast/unicast allocation over MIMO subchannels"};
  app.require_subcommand(1);

  // fit-alpha
  Common fit_c;
  std::size_t fit_samples = 100000;
  std::vector<std::string> fit_shapes;
  std::string fit_grid = sm::FitGrid{}.descriptor();
  auto* fit = app.add_subcommand("fit-alpha", "fit the surrogate parameter per antenna shape");
  add_common(fit, fit_c, "output table file (stdout if omitted)");
  fit->add_option("--samples", fit_samples, "Monte-Carlo samples per shape");
  fit->add_option("--shape", fit_shapes, "shapes like 8x4 (default: the 30 standard shapes)");
  fit->add_option("--grid", fit_grid, "fit grid descriptor");

  // allocate
  Common al_c;
  std::string al_snr, al_scheme = "alg1", al_alpha_table, al_shape = "8x4";
  double al_mu = -1.0, al_power = 1.0, al_split = 0.5;
  std::size_t al_samples = sm::RateEstimator::kDefaultSamples;
  auto* al = app.add_subcommand("allocate", "allocate power for one SNR matrix");
  add_common(al, al_c, "output JSON (stdout if omitted)");
  al->add_option("--snr", al_snr, "SNR matrix file, one subchannel per row")->required();
  al->add_option("--mu", al_mu, "multicast weight (default: number of users)");
  al->add_option("--power", al_power, "total power");
  al->add_option("--scheme", al_scheme, "alg1, alg2, uo, mo or om");
  al->add_option("--alpha-table", al_alpha_table, "surrogate table file");
  al->add_option("--shape", al_shape, "antenna shape n_t x n_r");
  al->add_option("--samples", al_samples, "Monte-Carlo samples for the lookup table");
  al->add_option("--om-split", al_split, "multicast share of subchannels for om");

  // oracle
  Common or_c;
  std::string or_snr, or_shape = "8x4";
  double or_mu = -1.0, or_power = 1.0;
  int or_res = 16;
  std::size_t or_samples = sm::RateEstimator::kDefaultSamples;
  auto* orc = app.add_subcommand("oracle", "brute-force scalar-power reference for one SNR matrix");
  add_common(orc, or_c, "output JSON (stdout if omitted)");
  orc->add_option("--snr", or_snr, "SNR matrix file (M <= 2, K <= 3)")->required();
  orc->add_option("--mu", or_mu, "multicast weight (default: number of users)");
  orc->add_option("--power", or_power, "total power");
  orc->add_option("--shape", or_shape, "antenna shape n_t x n_r");
  orc->add_option("--resolution", or_res, "grid points per axis");
  orc->add_option("--samples", or_samples, "Monte-Carlo samples for the lookup table");

  // dof
  Common dof_c;
  auto* dof = app.add_subcommand("dof", "high-SNR slope sweep, writes dof.csv");
  add_common(dof, dof_c, "output directory (default: config out_dir)");

  // simulate
  Common sim_c;
  auto* sim = app.add_subcommand("simulate", "system-level drops for every scheme and user count");
  add_common(sim, sim_c, "output directory (default: config out_dir)");

  // report
  Common rep_c;
  std::string rep_dir;
  auto* rep = app.add_subcommand("report", "summarise a simulate output directory");
  add_common(rep, rep_c, "report file (stdout if omitted)");
  rep->add_option("--dir", rep_dir, "simulate output directory (default: config out_dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      const auto cfg = load_config(fit_c);
      const auto grid = sm::FitGrid::parse(fit_grid);
      std::vector<sm::MimoShape> shapes;
      for (const auto& s : fit_shapes) shapes.push_back(parse_shape(s));
      if (shapes.empty()) shapes = sm::published_shapes();
      sm::SurrogateTable table;
      for (const auto& shape : shapes) {
        const sm::RateEstimator est(shape, fit_samples, cfg.seed, sm::RateMode::kMonteCarlo);
        const auto f = sm::fit_alpha(shape, est, grid);
        table.set(shape, {f.alpha, f.mse, grid.descriptor(), cfg.seed});
        std::cerr << shape.n_t << "x" << shape.n_r << " alpha " << sm::format_number(f.alpha)
                  << " mse " << sm::format_number(f.mse) << "\n";
      }
      std::ostringstream os;
      table.save(os);
      emit(fit_c.out, os.str());
      return 0;
    }

    if (*al) {
      const auto cfg = load_config(al_c);
      const auto stats = stats_from(al_snr);
      const auto shape = parse_shape(al_shape);
      const double mu = al_mu >= 0.0 ? al_mu : stats.n_users();
      const double alpha = sm::alpha_lookup(shape, table_from(al_alpha_table));
      const sm::RateEstimator est(shape, al_samples, cfg.seed, sm::RateMode::kLookup);
      const sm::AllocatorOptions opts;
      const auto scheme = sm::parse_scheme(al_scheme);
      const auto sol = sm::solve_scheme(scheme, stats, mu, al_power, alpha, al_split, est, opts);
      auto j = sm::allocation_to_json(sol.alloc, sol.rates);
      j["scheme"] = al_scheme;
      j["alpha"] = alpha;
      j["seed"] = cfg.seed;
      emit(al_c.out, j.dump(2) + "\n");
      const auto problem = sm::check_allocation(stats, sol.alloc, al_power, alpha, opts,
                                                scheme != sm::Scheme::kAlg2);
      if (!problem.empty()) {
        std::cerr << "invariant violation: " << problem << "\n";
        return kExitViolation;
      }
      return 0;
    }

    if (*orc) {
      const auto cfg = load_config(or_c);
      const auto stats = stats_from(or_snr);
      const auto shape = parse_shape(or_shape);
      const double mu = or_mu >= 0.0 ? or_mu : stats.n_users();
      const sm::RateEstimator est(shape, or_samples, cfg.seed, sm::RateMode::kLookup);
      const auto r = sm::brute_force_wsr(stats, mu, or_power, or_res, est);
      const auto alloc = sm::brute_force_allocation(stats, r);
      const auto rates = sm::rate_tuple(stats, alloc, mu, est);
      auto j = sm::allocation_to_json(alloc, rates);
      j["best_wsr"] = r.best_wsr;
      j["seed"] = cfg.seed;
      emit(or_c.out, j.dump(2) + "\n");
      return 0;
    }

    if (*dof) {
      const auto cfg = load_config(dof_c);
      const auto rows = sm::dof_experiment(cfg);
      const auto dir = dof_c.out.empty() ? cfg.out_dir : dof_c.out;
      sm::write_dof(rows, dir);
      for (const auto& r : rows) {
        std::cout << r.scheme << " " << r.shape.n_t << "x" << r.shape.n_r << " slope "
                  << sm::format_number(r.slope) << " expected " << sm::format_number(r.expected)
                  << "\n";
      }
      return 0;
    }

    if (*sim) {
      const auto cfg = load_config(sim_c);
      const auto result = sm::run_experiment(cfg);
      const auto dir = sim_c.out.empty() ? cfg.out_dir : sim_c.out;
      sm::write_experiment(cfg, result, dir);
      std::cerr << "runtime " << sm::format_number(result.runtime_s) << " s, failed drops "
                << result.failed_drops << "\n";
      for (const auto& f : result.failures) std::cerr << "failure: " << f << "\n";
      for (const auto& v : result.invariant_violations) std::cerr << "violation: " << v << "\n";
      if (!result.invariant_violations.empty()) return kExitViolation;
      return result.failed_drops > 0 ? 1 : 0;
    }

    if (*rep) {
      const auto cfg = load_config(rep_c);
      const std::filesystem::path dir = rep_dir.empty() ? cfg.out_dir : rep_dir;
      std::ostringstream os;
      // mean sum rate per (scheme, K) and the gain of alg1 over each scheme
      std::map<int, std::map<std::string, double>> means;
      for (const auto& row : read_csv(dir / "summary.csv")) {
        if (row.size() < 4) throw std::runtime_error("summary.csv: short row");
        means[std::stoi(row[1])][row[0]] = std::stod(row[3]);
      }
      os << "mean sum rate (bits/s/Hz)\n";
      for (const auto& [k, by_scheme] : means) {
        os << "K=" << k;
        for (const auto& [scheme, m] : by_scheme) os << "  " << scheme << " " << sm::format_number(m);
        os << "\n";
        const auto a1 = by_scheme.find("alg1");
        if (a1 == by_scheme.end()) continue;
        os << "  alg1 gain:";
        for (const auto& [scheme, m] : by_scheme) {
          if (scheme == "alg1" || !(m > 0.0)) continue;
          char buf[64];
          std::snprintf(buf, sizeof buf, " %s %+.1f%%", scheme.c_str(), 100.0 * (a1->second / m - 1.0));
          os << buf;
        }
        os << "\n";
      }
      if (std::filesystem::exists(dir / "percentile.csv")) {
        os << "5th percentile user SE (bits/s/Hz)\n";
        for (const auto& row : read_csv(dir / "percentile.csv")) {
          os << "  " << row.at(0) << " K=" << row.at(1) << " " << row.at(2) << "\n";
        }
      }
      if (std::filesystem::exists(dir / "modes.csv")) {
        os << "alg1 mode fractions\n";
        for (const auto& row : read_csv(dir / "modes.csv")) {
          os << "  K=" << row.at(0) << " " << row.at(1) << " " << row.at(2) << "\n";
        }
      }
      int violations = 0;
      if (std::filesystem::exists(dir / "manifest.json")) {
        const auto manifest = sm::read_json_file((dir / "manifest.json").string());
        violations = static_cast<int>(manifest.at("invariant_violations").size());
        os << "failed drops " << manifest.at("failed_drops").get<int>() << ", invariant violations "
           << violations << "\n";
      }
      emit(rep_c.out, os.str());
      return violations > 0 ? kExitViolation : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
