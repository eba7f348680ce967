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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace supermux {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kAlg1:
      return "alg1";
    case Scheme::kAlg2:
      return "alg2";
    case Scheme::kUnicastOnly:
      return "uo";
    case Scheme::kMulticastOnly:
      return "mo";
    case Scheme::kOrthogonal:
      return "om";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (auto s : {Scheme::kAlg1, Scheme::kAlg2, Scheme::kUnicastOnly, Scheme::kMulticastOnly,
                 Scheme::kOrthogonal}) {
    if (scheme_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (expected alg1, alg2, uo, mo, om)");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (n_drops < 1) throw std::invalid_argument("config: n_drops must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("config: schemes must be nonempty");
  if (user_counts.empty()) throw std::invalid_argument("config: user_counts must be nonempty");
  for (int k : user_counts) {
    if (k < 1) throw std::invalid_argument("config: user counts must be >= 1");
  }
  if (!drops_per_count.empty() && drops_per_count.size() != user_counts.size()) {
    throw std::invalid_argument("config: drops_per_count must align with user_counts");
  }
  for (int d : drops_per_count) {
    if (d < 1) throw std::invalid_argument("config: drops_per_count entries must be >= 1");
  }
  if (shapes.empty()) throw std::invalid_argument("config: shapes must be nonempty");
  if (mc_samples < 1) throw std::invalid_argument("config: mc_samples must be >= 1");
  if (!(p_t > 0.0)) throw std::invalid_argument("config: p_t must be positive");
  if (!(om_split > 0.0) || om_split > 1.0) {
    throw std::invalid_argument("config: om_split must lie in (0, 1]");
  }
  if (outer_iters < 1) throw std::invalid_argument("config: outer_iters must be >= 1");
  if (dof_users < 1) throw std::invalid_argument("config: dof_users must be >= 1");
  mu_for(1);  // parses the policy
}

double ExperimentConfig::mu_for(int k_users) const {
  if (mu_policy == "K") return k_users;
  std::size_t used = 0;
  double mu = 0.0;
  try {
    mu = std::stod(mu_policy, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != mu_policy.size() || !(mu >= 0.0)) {
    throw std::invalid_argument("config: mu_policy must be 'K' or a number >= 0");
  }
  return mu;
}

int ExperimentConfig::drops_for(std::size_t count_index) const {
  return drops_per_count.empty() ? n_drops : drops_per_count.at(count_index);
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    out.push_back({sorted[j], static_cast<double>(j + 1) / n});
  }
  return out;
}

double cdf_at(std::span<const double> samples, double x) {
  if (samples.empty()) throw std::invalid_argument("cdf_at: no samples");
  const auto below = std::count_if(samples.begin(), samples.end(), [&](double v) { return v <= x; });
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

double percentile(std::span<const double> samples, double p) {
  if (samples.size() < 20) throw std::invalid_argument("percentile: needs at least 20 samples");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile: p outside [0, 100]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double h = static_cast<double>(s.size()) * p / 100.0;  // one-based position
  if (h <= 1.0) return s.front();
  if (h >= static_cast<double>(s.size())) return s.back();
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  return s[lo - 1] + frac * (s[lo] - s[lo - 1]);
}

ModeFractions mode_fractions(std::span<const Allocation> allocs) {
  if (allocs.empty()) throw std::invalid_argument("mode_fractions: no allocations");
  ModeFractions out;
  std::array<std::size_t, 4> counts{};
  for (const auto& a : allocs) {
    for (auto m : a.mode) ++counts[static_cast<std::size_t>(m)];
  }
  for (auto c : counts) out.subchannels += c;
  if (out.subchannels == 0) throw std::invalid_argument("mode_fractions: no subchannels");
  for (std::size_t j = 0; j < 4; ++j) {
    out.fraction[j] = static_cast<double>(counts[j]) / static_cast<double>(out.subchannels);
  }
  return out;
}

Solution solve_scheme(Scheme scheme, const ChannelStats& stats, double mu_total, double p_t,
                      double alpha, double om_split, const RateEstimator& est,
                      const AllocatorOptions& opts) {
  switch (scheme) {
    case Scheme::kAlg1:
      return algorithm1(stats, mu_total, p_t, alpha, est, opts);
    case Scheme::kAlg2:
      return algorithm2(stats, mu_total, p_t, alpha, est, opts);
    case Scheme::kUnicastOnly: {
      auto s = baseline_unicast_only(stats, p_t, alpha, est, opts);
      s.rates = rate_tuple(stats, s.alloc, mu_total, est);
      return s;
    }
    case Scheme::kMulticastOnly:
      return baseline_multicast_only(stats, mu_total, p_t, alpha, est, opts);
    case Scheme::kOrthogonal:
      return baseline_orthogonal(stats, mu_total, p_t, alpha, om_split, est, opts);
  }
  throw std::invalid_argument("solve_scheme: unknown scheme");
}

namespace {

SurrogateTable load_alpha_table(const ExperimentConfig& config) {
  if (config.alpha_table.empty()) return SurrogateTable::published();
  std::ifstream in(config.alpha_table);
  if (!in) throw std::runtime_error("cannot open alpha table " + config.alpha_table);
  return SurrogateTable::load(in);
}

struct CellOut {
  double sum_rate = 0.0;
  std::vector<double> user_se;
};

struct DropOut {
  std::string error;
  std::vector<std::string> violations;
  std::vector<CellOut> cells;  // shape-major, then scheme
  Allocation alg1;             // first shape
  bool has_alg1 = false;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto layout = layout_sites(config.scenario);
  const auto table = load_alpha_table(config);

  std::vector<std::unique_ptr<RateEstimator>> estimators;
  std::vector<double> alphas;
  for (const auto& shape : config.shapes) {
    estimators.push_back(std::make_unique<RateEstimator>(shape, config.mc_samples, config.seed,
                                                         RateMode::kLookup));
    alphas.push_back(alpha_lookup(shape, table));
  }
  AllocatorOptions opts;
  opts.max_outer_iters = config.outer_iters;

  ExperimentResult result;
  const std::size_t n_schemes = config.schemes.size();
  for (std::size_t c = 0; c < config.user_counts.size(); ++c) {
    const int k_users = config.user_counts[c];
    const int n_drops = config.drops_for(c);
    const double mu = config.mu_for(k_users);
    std::vector<DropOut> outs(static_cast<std::size_t>(n_drops));

#pragma omp parallel for schedule(dynamic)
    for (int d = 0; d < n_drops; ++d) {
      auto& out = outs[static_cast<std::size_t>(d)];
      try {
        const std::uint64_t drop_index =
            (static_cast<std::uint64_t>(k_users) << 32) | static_cast<std::uint64_t>(d);
        const auto drop = drop_users(config.scenario, layout, k_users, config.seed, drop_index);
        const auto stats = drop_to_channel_stats(drop, config.scenario, k_users);
        for (std::size_t sh = 0; sh < config.shapes.size(); ++sh) {
          for (std::size_t sc = 0; sc < n_schemes; ++sc) {
            const Scheme scheme = config.schemes[sc];
            auto sol = solve_scheme(scheme, stats, mu, config.p_t, alphas[sh], config.om_split,
                                    *estimators[sh], opts);
            const auto problem = check_allocation(stats, sol.alloc, config.p_t, alphas[sh], opts,
                                                  scheme != Scheme::kAlg2);
            if (!problem.empty()) {
              out.violations.push_back("K=" + std::to_string(k_users) + " drop " +
                                       std::to_string(d) + " " + std::string(scheme_name(scheme)) +
                                       ": " + problem);
            }
            CellOut cell;
            cell.sum_rate = sol.rates.sum_rate;
            for (double rk : sol.rates.r_k) cell.user_se.push_back(sol.rates.r0 + rk);
            out.cells.push_back(std::move(cell));
            if (sh == 0 && scheme == Scheme::kAlg1) {
              out.alg1 = std::move(sol.alloc);
              out.has_alg1 = true;
            }
          }
        }
      } catch (const std::exception& e) {
        out.error = "K=" + std::to_string(k_users) + " drop " + std::to_string(d) + ": " + e.what();
        out.cells.clear();
      }
    }

    // aggregate in drop order
    const std::size_t first_cell = result.cells.size();
    for (std::size_t sh = 0; sh < config.shapes.size(); ++sh) {
      for (std::size_t sc = 0; sc < n_schemes; ++sc) {
        CellSamples cell;
        cell.scheme = config.schemes[sc];
        cell.shape = config.shapes[sh];
        cell.k_users = k_users;
        result.cells.push_back(std::move(cell));
      }
    }
    std::vector<Allocation> alg1_allocs;
    for (auto& out : outs) {
      for (auto& v : out.violations) result.invariant_violations.push_back(std::move(v));
      if (!out.error.empty()) {
        ++result.failed_drops;
        result.failures.push_back(out.error);
        continue;
      }
      for (std::size_t j = 0; j < out.cells.size(); ++j) {
        auto& cell = result.cells[first_cell + j];
        cell.sum_rate.push_back(out.cells[j].sum_rate);
        cell.user_se.insert(cell.user_se.end(), out.cells[j].user_se.begin(),
                            out.cells[j].user_se.end());
      }
      if (out.has_alg1) alg1_allocs.push_back(std::move(out.alg1));
    }
    if (!alg1_allocs.empty()) {
      auto mf = mode_fractions(alg1_allocs);
      mf.k_users = k_users;
      result.modes.push_back(mf);
    }
  }
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<DofRow> dof_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto table = load_alpha_table(config);
  const int k_users = config.dof_users;
  const int m = 2;
  Eigen::MatrixXd snr(m, k_users);
  for (int k = 0; k < k_users; ++k) {
    for (int i = 0; i < m; ++i) snr(i, k) = std::pow(2.0, -k);
  }
  const auto stats = ChannelStats::build_uniform(snr);
  std::vector<DofRow> rows;
  for (const auto& shape : config.dof_shapes) {
    const RateEstimator est(shape, config.mc_samples, config.seed);
    const double alpha = alpha_lookup(shape, table);
    const double n = shape.min_dim();
    AllocatorOptions opts;
    opts.max_outer_iters = config.outer_iters;
    const std::vector<std::pair<DofSpec, double>> specs = {
        {{DofScheme::kMulticastOnly, 0, 0.5}, k_users * n},
        {{DofScheme::kUnicastOnly, 0, 0.5}, n},
        {{DofScheme::kMixed, 1, 0.5}, k_users * (n - n * 0.5) + n * 0.5},
    };
    for (const auto& [spec, expected] : specs) {
      const auto r = dof_slope(spec, stats, config.dof_grid_db, k_users, alpha, est, opts);
      rows.push_back({dof_scheme_name(spec), shape, r.slope, expected});
    }
  }
  return rows;
}

std::string cell_label(const ExperimentConfig& config, const CellSamples& cell) {
  std::string label(scheme_name(cell.scheme));
  if (config.shapes.size() > 1) {
    label += "@" + std::to_string(cell.shape.n_t) + "x" + std::to_string(cell.shape.n_r);
  }
  return label;
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream cdf, pct, modes, summary;
  cdf << "scheme,k_users,sum_rate_bps_hz\n";
  pct << "scheme,k_users,p5_se\n";
  summary << "scheme,k_users,n_drops,mean_sum_rate,std_err\n";
  for (const auto& cell : result.cells) {
    const auto label = cell_label(config, cell);
    std::vector<double> sorted = cell.sum_rate;
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) cdf << label << ',' << cell.k_users << ',' << format_number(v) << '\n';
    if (cell.user_se.size() >= 20) {
      pct << label << ',' << cell.k_users << ',' << format_number(percentile(cell.user_se, 5.0))
          << '\n';
    }
    const double n = static_cast<double>(cell.sum_rate.size());
    double mean = 0.0, var = 0.0;
    for (double v : cell.sum_rate) mean += v / n;
    for (double v : cell.sum_rate) var += (v - mean) * (v - mean);
    const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
    summary << label << ',' << cell.k_users << ',' << cell.sum_rate.size() << ','
            << format_number(mean) << ',' << format_number(se) << '\n';
  }
  modes << "k_users,mode,fraction\n";
  for (const auto& mf : result.modes) {
    for (auto mode : {Mode::kUnicastOnly, Mode::kMulticastOnly, Mode::kSuperposition, Mode::kOff}) {
      modes << mf.k_users << ',' << mode_name(mode) << ','
            << format_number(mf.fraction[static_cast<std::size_t>(mode)]) << '\n';
    }
  }
  const std::filesystem::path base(dir);
  write_text_file((base / "cdf.csv").string(), cdf.str());
  write_text_file((base / "percentile.csv").string(), pct.str());
  write_text_file((base / "modes.csv").string(), modes.str());
  write_text_file((base / "summary.csv").string(), summary.str());

  nlohmann::json manifest;
  const auto cfg = config_to_json(config);
  manifest["config"] = cfg;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.dump())));
  manifest["config_hash"] = hash;
  manifest["seed"] = config.seed;
  manifest["failed_drops"] = result.failed_drops;
  manifest["failures"] = result.failures;
  manifest["invariant_violations"] = result.invariant_violations;
  manifest["runtime_s"] = result.runtime_s;
  manifest["files"] = {"cdf.csv", "percentile.csv", "modes.csv", "summary.csv"};
  write_text_file((base / "manifest.json").string(), manifest.dump(2) + "\n");
}

void write_dof(const std::vector<DofRow>& rows, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream os;
  os << "scheme,shape,slope\n";
  for (const auto& r : rows) {
    os << r.scheme << ',' << r.shape.n_t << 'x' << r.shape.n_r << ',' << format_number(r.slope)
       << '\n';
  }
  write_text_file((std::filesystem::path(dir) / "dof.csv").string(), os.str());
}

}  // namespace supermux
