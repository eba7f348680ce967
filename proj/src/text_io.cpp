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

#include "supermux/text_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace supermux {

using nlohmann::json;

Eigen::MatrixXd read_snr_matrix(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw std::invalid_argument("snr matrix: bad number '" + tok + "'");
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("snr matrix: no rows");
  const auto k = rows.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) throw std::invalid_argument("snr matrix: ragged rows");
    for (std::size_t c = 0; c < k; ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return out;
}

void write_snr_matrix(std::ostream& os, const Eigen::MatrixXd& snr) {
  for (Eigen::Index i = 0; i < snr.rows(); ++i) {
    for (Eigen::Index k = 0; k < snr.cols(); ++k) {
      os << (k ? " " : "") << format_number(snr(i, k));
    }
    os << '\n';
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

// key list shared by both directions so they cannot drift apart
template <typename S, typename F>
void for_scenario_fields(S& s, F&& f) {
  f("carrier_freq_hz", s.carrier_freq_hz);
  f("bandwidth_hz", s.bandwidth_hz);
  f("isd_m", s.isd_m);
  f("n_sites", s.n_sites);
  f("sectors_per_site", s.sectors_per_site);
  f("tx_power_dbm", s.tx_power_dbm);
  f("bs_height_m", s.bs_height_m);
  f("ue_height_m", s.ue_height_m);
  f("bs_gain_dbi", s.bs_gain_dbi);
  f("ue_gain_dbi", s.ue_gain_dbi);
  f("ue_noise_figure_db", s.ue_noise_figure_db);
  f("shadow_sigma_db", s.shadow_sigma_db);
  f("shadow_corr_dist_m", s.shadow_corr_dist_m);
  f("indoor_fraction", s.indoor_fraction);
  f("n_subchannels", s.n_subchannels);
  f("indoor_loss_db", s.indoor_loss_db);
  f("in_car_loss_db", s.in_car_loss_db);
  f("electrical_tilt_deg", s.electrical_tilt_deg);
  f("h_beamwidth_deg", s.h_beamwidth_deg);
  f("v_beamwidth_deg", s.v_beamwidth_deg);
  f("max_attenuation_db", s.max_attenuation_db);
  f("min_distance_m", s.min_distance_m);
  f("avg_building_height_m", s.avg_building_height_m);
  f("street_width_m", s.street_width_m);
  f("interference_in_snr", s.interference_in_snr);
}

void reject_unknown(const json& j, const std::vector<std::string>& known, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

json shape_list(const std::vector<MimoShape>& shapes) {
  json out = json::array();
  for (const auto& s : shapes) out.push_back({s.n_t, s.n_r});
  return out;
}

std::vector<MimoShape> parse_shapes(const json& j) {
  std::vector<MimoShape> out;
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2) {
      throw std::invalid_argument("config: shapes are [n_t, n_r] pairs");
    }
    out.emplace_back(s[0].get<int>(), s[1].get<int>());
  }
  return out;
}

}  // namespace

json scenario_to_json(const NetworkScenario& s) {
  json j = json::object();
  for_scenario_fields(s, [&](const char* key, const auto& v) { j[key] = v; });
  return j;
}

NetworkScenario scenario_from_json(const json& j) {
  NetworkScenario s;
  std::vector<std::string> known;
  for_scenario_fields(s, [&](const char* key, auto&) { known.emplace_back(key); });
  reject_unknown(j, known, "scenario");
  for_scenario_fields(s, [&](const char* key, auto& v) {
    if (j.contains(key)) v = j.at(key).get<std::decay_t<decltype(v)>>();
  });
  s.validate();
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = scenario_to_json(c.scenario);
  j["user_counts"] = c.user_counts;
  json schemes = json::array();
  for (auto s : c.schemes) schemes.push_back(std::string(scheme_name(s)));
  j["schemes"] = schemes;
  j["n_drops"] = c.n_drops;
  j["drops_per_count"] = c.drops_per_count;
  j["mu_policy"] = c.mu_policy;
  j["shapes"] = shape_list(c.shapes);
  j["seed"] = c.seed;
  j["mc_samples"] = c.mc_samples;
  j["p_t"] = c.p_t;
  j["om_split"] = c.om_split;
  j["outer_iters"] = c.outer_iters;
  j["alpha_table"] = c.alpha_table;
  j["out_dir"] = c.out_dir;
  j["dof_shapes"] = shape_list(c.dof_shapes);
  j["dof_grid_db"] = c.dof_grid_db;
  j["dof_users"] = c.dof_users;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"scenario", "user_counts", "schemes", "n_drops", "drops_per_count", "mu_policy",
                  "shapes", "seed", "mc_samples", "p_t", "om_split", "outer_iters",
                  "alpha_table", "out_dir", "dof_shapes", "dof_grid_db", "dof_users"},
                 "config");
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("user_counts")) c.user_counts = j.at("user_counts").get<std::vector<int>>();
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
  }
  if (j.contains("n_drops")) c.n_drops = j.at("n_drops").get<int>();
  if (j.contains("drops_per_count")) {
    c.drops_per_count = j.at("drops_per_count").get<std::vector<int>>();
  }
  if (j.contains("mu_policy")) {
    const auto& mp = j.at("mu_policy");
    c.mu_policy = mp.is_number() ? format_number(mp.get<double>()) : mp.get<std::string>();
  }
  if (j.contains("shapes")) c.shapes = parse_shapes(j.at("shapes"));
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mc_samples")) c.mc_samples = j.at("mc_samples").get<std::size_t>();
  if (j.contains("p_t")) c.p_t = j.at("p_t").get<double>();
  if (j.contains("om_split")) c.om_split = j.at("om_split").get<double>();
  if (j.contains("outer_iters")) c.outer_iters = j.at("outer_iters").get<int>();
  if (j.contains("alpha_table")) c.alpha_table = j.at("alpha_table").get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("dof_shapes")) c.dof_shapes = parse_shapes(j.at("dof_shapes"));
  if (j.contains("dof_grid_db")) c.dof_grid_db = j.at("dof_grid_db").get<std::vector<double>>();
  if (j.contains("dof_users")) c.dof_users = j.at("dof_users").get<int>();
  c.validate();
  return c;
}

json allocation_to_json(const Allocation& a, const RateResult& r) {
  json j;
  j["p_total"] = a.p_total;
  j["p1"] = a.p1;
  j["p0"] = a.p0;
  j["selected_user"] = a.selected_user;
  json modes = json::array();
  for (auto m : a.mode) modes.push_back(std::string(mode_name(m)));
  j["mode"] = modes;
  j["lambda"] = a.lambda;
  j["mu_vec"] = a.mu_vec;
  j["rates"] = {{"r0", r.r0}, {"r_k", r.r_k}, {"sum_rate", r.sum_rate}, {"wsr", r.wsr}};
  return j;
}

void write_drop_csv(std::ostream& os, const Drop& drop) {
  os << "user_id,x_m,y_m,sector_id,snr_db\n";
  for (std::size_t u = 0; u < drop.positions.size(); ++u) {
    os << u << ',' << format_number(drop.positions[u].x) << ','
       << format_number(drop.positions[u].y) << ',' << drop.serving_sector[u] << ','
       << format_number(drop.snr_db[u]) << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace supermux
