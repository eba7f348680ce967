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

#include "supermux/sysim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace supermux {

namespace {

constexpr double kSpeedOfLight = 3e8;
constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_deg(double a) {
  a = std::fmod(a + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  return a - 180.0;
}

}  // namespace

void NetworkScenario::validate() const {
  const double positive[] = {carrier_freq_hz, bandwidth_hz, isd_m,           bs_height_m,
                             ue_height_m,     shadow_corr_dist_m, h_beamwidth_deg,
                             v_beamwidth_deg, max_attenuation_db, avg_building_height_m,
                             street_width_m};
  for (double v : positive) {
    if (!(v > 0.0)) throw std::invalid_argument("NetworkScenario: parameters must be positive");
  }
  if (n_sites != 19 || sectors_per_site != 3) {
    throw std::invalid_argument("NetworkScenario: layout is fixed at 19 sites x 3 sectors");
  }
  if (n_subchannels < 1) throw std::invalid_argument("NetworkScenario: n_subchannels >= 1");
  if (!(indoor_fraction >= 0.0 && indoor_fraction <= 1.0)) {
    throw std::invalid_argument("NetworkScenario: indoor_fraction must lie in [0, 1]");
  }
  if (!(shadow_sigma_db >= 0.0) || !(indoor_loss_db >= 0.0) || !(in_car_loss_db >= 0.0) ||
      !(ue_noise_figure_db >= 0.0)) {
    throw std::invalid_argument("NetworkScenario: losses must be >= 0");
  }
  if (!(min_distance_m >= 10.0) || !(min_distance_m < isd_m / 2.0)) {
    throw std::invalid_argument("NetworkScenario: min_distance_m must lie in [10, isd / 2)");
  }
  if (!(bs_height_m > ue_height_m)) {
    throw std::invalid_argument("NetworkScenario: base station must be above the user");
  }
}

double NetworkScenario::noise_floor_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + ue_noise_figure_db;
}

Layout layout_sites(const NetworkScenario& scenario) {
  scenario.validate();
  Layout out;
  const double d = scenario.isd_m;
  out.sites.push_back({0.0, 0.0});
  for (int j = 0; j < 6; ++j) {
    const double a = 60.0 * j * kDeg;
    out.sites.push_back({d * std::cos(a), d * std::sin(a)});
  }
  for (int j = 0; j < 6; ++j) {
    const double a = 60.0 * j * kDeg;
    out.sites.push_back({2.0 * d * std::cos(a), 2.0 * d * std::sin(a)});
    const double b = (30.0 + 60.0 * j) * kDeg;
    out.sites.push_back({std::sqrt(3.0) * d * std::cos(b), std::sqrt(3.0) * d * std::sin(b)});
  }
  for (int s = 0; s < static_cast<int>(out.sites.size()); ++s) {
    for (int j = 0; j < 3; ++j) out.sectors.push_back({s, j, 90.0 + 120.0 * j});
  }
  out.measured_sector = 0;
  return out;
}

double sector_gain(double angle_off_boresight_h_deg, double zenith_deg,
                   const NetworkScenario& scenario) {
  const double am = scenario.max_attenuation_db;
  const double phi = wrap_deg(angle_off_boresight_h_deg);
  const double a_h = -std::min(12.0 * std::pow(phi / scenario.h_beamwidth_deg, 2.0), am);
  const double tilt = 90.0 + scenario.electrical_tilt_deg;
  const double a_v =
      -std::min(12.0 * std::pow((zenith_deg - tilt) / scenario.v_beamwidth_deg, 2.0), am);
  return -std::min(-(a_h + a_v), am) + scenario.bs_gain_dbi;
}

double breakpoint_distance(const NetworkScenario& scenario) {
  return 2.0 * std::numbers::pi * scenario.bs_height_m * scenario.ue_height_m *
         scenario.carrier_freq_hz / kSpeedOfLight;
}

double pathloss_rma(double d_2d_m, const NetworkScenario& scenario, bool los) {
  if (!(d_2d_m >= 10.0) || !(d_2d_m <= 10000.0)) {
    throw std::out_of_range("pathloss_rma: distance " + std::to_string(d_2d_m) +
                            " m outside [10, 10000]");
  }
  const double h_bs = scenario.bs_height_m;
  const double h_ut = scenario.ue_height_m;
  const double h = scenario.avg_building_height_m;
  const double w = scenario.street_width_m;
  const double fc = scenario.carrier_freq_hz / 1e9;
  const double dh = h_bs - h_ut;
  const double d3 = std::hypot(d_2d_m, dh);
  const double d_bp = breakpoint_distance(scenario);

  const auto pl1 = [&](double dist) {
    return 20.0 * std::log10(40.0 * std::numbers::pi * dist * fc / 3.0) +
           std::min(0.03 * std::pow(h, 1.72), 10.0) * std::log10(dist) -
           std::min(0.044 * std::pow(h, 1.72), 14.77) + 0.002 * std::log10(h) * dist;
  };
  const double pl_los = d_2d_m <= d_bp ? pl1(d3) : pl1(d_bp) + 40.0 * std::log10(d3 / d_bp);
  if (los) return pl_los;
  const double pl_nlos = 161.04 - 7.1 * std::log10(w) + 7.5 * std::log10(h) -
                         (24.37 - 3.7 * std::pow(h / h_bs, 2.0)) * std::log10(h_bs) +
                         (43.42 - 3.1 * std::log10(h_bs)) * (std::log10(d3) - 3.0) +
                         20.0 * std::log10(fc) -
                         (3.2 * std::pow(std::log10(11.75 * h_ut), 2.0) - 4.97);
  return std::max(pl_los, pl_nlos);
}

double los_probability_rma(double d_2d_m) {
  if (d_2d_m <= 10.0) return 1.0;
  return std::exp(-(d_2d_m - 10.0) / 1000.0);
}

std::vector<double> shadowing_field(const std::vector<Point2>& positions, double sigma_db,
                                    double d_corr_m, CounterRng& rng) {
  if (!(d_corr_m > 0.0) || !(sigma_db >= 0.0)) {
    throw std::invalid_argument("shadowing_field: needs sigma >= 0 and d_corr > 0");
  }
  if (sigma_db == 0.0) {
    for (const auto& p : positions) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("shadowing_field: positions must be finite");
      }
    }
    return std::vector<double>(positions.size(), 0.0);
  }
  // identical positions share one draw
  std::vector<Point2> unique;
  std::vector<std::size_t> slot(positions.size());
  for (std::size_t u = 0; u < positions.size(); ++u) {
    const auto& p = positions[u];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("shadowing_field: positions must be finite");
    }
    std::size_t j = 0;
    while (j < unique.size() && (unique[j].x != p.x || unique[j].y != p.y)) ++j;
    if (j == unique.size()) unique.push_back(p);
    slot[u] = j;
  }
  const auto n = static_cast<Eigen::Index>(unique.size());
  Eigen::MatrixXd cov(n, n);
  const double var = sigma_db * sigma_db;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double dist = std::hypot(unique[static_cast<std::size_t>(a)].x - unique[static_cast<std::size_t>(b)].x,
                                     unique[static_cast<std::size_t>(a)].y - unique[static_cast<std::size_t>(b)].y);
      cov(a, b) = cov(b, a) = var * std::exp(-dist / d_corr_m);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-9 * var;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("shadowing_field: covariance factorisation failed");
    }
  }
  Eigen::VectorXd z(n);
  for (Eigen::Index a = 0; a < n; ++a) z(a) = rng.normal();
  const Eigen::VectorXd field = llt.matrixL() * z;
  std::vector<double> out(positions.size());
  for (std::size_t u = 0; u < positions.size(); ++u) out[u] = field(static_cast<Eigen::Index>(slot[u]));
  return out;
}

std::vector<double> received_power_dbm(const Point2& pos, const LinkInputs& in,
                                       const Layout& layout, const NetworkScenario& scenario) {
  std::vector<double> rx(layout.sectors.size());
  const double dh = scenario.bs_height_m - scenario.ue_height_m;
  for (std::size_t s = 0; s < layout.sectors.size(); ++s) {
    const auto& sec = layout.sectors[s];
    const auto& site = layout.sites[static_cast<std::size_t>(sec.site)];
    const double dx = pos.x - site.x, dy = pos.y - site.y;
    const double d2 = std::max(std::hypot(dx, dy), 10.0);
    const double azimuth = std::atan2(dy, dx) / kDeg;
    const double zenith = 90.0 + std::atan2(dh, d2) / kDeg;
    const double gain = sector_gain(azimuth - sec.boresight_deg, zenith, scenario);
    const auto site_idx = static_cast<std::size_t>(sec.site);
    rx[s] = scenario.tx_power_dbm + gain + scenario.ue_gain_dbi -
            pathloss_rma(d2, scenario, in.los[site_idx]) - in.shadow_db[site_idx] -
            in.penetration_db;
  }
  return rx;
}

int strongest_sector(const std::vector<double>& rx_dbm) {
  if (rx_dbm.empty()) throw std::invalid_argument("strongest_sector: no sectors");
  int best = 0;
  for (std::size_t s = 1; s < rx_dbm.size(); ++s) {
    if (rx_dbm[s] > rx_dbm[static_cast<std::size_t>(best)]) best = static_cast<int>(s);
  }
  return best;
}

namespace {

bool inside_central_hexagon(const Point2& p, double apothem) {
  for (int j = 0; j < 6; ++j) {
    const double a = 60.0 * j * kDeg;
    if (p.x * std::cos(a) + p.y * std::sin(a) > apothem) return false;
  }
  return true;
}

}  // namespace

Point2 draw_candidate(const NetworkScenario& scenario, CounterRng& rng) {
  const double apothem = scenario.isd_m / 2.0;
  const double radius = scenario.isd_m / std::sqrt(3.0);
  for (;;) {
    const Point2 p{(2.0 * rng.uniform() - 1.0) * apothem, (2.0 * rng.uniform() - 1.0) * radius};
    if (!inside_central_hexagon(p, apothem)) continue;
    if (std::hypot(p.x, p.y) < scenario.min_distance_m) continue;
    return p;
  }
}

Drop drop_users(const NetworkScenario& scenario, const Layout& layout, int k_users,
                std::uint64_t seed, std::uint64_t drop_index) {
  scenario.validate();
  if (k_users < 1) throw std::invalid_argument("drop_users: k_users must be >= 1");
  const std::size_t batch = 4 * static_cast<std::size_t>(k_users) + 8;
  const std::size_t n_sites = layout.sites.size();

  Drop drop;
  drop.seed = seed;
  drop.drop_index = drop_index;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    drop.attempts = attempt + 1;
    CounterRng rng(seed, drop_index, static_cast<std::uint64_t>(attempt));
    std::vector<Point2> cand;
    std::vector<bool> indoor;
    while (cand.size() < batch) {
      cand.push_back(draw_candidate(scenario, rng));
      indoor.push_back(rng.uniform() < scenario.indoor_fraction);
    }
    std::vector<std::vector<double>> shadow(n_sites);
    std::vector<std::vector<bool>> los(n_sites, std::vector<bool>(batch));
    for (std::size_t s = 0; s < n_sites; ++s) {
      shadow[s] = shadowing_field(cand, scenario.shadow_sigma_db, scenario.shadow_corr_dist_m, rng);
      for (std::size_t u = 0; u < batch; ++u) {
        const auto& site = layout.sites[s];
        const double d2 = std::hypot(cand[u].x - site.x, cand[u].y - site.y);
        los[s][u] = rng.uniform() < los_probability_rma(d2);
      }
    }
    for (std::size_t u = 0; u < batch; ++u) {
      LinkInputs in;
      in.penetration_db = indoor[u] ? scenario.indoor_loss_db : scenario.in_car_loss_db;
      for (std::size_t s = 0; s < n_sites; ++s) {
        in.shadow_db.push_back(shadow[s][u]);
        in.los.push_back(los[s][u]);
      }
      const auto rx = received_power_dbm(cand[u], in, layout, scenario);
      const int serving = strongest_sector(rx);
      if (serving != layout.measured_sector) continue;
      double floor_dbm = scenario.noise_floor_dbm();
      if (scenario.interference_in_snr) {
        double mw = std::pow(10.0, floor_dbm / 10.0);
        for (std::size_t s = 0; s < rx.size(); ++s) {
          if (static_cast<int>(s) != serving) mw += std::pow(10.0, rx[s] / 10.0);
        }
        floor_dbm = 10.0 * std::log10(mw);
      }
      const double snr_db = rx[static_cast<std::size_t>(serving)] - floor_dbm;
      drop.positions.push_back(cand[u]);
      drop.serving_sector.push_back(serving);
      drop.snr_db.push_back(snr_db);
      drop.snr_linear.push_back(std::pow(10.0, snr_db / 10.0));
      drop.indoor.push_back(indoor[u]);
      if (static_cast<int>(drop.positions.size()) == k_users) return drop;
    }
    // too few users in the measured sector: discard the whole batch
    drop.positions.clear();
    drop.serving_sector.clear();
    drop.snr_db.clear();
    drop.snr_linear.clear();
    drop.indoor.clear();
  }
  throw std::runtime_error("drop_users: measured sector stayed under-populated");
}

ChannelStats drop_to_channel_stats(const Drop& drop, const NetworkScenario& scenario,
                                   int k_users) {
  if (k_users < 1 || k_users > static_cast<int>(drop.snr_linear.size())) {
    throw std::invalid_argument("drop_to_channel_stats: drop has too few users");
  }
  const int m = scenario.n_subchannels;
  Eigen::MatrixXd snr(m, k_users);
  for (int k = 0; k < k_users; ++k) {
    const double s = drop.snr_linear[static_cast<std::size_t>(k)];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("drop_to_channel_stats: SNRs must be positive and finite");
    }
    for (int i = 0; i < m; ++i) snr(i, k) = s * m;
  }
  return ChannelStats::build_uniform(snr);
}

}  // namespace supermux
