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

#ifndef SUPERMUX_SYSIM_HPP
#define SUPERMUX_SYSIM_HPP

// Rural-macro system-level drops: 19 hexagonal sites with 3 sectors each,
// TR 38.901 RMa pathloss and sector antenna pattern, correlated log-normal
// shadowing and strongest-sector attachment. Only users attached to the
// north-facing sector of the central site are measured.
//
// Angles: azimuth in degrees counter-clockwise from east; zenith angle in
// degrees from the vertical (90 = horizon).

#include "supermux/channel_stats.hpp"
#include "supermux/rng.hpp"

#include <cstdint>
#include <vector>

namespace supermux {

struct NetworkScenario {
  double carrier_freq_hz = 700e6;
  double bandwidth_hz = 10e6;
  double isd_m = 1732.0;
  int n_sites = 19;
  int sectors_per_site = 3;
  double tx_power_dbm = 46.0;
  double bs_height_m = 35.0;
  double ue_height_m = 1.5;
  double bs_gain_dbi = 8.0;
  double ue_gain_dbi = 0.0;
  double ue_noise_figure_db = 7.0;
  double shadow_sigma_db = 7.0;
  double shadow_corr_dist_m = 120.0;
  double indoor_fraction = 0.5;
  int n_subchannels = 10;

  // simulator choices not fixed by the scenario table
  double indoor_loss_db = 10.0;
  double in_car_loss_db = 9.0;
  double electrical_tilt_deg = 6.0;
  double h_beamwidth_deg = 65.0;
  double v_beamwidth_deg = 65.0;
  double max_attenuation_db = 30.0;
  double min_distance_m = 35.0;
  double avg_building_height_m = 5.0;
  double street_width_m = 20.0;
  /// Off: SNR over thermal noise. On: other sectors at full power are added
  /// to the noise (sensitivity runs only).
  bool interference_in_snr = false;

  void validate() const;
  /// -174 dBm/Hz + 10 log10(bandwidth) + noise figure.
  double noise_floor_dbm() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct SectorInfo {
  int site = 0;
  int index = 0;  ///< within the site
  double boresight_deg = 0.0;
};

struct Layout {
  std::vector<Point2> sites;
  std::vector<SectorInfo> sectors;  ///< sector id = 3 * site + index
  int measured_sector = 0;          ///< north-facing sector of site 0
};

/// Site 0 at the origin, then the 6 first-ring and 12 second-ring sites.
/// Sector boresights 90, 210 and 330 degrees.
Layout layout_sites(const NetworkScenario& scenario);

/// Antenna gain in dBi (maximum gain included).
double sector_gain(double angle_off_boresight_h_deg, double zenith_deg,
                   const NetworkScenario& scenario);

/// RMa pathloss in dB for a 2-D distance in [10 m, 10 km]. NLOS is
/// max(LOS, NLOS formula).
double pathloss_rma(double d_2d_m, const NetworkScenario& scenario, bool los);

double los_probability_rma(double d_2d_m);

/// Breakpoint distance 2 pi h_BS h_UT f / c.
double breakpoint_distance(const NetworkScenario& scenario);

/// Jointly Gaussian shadowing (dB) for one site over the given positions,
/// covariance sigma^2 exp(-d / d_corr).
std::vector<double> shadowing_field(const std::vector<Point2>& positions, double sigma_db,
                                    double d_corr_m, CounterRng& rng);

struct Drop {
  std::uint64_t seed = 0;
  std::uint64_t drop_index = 0;
  int attempts = 0;                 ///< candidate batches drawn
  std::vector<Point2> positions;    ///< measured users
  std::vector<int> serving_sector;
  std::vector<double> snr_db;       ///< wideband SNR (or SINR, see interference_in_snr)
  std::vector<double> snr_linear;
  std::vector<bool> indoor;
};

/// Received power from every sector at a position (dBm); exposed for tests.
struct LinkInputs {
  std::vector<double> shadow_db;  ///< per site
  std::vector<bool> los;          ///< per site
  double penetration_db = 0.0;
};
std::vector<double> received_power_dbm(const Point2& pos, const LinkInputs& in,
                                       const Layout& layout, const NetworkScenario& scenario);

/// Index of the largest entry, lowest index on ties.
int strongest_sector(const std::vector<double>& rx_dbm);

/// One position uniform over the central site's hexagon, outside the
/// minimum-distance disc (rejection sampling on the bounding box).
Point2 draw_candidate(const NetworkScenario& scenario, CounterRng& rng);

/// Draws candidates uniformly over the central site's hexagon until k_users
/// of them attach to the measured sector; keeps the first k_users.
Drop drop_users(const NetworkScenario& scenario, const Layout& layout, int k_users,
                std::uint64_t seed, std::uint64_t drop_index);

/// snr(i, k) = snr_linear_k / eta_i with eta_i = 1 / M.
ChannelStats drop_to_channel_stats(const Drop& drop, const NetworkScenario& scenario, int k_users);

}  // namespace supermux

#endif  // SUPERMUX_SYSIM_HPP
