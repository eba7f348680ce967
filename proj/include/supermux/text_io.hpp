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

#ifndef SUPERMUX_TEXT_IO_HPP
#define SUPERMUX_TEXT_IO_HPP

// File formats: whitespace SNR matrices, JSON scenario/config files and
// records, drop CSVs. Numbers are printed with a fixed "%.10g" so reruns are
// byte-identical.

#include "supermux/allocation.hpp"
#include "supermux/experiments.hpp"
#include "supermux/sysim.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace supermux {

/// One subchannel per line, whitespace-separated linear SNRs; '#' starts a comment.
Eigen::MatrixXd read_snr_matrix(std::istream& is);
void write_snr_matrix(std::ostream& os, const Eigen::MatrixXd& snr);

std::string format_number(double v);

nlohmann::json scenario_to_json(const NetworkScenario& s);
/// Unknown keys are rejected; missing keys keep their defaults.
NetworkScenario scenario_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json allocation_to_json(const Allocation& a, const RateResult& r);

/// Columns user_id, x_m, y_m, sector_id, snr_db.
void write_drop_csv(std::ostream& os, const Drop& drop);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a(std::string_view text);

}  // namespace supermux

#endif  // SUPERMUX_TEXT_IO_HPP
