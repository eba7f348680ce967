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

#include "supermux/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace supermux {

double surrogate_phi(double x, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("surrogate_phi: alpha must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("surrogate_phi: x must be >= 0");
  return 1.0 / (1.0 + alpha * x);
}

std::vector<double> FitGrid::points() const {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("FitGrid: bad grid");
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
  }
  return x;
}

std::string FitGrid::descriptor() const {
  std::ostringstream os;
  os << "uniform:" << lo << ':' << hi << ':' << n;
  return os.str();
}

FitGrid FitGrid::parse(const std::string& descriptor) {
  FitGrid g;
  std::string text = descriptor;
  std::replace(text.begin(), text.end(), ':', ' ');
  std::istringstream is(text);
  std::string kind;
  if (!(is >> kind >> g.lo >> g.hi >> g.n) || kind != "uniform") {
    throw std::invalid_argument("FitGrid: cannot parse '" + descriptor + "'");
  }
  g.points();  // validates
  return g;
}

double surrogate_mse(std::span<const double> xs, std::span<const double> phi, double alpha) {
  double acc = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double e = phi[j] - 1.0 / (1.0 + alpha * xs[j]);
    acc += e * e;
  }
  return acc / static_cast<double>(xs.size());
}

AlphaFit fit_alpha(MimoShape shape, const RateEstimator& est, const FitGrid& grid) {
  if (est.shape() != shape) throw std::invalid_argument("fit_alpha: estimator shape mismatch");
  const auto xs = grid.points();
  if (xs.front() <= 0.0 || xs.back() > 100.0) {
    throw std::invalid_argument("fit_alpha: grid must lie inside (0, 100]");
  }
  std::vector<double> phi(xs.size());
  est.aux_curve(xs, phi);

  const auto mse = [&](double a) { return surrogate_mse(xs, phi, a); };
  double a = 0.5;
  double b = 2.0 * shape.n_r * std::max(1.0, static_cast<double>(shape.n_r) / shape.n_t);
  const double inv_gold = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_gold * (b - a);
  double d = a + inv_gold * (b - a);
  double fc = mse(c), fd = mse(d);
  while (b - a > 1e-7 * (1.0 + std::abs(c))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_gold * (b - a);
      fc = mse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_gold * (b - a);
      fd = mse(d);
    }
  }
  double alpha = 0.5 * (a + b);

  // Newton polish on d mse / d alpha
  for (int it = 0; it < 8; ++it) {
    double g = 0.0, h = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double s = 1.0 / (1.0 + alpha * xs[j]);
      const double e = phi[j] - s;
      const double xs2 = xs[j] * s * s;
      g += e * xs2;
      h += xs2 * xs2 - 2.0 * e * xs[j] * xs2 * s;
    }
    if (!(h > 0.0)) break;
    const double next = alpha - g / h;
    if (!(next > 0.0) || mse(next) > mse(alpha)) break;
    const bool done = std::abs(next - alpha) < 1e-14 * alpha;
    alpha = next;
    if (done) break;
  }
  return {alpha, mse(alpha)};
}

namespace {

constexpr std::array<int, 6> kPublishedNt = {1, 2, 4, 8, 16, 32};
constexpr std::array<int, 5> kPublishedNr = {1, 2, 4, 8, 16};

// alpha, mse by (n_t row, n_r column)
constexpr double kPublishedAlpha[6][5] = {
    {1.306, 2.284, 4.267, 8.251, 16.212}, {1.144, 1.402, 2.316, 4.281, 8.253},
    {1.069, 1.160, 1.435, 2.324, 4.281},  {1.034, 1.071, 1.164, 1.443, 2.326},
    {1.017, 1.034, 1.072, 1.165, 1.445},  {1.008, 1.017, 1.034, 1.073, 1.166},
};
constexpr double kPublishedMse[6][5] = {
    {0.0058, 0.0021, 5.39e-4, 1.00e-4, 1.56e-5}, {0.0021, 0.0063, 0.0023, 5.85e-4, 1.08e-4},
    {6.36e-4, 0.0024, 0.0058, 0.0024, 5.60e-4},  {1.95e-4, 6.46e-4, 0.0024, 0.0055, 0.0023},
    {4.38e-5, 1.78e-4, 6.61e-4, 0.0024, 0.0055}, {1.24e-5, 4.46e-5, 1.73e-4, 6.77e-4, 0.0024},
};

}  // namespace

std::vector<MimoShape> published_shapes() {
  std::vector<MimoShape> out;
  for (int nt : kPublishedNt) {
    for (int nr : kPublishedNr) out.emplace_back(nt, nr);
  }
  return out;
}

SurrogateTable SurrogateTable::published() {
  SurrogateTable t;
  for (std::size_t r = 0; r < kPublishedNt.size(); ++r) {
    for (std::size_t c = 0; c < kPublishedNr.size(); ++c) {
      t.set(MimoShape(kPublishedNt[r], kPublishedNr[c]),
            {kPublishedAlpha[r][c], kPublishedMse[r][c], "published", 0});
    }
  }
  return t;
}

void SurrogateTable::set(MimoShape shape, Entry entry) {
  if (!(entry.alpha > 0.0) || !(entry.mse >= 0.0)) {
    throw std::invalid_argument("SurrogateTable: alpha must be > 0 and mse >= 0");
  }
  entries_[{shape.n_t, shape.n_r}] = std::move(entry);
}

std::optional<SurrogateTable::Entry> SurrogateTable::find(MimoShape shape) const {
  const auto it = entries_.find({shape.n_t, shape.n_r});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SurrogateTable::save(std::ostream& os) const {
  os << "# n_t n_r alpha mse grid seed\n" << std::setprecision(10);
  for (const auto& [key, e] : entries_) {
    os << key.first << ' ' << key.second << ' ' << e.alpha << ' ' << e.mse << ' ' << e.grid
       << ' ' << e.seed << '\n';
  }
}

SurrogateTable SurrogateTable::load(std::istream& is) {
  SurrogateTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    int nt = 0, nr = 0;
    Entry e;
    if (!(ls >> nt >> nr >> e.alpha >> e.mse >> e.grid >> e.seed)) {
      throw std::invalid_argument("SurrogateTable: malformed line " + std::to_string(line_no));
    }
    t.set(MimoShape(nt, nr), e);
  }
  return t;
}

double alpha_lookup(MimoShape shape, const SurrogateTable& table, std::size_t fallback_samples,
                    std::uint64_t fallback_seed) {
  if (const auto e = table.find(shape)) return e->alpha;
  const RateEstimator est(shape, fallback_samples, fallback_seed);
  return fit_alpha(shape, est).alpha;
}

}  // namespace supermux
