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

#include "supermux/kernels.hpp"

#include "supermux/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace supermux::kernels {

namespace {

using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
using CMap = Eigen::Map<const Eigen::MatrixXcd>;

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

std::size_t block_count(std::size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

// Per-sample work shared by the serial and parallel eigenvalue kernels.
class EigenWorkspace {
 public:
  explicit EigenWorkspace(MimoShape shape)
      : shape_(shape),
        h_(shape.n_r, shape.n_t),
        gram_(shape.min_dim(), shape.min_dim()),
        solver_(shape.min_dim()) {}

  void sample(std::uint64_t seed, std::size_t s, double* out) {
    CounterRng rng(seed, s);
    for (int r = 0; r < shape_.n_r; ++r) {
      for (int c = 0; c < shape_.n_t; ++c) h_(r, c) = rng.complex_normal();
    }
    const int dim = shape_.min_dim();
    if (dim == 1) {
      out[0] = h_.squaredNorm();
      return;
    }
    if (shape_.n_r <= shape_.n_t) {
      gram_.noalias() = h_ * h_.adjoint();
    } else {
      gram_.noalias() = h_.adjoint() * h_;
    }
    solver_.compute(gram_, Eigen::EigenvaluesOnly);
    const auto& ev = solver_.eigenvalues();
    for (int m = 0; m < dim; ++m) out[m] = std::max(ev(m), 0.0);
  }

 private:
  MimoShape shape_;
  Eigen::MatrixXcd h_;
  Eigen::MatrixXcd gram_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_;
};

inline double capacity_term(const double* d, int dim, double scale) {
  double acc = 0.0;
  for (int m = 0; m < dim; ++m) acc += std::log1p(scale * d[m]);
  return acc;
}

inline double aux_term(const double* d, int dim, double x, double n_t) {
  double acc = 0.0;
  for (int m = 0; m < dim; ++m) {
    if (d[m] > 0.0) acc += d[m] / (x * d[m] + n_t);
  }
  return acc;
}

inline double gap_term(const double* d, int dim, double hi_scale, double lo_scale) {
  double acc = 0.0;
  for (int m = 0; m < dim; ++m) {
    acc += std::log1p((hi_scale - lo_scale) * d[m] / (1.0 + lo_scale * d[m]));
  }
  return acc;
}

void check_curve_args(std::span<const double> eig, int dim, std::span<const double> xs,
                      std::span<double> out) {
  if (dim < 1 || eig.empty() || eig.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("kernels: eigenvalue buffer does not match dimension");
  }
  if (xs.size() != out.size()) {
    throw std::invalid_argument("kernels: output span size mismatch");
  }
}

// Accumulates one sample of log2 det(I + snr H diag(d) H^H) and its gradient.
class LogDetWorkspace {
 public:
  explicit LogDetWorkspace(MimoShape shape) : shape_(shape), a_(shape.n_r, shape.n_r) {}

  double add(std::span<const std::complex<double>> h_raw, double snr, std::span<const double> d,
             double* grad) {
    const CMap h(h_raw.data(), shape_.n_r, shape_.n_t);
    a_.setIdentity();
    for (int j = 0; j < shape_.n_t; ++j) {
      const double w = snr * d[static_cast<std::size_t>(j)];
      if (w != 0.0) a_.noalias() += w * h.col(j) * h.col(j).adjoint();
    }
    llt_.compute(a_);
    double logdet = 0.0;
    for (int r = 0; r < shape_.n_r; ++r) logdet += std::log(llt_.matrixLLT()(r, r).real());
    logdet *= 2.0;
    if (grad != nullptr) {
      x_ = llt_.solve(h);
      for (int j = 0; j < shape_.n_t; ++j) {
        grad[j] += snr * h.col(j).dot(x_.col(j)).real();
      }
    }
    return logdet;
  }

 private:
  MimoShape shape_;
  CMat a_;
  CMat x_;
  Eigen::LLT<CMat> llt_;
};

void check_log_det_args(const ChannelSamples& samples, std::span<const double> d) {
  if (samples.shape.n_t > 8 || samples.shape.n_r > 8) {
    throw std::invalid_argument("log_det_mean: supports at most 8x8 antennas");
  }
  if (d.size() != static_cast<std::size_t>(samples.shape.n_t)) {
    throw std::invalid_argument("log_det_mean: diagonal size must equal n_t");
  }
  if (samples.n == 0) throw std::invalid_argument("log_det_mean: empty sample set");
}

}  // namespace

ChannelSamples draw_channel_samples(MimoShape shape, std::size_t n_base, std::uint64_t seed,
                                    bool cyclic_symmetrise) {
  const std::size_t copies = cyclic_symmetrise ? static_cast<std::size_t>(shape.n_t) : 1;
  const auto len = static_cast<std::size_t>(shape.n_r * shape.n_t);
  ChannelSamples out{shape, n_base * copies, {}};
  out.h.resize(out.n * len);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_base); ++b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    std::vector<std::complex<double>> base(len);
    // column-major: entry (r, c) at c * n_r + r
    for (int r = 0; r < shape.n_r; ++r) {
      for (int c = 0; c < shape.n_t; ++c) {
        base[static_cast<std::size_t>(c * shape.n_r + r)] = rng.complex_normal();
      }
    }
    for (std::size_t shift = 0; shift < copies; ++shift) {
      auto* dst = out.h.data() + (static_cast<std::size_t>(b) * copies + shift) * len;
      for (int c = 0; c < shape.n_t; ++c) {
        const auto src_col = (static_cast<std::size_t>(c) + shift) % static_cast<std::size_t>(shape.n_t);
        std::copy_n(base.data() + src_col * static_cast<std::size_t>(shape.n_r),
                    shape.n_r, dst + static_cast<std::size_t>(c * shape.n_r));
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------------
// serial reference

namespace serial {

std::vector<double> wishart_eigenvalues(MimoShape shape, std::size_t n, std::uint64_t seed) {
  const auto dim = static_cast<std::size_t>(shape.min_dim());
  std::vector<double> out(n * dim);
  EigenWorkspace ws(shape);
  for (std::size_t s = 0; s < n; ++s) ws.sample(seed, s, out.data() + s * dim);
  return out;
}

void capacity_curve(std::span<const double> eig, int dim, int n_t, std::span<const double> xs,
                    std::span<double> out) {
  check_curve_args(eig, dim, xs, out);
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double scale = xs[q] / n_t;
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) acc += capacity_term(eig.data() + s * dim, dim, scale);
    out[q] = acc * kInvLn2 / static_cast<double>(n);
  }
}

void aux_curve(std::span<const double> eig, int dim, int n_t, int n_r,
               std::span<const double> xs, std::span<double> out) {
  check_curve_args(eig, dim, xs, out);
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) acc += aux_term(eig.data() + s * dim, dim, xs[q], n_t);
    out[q] = acc / (static_cast<double>(n) * n_r);
  }
}

double capacity_gap(std::span<const double> eig, int dim, int n_t, double hi, double lo) {
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  double acc = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    acc += gap_term(eig.data() + s * dim, dim, hi / n_t, lo / n_t);
  }
  return acc * kInvLn2 / static_cast<double>(n);
}

LogDetMean log_det_mean(const ChannelSamples& samples, double snr, std::span<const double> d,
                        bool with_gradient) {
  check_log_det_args(samples, d);
  LogDetMean out;
  out.grad.assign(with_gradient ? d.size() : 0, 0.0);
  LogDetWorkspace ws(samples.shape);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples.n; ++s) {
    acc += ws.add(samples.sample(s), snr, d, with_gradient ? out.grad.data() : nullptr);
  }
  const double norm = 1.0 / static_cast<double>(samples.n);
  out.value = acc * kInvLn2 * norm;
  for (double& g : out.grad) g *= kInvLn2 * norm;
  return out;
}

}  // namespace serial

// ------------------------------------------------------------------------
// OpenMP

namespace parallel {

std::vector<double> wishart_eigenvalues(MimoShape shape, std::size_t n, std::uint64_t seed) {
  const auto dim = static_cast<std::size_t>(shape.min_dim());
  std::vector<double> out(n * dim);
#pragma omp parallel
  {
    EigenWorkspace ws(shape);
#pragma omp for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
      ws.sample(seed, static_cast<std::size_t>(s), out.data() + static_cast<std::size_t>(s) * dim);
    }
  }
  return out;
}

namespace {

// Block-ordered mean of term(sample, x) for every x: partial sums per
// (x, block) are formed in parallel and folded in block order.
template <typename Term>
void blocked_curve(std::size_t n, std::span<const double> xs, std::span<double> out, Term term) {
  const std::size_t blocks = block_count(n);
  const std::size_t tasks = blocks * xs.size();
  std::vector<double> partial(tasks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks); ++t) {
    const std::size_t q = static_cast<std::size_t>(t) / blocks;
    const std::size_t b = static_cast<std::size_t>(t) % blocks;
    const std::size_t end = std::min(n, (b + 1) * kReductionBlock);
    double acc = 0.0;
    for (std::size_t s = b * kReductionBlock; s < end; ++s) acc += term(s, xs[q]);
    partial[static_cast<std::size_t>(t)] = acc;
  }
  for (std::size_t q = 0; q < xs.size(); ++q) {
    double acc = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) acc += partial[q * blocks + b];
    out[q] = acc;
  }
}

}  // namespace

void capacity_curve(std::span<const double> eig, int dim, int n_t, std::span<const double> xs,
                    std::span<double> out) {
  check_curve_args(eig, dim, xs, out);
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  blocked_curve(n, xs, out, [&](std::size_t s, double x) {
    return capacity_term(eig.data() + s * dim, dim, x / n_t);
  });
  for (double& v : out) v *= kInvLn2 / static_cast<double>(n);
}

void aux_curve(std::span<const double> eig, int dim, int n_t, int n_r,
               std::span<const double> xs, std::span<double> out) {
  check_curve_args(eig, dim, xs, out);
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  blocked_curve(n, xs, out, [&](std::size_t s, double x) {
    return aux_term(eig.data() + s * dim, dim, x, n_t);
  });
  for (double& v : out) v /= static_cast<double>(n) * n_r;
}

double capacity_gap(std::span<const double> eig, int dim, int n_t, double hi, double lo) {
  const std::size_t n = eig.size() / static_cast<std::size_t>(dim);
  const double xs[1] = {0.0};
  double out[1] = {0.0};
  blocked_curve(n, xs, out, [&](std::size_t s, double) {
    return gap_term(eig.data() + s * dim, dim, hi / n_t, lo / n_t);
  });
  return out[0] * kInvLn2 / static_cast<double>(n);
}

LogDetMean log_det_mean(const ChannelSamples& samples, double snr, std::span<const double> d,
                        bool with_gradient) {
  check_log_det_args(samples, d);
  const std::size_t n_t = d.size();
  const std::size_t blocks = block_count(samples.n);
  const std::size_t stride = 1 + (with_gradient ? n_t : 0);
  std::vector<double> partial(blocks * stride, 0.0);
#pragma omp parallel
  {
    LogDetWorkspace ws(samples.shape);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
      double* slot = partial.data() + static_cast<std::size_t>(b) * stride;
      const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t end = std::min(samples.n, begin + kReductionBlock);
      double acc = 0.0;
      for (std::size_t s = begin; s < end; ++s) {
        acc += ws.add(samples.sample(s), snr, d, with_gradient ? slot + 1 : nullptr);
      }
      slot[0] = acc;
    }
  }
  LogDetMean out;
  out.grad.assign(with_gradient ? n_t : 0, 0.0);
  double acc = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* slot = partial.data() + b * stride;
    acc += slot[0];
    for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += slot[1 + j];
  }
  const double norm = kInvLn2 / static_cast<double>(samples.n);
  out.value = acc * norm;
  for (double& g : out.grad) g *= norm;
  return out;
}

}  // namespace parallel

}  // namespace supermux::kernels
