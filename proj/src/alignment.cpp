// Copyright 2026 The kincoach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kincoach/alignment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"

namespace kincoach
{

namespace
{

void check_span(std::size_t n, FrameIndex i_s, FrameIndex i_e, int n_ref)
{
  if (n_ref < 2) throw Error(Errc::bad_nref, fmt::format("N_ref = {} must be at least 2", n_ref));
  if (i_s == i_e) throw Error(Errc::degenerate_cycle, fmt::format("cycle [{}, {}] has no extent", i_s, i_e));
  if (i_s < 0 || i_e < i_s || i_e >= static_cast<FrameIndex>(n)) {
    throw Error(Errc::empty_cycle, fmt::format("cycle [{}, {}] outside series of length {}", i_s, i_e, n));
  }
}

double phi(FrameIndex i_s, FrameIndex i_e, int n_ref, int k)
{
  return static_cast<double>(i_s) +
         static_cast<double>(k) * static_cast<double>(i_e - i_s) / static_cast<double>(n_ref - 1);
}

std::vector<double> column_values(const Matrix & m, std::size_t c) { return m.column(c); }

}  // namespace

std::vector<double> resample(std::span<const double> series, FrameIndex i_s, FrameIndex i_e, int n_ref)
{
  check_span(series.size(), i_s, i_e, n_ref);
  std::vector<double> out(n_ref);
  for (int k = 0; k < n_ref; ++k) {
    const double pos = phi(i_s, i_e, n_ref, k);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    out[k] = lo == hi ? series[lo] : (1.0 - frac) * series[lo] + frac * series[hi];
  }
  return out;
}

Matrix resample(const Matrix & frames, FrameIndex i_s, FrameIndex i_e, int n_ref)
{
  check_span(frames.rows(), i_s, i_e, n_ref);
  Matrix out(n_ref, frames.cols());
  for (int k = 0; k < n_ref; ++k) {
    const double pos = phi(i_s, i_e, n_ref, k);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t c = 0; c < frames.cols(); ++c) {
      out(k, c) = lo == hi ? frames(lo, c) : (1.0 - frac) * frames(lo, c) + frac * frames(hi, c);
    }
  }
  return out;
}

Matrix select_columns(const Matrix & m, std::span<const int> columns)
{
  Matrix out(m.rows(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || static_cast<std::size_t>(columns[c]) >= m.cols()) {
      throw Error(Errc::dim_mismatch, fmt::format("column {} out of range", columns[c]));
    }
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, columns[c]);
  }
  return out;
}

AlignedCycle align_cycle(const Matrix & frames, const CycleRecord & cycle, std::span<const int> dofs, int n_ref)
{
  AlignedCycle a;
  a.dofs.assign(dofs.begin(), dofs.end());
  a.source = cycle;
  check_span(frames.rows(), cycle.i_s, cycle.i_e, n_ref);
  // Only the cycle rows are copied before resampling.
  Matrix rows(cycle.length(), dofs.size());
  for (FrameIndex i = cycle.i_s; i <= cycle.i_e; ++i) {
    for (std::size_t c = 0; c < dofs.size(); ++c) rows(i - cycle.i_s, c) = frames(i, dofs[c]);
  }
  a.angles = resample(rows, 0, cycle.i_e - cycle.i_s, n_ref);
  a.step = static_cast<double>(cycle.i_e - cycle.i_s) / static_cast<double>(n_ref - 1);
  return a;
}

double cosine(std::span<const double> a, std::span<const double> b)
{
  const double na = std::sqrt(kernels::dot(a, a));
  const double nb = std::sqrt(kernels::dot(b, b));
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return kernels::dot(a, b) / (na * nb);
}

Matrix zscore_columns(const Matrix & m)
{
  Matrix out(m.rows(), m.cols());
  const double n = static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const auto col = column_values(m, c);
    const double mean = kernels::sum(col) / n;
    const double sd = std::sqrt(kernels::sum_sq_dev(col, mean) / n);
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = sd > 0.0 ? (col[r] - mean) / sd : 0.0;
  }
  return out;
}

Matrix row_diff(const Matrix & m)
{
  Matrix out(m.rows() > 0 ? m.rows() - 1 : 0, m.cols());
  for (std::size_t r = 0; r + 1 < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r + 1, c) - m(r, c);
  }
  return out;
}

namespace
{

double pearson(std::span<const double> a, std::span<const double> b)
{
  const double n = static_cast<double>(a.size());
  const double ma = kernels::sum(a) / n;
  const double mb = kernels::sum(b) / n;
  const double va = kernels::sum_sq_dev(a, ma);
  const double vb = kernels::sum_sq_dev(b, mb);
  if (va == 0.0 || vb == 0.0) return (va == 0.0 && vb == 0.0 && ma == mb) ? 1.0 : 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
  return cov / std::sqrt(va * vb);
}

double range_of(std::span<const double> x)
{
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

QualityScore quality_score(const Matrix & user, const Matrix & ref)
{
  if (user.rows() != ref.rows() || user.cols() != ref.cols()) {
    throw Error(Errc::dim_mismatch, fmt::format("quality inputs differ in shape ({}x{} vs {}x{})", user.rows(),
                                                user.cols(), ref.rows(), ref.cols()));
  }
  if (user.rows() < 2 || user.cols() == 0) throw Error(Errc::dim_mismatch, "quality needs >= 2 rows and >= 1 DoF");

  QualityScore q;
  q.sim_cos = clamp01(cosine(zscore_columns(user).data(), zscore_columns(ref).data()));
  q.sim_vel = clamp01(cosine(zscore_columns(row_diff(user)).data(), zscore_columns(row_diff(ref)).data()));

  double pearson_sum = 0.0;
  double amp_sum = 0.0;
  for (std::size_t c = 0; c < user.cols(); ++c) {
    const auto u = user.column(c);
    const auto r = ref.column(c);
    pearson_sum += pearson(u, r);
    const double ru = range_of(u);
    const double rr = range_of(r);
    const double hi = std::max(ru, rr);
    amp_sum += hi == 0.0 ? 1.0 : std::min(ru, rr) / hi;
  }
  const double d = static_cast<double>(user.cols());
  q.sim_pearson = clamp01(pearson_sum / d);
  q.sim_amp = clamp01(amp_sum / d);
  q.s_cycle = clamp01(kWeightCos * q.sim_cos + kWeightPearson * q.sim_pearson + kWeightVel * q.sim_vel +
                      kWeightAmp * q.sim_amp);
  return q;
}

QualityScore quality_score(const AlignedCycle & aligned, const Matrix & ref_angles)
{
  return quality_score(aligned.angles, select_columns(ref_angles, aligned.dofs));
}

std::optional<std::size_t> best_cycle(std::span<const QualityScore> scores)
{
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!best || scores[i].s_cycle > scores[*best].s_cycle) best = i;
  }
  return best;
}

}  // namespace kincoach
