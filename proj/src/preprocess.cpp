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

#include "kincoach/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"

namespace kincoach
{

using nlohmann::json;

void validate(const AngleFrame & frame)
{
  if (frame.t < 0) throw Error(Errc::stream_format, fmt::format("negative frame index {}", frame.t));
  for (int i = 0; i < kNumDofs; ++i) {
    const double v = frame.q[i];
    if (!std::isfinite(v)) throw Error(Errc::stream_format, fmt::format("frame {}: q[{}] not finite", frame.t, i));
    if (std::abs(v) > std::numbers::pi) {
      throw Error(Errc::stream_format, fmt::format("frame {}: |q[{}]| = {} exceeds pi", frame.t, i, std::abs(v)));
    }
  }
  if (frame.beta) {
    for (double b : *frame.beta) {
      if (!std::isfinite(b)) throw Error(Errc::stream_format, fmt::format("frame {}: beta not finite", frame.t));
    }
  }
  if (!(frame.confidence >= 0.0 && frame.confidence <= 1.0)) {
    throw Error(Errc::stream_format, fmt::format("frame {}: confidence outside [0, 1]", frame.t));
  }
}

AngleFrame parse_frame(std::string_view line, std::size_t line_no)
{
  const auto fail = [line_no](const std::string & what) -> Error {
    return Error(Errc::stream_format, fmt::format("line {}: {}", line_no, what));
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error & e) {
    throw fail(e.what());
  }
  if (!doc.is_object()) throw fail("frame must be a JSON object");

  AngleFrame f;
  const auto t = doc.find("t");
  if (t == doc.end() || !t->is_number_integer()) throw fail("missing integer 't'");
  f.t = t->get<FrameIndex>();

  const auto q = doc.find("q");
  if (q == doc.end() || !q->is_array() || q->size() != static_cast<std::size_t>(kNumDofs)) {
    throw fail("'q' must hold 46 numbers");
  }
  for (int i = 0; i < kNumDofs; ++i) {
    if (!(*q)[i].is_number()) throw fail("'q' must hold 46 numbers");
    f.q[i] = (*q)[i].get<double>();
  }

  if (const auto beta = doc.find("beta"); beta != doc.end() && !beta->is_null()) {
    if (!beta->is_array() || beta->size() != static_cast<std::size_t>(kNumShape)) {
      throw fail("'beta' must hold 10 numbers");
    }
    Shape b{};
    for (int i = 0; i < kNumShape; ++i) {
      if (!(*beta)[i].is_number()) throw fail("'beta' must hold 10 numbers");
      b[i] = (*beta)[i].get<double>();
    }
    f.beta = b;
  }

  if (const auto conf = doc.find("conf"); conf != doc.end()) {
    if (!conf->is_number()) throw fail("'conf' must be a number");
    f.confidence = conf->get<double>();
  }

  try {
    validate(f);
  } catch (const Error & e) {
    throw fail(e.what());
  }
  return f;
}

std::string format_frame(const AngleFrame & frame)
{
  json doc;
  doc["t"] = frame.t;
  doc["q"] = frame.q;
  if (frame.beta) doc["beta"] = *frame.beta;
  doc["conf"] = frame.confidence;
  return doc.dump();
}

int kernel_radius(double sigma) { return static_cast<int>(4.0 * sigma + 0.5); }

std::vector<double> gaussian_kernel(double sigma)
{
  if (!(sigma > 0.0)) throw Error(Errc::schema, "smoothing sigma must be positive");
  const int r = kernel_radius(sigma);
  std::vector<double> w(2 * r + 1);
  double total = 0.0;
  for (int j = -r; j <= r; ++j) {
    w[j + r] = std::exp(-0.5 * (j * j) / (sigma * sigma));
    total += w[j + r];
  }
  for (double & v : w) v /= total;
  return w;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n)
{
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

double smooth_at(std::span<const double> x, std::size_t i, std::span<const double> kernel)
{
  const std::size_t n = x.size();
  const auto r = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto c = static_cast<std::ptrdiff_t>(i);
  if (c - r >= 0 && c + r < static_cast<std::ptrdiff_t>(n)) {
    return kernels::dot(kernel, x.subspan(i - r, kernel.size()));
  }
  thread_local std::vector<double> buf;
  buf.resize(kernel.size());
  for (std::ptrdiff_t j = -r; j <= r; ++j) buf[j + r] = x[reflect_index(c + j, n)];
  return kernels::dot(kernel, buf);
}

std::vector<double> gaussian_smooth(std::span<const double> x, double sigma)
{
  if (x.empty()) throw Error(Errc::empty_series, "cannot smooth an empty series");
  const auto kernel = gaussian_kernel(sigma);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = smooth_at(x, i, kernel);
  return out;
}

std::vector<FrameIndex> window_grid(FrameIndex t_end, FrameIndex first)
{
  std::vector<FrameIndex> grid;
  for (int k = kWindowSamples - 1; k >= 0; --k) {
    const auto offset = static_cast<FrameIndex>(std::floor(k * kWindowStride + 0.5));
    const FrameIndex g = std::max(t_end - offset, first);
    if (grid.empty() || grid.back() != g) grid.push_back(g);
  }
  return grid;
}

std::optional<Shape> pool_shape(std::span<const AngleFrame> frames)
{
  Shape acc{};
  int count = 0;
  for (const auto & f : frames) {
    if (!f.beta) continue;
    for (int i = 0; i < kNumShape; ++i) acc[i] += (*f.beta)[i];
    ++count;
  }
  if (count == 0) return std::nullopt;
  for (double & v : acc) v /= count;
  return acc;
}

KinematicWindow make_window(std::span<const AngleFrame> stream, FrameIndex t_end)
{
  KinematicWindow w;
  w.t_end = t_end;
  // Only frames with t <= t_end are visible.
  const auto visible_end = std::upper_bound(stream.begin(), stream.end(), t_end,
                                            [](FrameIndex t, const AngleFrame & f) { return t < f.t; });
  const std::span<const AngleFrame> visible(stream.begin(), visible_end);
  if (visible.empty()) {
    w.warmup = true;
    return w;
  }
  const FrameIndex first = visible.front().t;
  w.warmup = t_end - first < kWarmupHistory;
  FrameIndex last_taken = -1;
  for (FrameIndex g : window_grid(t_end, first)) {
    const auto it = std::upper_bound(visible.begin(), visible.end(), g,
                                     [](FrameIndex t, const AngleFrame & f) { return t < f.t; });
    const auto & f = *std::prev(it);
    if (f.t == last_taken) continue;
    last_taken = f.t;
    w.frames.push_back(f);
  }
  w.beta_bar = pool_shape(w.frames);
  return w;
}

void validate(const MorphometricProfile & p)
{
  const double values[] = {p.height_m, p.mass_kg, p.chest_m, p.waist_m, p.hip_m};
  for (double v : values) {
    if (!std::isfinite(v) || v <= 0.0) throw Error(Errc::out_of_band, "morphometric values must be positive");
  }
  if (p.height_m < 0.5 || p.height_m > 2.5) {
    throw Error(Errc::out_of_band, fmt::format("height {} m outside [0.5, 2.5]", p.height_m));
  }
}

const AffineMorphStub & AffineMorphStub::bundled()
{
  // Base body at beta = 0 and a hand-set linear response to the first few
  // shape coefficients; higher coefficients have small cross effects.
  static const AffineMorphStub stub{
    {1.70, 70.0, 0.96, 0.82, 0.97},
    {{
      {0.080, 0.010, 0.005, -0.004, 0.003, 0.002, -0.002, 0.001, 0.000, 0.000},
      {6.000, 9.000, 1.500, 2.000, -1.000, 0.800, 0.500, -0.300, 0.200, 0.100},
      {0.030, 0.060, 0.010, 0.008, -0.004, 0.003, 0.002, 0.000, 0.001, 0.000},
      {0.020, 0.080, 0.006, 0.015, -0.003, 0.002, 0.001, 0.001, 0.000, 0.000},
      {0.025, 0.055, 0.004, 0.010, 0.006, -0.002, 0.001, 0.000, 0.000, 0.001},
    }},
  };
  return stub;
}

MorphometricProfile morphometrics_from_beta(const Shape & beta_bar, const AffineMorphStub & stub)
{
  std::array<double, 5> v = {stub.base.height_m, stub.base.mass_kg, stub.base.chest_m, stub.base.waist_m,
                             stub.base.hip_m};
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < kNumShape; ++c) v[r] += stub.m[r][c] * beta_bar[c];
  }
  MorphometricProfile p{v[0], v[1], v[2], v[3], v[4]};
  validate(p);
  return p;
}

MorphometricProfile parse_morph_profile(const json & doc)
{
  const auto field = [&doc](const char * key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) {
      throw Error(Errc::schema, std::string("morphometric profile needs numeric '") + key + "'");
    }
    return it->get<double>();
  };
  if (!doc.is_object()) throw Error(Errc::schema, "morphometric profile must be a JSON object");
  MorphometricProfile p{field("height_m"), field("mass_kg"), field("chest_m"), field("waist_m"), field("hip_m")};
  validate(p);
  return p;
}

MorphometricProfile load_morph_profile(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open morphometric profile " + path.string());
  try {
    return parse_morph_profile(json::parse(in));
  } catch (const json::parse_error & e) {
    throw Error(Errc::schema, path.string() + ": " + e.what());
  }
}

std::size_t StreamBuffer::push(AngleFrame frame)
{
  validate(frame);
  if (!frames_.empty() && frame.t <= frames_.back().t) {
    throw Error(Errc::stream_format,
                fmt::format("frame index {} does not advance past {}", frame.t, frames_.back().t));
  }
  std::size_t appended = 0;
  if (!frames_.empty() && frame.t > frames_.back().t + 1) {
    const AngleFrame last = frames_.back();
    warnings_.push_back({frame.t, "missing frames; holding last pose"});
    for (FrameIndex t = last.t + 1; t < frame.t; ++t) {
      AngleFrame filled{t, last.q, std::nullopt, 0.0};
      frames_.push_back(filled);
      held_.push_back(true);
      ++appended;
    }
  }
  bool held = false;
  if (frame.confidence < min_confidence_) {
    if (last_valid_) {
      frame.q = *last_valid_;
      held = true;
      warnings_.push_back({frame.t, "low pose confidence; holding last valid pose"});
    } else {
      warnings_.push_back({frame.t, "low pose confidence"});
    }
  } else {
    last_valid_ = frame.q;
  }
  frames_.push_back(std::move(frame));
  held_.push_back(held);
  return appended + 1;
}

KinematicWindow StreamBuffer::window(FrameIndex t_end) const { return make_window(frames_, t_end); }

std::vector<std::string> StreamBuffer::window_warnings(FrameIndex t_end) const
{
  std::vector<std::string> out;
  if (frames_.empty()) return out;
  const FrameIndex start = window_grid(t_end, first_t()).front();
  for (const auto & w : warnings_) {
    if (w.t >= start && w.t <= t_end && std::find(out.begin(), out.end(), w.text) == out.end()) {
      out.push_back(w.text);
    }
  }
  return out;
}

}  // namespace kincoach
