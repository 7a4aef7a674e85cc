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

#include <algorithm>
#include <cmath>
#include <limits>

#include "kincoach/cycles.hpp"
#include "kincoach/error.hpp"
#include "kincoach/kernels.hpp"

namespace kincoach
{

namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Candidate maxima of sign * series with prominence bounds that tighten as
// samples arrive, and keep/drop decisions that are made only once provable.
struct StreamingCycleDetector::Tracker
{
  enum class Status { undecided, kept, dropped };

  struct Candidate
  {
    std::size_t index;
    double y;
    double left;   // min back to the previous strictly higher sample, -inf if none
    double right;  // running min since the candidate; final once closed
    bool closed = false;
    Status status = Status::undecided;
  };

  struct StackEntry
  {
    std::size_t index;
    double value;
    double gap_min;  // min of samples strictly between this entry and the one above it
  };

  Tracker(double sign, PeakParams params) : sign(sign), params(params) {}

  double sign;
  PeakParams params;
  std::vector<double> values;
  std::vector<double> left_base;
  std::vector<StackEntry> stack;
  std::vector<Candidate> cands;
  std::vector<std::size_t> open;  // candidates whose right side is unbounded so far
  std::size_t run_start = 0;
  bool rising = false;
  std::size_t first_undecided = 0;

  double lower(const Candidate & c) const
  {
    // Exact once closed; otherwise the right minimum can only fall further.
    return c.y - (c.left == -kInf ? c.right : std::max(c.left, c.right));
  }

  double upper(const Candidate & c) const
  {
    if (c.closed) return lower(c);
    return c.left == -kInf ? kInf : c.y - c.left;
  }

  void push(double raw)
  {
    const double v = sign * raw;
    const std::size_t i = values.size();
    values.push_back(v);

    for (std::size_t k = 0; k < open.size();) {
      auto & c = cands[open[k]];
      if (v > c.y) {
        c.closed = true;
        open[k] = open.back();
        open.pop_back();
      } else {
        c.right = std::min(c.right, v);
        ++k;
      }
    }

    double between = kInf;
    while (!stack.empty() && stack.back().value <= v) {
      between = std::min({between, stack.back().value, stack.back().gap_min});
      stack.pop_back();
    }
    if (stack.empty()) {
      left_base.push_back(-kInf);
    } else {
      between = std::min(between, stack.back().gap_min);
      stack.back().gap_min = between;
      left_base.push_back(std::min(between, v));
    }
    stack.push_back({i, v, kInf});

    if (i == 0) {
      run_start = 0;
      rising = false;
    } else if (v != values[i - 1]) {
      const double top = values[i - 1];
      if (rising && v < top) {
        Candidate c{(run_start + i - 1) / 2, top, left_base[run_start], v};
        open.push_back(cands.size());
        cands.push_back(c);
      }
      rising = values[i - 1] < v;
      run_start = i;
    }
    decide();
  }

  bool rejected(const Candidate & c) const { return upper(c) < params.p_min; }

  bool beats(const Candidate & c, const Candidate & q) const
  {
    const double lc = lower(c);
    const double uq = upper(q);
    return lc > uq || (lc >= uq && c.index < q.index);
  }

  template <typename F>
  void for_window(std::size_t ci, F && f) const
  {
    const auto d = static_cast<std::size_t>(params.d_min);
    const std::size_t idx = cands[ci].index;
    for (std::size_t k = ci; k-- > 0 && idx - cands[k].index < d;) f(k);
    for (std::size_t k = ci + 1; k < cands.size() && cands[k].index - idx < d; ++k) f(k);
  }

  void decide()
  {
    const auto d = static_cast<std::size_t>(params.d_min);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t ci = first_undecided; ci < cands.size(); ++ci) {
        auto & c = cands[ci];
        if (c.status != Status::undecided) continue;
        if (rejected(c)) {
          c.status = Status::dropped;
          changed = true;
          continue;
        }
        bool blocked = false;
        for_window(ci, [&](std::size_t k) { blocked = blocked || cands[k].status == Status::kept; });
        if (blocked) {
          c.status = Status::dropped;
          changed = true;
          continue;
        }
        if (lower(c) < params.p_min || c.index + d - 1 >= run_start) continue;
        bool wins = true;
        for_window(ci, [&](std::size_t k) {
          const auto & q = cands[k];
          wins = wins && (q.status == Status::dropped || rejected(q) || beats(c, q));
        });
        if (wins) {
          c.status = Status::kept;
          changed = true;
        }
      }
    }
    while (first_undecided < cands.size() && cands[first_undecided].status != Status::undecided) {
      ++first_undecided;
    }
  }
};

StreamingCycleDetector::StreamingCycleDetector(CycleKind kind, const PeakParams & params)
: kind_(kind),
  params_(params),
  peaks_(std::make_unique<Tracker>(1.0, params)),
  valleys_(std::make_unique<Tracker>(-1.0, params))
{
}

StreamingCycleDetector::~StreamingCycleDetector() = default;
StreamingCycleDetector::StreamingCycleDetector(StreamingCycleDetector &&) noexcept = default;
StreamingCycleDetector & StreamingCycleDetector::operator=(StreamingCycleDetector &&) noexcept = default;

std::vector<CycleRecord> StreamingCycleDetector::push(double value)
{
  series_.push_back(value);
  peaks_->push(value);
  valleys_->push(value);
  return advance();
}

std::vector<CycleRecord> StreamingCycleDetector::advance()
{
  using Status = Tracker::Status;
  std::vector<CycleRecord> out;
  const auto & vs = valleys_->cands;
  const auto & ps = peaks_->cands;
  while (valley_cursor_ < vs.size()) {
    const auto & v = vs[valley_cursor_];
    if (v.status == Status::undecided) break;
    if (v.status == Status::dropped) {
      ++valley_cursor_;
      continue;
    }
    if (last_valley_) {
      const std::size_t a = *last_valley_;
      const std::size_t b = v.index;
      bool ready = true;
      int inside = 0;
      for (const auto & p : ps) {
        if (p.index <= a) continue;
        if (p.index >= b) break;
        if (p.status == Status::undecided) ready = false;
        if (p.status == Status::kept) ++inside;
      }
      if (!ready) break;
      const auto len = static_cast<int>(b - a + 1);
      if (inside == 1 && len >= kMinCycleFrames && len <= kMaxCycleFrames) {
        CycleRecord c;
        c.i_s = static_cast<FrameIndex>(a);
        c.i_e = static_cast<FrameIndex>(b);
        c.kind = kind_;
        c.rep_index = static_cast<int>(emitted_) + 1;
        if (kind_ == CycleKind::alternating) c.phases = segment_phases(series_, c);
        last_emitted_start_ = c.i_s;
        ++emitted_;
        out.push_back(std::move(c));
      }
    }
    last_valley_ = v.index;
    ++valley_cursor_;
  }
  return out;
}

std::vector<CycleRecord> StreamingCycleDetector::finish()
{
  std::vector<CycleRecord> out;
  if (series_.size() < 3) return out;
  const auto ps = find_peaks(series_, params_);
  auto all = pair_cycles(ps.valleys, ps.peaks, kind_);
  if (all.size() < emitted_ || (emitted_ > 0 && all[emitted_ - 1].i_s != *last_emitted_start_)) {
    throw Error(Errc::invariant, "streaming cycles are not a prefix of the batch result");
  }
  for (std::size_t k = emitted_; k < all.size(); ++k) {
    if (kind_ == CycleKind::alternating) all[k].phases = segment_phases(series_, all[k]);
    out.push_back(std::move(all[k]));
  }
  emitted_ = all.size();
  if (!out.empty()) last_emitted_start_ = out.back().i_s;
  return out;
}

std::vector<CycleRecord> StreamingHoldDetector::push(double value)
{
  series_.push_back(value);
  std::vector<CycleRecord> out;
  if (series_.size() < static_cast<std::size_t>(kHoldWindow)) return out;
  const std::span<const double> win(series_.data() + series_.size() - kHoldWindow, kHoldWindow);
  const double mean = kernels::sum(win) / kHoldWindow;
  const double sd = std::sqrt(kernels::sum_sq_dev(win, mean) / kHoldWindow);
  sorted_stds_.insert(std::upper_bound(sorted_stds_.begin(), sorted_stds_.end(), sd), sd);

  const double pos = kHoldPercentile / 100.0 * static_cast<double>(sorted_stds_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted_stds_.size() - 1);
  const double eps = sorted_stds_[lo] + (sorted_stds_[hi] - sorted_stds_[lo]) * (pos - static_cast<double>(lo));

  const auto k = static_cast<FrameIndex>(series_.size() - 1);
  if (sd <= eps) {
    if (!run_start_) run_start_ = k;
  } else if (run_start_) {
    if (auto c = close_run(k - 1)) out.push_back(*c);
  }
  return out;
}

std::vector<CycleRecord> StreamingHoldDetector::finish()
{
  std::vector<CycleRecord> out;
  if (run_start_) {
    if (auto c = close_run(static_cast<FrameIndex>(series_.size()) - 1)) out.push_back(*c);
  }
  return out;
}

std::optional<CycleRecord> StreamingHoldDetector::close_run(FrameIndex last)
{
  const FrameIndex first = *run_start_;
  run_start_.reset();
  if (last - first + 1 < kHoldMinRun) return std::nullopt;
  CycleRecord c;
  c.i_s = first;
  c.i_e = last;
  c.kind = CycleKind::static_hold;
  c.rep_index = ++rep_;
  return c;
}

}  // namespace kincoach
