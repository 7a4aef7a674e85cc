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

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kincoach/alignment.hpp"
#include "kincoach/constraints.hpp"
#include "kincoach/context.hpp"
#include "kincoach/cycles.hpp"
#include "kincoach/exercise.hpp"
#include "kincoach/preprocess.hpp"
#include "kincoach/reference.hpp"
#include "kincoach/salience.hpp"

namespace kincoach
{

struct SessionOptions
{
  // Status events every N frames; 0 disables them.
  int status_every = 0;
  // Static-hold exercises check their static joints over consecutive blocks of this many frames.
  int hold_block = 30;
  // Direct measurements; otherwise derived from pooled shape coefficients.
  std::optional<MorphometricProfile> morph;
};

/// A completed cycle as reported by the session; indices are frame indices.
struct CycleReport
{
  CycleRecord cycle;
  std::optional<QualityScore> quality;
  std::vector<ConstraintResult> results;
  FrameIndex emitted_at = 0;
  bool hold_check = false;  // block check inside a static hold, not a detected hold
};

enum class EventKind { corrective, status };
std::string_view to_string(EventKind kind);

struct FeedbackEvent
{
  FrameIndex t = 0;
  EventKind kind = EventKind::corrective;
  ContextBundle bundle;
  std::string text;
};

struct SessionOutput
{
  std::vector<CycleReport> cycles;
  std::vector<FeedbackEvent> events;

  void append(SessionOutput && other);
};

/// One streaming analysis pipeline. Frames go in one at a time; completed
/// cycles and feedback events come out as soon as they are final.
class Session
{
public:
  Session(ExerciseConfig config, std::optional<ReferenceTrajectory> ref, JointSelection selection,
          SessionOptions options = {});
  ~Session();
  Session(Session &&) noexcept;
  Session & operator=(Session &&) noexcept;

  SessionOutput feed(const AngleFrame & frame);
  // Smooths the trailing frames and flushes cycles that only batch detection can confirm.
  SessionOutput finish();

  const ExerciseConfig & config() const { return config_; }
  const JointSelection & selection() const { return selection_; }
  const std::vector<ConstraintResult> & active_violations() const { return cache_; }
  std::size_t frame_count() const { return buffer_.size(); }

private:
  void finalize_row(std::size_t i, SessionOutput & out);
  void handle_cycle(const CycleRecord & c, SessionOutput & out);
  void handle_block(std::size_t last, SessionOutput & out);
  ContextBundle bundle_at(FrameIndex t) const;
  FrameIndex current_t() const;

  ExerciseConfig config_;
  std::optional<ReferenceTrajectory> ref_;
  JointSelection selection_;
  SessionOptions options_;
  StreamBuffer buffer_;
  std::vector<double> kernel_;
  std::vector<std::vector<double>> raw_;  // per DoF
  Matrix smoothed_;
  std::unique_ptr<StreamingCycleDetector> cycles_;
  std::unique_ptr<StreamingHoldDetector> holds_;
  std::vector<ConstraintResult> cache_;
  FrameIndex last_status_ = -1;
  bool finished_ = false;
};

// Salience fallback: the configured expert table.
JointSelection rule_selection(const ExerciseConfig & config);

nlohmann::json to_json(const CycleReport & report);
nlohmann::json to_json(const FeedbackEvent & event);

struct StreamSummary
{
  std::size_t frames = 0;
  std::size_t cycles = 0;
  std::size_t corrective = 0;
  std::size_t status = 0;
};

nlohmann::json to_json(const StreamSummary & summary);

// Feeds JSON-Lines frames from `in`, writing one record per cycle and event,
// then finishes the session. Throws StreamFormat with the offending line number.
StreamSummary run_stream(std::istream & in, Session & session, std::ostream & out, bool flush_each = false);

}  // namespace kincoach
