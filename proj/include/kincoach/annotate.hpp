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

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kincoach/common.hpp"
#include "kincoach/session.hpp"

namespace kincoach
{

struct FeedbackEntry
{
  FrameIndex t = 0;
  std::string kind;  // corrective, instructional, motivational, counting
  std::string text;
  bool rewritten = false;
  bool no_active_cycle = false;
};

FeedbackEntry parse_feedback_entry(const nlohmann::json & doc);
nlohmann::json to_json(const FeedbackEntry & entry);

// Text for a set of constraint results: the form-issue line followed by one
// "Increase/Reduce <dof> by N°." hint per violation.
std::string corrective_text(std::span<const ConstraintResult> results);

// Rewrites corrective and instructional entries from the latest cycle the
// session had completed at or before each entry's frame. Timestamps are kept.
std::vector<FeedbackEntry> annotate_feedback(std::span<const CycleReport> cycles,
                                             std::span<const FeedbackEntry> entries);

}  // namespace kincoach
