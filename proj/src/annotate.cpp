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

#include "kincoach/annotate.hpp"

#include <cmath>

#include <fmt/format.h>

#include "kincoach/context.hpp"
#include "kincoach/error.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{

using nlohmann::json;

FeedbackEntry parse_feedback_entry(const json & doc)
{
  if (!doc.is_object() || !doc.contains("t") || !doc.at("t").is_number_integer()) {
    throw Error(Errc::stream_format, "feedback entry needs an integer frame 't'");
  }
  FeedbackEntry e;
  e.t = doc.at("t").get<FrameIndex>();
  try {
    e.kind = doc.at("kind").get<std::string>();
    e.text = doc.at("text").get<std::string>();
  } catch (const json::exception &) {
    throw Error(Errc::stream_format, "feedback entry needs string 'kind' and 'text'");
  }
  return e;
}

json to_json(const FeedbackEntry & e)
{
  json j = {{"t", e.t}, {"kind", e.kind}, {"text", e.text}};
  if (e.rewritten) j["rewritten"] = true;
  if (e.no_active_cycle) j["no_active_cycle"] = true;
  return j;
}

std::string corrective_text(std::span<const ConstraintResult> results)
{
  const auto & model = SkeletonModel::get();
  std::string s = render_violations(results);
  for (const auto & r : results) {
    if (!r.violated) continue;
    if (r.statistic == Statistic::variance) {
      s += fmt::format(" Keep the {} steady.", model.dof_label(r.dof));
    } else {
      s += fmt::format(" {} {} by {}°.", r.correction > 0.0 ? "Increase" : "Reduce", model.dof_label(r.dof),
                       static_cast<long long>(std::ceil(std::abs(r.correction))));
    }
  }
  return s;
}

std::vector<FeedbackEntry> annotate_feedback(std::span<const CycleReport> cycles, std::span<const FeedbackEntry> entries)
{
  std::vector<FeedbackEntry> out;
  out.reserve(entries.size());
  for (const auto & in : entries) {
    FeedbackEntry e = in;
    if (e.kind != "corrective" && e.kind != "instructional") {
      out.push_back(std::move(e));
      continue;
    }
    const CycleReport * active = nullptr;
    for (const auto & c : cycles) {
      // Detected holds carry no checks; the session's violation cache ignores them too.
      const bool checked = c.hold_check || c.cycle.kind != CycleKind::static_hold;
      if (checked && c.emitted_at <= e.t) active = &c;
    }
    if (!active) {
      e.no_active_cycle = true;
    } else if (std::any_of(active->results.begin(), active->results.end(), [](const auto & r) { return r.violated; })) {
      e.text = corrective_text(active->results);
      e.rewritten = true;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace kincoach
