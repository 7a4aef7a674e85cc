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

#include "kincoach/session.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "kincoach/error.hpp"

namespace kincoach
{

using nlohmann::json;

std::string_view to_string(EventKind kind) { return kind == EventKind::corrective ? "corrective" : "status"; }

void SessionOutput::append(SessionOutput && other)
{
  for (auto & c : other.cycles) cycles.push_back(std::move(c));
  for (auto & e : other.events) events.push_back(std::move(e));
}

JointSelection rule_selection(const ExerciseConfig & config)
{
  if (!config.salient_joints.empty()) return expand_joints(config.salient_joints);
  std::vector<int> all(kNumJoints);
  std::iota(all.begin(), all.end(), 0);
  return expand_joints(all);
}

Session::Session(ExerciseConfig config, std::optional<ReferenceTrajectory> ref, JointSelection selection,
                 SessionOptions options)
: config_(std::move(config)),
  ref_(std::move(ref)),
  selection_(std::move(selection)),
  options_(std::move(options)),
  buffer_(config_.min_confidence),
  kernel_(gaussian_kernel(kSmoothSigma)),
  raw_(kNumDofs),
  smoothed_(0, kNumDofs)
{
  if (options_.hold_block < kHoldMinRun) throw Error(Errc::schema, "hold block shorter than the minimum hold");
  if (options_.morph) validate(*options_.morph);
  if (ref_) validate(*ref_);
  if (config_.cycle_mode == CycleMode::static_hold) {
    holds_ = std::make_unique<StreamingHoldDetector>();
  } else {
    cycles_ = std::make_unique<StreamingCycleDetector>(
      config_.cycle_mode == CycleMode::alternating ? CycleKind::alternating : CycleKind::repetitive);
  }
}

Session::~Session() = default;
Session::Session(Session &&) noexcept = default;
Session & Session::operator=(Session &&) noexcept = default;

FrameIndex Session::current_t() const { return buffer_.frames().back().t; }

SessionOutput Session::feed(const AngleFrame & frame)
{
  if (finished_) throw Error(Errc::invariant, "session already finished");
  SessionOutput out;
  const std::size_t before = buffer_.size();
  buffer_.push(frame);
  for (std::size_t k = before; k < buffer_.size(); ++k) {
    const auto & q = buffer_.frames()[k].q;
    for (int d = 0; d < kNumDofs; ++d) raw_[d].push_back(q[d]);
  }
  const std::size_t r = kernel_.size() / 2;
  while (smoothed_.rows() + r < buffer_.size()) finalize_row(smoothed_.rows(), out);

  const FrameIndex t = current_t();
  if (options_.status_every > 0 && (last_status_ < 0 || t - last_status_ >= options_.status_every)) {
    last_status_ = t;
    FeedbackEvent e;
    e.t = t;
    e.kind = EventKind::status;
    e.bundle = bundle_at(t);
    e.text = render_pose(e.bundle.pose_state);
    out.events.push_back(std::move(e));
  }
  return out;
}

SessionOutput Session::finish()
{
  if (finished_) throw Error(Errc::invariant, "session already finished");
  SessionOutput out;
  while (smoothed_.rows() < buffer_.size()) finalize_row(smoothed_.rows(), out);
  if (cycles_) {
    for (const auto & c : cycles_->finish()) handle_cycle(c, out);
  }
  if (holds_) {
    for (const auto & c : holds_->finish()) handle_cycle(c, out);
  }
  finished_ = true;
  return out;
}

void Session::finalize_row(std::size_t i, SessionOutput & out)
{
  std::array<double, kNumDofs> row{};
  for (int d = 0; d < kNumDofs; ++d) row[d] = smooth_at(raw_[d], i, kernel_);
  smoothed_.append_row(row);
  const double v = row[config_.representative_dof()];
  if (cycles_) {
    for (const auto & c : cycles_->push(v)) handle_cycle(c, out);
  } else {
    for (const auto & c : holds_->push(v)) handle_cycle(c, out);
    if ((i + 1) % static_cast<std::size_t>(options_.hold_block) == 0) handle_block(i, out);
  }
}

namespace
{

CycleRecord to_frames(CycleRecord c, FrameIndex t0)
{
  c.i_s += t0;
  c.i_e += t0;
  for (auto & p : c.phases) {
    p.start += t0;
    p.end += t0;
  }
  return c;
}

bool any_violated(const std::vector<ConstraintResult> & results)
{
  for (const auto & r : results) {
    if (r.violated) return true;
  }
  return false;
}

}  // namespace

void Session::handle_cycle(const CycleRecord & c, SessionOutput & out)
{
  CycleReport report;
  report.cycle = to_frames(c, buffer_.first_t());
  report.emitted_at = current_t();
  if (c.kind != CycleKind::static_hold) {
    if (ref_) report.quality = quality_score(align_cycle(smoothed_, c, selection_.dofs, ref_->length()), ref_->angles);
    report.results = evaluate_cycle(config_, selection_.joints, c, smoothed_, ref_ ? &*ref_ : nullptr);
    cache_ = report.results;
    if (any_violated(cache_)) {
      FeedbackEvent e;
      e.t = report.emitted_at;
      e.kind = EventKind::corrective;
      e.bundle = bundle_at(e.t);
      e.text = render_violations(cache_);
      out.events.push_back(std::move(e));
    }
  }
  out.cycles.push_back(std::move(report));
}

void Session::handle_block(std::size_t last, SessionOutput & out)
{
  CycleRecord c;
  c.i_e = static_cast<FrameIndex>(last);
  c.i_s = c.i_e - options_.hold_block + 1;
  c.kind = CycleKind::static_hold;
  c.rep_index = static_cast<int>((last + 1) / options_.hold_block);

  CycleReport report;
  report.cycle = to_frames(c, buffer_.first_t());
  report.emitted_at = current_t();
  report.hold_check = true;
  report.results = evaluate_cycle(config_, selection_.joints, c, smoothed_, nullptr);
  cache_ = report.results;
  if (any_violated(cache_)) {
    FeedbackEvent e;
    e.t = report.emitted_at;
    e.kind = EventKind::corrective;
    e.bundle = bundle_at(e.t);
    e.text = render_violations(cache_);
    out.events.push_back(std::move(e));
  }
  out.cycles.push_back(std::move(report));
}

ContextBundle Session::bundle_at(FrameIndex t) const
{
  const auto window = buffer_.window(t);
  auto warnings = buffer_.window_warnings(t);
  std::optional<MorphometricProfile> morph = options_.morph;
  if (!morph && window.beta_bar) {
    try {
      morph = morphometrics_from_beta(*window.beta_bar);
    } catch (const Error &) {
      warnings.push_back("shape estimate outside the plausible body range");
    }
  }
  auto pose = pose_state(buffer_.frames().back().q, selection_.joints, config_.primary_dof);
  return make_bundle(t, morph, std::move(pose), cache_, std::move(warnings), window.warmup);
}

json to_json(const CycleReport & r)
{
  json phases = json::array();
  for (const auto & p : r.cycle.phases) {
    phases.push_back({{"start", p.start}, {"end", p.end}, {"side", std::string(to_string(p.side))}});
  }
  json violations = json::array();
  for (const auto & v : r.results) {
    if (v.violated) violations.push_back(to_json(v));
  }
  json j = {{"type", r.hold_check ? "hold_check" : "cycle"},
            {"rep", r.cycle.rep_index},
            {"i_s", r.cycle.i_s},
            {"i_e", r.cycle.i_e},
            {"kind", std::string(to_string(r.cycle.kind))},
            {"emitted_at", r.emitted_at},
            {"phases", phases},
            {"violations", violations}};
  if (r.quality) {
    j["quality"] = r.quality->s_cycle;
    j["components"] = {{"cos", r.quality->sim_cos},
                       {"pearson", r.quality->sim_pearson},
                       {"vel", r.quality->sim_vel},
                       {"amp", r.quality->sim_amp}};
  } else {
    j["quality"] = nullptr;
  }
  return j;
}

json to_json(const FeedbackEvent & e)
{
  return {{"type", "feedback"},
          {"t", e.t},
          {"time_s", frames_to_seconds(e.t)},
          {"kind", std::string(to_string(e.kind))},
          {"text", e.text},
          {"bundle", to_json(e.bundle)}};
}

json to_json(const StreamSummary & s)
{
  return {{"type", "summary"},
          {"frames", s.frames},
          {"cycles", s.cycles},
          {"corrective", s.corrective},
          {"status", s.status}};
}

namespace
{

void write(const SessionOutput & o, StreamSummary & summary, std::ostream & out, bool flush_each)
{
  for (const auto & c : o.cycles) {
    out << to_json(c).dump() << '\n';
    if (!c.hold_check) ++summary.cycles;
  }
  for (const auto & e : o.events) {
    out << to_json(e).dump() << '\n';
    ++(e.kind == EventKind::corrective ? summary.corrective : summary.status);
  }
  if (flush_each) out.flush();
}

}  // namespace

StreamSummary run_stream(std::istream & in, Session & session, std::ostream & out, bool flush_each)
{
  StreamSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const AngleFrame frame = parse_frame(line, line_no);
    SessionOutput o;
    try {
      o = session.feed(frame);
    } catch (const Error & e) {
      if (e.code() != Errc::stream_format) throw;
      throw Error(Errc::stream_format, "line " + std::to_string(line_no) + ": " + e.what());
    }
    write(o, summary, out, flush_each);
  }
  write(session.finish(), summary, out, flush_each);
  summary.frames = session.frame_count();
  return summary;
}

}  // namespace kincoach
