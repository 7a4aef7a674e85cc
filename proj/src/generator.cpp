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

#include "kincoach/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "kincoach/constraints.hpp"
#include "kincoach/error.hpp"
#include "kincoach/random.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{

using nlohmann::json;

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLeadFraction = 0.4;
constexpr double kJitterClip = 2.0;

[[noreturn]] void bad_spec(const std::string & what) { throw Error(Errc::bad_spec, what); }

struct DofRule
{
  double base = 0.0;
  double amp = 0.0;
  double phase = 0.0;
};

std::array<DofRule, kNumDofs> dof_rules(const ExerciseConfig & config)
{
  std::array<DofRule, kNumDofs> rules{};
  if (!config.motion) return rules;
  for (auto & r : rules) r.amp = config.motion->default_amp_deg;
  for (const auto & m : config.motion->dofs) rules[m.dof] = {m.base_deg, m.amp_deg, m.phase};
  return rules;
}

double raised(double base, double amp, double phase, double tau)
{
  return base + amp * (1.0 - std::cos(kTwoPi * (tau - phase))) / 2.0;
}

// Response of the smoothing kernel to a sinusoid of the given period in frames.
double gain(std::span<const double> kernel, double period)
{
  const int r = static_cast<int>(kernel.size() / 2);
  double g = 0.0;
  for (int j = -r; j <= r; ++j) g += kernel[j + r] * std::cos(kTwoPi * j / period);
  return g;
}

double clipped_normal(Rng & rng)
{
  return std::clamp(rng.normal(), -kJitterClip, kJitterClip);
}

struct Rep
{
  FrameIndex start = 0;
  int period = 0;
  double amp_scale = 1.0;
};

// Smoothed value of a compensated raised cosine at phase tau.
double smoothed_value(const DofRule & rule, double amp, double g, double tau)
{
  return rule.base + amp * (1.0 - g * std::cos(kTwoPi * (tau - rule.phase))) / 2.0;
}

}  // namespace

ErrorPlan parse_error_plan(const json & doc)
{
  if (!doc.is_object() || !doc.contains("errors") || !doc.at("errors").is_array()) {
    throw Error(Errc::schema, "error plan needs an 'errors' array");
  }
  const auto & model = SkeletonModel::get();
  ErrorPlan plan;
  for (const auto & item : doc.at("errors")) {
    if (!item.is_object() || !item.contains("joint") || !item.at("joint").is_string()) {
      throw Error(Errc::schema, "error entries need a 'joint' id");
    }
    PlannedError e;
    e.joint = model.joint_index(item.at("joint").get<std::string>());
    try {
      if (item.contains("reps")) e.reps = item.at("reps").get<std::vector<int>>();
      e.start_s = item.value("start_s", 0.0);
      e.duration_s = item.value("duration_s", 0.0);
      e.margin_deg = item.value("margin_deg", 4.0);
    } catch (const json::exception & ex) {
      throw Error(Errc::schema, std::string("error entry: ") + ex.what());
    }
    plan.errors.push_back(std::move(e));
  }
  return plan;
}

ErrorPlan load_error_plan(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open error plan " + path.string());
  try {
    return parse_error_plan(json::parse(in));
  } catch (const json::parse_error & e) {
    throw Error(Errc::schema, path.string() + ": " + e.what());
  }
}

ReferenceTrajectory build_reference(const ExerciseConfig & config, int n_ref)
{
  if (n_ref < kMinRefLength || n_ref > kMaxRefLength) {
    throw Error(Errc::bad_nref, fmt::format("reference length {} outside [{}, {}]", n_ref, kMinRefLength,
                                            kMaxRefLength));
  }
  const auto rules = dof_rules(config);
  const bool hold = config.cycle_mode == CycleMode::static_hold;
  ReferenceTrajectory ref;
  ref.exercise_id = config.exercise_id;
  ref.angles = Matrix(static_cast<std::size_t>(n_ref), kNumDofs);
  for (int k = 0; k < n_ref; ++k) {
    const double tau = static_cast<double>(k) / (n_ref - 1);
    for (int d = 0; d < kNumDofs; ++d) {
      const auto & r = rules[d];
      ref.angles(k, d) = deg2rad(hold ? r.base : raised(r.base, r.amp, r.phase, tau));
    }
  }
  return ref;
}

namespace
{

Bound bound_for(const ExerciseConfig & config, int joint, Statistic * statistic)
{
  if (const auto * spec = config.constraint_for(joint)) {
    *statistic = spec->statistic;
    return spec->bound;
  }
  if (config.is_static(joint)) {
    *statistic = Statistic::variance;
    return kDefaultStaticBound;
  }
  bad_spec(fmt::format("joint '{}' has no constraint to violate", SkeletonModel::get().joint(joint).id));
}

void add_noise_and_emit(const Matrix & deg, const GeneratorOptions & options, Rng & rng, SyntheticSession & out)
{
  std::optional<Shape> beta;
  if (options.with_beta) {
    Shape b{};
    for (auto & x : b) x = 0.3 * rng.normal();
    beta = b;
  }
  out.frames.reserve(deg.rows());
  for (std::size_t t = 0; t < deg.rows(); ++t) {
    AngleFrame f;
    f.t = static_cast<FrameIndex>(t);
    for (int d = 0; d < kNumDofs; ++d) f.q[d] = deg2rad(deg(t, d) + options.noise_deg * rng.normal());
    f.beta = beta;
    out.frames.push_back(f);
  }
}

SyntheticSession generate_hold(const ExerciseConfig & config, const GeneratorOptions & options,
                               const ErrorPlan & plan, Rng & rng)
{
  const auto kernel = gaussian_kernel(kSmoothSigma);
  const auto rules = dof_rules(config);
  const auto n = static_cast<std::size_t>(std::llround(options.hold_s * kFps));
  if (n < static_cast<std::size_t>(kHoldMinRun)) bad_spec("hold shorter than the minimum hold length");

  Matrix deg(n, kNumDofs);
  for (std::size_t t = 0; t < n; ++t) {
    for (int d = 0; d < kNumDofs; ++d) deg(t, d) = rules[d].base;
  }

  SyntheticSession out;
  for (const auto & e : plan.errors) {
    if (!e.reps.empty()) bad_spec("hold errors are given as a time span, not reps");
    Statistic stat{};
    const Bound bound = bound_for(config, e.joint, &stat);
    if (stat != Statistic::variance) bad_spec("hold errors must target variance bounds");
    const auto f0 = static_cast<FrameIndex>(std::llround(e.start_s * kFps));
    const auto len = static_cast<FrameIndex>(std::llround(e.duration_s * kFps));
    if (len < kHoldMinRun || f0 < 0 || f0 + len > static_cast<FrameIndex>(n)) {
      bad_spec("hold error span must lie inside the session and last at least 10 frames");
    }
    const int waves = std::max(1, static_cast<int>(std::lround(2.0 * e.duration_s)));
    const double target = std::sqrt(bound.upper) + e.margin_deg;
    const double amp = std::sqrt(2.0) * target / gain(kernel, static_cast<double>(len) / waves);
    const int dof = config.primary_dof[e.joint];
    for (FrameIndex t = f0; t < f0 + len; ++t) {
      deg(t, dof) += amp * std::sin(kTwoPi * waves * static_cast<double>(t - f0) / len);
    }
    out.errors.push_back({e.joint, 0, Statistic::variance, target, f0, f0 + len - 1});
    out.feedback_truth.push_back(f0 + len - 1);
  }

  add_noise_and_emit(deg, options, rng, out);
  CycleRecord whole;
  whole.i_s = 0;
  whole.i_e = static_cast<FrameIndex>(n) - 1;
  whole.kind = CycleKind::static_hold;
  out.truth_cycles.push_back(whole);
  std::sort(out.feedback_truth.begin(), out.feedback_truth.end());
  return out;
}

}  // namespace

SyntheticSession generate_session(const ExerciseConfig & config, const GeneratorOptions & options,
                                  const ErrorPlan & plan)
{
  for (const auto & e : plan.errors) {
    if (e.margin_deg < kMinErrorMargin) {
      bad_spec(fmt::format("error margin {} below the {} degree minimum", e.margin_deg, kMinErrorMargin));
    }
  }
  if (!(options.noise_deg >= 0.0) || !(options.period_s > 0.0)) bad_spec("noise and period must be non-negative");
  Rng rng(options.seed);
  if (config.cycle_mode == CycleMode::static_hold) return generate_hold(config, options, plan, rng);
  if (options.reps < 1) bad_spec("at least one repetition is required");
  if (!config.motion) bad_spec("exercise has no motion profile");

  const auto kernel = gaussian_kernel(kSmoothSigma);
  const auto rules = dof_rules(config);
  const int rep_dof = config.representative_dof();
  const int t0 = static_cast<int>(std::lround(options.period_s * kFps));

  std::vector<Rep> reps(static_cast<std::size_t>(options.reps));
  const int lead_in = static_cast<int>(std::lround(kLeadFraction * t0));
  FrameIndex cursor = lead_in;
  for (auto & r : reps) {
    r.start = cursor;
    r.period = static_cast<int>(std::lround(t0 * (1.0 + options.period_jitter * clipped_normal(rng))));
    r.amp_scale = 1.0 + options.amp_jitter * clipped_normal(rng);
    if (r.period + 1 < kMinCycleFrames || r.period + 1 > kMaxCycleFrames) {
      bad_spec(fmt::format("repetition of {} frames outside [{}, {}]", r.period + 1, kMinCycleFrames,
                           kMaxCycleFrames));
    }
    cursor += r.period;
  }
  const FrameIndex last_valley = cursor;
  const int lead_out = lead_in;
  const auto n = static_cast<std::size_t>(last_valley + lead_out + 1);

  // Per rep and DoF amplitudes; corrupted reps overwrite theirs below.
  std::vector<std::array<double, kNumDofs>> amps(reps.size());
  const double g0 = gain(kernel, t0);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const double g = gain(kernel, reps[k].period);
    for (int d = 0; d < kNumDofs; ++d) amps[k][d] = rules[d].amp * reps[k].amp_scale * 2.0 / (1.0 + g);
  }

  const double tau_key = config.key_frame_rule == KeyFrameRule::cycle_max ? 0.5 + rules[rep_dof].phase
                                                                           : rules[rep_dof].phase;
  const auto ref = build_reference(config);
  std::vector<std::vector<int>> corrupted(reps.size());  // joints per rep

  SyntheticSession out;
  Matrix deg(n, kNumDofs);
  std::vector<std::tuple<std::size_t, int, double>> wobbles;  // rep, dof, amplitude

  for (const auto & e : plan.errors) {
    if (e.reps.empty()) bad_spec("repetition errors need at least one rep");
    Statistic stat{};
    const Bound bound = bound_for(config, e.joint, &stat);
    const int dof = config.primary_dof[e.joint];
    for (int rep : e.reps) {
      if (rep < 1 || rep > options.reps) bad_spec(fmt::format("rep {} outside 1..{}", rep, options.reps));
      const auto k = static_cast<std::size_t>(rep - 1);
      if (std::find(corrupted[k].begin(), corrupted[k].end(), e.joint) != corrupted[k].end()) {
        bad_spec("joint corrupted twice in the same rep");
      }
      corrupted[k].push_back(e.joint);
      const double g = gain(kernel, reps[k].period);
      double target = 0.0;
      if (stat == Statistic::variance) {
        target = std::sqrt(bound.upper) + e.margin_deg;
        const double base_var = amps[k][dof] * amps[k][dof] / 8.0;
        const double g3 = gain(kernel, reps[k].period / 3.0);
        wobbles.emplace_back(k, dof, std::sqrt(2.0 * std::max(0.0, target * target - base_var)) / g3);
      } else {
        if (config.key_frame_rule != KeyFrameRule::cycle_max) bad_spec("key-frame errors need a cycle_max exercise");
        if (stat == Statistic::key_frame_angle) {
          target = bound.lower > 0.0 ? bound.lower - e.margin_deg : bound.upper + e.margin_deg;
        } else {
          const FrameIndex ref_key =
            key_frame(ref.angles.column(rep_dof), 0, ref.length() - 1, config.key_frame_rule);
          target = rad2deg(ref.angles(ref_key, dof)) - (bound.upper + e.margin_deg);
        }
        const auto & r = rules[dof];
        const double shape = 1.0 - g * std::cos(kTwoPi * (tau_key - r.phase));
        if (shape <= 1e-6) bad_spec("error joint does not move at the key frame");
        amps[k][dof] = 2.0 * (target - r.base) / shape;
        if (dof == rep_dof && amps[k][dof] <= 0.0) bad_spec("error would remove the representative motion");
      }
      const FrameIndex s = reps[k].start;
      out.errors.push_back({e.joint, rep, stat, target, s, s + reps[k].period});
      out.feedback_truth.push_back(s + reps[k].period);
    }
  }

  // Clean reps have to satisfy every key-frame bound before noise.
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const double g = gain(kernel, reps[k].period);
    for (const auto & spec : config.constraints) {
      if (spec.statistic == Statistic::variance) continue;
      if (std::find(corrupted[k].begin(), corrupted[k].end(), spec.joint) != corrupted[k].end()) continue;
      const int dof = config.primary_dof[spec.joint];
      double v = smoothed_value(rules[dof], amps[k][dof], g, tau_key);
      if (spec.statistic == Statistic::key_frame_deviation) {
        v = std::abs(v - raised(rules[dof].base, rules[dof].amp, rules[dof].phase, tau_key));
      }
      if (violates(v, spec.bound)) {
        bad_spec(fmt::format("motion profile breaks the bound on '{}' in clean rep {}",
                             SkeletonModel::get().joint(spec.joint).id, k + 1));
      }
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    const auto ft = static_cast<FrameIndex>(t);
    for (int d = 0; d < kNumDofs; ++d) {
      const auto & r = rules[d];
      double v = 0.0;
      if (ft < lead_in) {
        const double tau = 1.0 - kLeadFraction + kLeadFraction * static_cast<double>(ft) / lead_in;
        v = raised(r.base, r.amp * 2.0 / (1.0 + g0), r.phase, tau);
      } else if (ft >= last_valley) {
        v = raised(r.base, r.amp * 2.0 / (1.0 + g0), r.phase, static_cast<double>(ft - last_valley) / t0);
      } else {
        const auto it = std::upper_bound(reps.begin(), reps.end(), ft,
                                         [](FrameIndex x, const Rep & rep) { return x < rep.start; });
        const auto k = static_cast<std::size_t>(std::distance(reps.begin(), it) - 1);
        const double tau = static_cast<double>(ft - reps[k].start) / reps[k].period;
        v = raised(r.base, amps[k][d], r.phase, tau);
      }
      deg(t, d) = v;
    }
  }
  for (const auto & [k, dof, amp] : wobbles) {
    const int p = reps[k].period;
    for (int i = 0; i < p; ++i) {
      deg(static_cast<std::size_t>(reps[k].start + i), dof) += amp * std::sin(kTwoPi * 3.0 * i / p);
    }
  }

  add_noise_and_emit(deg, options, rng, out);
  const CycleKind kind = config.cycle_mode == CycleMode::alternating ? CycleKind::alternating : CycleKind::repetitive;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    CycleRecord c;
    c.i_s = reps[k].start;
    c.i_e = reps[k].start + reps[k].period;
    c.kind = kind;
    c.rep_index = static_cast<int>(k) + 1;
    out.truth_cycles.push_back(c);
  }
  std::sort(out.feedback_truth.begin(), out.feedback_truth.end());
  out.feedback_truth.erase(std::unique(out.feedback_truth.begin(), out.feedback_truth.end()),
                           out.feedback_truth.end());
  return out;
}

json truth_to_json(const SyntheticSession & s)
{
  const auto & model = SkeletonModel::get();
  json lines = json::array();
  for (const auto & c : s.truth_cycles) {
    lines.push_back({{"type", "cycle_truth"},
                     {"rep", c.rep_index},
                     {"i_s", c.i_s},
                     {"i_e", c.i_e},
                     {"kind", std::string(to_string(c.kind))}});
  }
  for (const auto & e : s.errors) {
    lines.push_back({{"type", "error_truth"},
                     {"joint", std::string(model.joint(e.joint).id)},
                     {"rep", e.rep},
                     {"statistic", std::string(to_string(e.statistic))},
                     {"target_deg", e.target_deg},
                     {"start", e.start},
                     {"end", e.end}});
  }
  for (FrameIndex t : s.feedback_truth) {
    lines.push_back({{"type", "feedback_truth"}, {"t", t}, {"time_s", frames_to_seconds(t)}});
  }
  return lines;
}

SalienceDataset synthetic_salience_dataset(std::span<const ExerciseConfig> configs, int per_exercise,
                                           std::uint64_t seed)
{
  if (configs.empty() || per_exercise < 1) throw Error(Errc::empty_dataset, "no exercises to sample");
  SalienceDataset data;
  for (const auto & c : configs) data.vocab.push_back(c.exercise_id);
  std::sort(data.vocab.begin(), data.vocab.end());
  if (std::adjacent_find(data.vocab.begin(), data.vocab.end()) != data.vocab.end()) {
    throw Error(Errc::schema, "duplicate exercise id in salience dataset");
  }
  Rng rng(seed);
  for (const auto & c : configs) {
    const auto base = region_rom(build_reference(c).angles);
    const auto labels = label_vector(c);
    for (int i = 0; i < per_exercise; ++i) {
      auto rom = base;
      for (auto & r : rom) r *= 1.0 + 0.1 * clipped_normal(rng);
      data.features.append_row(exercise_descriptor(data.vocab, c.exercise_id, rom));
      data.labels.append_row(labels);
    }
  }
  return data;
}

}  // namespace kincoach
