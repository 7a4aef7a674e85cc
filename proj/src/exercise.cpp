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

#include "kincoach/exercise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kincoach/error.hpp"
#include "kincoach/skeleton.hpp"

namespace kincoach
{
namespace
{

using nlohmann::json;

[[noreturn]] void schema_error(const std::string & what) { throw Error(Errc::schema, what); }

const json & require(const json & doc, const char * key)
{
  auto it = doc.find(key);
  if (it == doc.end()) {
    schema_error(std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const json & doc, const char * key)
{
  const auto & v = require(doc, key);
  if (!v.is_string()) schema_error(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json & doc, const char * key)
{
  const auto & v = require(doc, key);
  if (!v.is_number()) schema_error(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(std::string("'") + key + "' must be finite");
  return x;
}

double optional_number(const json & doc, const char * key, double fallback)
{
  return doc.contains(key) ? require_number(doc, key) : fallback;
}

std::vector<int> joint_list(const json & doc, const char * key)
{
  std::vector<int> out;
  if (!doc.contains(key)) return out;
  const auto & arr = doc.at(key);
  if (!arr.is_array()) schema_error(std::string("'") + key + "' must be an array");
  const auto & model = SkeletonModel::get();
  for (const auto & item : arr) {
    if (!item.is_string()) schema_error(std::string("'") + key + "' entries must be joint ids");
    const int j = model.joint_index(item.get<std::string>());
    if (std::find(out.begin(), out.end(), j) != out.end()) {
      schema_error(std::string("duplicate joint in '") + key + "'");
    }
    out.push_back(j);
  }
  return out;
}

json joint_names(const std::vector<int> & joints)
{
  json arr = json::array();
  for (int j : joints) arr.push_back(std::string(SkeletonModel::get().joint(j).id));
  return arr;
}

CycleMode parse_mode(const std::string & s)
{
  if (s == "repetitive") return CycleMode::repetitive;
  if (s == "alternating") return CycleMode::alternating;
  if (s == "static_hold") return CycleMode::static_hold;
  schema_error("unknown cycle_mode '" + s + "'");
}

KeyFrameRule parse_rule(const std::string & s)
{
  if (s == "cycle_min") return KeyFrameRule::cycle_min;
  if (s == "cycle_max") return KeyFrameRule::cycle_max;
  schema_error("unknown key_frame_rule '" + s + "'");
}

Statistic parse_statistic(const std::string & s)
{
  if (s == "variance") return Statistic::variance;
  if (s == "key_frame_angle") return Statistic::key_frame_angle;
  if (s == "key_frame_deviation") return Statistic::key_frame_deviation;
  schema_error("unknown constraint statistic '" + s + "'");
}

std::string_view units_for(Statistic s) { return s == Statistic::variance ? "deg2" : "deg"; }

}  // namespace

std::string_view to_string(CycleMode mode)
{
  switch (mode) {
    case CycleMode::alternating: return "alternating";
    case CycleMode::static_hold: return "static_hold";
    case CycleMode::repetitive: break;
  }
  return "repetitive";
}

std::string_view to_string(KeyFrameRule rule)
{
  return rule == KeyFrameRule::cycle_min ? "cycle_min" : "cycle_max";
}

std::string_view to_string(Statistic statistic)
{
  switch (statistic) {
    case Statistic::key_frame_angle: return "key_frame_angle";
    case Statistic::key_frame_deviation: return "key_frame_deviation";
    case Statistic::variance: break;
  }
  return "variance";
}

bool ExerciseConfig::is_static(int joint) const
{
  return std::find(static_joints.begin(), static_joints.end(), joint) != static_joints.end();
}

bool ExerciseConfig::is_dynamic(int joint) const
{
  return std::find(dynamic_joints.begin(), dynamic_joints.end(), joint) != dynamic_joints.end();
}

const ConstraintSpec * ExerciseConfig::constraint_for(int joint) const
{
  for (const auto & c : constraints) {
    if (c.joint == joint) return &c;
  }
  return nullptr;
}

ExerciseConfig parse_exercise_config(const json & doc)
{
  if (!doc.is_object()) schema_error("config must be a JSON object");
  const auto & schema = require(doc, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) {
    schema_error("unsupported schema version (expected 1)");
  }

  const auto & model = SkeletonModel::get();
  ExerciseConfig cfg;
  cfg.exercise_id = require_string(doc, "exercise_id");
  if (cfg.exercise_id.empty()) schema_error("empty exercise_id");
  cfg.cycle_mode = parse_mode(require_string(doc, "cycle_mode"));
  cfg.representative_joint = model.joint_index(require_string(doc, "representative_joint"));
  cfg.key_frame_rule =
    doc.contains("key_frame_rule") ? parse_rule(require_string(doc, "key_frame_rule")) : KeyFrameRule::cycle_max;
  cfg.reference_id = doc.contains("reference_id") ? require_string(doc, "reference_id") : std::string{};
  cfg.min_confidence = optional_number(doc, "min_confidence", 0.5);
  if (cfg.min_confidence < 0.0 || cfg.min_confidence > 1.0) schema_error("min_confidence outside [0,1]");

  for (int j = 0; j < kNumJoints; ++j) cfg.primary_dof[j] = primary_dof(j);
  if (doc.contains("primary_dof")) {
    const auto & overrides = doc.at("primary_dof");
    if (!overrides.is_object()) schema_error("'primary_dof' must be an object");
    for (const auto & [name, value] : overrides.items()) {
      const int j = model.joint_index(name);
      if (!value.is_number_integer()) schema_error("primary_dof values must be integers");
      const int dof = value.get<int>();
      if (!model.owns(j, dof)) {
        schema_error("primary_dof " + std::to_string(dof) + " is not a DoF of '" + name + "'");
      }
      cfg.primary_dof[j] = dof;
    }
  }

  cfg.static_joints = joint_list(doc, "static_joints");
  cfg.dynamic_joints = joint_list(doc, "dynamic_joints");
  cfg.salient_joints = joint_list(doc, "salient_joints");
  for (int j : cfg.static_joints) {
    if (cfg.is_dynamic(j)) {
      schema_error("joint '" + std::string(model.joint(j).id) + "' is both static and dynamic");
    }
  }

  if (doc.contains("constraints")) {
    const auto & arr = doc.at("constraints");
    if (!arr.is_array()) schema_error("'constraints' must be an array");
    for (const auto & item : arr) {
      if (!item.is_object()) schema_error("constraint entries must be objects");
      ConstraintSpec c;
      c.joint = model.joint_index(require_string(item, "joint"));
      c.statistic = parse_statistic(require_string(item, "statistic"));
      const std::string units = require_string(item, "units");
      if (units != units_for(c.statistic)) {
        schema_error("constraint on '" + std::string(model.joint(c.joint).id) + "' must use units '" +
                     std::string(units_for(c.statistic)) + "'");
      }
      c.bound.lower = optional_number(item, "lower", 0.0);
      c.bound.upper = require_number(item, "upper");
      if (c.bound.lower > c.bound.upper) {
        throw Error(Errc::inverted_bound, "constraint on '" + std::string(model.joint(c.joint).id) + "': lower " +
                                            std::to_string(c.bound.lower) + " > upper " +
                                            std::to_string(c.bound.upper));
      }
      if (c.statistic == Statistic::variance && !cfg.is_static(c.joint)) {
        schema_error("variance constraint on non-static joint '" + std::string(model.joint(c.joint).id) + "'");
      }
      if (c.statistic != Statistic::variance && !cfg.is_dynamic(c.joint)) {
        schema_error("key-frame constraint on non-dynamic joint '" + std::string(model.joint(c.joint).id) + "'");
      }
      if (cfg.constraint_for(c.joint)) {
        schema_error("duplicate constraint for '" + std::string(model.joint(c.joint).id) + "'");
      }
      cfg.constraints.push_back(c);
    }
  }

  if (doc.contains("motion")) {
    const auto & m = doc.at("motion");
    if (!m.is_object()) schema_error("'motion' must be an object");
    MotionProfile profile;
    profile.default_amp_deg = optional_number(m, "default_amp_deg", 0.0);
    if (m.contains("dofs")) {
      if (!m.at("dofs").is_array()) schema_error("'motion.dofs' must be an array");
      for (const auto & item : m.at("dofs")) {
        DofMotion dm;
        const auto & dof = require(item, "dof");
        if (!dof.is_number_integer()) schema_error("motion dof must be an integer");
        dm.dof = dof.get<int>();
        if (dm.dof < 0 || dm.dof >= kNumDofs) schema_error("motion dof out of range");
        dm.base_deg = optional_number(item, "base_deg", 0.0);
        dm.amp_deg = optional_number(item, "amp_deg", 0.0);
        dm.phase = optional_number(item, "phase", 0.0);
        profile.dofs.push_back(dm);
      }
    }
    cfg.motion = std::move(profile);
  }
  return cfg;
}

ExerciseConfig load_exercise_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open exercise config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    schema_error(path.string() + ": " + e.what());
  }
  return parse_exercise_config(doc);
}

json to_json(const ExerciseConfig & cfg)
{
  const auto & model = SkeletonModel::get();
  json doc;
  doc["schema"] = 1;
  doc["exercise_id"] = cfg.exercise_id;
  doc["cycle_mode"] = std::string(to_string(cfg.cycle_mode));
  doc["representative_joint"] = std::string(model.joint(cfg.representative_joint).id);
  doc["key_frame_rule"] = std::string(to_string(cfg.key_frame_rule));
  doc["reference_id"] = cfg.reference_id;
  doc["min_confidence"] = cfg.min_confidence;
  doc["static_joints"] = joint_names(cfg.static_joints);
  doc["dynamic_joints"] = joint_names(cfg.dynamic_joints);
  doc["salient_joints"] = joint_names(cfg.salient_joints);

  json overrides = json::object();
  for (int j = 0; j < kNumJoints; ++j) {
    if (cfg.primary_dof[j] != primary_dof(j)) overrides[std::string(model.joint(j).id)] = cfg.primary_dof[j];
  }
  if (!overrides.empty()) doc["primary_dof"] = overrides;

  json constraints = json::array();
  for (const auto & c : cfg.constraints) {
    constraints.push_back({{"joint", std::string(model.joint(c.joint).id)},
                           {"statistic", std::string(to_string(c.statistic))},
                           {"units", std::string(units_for(c.statistic))},
                           {"lower", c.bound.lower},
                           {"upper", c.bound.upper}});
  }
  doc["constraints"] = constraints;

  if (cfg.motion) {
    json dofs = json::array();
    for (const auto & dm : cfg.motion->dofs) {
      dofs.push_back({{"dof", dm.dof}, {"base_deg", dm.base_deg}, {"amp_deg", dm.amp_deg}, {"phase", dm.phase}});
    }
    doc["motion"] = {{"default_amp_deg", cfg.motion->default_amp_deg}, {"dofs", dofs}};
  }
  return doc;
}

std::string serialize_exercise_config(const ExerciseConfig & cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace kincoach
