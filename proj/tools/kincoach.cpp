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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kincoach/annotate.hpp"
#include "kincoach/error.hpp"
#include "kincoach/fusion.hpp"
#include "kincoach/generator.hpp"
#include "kincoach/random.hpp"
#include "kincoach/session.hpp"
#include "kincoach/tfscore.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kincoach;

namespace
{

fs::path data_dir()
{
  if (const char * env = std::getenv("KINCOACH_DATA")) return env;
  return KINCOACH_DATA_DIR;
}

// Accepts a path or a bundled exercise name.
ExerciseConfig exercise_arg(const std::string & arg)
{
  if (fs::exists(arg)) return load_exercise_config(arg);
  const auto bundled = data_dir() / "exercises" / (arg + ".json");
  if (fs::exists(bundled)) return load_exercise_config(bundled);
  throw Error(Errc::io, "no exercise config '" + arg + "'");
}

std::optional<ReferenceTrajectory> reference_for(const ExerciseConfig & config, const std::string & arg)
{
  if (!arg.empty()) return load_reference(arg);
  const auto bundled = data_dir() / "refs" / ((config.reference_id.empty() ? config.exercise_id : config.reference_id) + ".csv");
  if (fs::exists(bundled)) return load_reference(bundled);
  return std::nullopt;
}

std::ifstream open_in(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  return in;
}

std::vector<json> read_jsonl(const std::string & path)
{
  auto in = open_in(path);
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error &) {
      throw Error(Errc::stream_format, fmt::format("{}: line {}: not valid JSON", path, n));
    }
  }
  return out;
}

// Timestamps in seconds of corrective feedback or ground-truth feedback records.
std::vector<double> feedback_times(const std::vector<json> & records)
{
  std::vector<double> out;
  for (const auto & r : records) {
    const auto type = r.value("type", std::string{});
    const bool pred = type == "feedback" && r.value("kind", std::string{}) == "corrective";
    if (!pred && type != "feedback_truth") continue;
    if (!r.contains("t") || !r.at("t").is_number()) throw Error(Errc::stream_format, "feedback record without 't'");
    out.push_back(frames_to_seconds(r.at("t").get<FrameIndex>()));
  }
  return out;
}

struct StreamArgs
{
  std::string stream;
  std::string exercise;
  std::string ref;
  std::string out;
  std::string scorer;
  std::string morph;
  int status_every = 0;
  int k = kDefaultTopK;
};

Session make_session(const StreamArgs & a)
{
  auto config = exercise_arg(a.exercise);
  auto ref = reference_for(config, a.ref);
  JointSelection selection;
  if (!a.scorer.empty()) {
    if (!ref) throw Error(Errc::schema, "a trained scorer needs a reference trajectory");
    selection = SalienceModel::load(a.scorer).select(config.exercise_id, ref->angles, a.k);
  } else {
    selection = rule_selection(config);
  }
  SessionOptions options;
  options.status_every = a.status_every;
  if (!a.morph.empty()) options.morph = load_morph_profile(a.morph);
  return Session(std::move(config), std::move(ref), std::move(selection), options);
}

void add_stream_options(CLI::App * cmd, StreamArgs & a, bool with_files)
{
  if (with_files) {
    cmd->add_option("--stream", a.stream, "frame stream (JSON Lines)")->required();
    cmd->add_option("--out", a.out, "output JSON Lines (default stdout)");
  }
  cmd->add_option("--exercise", a.exercise, "exercise config path or bundled name")->required();
  cmd->add_option("--ref", a.ref, "reference trajectory CSV");
  cmd->add_option("--scorer", a.scorer, "trained salience checkpoint");
  cmd->add_option("--morph", a.morph, "morphometric profile JSON");
  cmd->add_option("--status-every", a.status_every, "status event cadence in frames")->check(CLI::NonNegativeNumber);
  cmd->add_option("--k", a.k, "salient joints to keep")->check(CLI::Range(1, kNumJoints));
}

int cmd_analyze(const StreamArgs & a)
{
  auto session = make_session(a);
  auto in = open_in(a.stream);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error(Errc::io, "cannot write " + a.out);
  }
  std::ostream & out = a.out.empty() ? std::cout : file;
  const auto summary = run_stream(in, session, out);
  out << to_json(summary).dump() << '\n';
  return 0;
}

int cmd_stream(const StreamArgs & a)
{
  auto session = make_session(a);
  run_stream(std::cin, session, std::cout, true);
  return 0;
}

struct GenArgs
{
  std::string exercise;
  std::string errors;
  std::string out;
  std::string truth_out;
  int reps = 5;
  std::uint64_t seed = 0;
  double period = 2.0;
  double noise = 1.0;
  double hold = 10.0;
};

int cmd_gen(const GenArgs & a)
{
  const auto config = exercise_arg(a.exercise);
  GeneratorOptions opt;
  opt.reps = a.reps;
  opt.seed = seed_from_env(a.seed);
  opt.period_s = a.period;
  opt.noise_deg = a.noise;
  opt.hold_s = a.hold;
  const ErrorPlan plan = a.errors.empty() ? ErrorPlan{} : load_error_plan(a.errors);
  const auto session = generate_session(config, opt, plan);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error(Errc::io, "cannot write " + a.out);
  }
  std::ostream & out = a.out.empty() ? std::cout : file;
  for (const auto & f : session.frames) out << format_frame(f) << '\n';
  if (!a.truth_out.empty()) {
    std::ofstream truth(a.truth_out);
    if (!truth) throw Error(Errc::io, "cannot write " + a.truth_out);
    for (const auto & line : truth_to_json(session)) truth << line.dump() << '\n';
  }
  return 0;
}

int cmd_eval(const std::string & pred, const std::string & truth, double tol)
{
  const auto report = tf_score(feedback_times(read_jsonl(pred)), feedback_times(read_jsonl(truth)), tol);
  json matches = json::array();
  for (const auto & [p, t] : report.matches) matches.push_back({p, t});
  std::cout << json{{"precision", report.precision},
                    {"recall", report.recall},
                    {"f1", report.f1},
                    {"tol_s", report.tol_s},
                    {"matches", matches}}
                 .dump()
            << '\n';
  return 0;
}

int cmd_make_ref(const std::string & exercise, int n_ref, const std::string & out)
{
  const auto config = exercise_arg(exercise);
  save_reference(build_reference(config, n_ref), out);
  return 0;
}

int cmd_make_salience_data(const std::vector<std::string> & exercises, int per_exercise, std::uint64_t seed,
                           const std::string & out)
{
  std::vector<ExerciseConfig> configs;
  for (const auto & e : exercises) configs.push_back(exercise_arg(e));
  save_salience_dataset(synthetic_salience_dataset(configs, per_exercise, seed_from_env(seed)), out);
  return 0;
}

int cmd_train_salience(const std::string & data_path, const SalienceTrainOptions & opt_in, const std::string & out)
{
  const auto data = load_salience_dataset(data_path);
  SalienceTrainOptions opt = opt_in;
  opt.seed = seed_from_env(opt.seed);
  auto result = train_salience(data, opt);
  SalienceModel model{std::move(result.scorer), data.vocab};
  if (!out.empty()) model.save(out);
  std::cout << json{{"epochs", opt.epochs},
                    {"final_loss", result.loss_history.empty() ? 0.0 : result.loss_history.back()},
                    {"per_joint_accuracy", per_joint_accuracy(model.scorer, data)}}
                 .dump()
            << '\n';
  return 0;
}

int cmd_train_fusion(FusionTrainOptions opt, const std::string & out)
{
  opt.seed = seed_from_env(opt.seed);
  const auto result = train_fusion(opt);
  if (!out.empty()) save_checkpoint(result.model.to_checkpoint(), out);
  std::cout << json{{"steps", opt.steps},
                    {"alpha", opt.alpha},
                    {"initial_accuracy", result.initial.accuracy},
                    {"accuracy", result.held_out.accuracy},
                    {"feedback_recall", result.held_out.feedback_recall},
                    {"mean_loss", result.held_out.mean_loss}}
                 .dump()
            << '\n';
  return 0;
}

int cmd_annotate(const StreamArgs & a, const std::string & feedback, const std::string & out_path)
{
  auto session = make_session(a);
  std::vector<CycleReport> cycles;
  {
    auto in = open_in(a.stream);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto o = session.feed(parse_frame(line, n));
      for (auto & c : o.cycles) cycles.push_back(std::move(c));
    }
    for (auto & c : session.finish().cycles) cycles.push_back(std::move(c));
  }
  std::vector<FeedbackEntry> entries;
  for (const auto & doc : read_jsonl(feedback)) entries.push_back(parse_feedback_entry(doc));

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error(Errc::io, "cannot write " + out_path);
  }
  std::ostream & out = out_path.empty() ? std::cout : file;
  for (const auto & e : annotate_feedback(cycles, entries)) out << to_json(e).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"kincoach: streaming kinematic analysis and coaching context"};
  app.require_subcommand(1);

  StreamArgs analyze_args;
  auto * analyze = app.add_subcommand("analyze", "analyze a recorded frame stream");
  add_stream_options(analyze, analyze_args, true);

  StreamArgs stream_args;
  auto * stream = app.add_subcommand("stream", "line-buffered analysis from stdin to stdout");
  add_stream_options(stream, stream_args, false);

  GenArgs gen_args;
  auto * gen = app.add_subcommand("gen", "generate a synthetic session");
  gen->add_option("--exercise", gen_args.exercise, "exercise config path or bundled name")->required();
  gen->add_option("--reps", gen_args.reps, "repetitions")->check(CLI::PositiveNumber);
  gen->add_option("--errors", gen_args.errors, "error plan JSON");
  gen->add_option("--seed", gen_args.seed, "random seed (KINCOACH_SEED overrides)");
  gen->add_option("--period", gen_args.period, "repetition period in seconds");
  gen->add_option("--noise-deg", gen_args.noise, "angle noise std in degrees");
  gen->add_option("--hold-s", gen_args.hold, "static hold duration in seconds");
  gen->add_option("--out", gen_args.out, "frame stream output (default stdout)");
  gen->add_option("--truth-out", gen_args.truth_out, "ground truth JSON Lines");

  std::string pred, truth;
  double tol = kDefaultTolerance;
  auto * eval = app.add_subcommand("eval", "temporal F-score of corrective events against ground truth");
  eval->add_option("--pred", pred, "analysis output JSON Lines")->required();
  eval->add_option("--truth", truth, "ground truth JSON Lines")->required();
  eval->add_option("--tol", tol, "matching tolerance in seconds")->check(CLI::PositiveNumber);

  std::string ref_exercise, ref_out;
  int n_ref = kDefaultRefLength;
  auto * make_ref = app.add_subcommand("make-ref", "write the synthetic reference repetition");
  make_ref->add_option("--exercise", ref_exercise)->required();
  make_ref->add_option("--n-ref", n_ref);
  make_ref->add_option("--out", ref_out)->required();

  std::vector<std::string> sal_exercises;
  int per_exercise = 20;
  std::uint64_t sal_seed = 0;
  std::string sal_out;
  auto * make_sal = app.add_subcommand("make-salience-data", "write a synthetic salience dataset");
  make_sal->add_option("--exercises", sal_exercises, "exercise configs or bundled names")->required();
  make_sal->add_option("--per-exercise", per_exercise)->check(CLI::PositiveNumber);
  make_sal->add_option("--seed", sal_seed);
  make_sal->add_option("--out", sal_out)->required();

  std::string sal_data, sal_ckpt;
  SalienceTrainOptions sal_opt;
  auto * train_sal = app.add_subcommand("train-salience", "train the salient-joint scorer");
  train_sal->add_option("--data", sal_data)->required();
  train_sal->add_option("--epochs", sal_opt.epochs)->check(CLI::PositiveNumber);
  train_sal->add_option("--lr", sal_opt.lr)->check(CLI::PositiveNumber);
  train_sal->add_option("--seed", sal_opt.seed);
  train_sal->add_option("--hidden", sal_opt.hidden, "hidden layer widths");
  train_sal->add_option("--out", sal_ckpt, "checkpoint output");

  FusionTrainOptions fus_opt;
  std::string fus_out;
  auto * train_fus = app.add_subcommand("train-fusion", "train the toy cross-attention block on the copy task");
  train_fus->add_option("--seed", fus_opt.seed);
  train_fus->add_option("--steps", fus_opt.steps)->check(CLI::PositiveNumber);
  train_fus->add_option("--lr", fus_opt.lr)->check(CLI::PositiveNumber);
  train_fus->add_option("--alpha", fus_opt.alpha);
  train_fus->add_option("--out", fus_out, "checkpoint output");

  StreamArgs ann_args;
  std::string feedback, ann_out;
  auto * annotate = app.add_subcommand("annotate", "rewrite corrective feedback from detected violations");
  add_stream_options(annotate, ann_args, false);
  annotate->add_option("--stream", ann_args.stream, "frame stream (JSON Lines)")->required();
  annotate->add_option("--feedback", feedback, "feedback entries JSON Lines")->required();
  annotate->add_option("--out", ann_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_args);
    if (*stream) return cmd_stream(stream_args);
    if (*gen) return cmd_gen(gen_args);
    if (*eval) return cmd_eval(pred, truth, tol);
    if (*make_ref) return cmd_make_ref(ref_exercise, n_ref, ref_out);
    if (*make_sal) return cmd_make_salience_data(sal_exercises, per_exercise, sal_seed, sal_out);
    if (*train_sal) return cmd_train_salience(sal_data, sal_opt, sal_ckpt);
    if (*train_fus) return cmd_train_fusion(fus_opt, fus_out);
    if (*annotate) return cmd_annotate(ann_args, feedback, ann_out);
  } catch (const Error & e) {
    std::cerr << "kincoach: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception & e) {
    std::cerr << "kincoach: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
