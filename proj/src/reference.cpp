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

#include "kincoach/reference.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "kincoach/common.hpp"
#include "kincoach/error.hpp"

namespace kincoach
{
namespace
{

std::string header_line()
{
  std::string h = "frame";
  for (int i = 0; i < kNumDofs; ++i) h += fmt::format(",dof_{:02d}", i);
  return h;
}

std::vector<std::string> split(const std::string & line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string & s, std::size_t line_no)
{
  errno = 0;
  char * end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(Errc::schema, fmt::format("reference line {}: bad number '{}'", line_no, s));
  }
  return v;
}

}  // namespace

void validate(const ReferenceTrajectory & ref)
{
  if (ref.angles.cols() != static_cast<std::size_t>(kNumDofs)) {
    throw Error(Errc::schema, fmt::format("reference has {} columns, expected {}", ref.angles.cols(), kNumDofs));
  }
  const int n = ref.length();
  if (n < kMinRefLength || n > kMaxRefLength) {
    throw Error(Errc::schema, fmt::format("reference length {} outside [{}, {}]", n, kMinRefLength, kMaxRefLength));
  }
  for (double v : ref.angles.data()) {
    if (!std::isfinite(v)) throw Error(Errc::schema, "reference contains non-finite angle");
  }
  if (ref.fps != kFps) throw Error(Errc::schema, fmt::format("reference fps {} unsupported", ref.fps));
}

std::filesystem::path sidecar_path(const std::filesystem::path & csv_path)
{
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

ReferenceTrajectory load_reference(const std::filesystem::path & csv_path)
{
  std::ifstream in(csv_path);
  if (!in) throw Error(Errc::io, "cannot open reference " + csv_path.string());

  ReferenceTrajectory ref;
  std::string line;
  if (!std::getline(in, line) || line != header_line()) {
    throw Error(Errc::schema, csv_path.string() + ": bad reference header");
  }
  ref.angles = Matrix(0, kNumDofs);
  std::size_t line_no = 1;
  std::vector<double> row(kNumDofs);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(kNumDofs + 1)) {
      throw Error(Errc::schema, fmt::format("reference line {}: expected {} fields", line_no, kNumDofs + 1));
    }
    const double frame = parse_double(cells[0], line_no);
    if (frame != static_cast<double>(ref.angles.rows())) {
      throw Error(Errc::schema, fmt::format("reference line {}: frame index out of sequence", line_no));
    }
    for (int i = 0; i < kNumDofs; ++i) row[i] = parse_double(cells[i + 1], line_no);
    ref.angles.append_row(row);
  }

  const auto side = sidecar_path(csv_path);
  std::ifstream sin(side);
  if (!sin) throw Error(Errc::io, "cannot open reference sidecar " + side.string());
  try {
    const auto meta = nlohmann::json::parse(sin);
    ref.exercise_id = meta.at("exercise_id").get<std::string>();
    ref.fps = meta.value("fps", kFps);
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::schema, side.string() + ": " + e.what());
  }
  validate(ref);
  return ref;
}

void save_reference(const ReferenceTrajectory & ref, const std::filesystem::path & csv_path)
{
  validate(ref);
  std::ofstream out(csv_path);
  if (!out) throw Error(Errc::io, "cannot write reference " + csv_path.string());
  out << header_line() << '\n';
  for (std::size_t r = 0; r < ref.angles.rows(); ++r) {
    std::string line = std::to_string(r);
    for (double v : ref.angles.row(r)) line += fmt::format(",{:.17g}", v);
    out << line << '\n';
  }
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw Error(Errc::io, "cannot write reference sidecar");
  side << nlohmann::json{{"exercise_id", ref.exercise_id}, {"fps", ref.fps}}.dump(2) << '\n';
}

}  // namespace kincoach
