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

#include "kincoach/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "kincoach/error.hpp"

namespace kincoach
{

using nlohmann::json;

namespace
{
constexpr const char * kFormat = "kincoach-checkpoint";
}

const Matrix & Checkpoint::tensor(const std::string & name) const
{
  for (const auto & t : tensors) {
    if (t.name == name) return t.value;
  }
  throw Error(Errc::schema, "checkpoint has no tensor '" + name + "'");
}

json to_json(const Checkpoint & ckpt)
{
  json tensors = json::array();
  for (const auto & t : ckpt.tensors) {
    tensors.push_back(
      {{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}, {"data", t.value.data()}});
  }
  return {{"format", kFormat}, {"version", 1}, {"kind", ckpt.kind}, {"meta", ckpt.meta}, {"tensors", tensors}};
}

Checkpoint checkpoint_from_json(const json & doc)
{
  try {
    if (doc.at("format").get<std::string>() != kFormat || doc.at("version").get<int>() != 1) {
      throw Error(Errc::schema, "not a version-1 kincoach checkpoint");
    }
    Checkpoint ckpt;
    ckpt.kind = doc.at("kind").get<std::string>();
    ckpt.meta = doc.value("meta", json::object());
    for (const auto & t : doc.at("tensors")) {
      const auto rows = t.at("rows").get<std::size_t>();
      const auto cols = t.at("cols").get<std::size_t>();
      Matrix m(rows, cols);
      const auto & data = t.at("data");
      if (data.size() != rows * cols) throw Error(Errc::schema, "tensor data size mismatch");
      for (std::size_t i = 0; i < data.size(); ++i) {
        m.data()[i] = data[i].get<double>();
        if (!std::isfinite(m.data()[i])) throw Error(Errc::schema, "non-finite checkpoint value");
      }
      ckpt.add(t.at("name").get<std::string>(), std::move(m));
    }
    return ckpt;
  } catch (const json::exception & e) {
    throw Error(Errc::schema, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write checkpoint " + path.string());
  out << to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open checkpoint " + path.string());
  try {
    return checkpoint_from_json(json::parse(in));
  } catch (const json::parse_error & e) {
    throw Error(Errc::schema, path.string() + ": " + e.what());
  }
}

}  // namespace kincoach
