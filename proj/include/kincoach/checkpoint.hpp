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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kincoach/matrix.hpp"

namespace kincoach
{

struct NamedTensor
{
  std::string name;
  Matrix value;
};

/// JSON checkpoint shared by the scorer and the fusion block:
/// {"format":"kincoach-checkpoint","version":1,"kind":..,"meta":{..},
///  "tensors":[{"name":..,"rows":..,"cols":..,"data":[row-major]}]}
struct Checkpoint
{
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Matrix & tensor(const std::string & name) const;
  void add(std::string name, Matrix value) { tensors.push_back({std::move(name), std::move(value)}); }
};

nlohmann::json to_json(const Checkpoint & ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json & doc);
void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path);
Checkpoint load_checkpoint(const std::filesystem::path & path);

}  // namespace kincoach
