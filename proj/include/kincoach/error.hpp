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

#include <stdexcept>
#include <string>
#include <string_view>

namespace kincoach
{

enum class Errc {
  schema,
  unknown_joint,
  inverted_bound,
  empty_series,
  out_of_band,
  dim_mismatch,
  bad_k,
  empty_dataset,
  too_short,
  degenerate_cycle,
  bad_nref,
  empty_cycle,
  no_key_frame,
  bad_target,
  stream_format,
  bad_spec,
  io,
  invariant,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error
{
public:
  Error(Errc code, const std::string & what)
  : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// CLI exit status for an error: 3 for violated invariants, 2 for bad input.
int exit_code(Errc code);

}  // namespace kincoach
