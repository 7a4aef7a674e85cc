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

#include <cstddef>
#include <span>
#include <vector>

namespace kincoach
{

/// Dense row-major matrix of doubles.
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
  : rows_(rows), cols_(cols), data_(rows * cols, fill)
  {
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double & operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const
  {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      out[r] = (*this)(r, c);
    }
    return out;
  }

  std::vector<double> & data() noexcept { return data_; }
  const std::vector<double> & data() const noexcept { return data_; }

  void append_row(std::span<const double> values)
  {
    if (rows_ == 0 && cols_ == 0) {
      cols_ = values.size();
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix & a, const Matrix & b);
// C = A^T * B
Matrix matmul_tn(const Matrix & a, const Matrix & b);
// C = A * B^T
Matrix matmul_nt(const Matrix & a, const Matrix & b);

}  // namespace kincoach
