// Copyright 2026 The fedtrade Authors
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
#include <stdexcept>
#include <string>
#include <vector>

namespace fedtrade {

/// Dense row-major (cloud x job type) table.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T value = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  T& at(std::size_t r, std::size_t c) {
    check(r, c);
    return data_[r * cols_ + c];
  }
  const T& at(std::size_t r, std::size_t c) const {
    check(r, c);
    return data_[r * cols_ + c];
  }

  const std::vector<T>& values() const noexcept { return data_; }
  std::vector<T>& values() noexcept { return data_; }

  std::vector<std::vector<T>> to_nested() const {
    std::vector<std::vector<T>> out(rows_, std::vector<T>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c);
    return out;
  }

  static Grid from_nested(const std::vector<std::vector<T>>& nested) {
    Grid g(nested.size(), nested.empty() ? 0 : nested.front().size());
    for (std::size_t r = 0; r < nested.size(); ++r) {
      if (nested[r].size() != g.cols_)
        throw std::invalid_argument("ragged table: row " + std::to_string(r + 1));
      for (std::size_t c = 0; c < g.cols_; ++c) g(r, c) = nested[r][c];
    }
    return g;
  }

  bool operator==(const Grid&) const = default;

 private:
  void check(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("grid index out of range");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace fedtrade
