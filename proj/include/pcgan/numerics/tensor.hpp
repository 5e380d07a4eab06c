// Copyright 2026 The pcgan Authors
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

#ifndef PCGAN__NUMERICS__TENSOR_HPP_
#define PCGAN__NUMERICS__TENSOR_HPP_

#include "pcgan/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pcgan::numerics
{

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape & shape)
{
  return std::accumulate(
    shape.begin(), shape.end(), std::size_t{1}, std::multiplies<std::size_t>());
}

inline std::string shape_string(const Shape & shape)
{
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << (i ? "x" : "") << shape[i];
  }
  out << ']';
  return out.str();
}

/**
 * @brief Dense row-major array of doubles.
 *
 * Rank 0 is a scalar. Most of the library works with rank-2 tensors viewed as
 * `rows() x cols()`, where `cols()` is the last dimension and `rows()` folds
 * every leading dimension.
 */
class Tensor
{
public:
  Tensor() : shape_{0} {}

  Tensor(Shape shape, std::vector<double> values)
  : shape_(std::move(shape)), values_(std::move(values))
  {
    if (shape_size(shape_) != values_.size()) {
      throw DimensionError(
        "tensor shape " + shape_string(shape_) + " does not match " +
        std::to_string(values_.size()) + " values");
    }
  }

  static Tensor zeros(Shape shape)
  {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor full(Shape shape, double value)
  {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
  }

  static Tensor scalar(double value) { return Tensor(Shape{}, {value}); }

  static Tensor vector(std::vector<double> values)
  {
    const auto n = values.size();
    return Tensor(Shape{n}, std::move(values));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
  {
    return Tensor(Shape{rows, cols}, std::move(values));
  }

  static Tensor identity(std::size_t n)
  {
    auto t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) {
      t.values_[i * n + i] = 1.0;
    }
    return t;
  }

  const Shape & shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  /// Last dimension (1 for scalars).
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }
  /// Product of all leading dimensions.
  std::size_t rows() const
  {
    const auto c = cols();
    return c == 0 ? 0 : size() / c;
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double> & storage() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double & operator[](std::size_t i) { return values_[i]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  double & operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }

  double item() const
  {
    if (values_.size() != 1) {
      throw DimensionError("item() on tensor of shape " + shape_string(shape_));
    }
    return values_[0];
  }

  bool all_finite() const
  {
    for (double v : values_) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const Tensor &, const Tensor &) = default;

private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace pcgan::numerics

#endif  // PCGAN__NUMERICS__TENSOR_HPP_
