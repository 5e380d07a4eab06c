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

// Shared helpers for the test suite: central finite differences and random inputs.

#ifndef PCGAN__TESTS__SUPPORT_HPP_
#define PCGAN__TESTS__SUPPORT_HPP_

#include "pcgan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace pcgan::test
{

using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

/// Relative error with the denominator floored so near-zero gradients compare absolutely.
inline double relative_error(double a, double b, double floor = 1e-6)
{
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Tensor random_tensor(numerics::Shape shape, std::mt19937_64 & rng, double lo = -1.0, double hi = 1.0)
{
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto & v : t.values()) {
    v = d(rng);
  }
  return t;
}

/// Builds a scalar loss from tape inputs.
using ScalarFn = std::function<Var(Tape &, const std::vector<Var> &)>;

/**
 * @brief Largest relative error between tape gradients and central differences.
 *
 * Every element of every input is perturbed by +-h. Gradients smaller than `floor` are
 * compared absolutely, since central differences carry roundoff of order eps * |loss| / h.
 */
inline double max_gradient_error(const ScalarFn & f, const std::vector<Tensor> & inputs, double h = 1e-6,
                                 double floor = 1e-6)
{
  Tape tape;
  std::vector<Var> vars;
  for (const auto & t : inputs) {
    vars.push_back(tape.parameter(t));
  }
  const auto loss = f(tape, vars);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  for (const auto & v : vars) {
    analytic.push_back(tape.grad(v));
  }
  auto eval = [&](const std::vector<Tensor> & xs) {
    Tape t;
    std::vector<Var> vs;
    for (const auto & x : xs) {
      vs.push_back(t.constant(x));
    }
    return f(t, vs).value().item();
  };
  double worst = 0.0;
  auto xs = inputs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs[i].size(); ++j) {
      const double x0 = xs[i][j];
      xs[i][j] = x0 + h;
      const double up = eval(xs);
      xs[i][j] = x0 - h;
      const double down = eval(xs);
      xs[i][j] = x0;
      worst = std::max(worst, relative_error(analytic[i][j], (up - down) / (2.0 * h), floor));
    }
  }
  return worst;
}

/**
 * @brief Largest relative error between @p grads and central differences of @p value.
 *
 * Only the tensors named in @p grads are perturbed.
 */
inline double max_param_gradient_error(
  const std::function<double(const numerics::ParamSet &)> & value, numerics::ParamSet params,
  const numerics::ParamSet & grads, double h = 1e-6, double floor = 1e-6)
{
  double worst = 0.0;
  for (const auto & [name, g] : grads) {
    auto & x = params.at(name);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double x0 = x[j];
      x[j] = x0 + h;
      const double up = value(params);
      x[j] = x0 - h;
      const double down = value(params);
      x[j] = x0;
      worst = std::max(worst, relative_error(g[j], (up - down) / (2.0 * h), floor));
    }
  }
  return worst;
}

/// Weighted sum of all elements, so every output element gets a distinct upstream gradient.
inline Var probe(Tape & tape, const Var & y, std::uint64_t seed = 7)
{
  std::mt19937_64 rng(seed);
  return numerics::sum(numerics::mul(y, tape.constant(random_tensor(y.value().shape(), rng))));
}

}  // namespace pcgan::test

#endif  // PCGAN__TESTS__SUPPORT_HPP_
