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

#ifndef PCGAN__GMM_HPP_
#define PCGAN__GMM_HPP_

#include "pcgan/geometry.hpp"
#include "pcgan/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace pcgan::gmm
{

using numerics::Tensor;
using numerics::Var;

/// Lower bound on every standard deviation, meters.
inline constexpr double kSigmaFloor = 1e-3;
/// Correlation coefficients are squashed into (-kRhoCap, kRhoCap).
inline constexpr double kRhoCap = 0.999;
/// Values per mixture component in the raw head output.
inline constexpr std::size_t kRawPerComponent = 6;

/// One bivariate normal with its mixture weight.
struct Component
{
  double pi{1.0};
  Point mu;
  Point sigma{1.0, 1.0};
  double rho{0.0};
};

/// Mixture for one agent at one prediction step.
struct GmmStep
{
  std::vector<Component> components;

  std::size_t k() const { return components.size(); }
};

/// Mixtures for one agent over the prediction horizon.
using GmmSequence = std::vector<GmmStep>;

/// Throws DataError unless weights are non-negative and sum to one, sigmas positive, |rho| < 1.
inline void validate(const GmmStep & step)
{
  if (step.components.empty()) {
    throw DataError("gmm step has no components");
  }
  double total = 0.0;
  for (const auto & c : step.components) {
    if (!(c.pi >= 0.0) || !(c.sigma.x > 0.0) || !(c.sigma.y > 0.0) || !(std::abs(c.rho) < 1.0)) {
      throw DataError("gmm component outside its valid range");
    }
    total += c.pi;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("gmm weights sum to " + std::to_string(total));
  }
}

/**
 * @brief Map a raw head output of length 6K onto a valid mixture.
 *
 * Raw layout is blocked by parameter: `[logits(K) | mu_x(K) | mu_y(K) |
 * log_sigma_x(K) | log_sigma_y(K) | rho_raw(K)]`. Weights are the softmax of
 * the logits, sigmas are `max(exp(.), kSigmaFloor)`, rho is `kRhoCap * tanh(.)`
 * and means pass through.
 */
inline GmmStep mdn_activate(std::span<const double> raw, std::size_t k)
{
  if (k == 0 || raw.size() != kRawPerComponent * k) {
    throw DimensionError(
      "mdn_activate: expected " + std::to_string(kRawPerComponent * k) + " raw values, got " +
      std::to_string(raw.size()));
  }
  const double m = *std::max_element(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(k));
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    z += std::exp(raw[i] - m);
  }
  GmmStep step;
  step.components.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto & c = step.components[i];
    c.pi = std::exp(raw[i] - m) / z;
    c.mu = {raw[k + i], raw[2 * k + i]};
    c.sigma = {
      std::max(std::exp(raw[3 * k + i]), kSigmaFloor),
      std::max(std::exp(raw[4 * k + i]), kSigmaFloor)};
    c.rho = kRhoCap * std::tanh(raw[5 * k + i]);
  }
  return step;
}

/// log N(point; mu, sigma, rho) for one bivariate normal.
inline double log_normal(Point p, const Component & c)
{
  const double zx = (p.x - c.mu.x) / c.sigma.x;
  const double zy = (p.y - c.mu.y) / c.sigma.y;
  const double one_minus = 1.0 - c.rho * c.rho;
  const double q = zx * zx + zy * zy - 2.0 * c.rho * zx * zy;
  return -std::log(2.0 * std::numbers::pi) - std::log(c.sigma.x) - std::log(c.sigma.y) -
         0.5 * std::log(one_minus) - q / (2.0 * one_minus);
}

/// log of the mixture density at @p p, via log-sum-exp.
inline double log_pdf(Point p, const GmmStep & step)
{
  std::vector<double> terms;
  terms.reserve(step.k());
  for (const auto & c : step.components) {
    if (c.pi > 0.0) {
      terms.push_back(std::log(c.pi) + log_normal(p, c));
    }
  }
  if (terms.empty()) {
    throw DataError("log_pdf: mixture has no positive weight");
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) {
    s += std::exp(t - m);
  }
  return m + std::log(s);
}

/**
 * @brief Negative log-likelihood summed over agents and prediction steps.
 *
 * `gmms[i][t]` must line up with `truth[i][t]`.
 */
inline double nll_loss(
  const std::vector<GmmSequence> & gmms, const std::vector<Trajectory> & truth)
{
  if (gmms.size() != truth.size()) {
    throw DimensionError("nll_loss: agent count mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < gmms.size(); ++i) {
    if (gmms[i].size() != truth[i].size()) {
      throw DimensionError("nll_loss: horizon mismatch for agent " + std::to_string(i));
    }
    for (std::size_t t = 0; t < gmms[i].size(); ++t) {
      total -= log_pdf(truth[i][t], gmms[i][t]);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Tape versions. Rows index agents, columns index mixture components.

/// Activated mixture parameters on a tape, each of shape [rows x K].
struct MixtureVars
{
  Var log_pi;
  Var pi;
  Var mu_x;
  Var mu_y;
  Var sigma_x;
  Var sigma_y;
  Var rho;

  std::size_t rows() const { return pi.value().rows(); }
  std::size_t k() const { return pi.value().cols(); }
};

/// Differentiable mdn_activate over a [rows x 6K] raw head output.
inline MixtureVars mdn_activate(const Var & raw, std::size_t k)
{
  namespace nx = numerics;
  if (k == 0 || raw.value().rank() != 2 || raw.value().cols() != kRawPerComponent * k) {
    throw DimensionError(
      "mdn_activate: expected [rows x " + std::to_string(kRawPerComponent * k) + "], got " +
      numerics::shape_string(raw.shape()));
  }
  MixtureVars out;
  const auto logits = nx::slice(raw, 0, k);
  out.log_pi = nx::log_softmax(logits);
  out.pi = nx::softmax(logits);
  out.mu_x = nx::slice(raw, k, 2 * k);
  out.mu_y = nx::slice(raw, 2 * k, 3 * k);
  const double inf = std::numeric_limits<double>::infinity();
  out.sigma_x = nx::clamp(nx::exp(nx::slice(raw, 3 * k, 4 * k)), kSigmaFloor, inf);
  out.sigma_y = nx::clamp(nx::exp(nx::slice(raw, 4 * k, 5 * k)), kSigmaFloor, inf);
  out.rho = nx::scale(nx::tanh(nx::slice(raw, 5 * k, 6 * k)), kRhoCap);
  return out;
}

/// Row-wise log density of @p points ([rows x 2], constant) under @p mix. Returns shape [rows].
inline Var log_pdf(const MixtureVars & mix, const Tensor & points)
{
  namespace nx = numerics;
  const std::size_t rows = mix.rows(), k = mix.k();
  if (points.rank() != 2 || points.rows() != rows || points.cols() != 2) {
    throw DimensionError(
      "log_pdf: expected points [" + std::to_string(rows) + "x2], got " +
      numerics::shape_string(points.shape()));
  }
  Tensor px = Tensor::zeros({rows, k});
  Tensor py = Tensor::zeros({rows, k});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      px(r, c) = points(r, 0);
      py(r, c) = points(r, 1);
    }
  }
  auto & tape = mix.pi.tape();
  const auto zx = nx::div(nx::sub(tape.constant(std::move(px)), mix.mu_x), mix.sigma_x);
  const auto zy = nx::div(nx::sub(tape.constant(std::move(py)), mix.mu_y), mix.sigma_y);
  const auto one_minus = nx::add_scalar(nx::neg(nx::square(mix.rho)), 1.0);
  const auto q = nx::sub(
    nx::add(nx::square(zx), nx::square(zy)), nx::scale(nx::mul(nx::mul(mix.rho, zx), zy), 2.0));
  auto log_norm = nx::add_scalar(
    nx::neg(nx::add(nx::log(mix.sigma_x), nx::log(mix.sigma_y))),
    -std::log(2.0 * std::numbers::pi));
  log_norm = nx::sub(log_norm, nx::scale(nx::log(one_minus), 0.5));
  log_norm = nx::sub(log_norm, nx::scale(nx::div(q, one_minus), 0.5));
  return nx::logsumexp(nx::add(mix.log_pi, log_norm));
}

/// Differentiable negative log-likelihood: steps[t] against truth[t] ([rows x 2]).
inline Var nll_loss(const std::vector<MixtureVars> & steps, const std::vector<Tensor> & truth)
{
  namespace nx = numerics;
  if (steps.empty() || steps.size() != truth.size()) {
    throw DimensionError("nll_loss: horizon mismatch");
  }
  Var total = nx::sum(log_pdf(steps[0], truth[0]));
  for (std::size_t t = 1; t < steps.size(); ++t) {
    total = nx::add(total, nx::sum(log_pdf(steps[t], truth[t])));
  }
  return nx::neg(total);
}

/// Extract the mixture of one row as plain values.
inline GmmStep to_step(const MixtureVars & mix, std::size_t row)
{
  GmmStep step;
  const std::size_t k = mix.k();
  step.components.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto & comp = step.components[c];
    comp.pi = mix.pi.value()(row, c);
    comp.mu = {mix.mu_x.value()(row, c), mix.mu_y.value()(row, c)};
    comp.sigma = {mix.sigma_x.value()(row, c), mix.sigma_y.value()(row, c)};
    comp.rho = mix.rho.value()(row, c);
  }
  return step;
}

// ---------------------------------------------------------------------------
// JSON layout
//
//   { "format": "pcgan-gmm", "version": 1, "k": K,
//     "agents": [ { "id": <int>,
//                   "steps": [ [ {"pi": p, "mu": [x, y], "sigma": [sx, sy], "rho": r}, ...K ],
//                              ...horizon ] }, ... ] }

inline nlohmann::json step_to_json(const GmmStep & step)
{
  auto arr = nlohmann::json::array();
  for (const auto & c : step.components) {
    arr.push_back(
      {{"pi", c.pi},
       {"mu", {c.mu.x, c.mu.y}},
       {"sigma", {c.sigma.x, c.sigma.y}},
       {"rho", c.rho}});
  }
  return arr;
}

inline GmmStep step_from_json(const nlohmann::json & j)
{
  GmmStep step;
  try {
    for (const auto & c : j) {
      Component comp;
      comp.pi = c.at("pi").get<double>();
      comp.mu = {c.at("mu").at(0).get<double>(), c.at("mu").at(1).get<double>()};
      comp.sigma = {c.at("sigma").at(0).get<double>(), c.at("sigma").at(1).get<double>()};
      comp.rho = c.at("rho").get<double>();
      step.components.push_back(comp);
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("gmm step: ") + e.what());
  }
  validate(step);
  return step;
}

inline nlohmann::json sequence_to_json(const GmmSequence & seq)
{
  auto arr = nlohmann::json::array();
  for (const auto & s : seq) {
    arr.push_back(step_to_json(s));
  }
  return arr;
}

inline GmmSequence sequence_from_json(const nlohmann::json & j)
{
  GmmSequence seq;
  for (const auto & s : j) {
    seq.push_back(step_from_json(s));
  }
  return seq;
}

struct AgentGmm
{
  int id{0};
  GmmSequence steps;
};

inline nlohmann::json agents_to_json(const std::vector<AgentGmm> & agents)
{
  const std::size_t k =
    agents.empty() || agents.front().steps.empty() ? 0 : agents.front().steps.front().k();
  nlohmann::json j = {{"format", "pcgan-gmm"}, {"version", 1}, {"k", k}};
  j["agents"] = nlohmann::json::array();
  for (const auto & a : agents) {
    j["agents"].push_back({{"id", a.id}, {"steps", sequence_to_json(a.steps)}});
  }
  return j;
}

inline std::vector<AgentGmm> agents_from_json(const nlohmann::json & j)
{
  std::vector<AgentGmm> out;
  try {
    if (j.at("format").get<std::string>() != "pcgan-gmm") {
      throw ParseError("not a pcgan-gmm document");
    }
    const auto k = j.at("k").get<std::size_t>();
    for (const auto & a : j.at("agents")) {
      AgentGmm agent{a.at("id").get<int>(), sequence_from_json(a.at("steps"))};
      for (const auto & s : agent.steps) {
        if (s.k() != k) {
          throw DataError("gmm document mixes component counts");
        }
      }
      out.push_back(std::move(agent));
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("gmm document: ") + e.what());
  }
  return out;
}

}  // namespace pcgan::gmm

#endif  // PCGAN__GMM_HPP_
