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

#ifndef PCGAN__NUMERICS__PARAMS_HPP_
#define PCGAN__NUMERICS__PARAMS_HPP_

#include "pcgan/numerics/ops.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>

namespace pcgan::numerics
{

/// Seeded generator threaded explicitly through every stochastic routine.
using Rng = std::mt19937_64;

/**
 * @brief Named learnable tensors, ordered by name.
 *
 * Names follow `module.layer.matrix`, e.g. `generator.encoder.w_ih`.
 */
using ParamSet = std::map<std::string, Tensor>;

/// Weight of shape [fan_in x fan_out], uniform in +-1/sqrt(fan_in).
inline Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng & rng)
{
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w = Tensor::zeros({fan_in, fan_out});
  for (auto & v : w.values()) {
    v = dist(rng);
  }
  return w;
}

inline Tensor init_bias(std::size_t n) { return Tensor::zeros({n}); }

/// Bind every parameter onto a tape, as trainable leaves or as constants.
inline std::map<std::string, Var> bind(Tape & tape, const ParamSet & params, bool trainable)
{
  std::map<std::string, Var> out;
  for (const auto & [name, value] : params) {
    out.emplace(name, trainable ? tape.parameter(value) : tape.constant(value));
  }
  return out;
}

/// Read gradients of bound parameters after Tape::backward().
inline ParamSet gradients(const Tape & tape, const std::map<std::string, Var> & bound)
{
  ParamSet out;
  for (const auto & [name, var] : bound) {
    out.emplace(name, tape.grad(var));
  }
  return out;
}

inline double global_norm(const ParamSet & grads)
{
  double sq = 0.0;
  for (const auto & [name, g] : grads) {
    for (double v : g.values()) {
      sq += v * v;
    }
  }
  return std::sqrt(sq);
}

/// Rescale all gradients so their joint L2 norm is at most @p max_norm. Returns the norm before clipping.
inline double clip_global_norm(ParamSet & grads, double max_norm)
{
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto & [name, g] : grads) {
      for (auto & v : g.values()) {
        v *= s;
      }
    }
  }
  return norm;
}

struct AdamConfig
{
  double learning_rate{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
};

struct AdamState
{
  AdamConfig config;
  std::int64_t step{0};
  ParamSet first_moment;
  ParamSet second_moment;
};

/**
 * @brief One bias-corrected Adam update, in place.
 *
 * Moment buffers are created on first use. Every parameter must have a
 * gradient of the same shape.
 */
inline void adam_step(ParamSet & params, const ParamSet & grads, AdamState & state)
{
  const auto & cfg = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (auto & [name, p] : params) {
    const auto git = grads.find(name);
    if (git == grads.end()) {
      throw DimensionError("adam_step: no gradient for " + name);
    }
    const Tensor & g = git->second;
    if (g.shape() != p.shape()) {
      throw DimensionError("adam_step: gradient shape mismatch for " + name);
    }
    auto & m = state.first_moment.try_emplace(name, Tensor::zeros(p.shape())).first->second;
    auto & v = state.second_moment.try_emplace(name, Tensor::zeros(p.shape())).first->second;
    if (m.shape() != p.shape() || v.shape() != p.shape()) {
      throw DimensionError("adam_step: moment shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

// Serialization. A parameter map is a JSON object
//   { "<name>": { "shape": [d0, d1, ...], "values": [row-major doubles] }, ... }
// Doubles are written in shortest round-trip form, so load(save(p)) == p bit for bit.

inline nlohmann::json tensor_to_json(const Tensor & t)
{
  return {{"shape", t.shape()}, {"values", t.storage()}};
}

inline Tensor tensor_from_json(const nlohmann::json & j)
{
  try {
    return Tensor(j.at("shape").get<Shape>(), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("tensor: ") + e.what());
  }
}

inline nlohmann::json params_to_json(const ParamSet & params)
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto & [name, t] : params) {
    j[name] = tensor_to_json(t);
  }
  return j;
}

inline ParamSet params_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw ParseError("parameter map must be a JSON object");
  }
  ParamSet out;
  for (const auto & [name, value] : j.items()) {
    out.emplace(name, tensor_from_json(value));
  }
  return out;
}

inline nlohmann::json adam_to_json(const AdamState & s)
{
  return {
    {"learning_rate", s.config.learning_rate},
    {"beta1", s.config.beta1},
    {"beta2", s.config.beta2},
    {"epsilon", s.config.epsilon},
    {"step", s.step},
    {"first_moment", params_to_json(s.first_moment)},
    {"second_moment", params_to_json(s.second_moment)}};
}

inline AdamState adam_from_json(const nlohmann::json & j)
{
  AdamState s;
  try {
    s.config.learning_rate = j.at("learning_rate").get<double>();
    s.config.beta1 = j.at("beta1").get<double>();
    s.config.beta2 = j.at("beta2").get<double>();
    s.config.epsilon = j.at("epsilon").get<double>();
    s.step = j.at("step").get<std::int64_t>();
    s.first_moment = params_from_json(j.at("first_moment"));
    s.second_moment = params_from_json(j.at("second_moment"));
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("optimizer state: ") + e.what());
  }
  return s;
}

}  // namespace pcgan::numerics

#endif  // PCGAN__NUMERICS__PARAMS_HPP_
