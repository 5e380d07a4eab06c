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

#ifndef PCGAN__MODEL_HPP_
#define PCGAN__MODEL_HPP_

#include "pcgan/data.hpp"
#include "pcgan/gmm.hpp"
#include "pcgan/numerics.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pcgan::model
{

using numerics::ParamSet;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

/// Architecture sizes. Stored in every checkpoint and checked on load.
struct ModelConfig
{
  std::size_t obs_len{8};
  std::size_t pred_len{12};
  std::size_t mixture_components{6};
  std::size_t embed_size{16};
  std::size_t generator_hidden{32};
  std::size_t discriminator_hidden{64};
  std::size_t mlp_hidden{64};
  std::size_t relative_embed{16};

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

inline void validate(const ModelConfig & c)
{
  if (c.obs_len < 2 || c.pred_len < 1 || c.mixture_components < 1 || c.embed_size < 1 ||
      c.generator_hidden < 1 || c.discriminator_hidden < 1 || c.mlp_hidden < 1 ||
      c.relative_embed < 1) {
    throw UsageError("invalid model configuration");
  }
}

inline nlohmann::json to_json(const ModelConfig & c)
{
  return {
    {"obs_len", c.obs_len},
    {"pred_len", c.pred_len},
    {"k", c.mixture_components},
    {"embed_size", c.embed_size},
    {"generator_hidden", c.generator_hidden},
    {"discriminator_hidden", c.discriminator_hidden},
    {"mlp_hidden", c.mlp_hidden},
    {"relative_embed", c.relative_embed}};
}

inline ModelConfig model_config_from_json(const nlohmann::json & j)
{
  ModelConfig c;
  try {
    c.obs_len = j.at("obs_len").get<std::size_t>();
    c.pred_len = j.at("pred_len").get<std::size_t>();
    c.mixture_components = j.at("k").get<std::size_t>();
    c.embed_size = j.at("embed_size").get<std::size_t>();
    c.generator_hidden = j.at("generator_hidden").get<std::size_t>();
    c.discriminator_hidden = j.at("discriminator_hidden").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.relative_embed = j.at("relative_embed").get<std::size_t>();
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Parameters
//
// Naming scheme (module.layer.matrix); weights are [fan_in x fan_out] and
// applied as x * W + b:
//
//   generator.embed_obs.{weight,bias}        2 -> E         (encoder input)
//   generator.encoder.{w_ih,w_hh,bias}       LSTM E -> H
//   generator.gvat.relative.{weight,bias}    4 -> R         (dx, dy, zx, zy)
//   generator.gvat.score.{weight,bias}       R + 2H -> 1
//   generator.gvat.value.{weight,bias}       H -> H
//   generator.embed_dec.{weight,bias}        2 -> E         (first decoder input)
//   generator.mlp_dec.hidden.{weight,bias}   2H -> M, ReLU
//   generator.mlp_dec.out.{weight,bias}      M -> H
//   generator.decoder.{w_ih,w_hh,bias}       LSTM E -> H
//   generator.mdn.{weight,bias}              H -> 6K
//   discriminator.embed.{weight,bias}        2 -> E
//   discriminator.encoder.{w_ih,w_hh,bias}   LSTM E -> D
//   discriminator.classifier.hidden.{weight,bias}  D -> M, ReLU
//   discriminator.classifier.out.{weight,bias}     M -> 1, sigmoid
//
// LSTM gate columns are laid out [input | forget | cell | output], each H wide.

namespace detail
{

inline void add_linear(ParamSet & p, const std::string & name, std::size_t in, std::size_t out, Rng & rng)
{
  p.emplace(name + ".weight", numerics::init_weight(in, out, rng));
  p.emplace(name + ".bias", numerics::init_bias(out));
}

inline void add_lstm(ParamSet & p, const std::string & name, std::size_t in, std::size_t hidden, Rng & rng)
{
  p.emplace(name + ".w_ih", numerics::init_weight(in, 4 * hidden, rng));
  p.emplace(name + ".w_hh", numerics::init_weight(hidden, 4 * hidden, rng));
  p.emplace(name + ".bias", numerics::init_bias(4 * hidden));
}

}  // namespace detail

inline ParamSet init_generator(const ModelConfig & c, Rng & rng)
{
  validate(c);
  ParamSet p;
  const auto e = c.embed_size, h = c.generator_hidden;
  detail::add_linear(p, "generator.embed_obs", 2, e, rng);
  detail::add_lstm(p, "generator.encoder", e, h, rng);
  detail::add_linear(p, "generator.gvat.relative", 4, c.relative_embed, rng);
  detail::add_linear(p, "generator.gvat.score", c.relative_embed + 2 * h, 1, rng);
  detail::add_linear(p, "generator.gvat.value", h, h, rng);
  detail::add_linear(p, "generator.embed_dec", 2, e, rng);
  detail::add_linear(p, "generator.mlp_dec.hidden", 2 * h, c.mlp_hidden, rng);
  detail::add_linear(p, "generator.mlp_dec.out", c.mlp_hidden, h, rng);
  detail::add_lstm(p, "generator.decoder", e, h, rng);
  detail::add_linear(p, "generator.mdn", h, gmm::kRawPerComponent * c.mixture_components, rng);
  return p;
}

inline ParamSet init_discriminator(const ModelConfig & c, Rng & rng)
{
  validate(c);
  ParamSet p;
  detail::add_linear(p, "discriminator.embed", 2, c.embed_size, rng);
  detail::add_lstm(p, "discriminator.encoder", c.embed_size, c.discriminator_hidden, rng);
  detail::add_linear(p, "discriminator.classifier.hidden", c.discriminator_hidden, c.mlp_hidden, rng);
  detail::add_linear(p, "discriminator.classifier.out", c.mlp_hidden, 1, rng);
  return p;
}

/// Throws DimensionError unless @p params has exactly the names and shapes @p expected has.
inline void check_layout(const ParamSet & params, const ParamSet & expected)
{
  if (params.size() != expected.size()) {
    throw DimensionError("parameter count does not match the model configuration");
  }
  for (const auto & [name, t] : expected) {
    const auto it = params.find(name);
    if (it == params.end()) {
      throw DimensionError("missing parameter " + name);
    }
    if (it->second.shape() != t.shape()) {
      throw DimensionError(
        "parameter " + name + " has shape " + numerics::shape_string(it->second.shape()) +
        ", expected " + numerics::shape_string(t.shape()));
    }
  }
}

// ---------------------------------------------------------------------------
// Layers bound to a tape

struct Linear
{
  Var weight;
  Var bias;

  Var operator()(const Var & x) const { return numerics::add(numerics::matmul(x, weight), bias); }
};

/// LSTM cell; gates [input | forget | cell | output].
struct LstmCell
{
  Var w_ih;
  Var w_hh;
  Var bias;
  std::size_t hidden{0};

  struct State
  {
    Var h;
    Var c;
  };

  /// One step. An invalid @p input stands for the all-zero input vector.
  State step(const std::optional<Var> & input, const State & prev) const
  {
    namespace nx = numerics;
    Var gates = nx::matmul(prev.h, w_hh);
    if (input) {
      gates = nx::add(gates, nx::matmul(*input, w_ih));
    }
    gates = nx::add(gates, bias);
    const auto i = nx::sigmoid(nx::slice(gates, 0, hidden));
    const auto f = nx::sigmoid(nx::slice(gates, hidden, 2 * hidden));
    const auto g = nx::tanh(nx::slice(gates, 2 * hidden, 3 * hidden));
    const auto o = nx::sigmoid(nx::slice(gates, 3 * hidden, 4 * hidden));
    const auto c = nx::add(nx::mul(f, prev.c), nx::mul(i, g));
    return {nx::mul(o, nx::tanh(c)), c};
  }

  State zero_state(Tape & tape, std::size_t rows) const
  {
    return {
      tape.constant(Tensor::zeros({rows, hidden})), tape.constant(Tensor::zeros({rows, hidden}))};
  }
};

namespace detail
{

inline Var get(const std::map<std::string, Var> & vars, const std::string & name)
{
  const auto it = vars.find(name);
  if (it == vars.end()) {
    throw UsageError("parameter " + name + " is not bound");
  }
  return it->second;
}

inline Linear linear(const std::map<std::string, Var> & v, const std::string & name)
{
  return {get(v, name + ".weight"), get(v, name + ".bias")};
}

inline LstmCell lstm(const std::map<std::string, Var> & v, const std::string & name, std::size_t hidden)
{
  return {get(v, name + ".w_ih"), get(v, name + ".w_hh"), get(v, name + ".bias"), hidden};
}

}  // namespace detail

struct Generator
{
  ModelConfig config;
  Linear embed_obs;
  LstmCell encoder;
  Linear gvat_relative;
  Linear gvat_score;
  Linear gvat_value;
  Linear embed_dec;
  Linear mlp_hidden;
  Linear mlp_out;
  LstmCell decoder;
  Linear mdn;

  static Generator bind(const std::map<std::string, Var> & v, const ModelConfig & c)
  {
    using detail::linear;
    using detail::lstm;
    return {
      c,
      linear(v, "generator.embed_obs"),
      lstm(v, "generator.encoder", c.generator_hidden),
      linear(v, "generator.gvat.relative"),
      linear(v, "generator.gvat.score"),
      linear(v, "generator.gvat.value"),
      linear(v, "generator.embed_dec"),
      linear(v, "generator.mlp_dec.hidden"),
      linear(v, "generator.mlp_dec.out"),
      lstm(v, "generator.decoder", c.generator_hidden),
      linear(v, "generator.mdn")};
  }
};

struct Discriminator
{
  ModelConfig config;
  Linear embed;
  LstmCell encoder;
  Linear hidden;
  Linear out;

  static Discriminator bind(const std::map<std::string, Var> & v, const ModelConfig & c)
  {
    using detail::linear;
    return {
      c, linear(v, "discriminator.embed"),
      detail::lstm(v, "discriminator.encoder", c.discriminator_hidden),
      linear(v, "discriminator.classifier.hidden"), linear(v, "discriminator.classifier.out")};
  }
};

/// Bind only the parameters whose names start with @p prefix.
inline std::map<std::string, Var> bind_prefix(
  Tape & tape, const ParamSet & params, const std::string & prefix, bool trainable)
{
  std::map<std::string, Var> out;
  for (const auto & [name, value] : params) {
    if (name.rfind(prefix, 0) == 0) {
      out.emplace(name, trainable ? tape.parameter(value) : tape.constant(value));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model inputs

/**
 * @brief A scene in model coordinates.
 *
 * Positions are shifted so the pedestrian centroid at the last observed frame
 * is the origin; `origin` maps predictions back to world coordinates.
 */
struct PreparedScene
{
  std::vector<Trajectory> observed;
  std::vector<Trajectory> future;
  std::optional<Trajectory> vehicle_observed;
  Point origin;

  std::size_t agent_count() const { return observed.size(); }
};

/// Split a scene into observation and future, in centroid-relative coordinates.
inline PreparedScene prepare(const data::Scene & scene, std::size_t obs_len)
{
  data::validate(scene);
  if (scene.length() < obs_len || obs_len == 0) {
    throw DataError("scene shorter than the observation window");
  }
  PreparedScene out;
  Point c{0.0, 0.0};
  for (const auto & t : scene.pedestrians) {
    c = c + t[obs_len - 1];
  }
  c = (1.0 / static_cast<double>(scene.agent_count())) * c;
  out.origin = c;
  for (const auto & t : scene.pedestrians) {
    Trajectory obs, fut;
    for (std::size_t f = 0; f < t.size(); ++f) {
      (f < obs_len ? obs : fut).push_back(t[f] - c);
    }
    out.observed.push_back(std::move(obs));
    out.future.push_back(std::move(fut));
  }
  if (scene.vehicle) {
    Trajectory v;
    for (std::size_t f = 0; f < obs_len; ++f) {
      v.push_back((*scene.vehicle)[f] - c);
    }
    out.vehicle_observed = std::move(v);
  }
  return out;
}

/// Agents of several scenes stacked row-wise; scene s owns rows [offsets[s], offsets[s+1]).
struct SceneBatch
{
  std::vector<const PreparedScene *> scenes;
  std::vector<std::size_t> offsets{0};

  explicit SceneBatch(const std::vector<const PreparedScene *> & s) : scenes(s)
  {
    for (const auto * p : scenes) {
      offsets.push_back(offsets.back() + p->agent_count());
    }
  }

  std::size_t rows() const { return offsets.back(); }

  /// Positions of every agent at observation step t, [rows x 2].
  Tensor observed_at(std::size_t t) const
  {
    Tensor out = Tensor::zeros({rows(), 2});
    std::size_t r = 0;
    for (const auto * s : scenes) {
      for (const auto & track : s->observed) {
        out(r, 0) = track.at(t).x;
        out(r, 1) = track.at(t).y;
        ++r;
      }
    }
    return out;
  }

  std::size_t obs_len() const { return scenes.front()->observed.front().size(); }
};

// ---------------------------------------------------------------------------
// Generator pieces

/// Run the encoder over every observed step. Final state, [rows x H] each.
inline LstmCell::State encode(const Generator & g, Tape & tape, const SceneBatch & batch)
{
  auto state = g.encoder.zero_state(tape, batch.rows());
  for (std::size_t t = 0; t < batch.obs_len(); ++t) {
    const auto e = g.embed_obs(tape.constant(batch.observed_at(t)));
    state = g.encoder.step(e, state);
  }
  return state;
}

struct PoolResult
{
  /// Attention-weighted neighbour summary per agent, [rows x H].
  Var pooled;
  /// concat(h_i, pooled_i), [rows x 2H].
  Var combined;
  /// (i, j) row pairs, i-major, j != i, within each scene.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  /// Attention weight per pair (values only).
  std::vector<double> attention;
};

/**
 * @brief Attention pooling over neighbours with an explicit vehicle offset.
 *
 * For every ordered pair (i, j) of agents in the same scene the pair feature
 * is (x_i - x_j, y_i - y_j, z_i), with z_i from @p vehicle_offset ([rows x 2]).
 * Scores come from concat(embed(feature), h_j, h_i), are normalized by a
 * softmax over j, and the pooled vector is the sum over j of
 * value(a_ij * h_j). Agents alone in their scene pool to zero.
 */
inline PoolResult gvat_pool_with_offsets(
  const Generator & g, Tape & tape, const std::vector<std::size_t> & offsets,
  const Tensor & positions, const Tensor & vehicle_offset, const Var & hidden)
{
  namespace nx = numerics;
  const std::size_t rows = offsets.back();
  const std::size_t h = g.config.generator_hidden;
  if (positions.rows() != rows || vehicle_offset.rows() != rows || hidden.value().rows() != rows) {
    throw DimensionError("gvat_pool: row counts disagree");
  }
  PoolResult out;
  std::vector<std::size_t> segment{0};
  std::vector<std::size_t> idx_i, idx_j;
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
      for (std::size_t j = offsets[s]; j < offsets[s + 1]; ++j) {
        if (j != i) {
          out.pairs.emplace_back(i, j);
          idx_i.push_back(i);
          idx_j.push_back(j);
        }
      }
      segment.push_back(out.pairs.size());
    }
  }
  const std::size_t p = out.pairs.size();
  if (p == 0) {
    out.pooled = tape.constant(Tensor::zeros({rows, h}));
    out.combined = nx::concat({hidden, out.pooled});
    return out;
  }
  Tensor features = Tensor::zeros({p, 4});
  for (std::size_t k = 0; k < p; ++k) {
    const auto [i, j] = out.pairs[k];
    features(k, 0) = positions(i, 0) - positions(j, 0);
    features(k, 1) = positions(i, 1) - positions(j, 1);
    features(k, 2) = vehicle_offset(i, 0);
    features(k, 3) = vehicle_offset(i, 1);
  }
  const auto rel = g.gvat_relative(tape.constant(std::move(features)));
  const auto h_j = nx::gather_rows(hidden, idx_j);
  const auto h_i = nx::gather_rows(hidden, idx_i);
  const auto scores = g.gvat_score(nx::concat({rel, h_j, h_i}));
  const auto attn = nx::segment_softmax(scores, segment);
  const auto values = g.gvat_value(nx::mul_rows(h_j, attn));
  out.pooled = nx::segment_sum_rows(values, segment);
  out.combined = nx::concat({hidden, out.pooled});
  out.attention.assign(attn.value().values().begin(), attn.value().values().end());
  return out;
}

/// Per-agent offset to the scene's vehicle at the last observed step, (0, 0) without one.
inline Tensor vehicle_offsets(const SceneBatch & batch)
{
  Tensor z = Tensor::zeros({batch.rows(), 2});
  const std::size_t last = batch.obs_len() - 1;
  std::size_t r = 0;
  for (const auto * s : batch.scenes) {
    for (const auto & track : s->observed) {
      if (s->vehicle_observed) {
        const Point d = track[last] - (*s->vehicle_observed)[last];
        z(r, 0) = d.x;
        z(r, 1) = d.y;
      }
      ++r;
    }
  }
  return z;
}

/// Attention pooling at the last observed step.
inline PoolResult gvat_pool(const Generator & g, Tape & tape, const SceneBatch & batch, const Var & hidden)
{
  return gvat_pool_with_offsets(
    g, tape, batch.offsets, batch.observed_at(batch.obs_len() - 1), vehicle_offsets(batch), hidden);
}

/**
 * @brief Zero-feed decoding into one mixture per prediction step.
 *
 * The decoder starts from the encoder state. Before every LSTM step the
 * previous hidden state and the pooled vector go through MLP_dec. The first
 * step's input is embed_dec(last observed position); every later input is
 * zero. The head's mean outputs are per-step displacements: component c's
 * mean at step t is the agent's last observed position plus the sum of
 * component c's displacements over steps 0..t.
 */
inline std::vector<gmm::MixtureVars> decode(
  const Generator & g, Tape & tape, const LstmCell::State & encoded, const Var & pooled,
  const Tensor & last_positions, std::size_t horizon)
{
  namespace nx = numerics;
  if (horizon == 0) {
    throw UsageError("decode: horizon must be at least 1");
  }
  const std::size_t rows = last_positions.rows();
  const std::size_t k = g.config.mixture_components;
  Tensor anchor_x = Tensor::zeros({rows, k});
  Tensor anchor_y = Tensor::zeros({rows, k});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      anchor_x(r, c) = last_positions(r, 0);
      anchor_y(r, c) = last_positions(r, 1);
    }
  }
  auto cum_x = tape.constant(std::move(anchor_x));
  auto cum_y = tape.constant(std::move(anchor_y));

  std::vector<gmm::MixtureVars> steps;
  steps.reserve(horizon);
  auto state = encoded;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto mixed = g.mlp_out(nx::relu(g.mlp_hidden(nx::concat({state.h, pooled}))));
    std::optional<Var> input;
    if (t == 0) {
      input = g.embed_dec(tape.constant(last_positions));
    }
    state = g.decoder.step(input, {mixed, state.c});
    auto mix = gmm::mdn_activate(g.mdn(state.h), k);
    cum_x = nx::add(cum_x, mix.mu_x);
    cum_y = nx::add(cum_y, mix.mu_y);
    mix.mu_x = cum_x;
    mix.mu_y = cum_y;
    steps.push_back(mix);
  }
  return steps;
}

struct GeneratorOutput
{
  /// One mixture per prediction step; rows follow the batch's agent order.
  std::vector<gmm::MixtureVars> steps;
  PoolResult pool;
};

/// encode -> gvat_pool -> decode for every scene in the batch.
inline GeneratorOutput generate(const Generator & g, Tape & tape, const SceneBatch & batch)
{
  const auto encoded = encode(g, tape, batch);
  auto pool = gvat_pool(g, tape, batch, encoded.h);
  auto steps = decode(
    g, tape, encoded, pool.pooled, batch.observed_at(batch.obs_len() - 1), g.config.pred_len);
  return {std::move(steps), std::move(pool)};
}

/// Mixture sequence of one batch row as plain values.
inline gmm::GmmSequence row_sequence(const GeneratorOutput & out, std::size_t row)
{
  gmm::GmmSequence seq;
  for (const auto & s : out.steps) {
    seq.push_back(gmm::to_step(s, row));
  }
  return seq;
}

/// Value-only generation for one prepared scene: one mixture sequence per agent.
inline std::vector<gmm::GmmSequence> generate(
  const ParamSet & params, const ModelConfig & config, const PreparedScene & scene)
{
  Tape tape;
  const auto g = Generator::bind(bind_prefix(tape, params, "generator.", false), config);
  const SceneBatch batch({&scene});
  const auto out = generate(g, tape, batch);
  std::vector<gmm::GmmSequence> seqs;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    seqs.push_back(row_sequence(out, r));
  }
  return seqs;
}

// ---------------------------------------------------------------------------
// Discriminator

/**
 * @brief Score full tracks; @p steps[t] holds the position of every track at step t ([B x 2]).
 *
 * Returns probabilities that each track is real, [B x 1].
 */
inline Var discriminate(const Discriminator & d, Tape & tape, const std::vector<Var> & steps)
{
  namespace nx = numerics;
  if (steps.empty()) {
    throw DimensionError("discriminate: empty track");
  }
  auto state = d.encoder.zero_state(tape, steps.front().value().rows());
  for (const auto & x : steps) {
    state = d.encoder.step(d.embed(x), state);
  }
  return nx::sigmoid(d.out(nx::relu(d.hidden(state.h))));
}

/// Value-only score of one observed track followed by a candidate future.
inline double discriminate(
  const ParamSet & params, const ModelConfig & config, const Trajectory & observed,
  const Trajectory & candidate)
{
  if (observed.size() != config.obs_len || candidate.size() != config.pred_len) {
    throw DimensionError("discriminate: track length does not match the model configuration");
  }
  Tape tape;
  const auto d = Discriminator::bind(bind_prefix(tape, params, "discriminator.", false), config);
  std::vector<Var> steps;
  for (const auto & traj : {observed, candidate}) {
    for (const auto & p : traj) {
      steps.push_back(tape.constant(Tensor::matrix(1, 2, {p.x, p.y})));
    }
  }
  return discriminate(d, tape, steps).value().item();
}

// ---------------------------------------------------------------------------
// Checkpoints
//
//   { "format": "pcgan-checkpoint", "version": 1,
//     "model": { ModelConfig },
//     "epoch": <completed epochs>,
//     "params": { parameter map, see numerics/params.hpp },
//     "optimizer": { "generator": {...}, "discriminator": {...} }   (optional)
//     "train_config": {...} }                                        (optional)

struct Checkpoint
{
  ModelConfig config;
  ParamSet params;
  int epoch{0};
  std::optional<numerics::AdamState> generator_optimizer;
  std::optional<numerics::AdamState> discriminator_optimizer;
  nlohmann::json train_config;
};

inline ParamSet init_params(const ModelConfig & c, Rng & rng)
{
  auto p = init_generator(c, rng);
  p.merge(init_discriminator(c, rng));
  return p;
}

inline nlohmann::json checkpoint_to_json(const Checkpoint & ck)
{
  nlohmann::json j = {
    {"format", "pcgan-checkpoint"},
    {"version", 1},
    {"model", to_json(ck.config)},
    {"epoch", ck.epoch},
    {"params", numerics::params_to_json(ck.params)}};
  if (ck.generator_optimizer && ck.discriminator_optimizer) {
    j["optimizer"] = {
      {"generator", numerics::adam_to_json(*ck.generator_optimizer)},
      {"discriminator", numerics::adam_to_json(*ck.discriminator_optimizer)}};
  }
  if (!ck.train_config.is_null()) {
    j["train_config"] = ck.train_config;
  }
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json & j)
{
  Checkpoint ck;
  try {
    if (j.at("format").get<std::string>() != "pcgan-checkpoint") {
      throw ParseError("not a pcgan checkpoint");
    }
    if (j.at("version").get<int>() != 1) {
      throw ParseError("unsupported checkpoint version");
    }
    ck.config = model_config_from_json(j.at("model"));
    ck.epoch = j.at("epoch").get<int>();
    ck.params = numerics::params_from_json(j.at("params"));
    if (j.contains("optimizer")) {
      ck.generator_optimizer = numerics::adam_from_json(j.at("optimizer").at("generator"));
      ck.discriminator_optimizer = numerics::adam_from_json(j.at("optimizer").at("discriminator"));
    }
    if (j.contains("train_config")) {
      ck.train_config = j.at("train_config");
    }
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  Rng rng(0);
  check_layout(ck.params, init_params(ck.config, rng));
  return ck;
}

inline void save_checkpoint(const std::string & path, const Checkpoint & ck)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << checkpoint_to_json(ck).dump() << '\n';
  if (!out) {
    throw IoError("failed writing " + path);
  }
}

inline Checkpoint load_checkpoint(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(path + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace pcgan::model

#endif  // PCGAN__MODEL_HPP_
