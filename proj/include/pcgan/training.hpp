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

#ifndef PCGAN__TRAINING_HPP_
#define PCGAN__TRAINING_HPP_

#include "pcgan/data.hpp"
#include "pcgan/eval.hpp"
#include "pcgan/gmm.hpp"
#include "pcgan/model.hpp"
#include "pcgan/multipac.hpp"
#include "pcgan/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pcgan::training
{

using numerics::ParamSet;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

/// Scores are clamped to [kScoreFloor, 1 - kScoreFloor] before any logarithm.
inline constexpr double kScoreFloor = 1e-7;

struct TrainConfig
{
  std::size_t warmup_epochs{10};
  std::size_t total_epochs{100};
  std::size_t batch_size{32};
  double learning_rate{1e-3};
  /// Weight on the likelihood loss in the adversarial-phase generator objective.
  double alpha{0.1};
  double clip_norm{10.0};
  model::ModelConfig model;
  multipac::Config multipac;
  std::uint64_t seed{1};
  /// Save a checkpoint every N epochs; 0 disables periodic checkpoints.
  std::size_t checkpoint_every{0};
};

inline void validate(const TrainConfig & c)
{
  model::validate(c.model);
  if (c.total_epochs == 0 || c.batch_size == 0) {
    throw UsageError("train config: epochs and batch size must be positive");
  }
  if (c.warmup_epochs > c.total_epochs) {
    throw UsageError("train config: warmup epochs exceed total epochs");
  }
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw UsageError("train config: learning rate must be positive");
  }
  if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) {
    throw UsageError("train config: alpha must be non-negative");
  }
  if (c.alpha == 0.0 && c.warmup_epochs > 0) {
    throw UsageError("train config: alpha = 0 with warmup epochs leaves the likelihood loss unused");
  }
  if (!(c.clip_norm > 0.0)) {
    throw UsageError("train config: clip norm must be positive");
  }
  if (!(c.multipac.eps > 0.0) || !(c.multipac.min_weight > 0.0)) {
    throw UsageError("train config: multipac eps and min_weight must be positive");
  }
}

inline nlohmann::json to_json(const TrainConfig & c)
{
  return {
    {"warmup_epochs", c.warmup_epochs},
    {"total_epochs", c.total_epochs},
    {"batch_size", c.batch_size},
    {"learning_rate", c.learning_rate},
    {"alpha", c.alpha},
    {"clip_norm", c.clip_norm},
    {"model", model::to_json(c.model)},
    {"multipac_eps", c.multipac.eps},
    {"multipac_min_weight", c.multipac.min_weight},
    {"seed", c.seed},
    {"checkpoint_every", c.checkpoint_every}};
}

/// Overlay @p j onto @p base. Unknown keys raise UsageError.
inline TrainConfig train_config_from_json(const nlohmann::json & j, TrainConfig base = {})
{
  if (!j.is_object()) {
    throw UsageError("train config must be a JSON object");
  }
  try {
    for (const auto & [key, value] : j.items()) {
      if (key == "warmup_epochs") {
        base.warmup_epochs = value.get<std::size_t>();
      } else if (key == "total_epochs") {
        base.total_epochs = value.get<std::size_t>();
      } else if (key == "batch_size") {
        base.batch_size = value.get<std::size_t>();
      } else if (key == "learning_rate") {
        base.learning_rate = value.get<double>();
      } else if (key == "alpha") {
        base.alpha = value.get<double>();
      } else if (key == "clip_norm") {
        base.clip_norm = value.get<double>();
      } else if (key == "model") {
        auto merged = model::to_json(base.model);
        for (const auto & [mk, mv] : value.items()) {
          if (!merged.contains(mk)) {
            throw UsageError("train config: unknown model key '" + mk + "'");
          }
          merged[mk] = mv;
        }
        try {
          base.model = model::model_config_from_json(merged);
        } catch (const ParseError & e) {
          throw UsageError(std::string("train config: ") + e.what());
        }
      } else if (key == "multipac_eps") {
        base.multipac.eps = value.get<double>();
      } else if (key == "multipac_min_weight") {
        base.multipac.min_weight = value.get<double>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "checkpoint_every") {
        base.checkpoint_every = value.get<std::size_t>();
      } else {
        throw UsageError("train config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception & e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  return base;
}

// ---------------------------------------------------------------------------
// Adversarial losses, value level.

/// Discriminator score of one modal path and its MultiPAC weight.
struct FakeScore
{
  double score{0.5};
  double weight{1.0};
};

/// Real-track score and modal-path scores of one agent.
struct AgentScores
{
  double real{0.5};
  std::vector<FakeScore> fakes;
};

namespace detail
{

/// Reject scores that are not probabilities, then clamp away from 0 and 1.
inline double guard_score(double s)
{
  if (std::isnan(s) || s < 0.0 || s > 1.0) {
    throw NumericError("discriminator score outside [0, 1]: " + std::to_string(s));
  }
  return std::clamp(s, kScoreFloor, 1.0 - kScoreFloor);
}

inline void guard_scores(const Tensor & t)
{
  for (double s : t.values()) {
    guard_score(s);
  }
}

inline double fake_term(const FakeScore & f)
{
  if (std::isnan(f.weight) || f.weight < 0.0 || f.weight > 1.0) {
    throw NumericError("modal path weight outside [0, 1]");
  }
  return std::log(1.0 - f.weight * guard_score(f.score));
}

}  // namespace detail

/// -[log D(real) + sum_m log(1 - w_m D(fake_m))] averaged over agents.
inline double loss_adversarial_discriminator(std::span<const AgentScores> agents)
{
  if (agents.empty()) {
    throw UsageError("loss_adversarial_discriminator: no agents");
  }
  double total = 0.0;
  for (const auto & a : agents) {
    total += std::log(detail::guard_score(a.real));
    for (const auto & f : a.fakes) {
      total += detail::fake_term(f);
    }
  }
  return -total / static_cast<double>(agents.size());
}

/// sum_m log(1 - w_m D(fake_m)) averaged over agents.
inline double loss_adversarial_generator(std::span<const AgentScores> agents)
{
  if (agents.empty()) {
    throw UsageError("loss_adversarial_generator: no agents");
  }
  double total = 0.0;
  for (const auto & a : agents) {
    for (const auto & f : a.fakes) {
      total += detail::fake_term(f);
    }
  }
  return total / static_cast<double>(agents.size());
}

// ---------------------------------------------------------------------------
// Adversarial losses on the tape. Paths of every agent are stacked row-wise.

/// Sum over paths of log(1 - w D(fake)); @p fake and @p weights are [P x 1].
inline Var fake_log_sum(const Var & fake, const Var & weights)
{
  namespace nx = numerics;
  detail::guard_scores(fake.value());
  const auto d = nx::clamp(fake, kScoreFloor, 1.0 - kScoreFloor);
  return nx::sum(nx::log(nx::add_scalar(nx::neg(nx::mul(weights, d)), 1.0)));
}

/// Tape form of loss_adversarial_discriminator; @p real is [A x 1], one row per agent.
inline Var discriminator_loss(const Var & real, const Var & fake, const Var & weights)
{
  namespace nx = numerics;
  detail::guard_scores(real.value());
  const auto agents = static_cast<double>(real.value().rows());
  const auto real_term = nx::sum(nx::log(nx::clamp(real, kScoreFloor, 1.0 - kScoreFloor)));
  return nx::scale(nx::add(real_term, fake_log_sum(fake, weights)), -1.0 / agents);
}

/// Tape form of loss_adversarial_generator over @p agents agents.
inline Var generator_adversarial_loss(const Var & fake, const Var & weights, std::size_t agents)
{
  if (agents == 0) {
    throw UsageError("generator_adversarial_loss: no agents");
  }
  return numerics::scale(fake_log_sum(fake, weights), 1.0 / static_cast<double>(agents));
}

// ---------------------------------------------------------------------------
// One batch.

/// Future positions of every batch row at prediction step t, [rows x 2].
inline Tensor future_at(const model::SceneBatch & batch, std::size_t t)
{
  Tensor out = Tensor::zeros({batch.rows(), 2});
  std::size_t r = 0;
  for (const auto * s : batch.scenes) {
    for (const auto & track : s->future) {
      out(r, 0) = track.at(t).x;
      out(r, 1) = track.at(t).y;
      ++r;
    }
  }
  return out;
}

/// Likelihood loss of a batch: mean over scenes of the per-scene summed NLL.
inline Var likelihood_loss(const model::GeneratorOutput & out, const model::SceneBatch & batch)
{
  std::vector<Tensor> truth;
  for (std::size_t t = 0; t < out.steps.size(); ++t) {
    truth.push_back(future_at(batch, t));
  }
  return numerics::scale(
    gmm::nll_loss(out.steps, truth), 1.0 / static_cast<double>(batch.scenes.size()));
}

/// Modal-path trees and paths of every batch row.
struct BatchPaths
{
  std::vector<multipac::ModalPathTree> trees;
  std::vector<std::vector<multipac::ModalPath>> paths;
};

inline BatchPaths batch_paths(const model::GeneratorOutput & out, std::size_t rows, const multipac::Config & cfg)
{
  BatchPaths bp;
  for (std::size_t r = 0; r < rows; ++r) {
    auto ap = multipac::analyse(model::row_sequence(out, r), cfg);
    bp.trees.push_back(std::move(ap.tree));
    bp.paths.push_back(std::move(ap.paths));
  }
  return bp;
}

/**
 * @brief Discriminator input: observed steps followed by @p future steps.
 *
 * Track b belongs to batch row @p row_of_track[b]; @p future[t] is [B x 2].
 */
inline std::vector<Var> track_steps(
  Tape & tape, const model::SceneBatch & batch, const std::vector<std::size_t> & row_of_track,
  const std::vector<Var> & future)
{
  std::vector<Var> steps;
  for (std::size_t t = 0; t < batch.obs_len(); ++t) {
    steps.push_back(tape.constant(numerics::gather_rows(
      tape.constant(batch.observed_at(t)), row_of_track).value()));
  }
  steps.insert(steps.end(), future.begin(), future.end());
  return steps;
}

/// Path positions and weights as constants, with the owning row of each path.
struct FakeTracks
{
  std::vector<Tensor> steps;
  Tensor weights;
  std::vector<std::size_t> row_of_path;
};

inline FakeTracks fake_tracks(const BatchPaths & bp, std::size_t horizon)
{
  FakeTracks ft;
  std::vector<double> w;
  for (std::size_t r = 0; r < bp.paths.size(); ++r) {
    for (const auto & p : bp.paths[r]) {
      ft.row_of_path.push_back(r);
      w.push_back(p.weight);
    }
  }
  const std::size_t n = ft.row_of_path.size();
  ft.weights = Tensor({n, 1}, std::move(w));
  for (std::size_t t = 0; t < horizon; ++t) {
    Tensor s = Tensor::zeros({n, 2});
    std::size_t i = 0;
    for (const auto & row : bp.paths) {
      for (const auto & p : row) {
        s(i, 0) = p.points[t].x;
        s(i, 1) = p.points[t].y;
        ++i;
      }
    }
    ft.steps.push_back(std::move(s));
  }
  return ft;
}

/// Real-plus-fake discriminator loss with every input a constant.
inline Var discriminator_batch_loss(
  const model::Discriminator & d, Tape & tape, const model::SceneBatch & batch,
  const FakeTracks & fakes)
{
  const std::size_t rows = batch.rows(), horizon = fakes.steps.size();
  std::vector<std::size_t> owner(rows);
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  owner.insert(owner.end(), fakes.row_of_path.begin(), fakes.row_of_path.end());
  std::vector<Var> future;
  for (std::size_t t = 0; t < horizon; ++t) {
    future.push_back(tape.constant(
      numerics::stack_rows({tape.constant(future_at(batch, t)), tape.constant(fakes.steps[t])})
        .value()));
  }
  const auto scores = model::discriminate(d, tape, track_steps(tape, batch, owner, future));
  const auto real = numerics::gather_rows(scores, std::vector<std::size_t>(owner.begin(), owner.begin() + static_cast<std::ptrdiff_t>(rows)));
  std::vector<std::size_t> fake_rows(fakes.row_of_path.size());
  std::iota(fake_rows.begin(), fake_rows.end(), rows);
  const auto fake = numerics::gather_rows(scores, fake_rows);
  return discriminator_loss(real, fake, tape.constant(fakes.weights));
}

/// Generator adversarial loss with gradients flowing into the mixture outputs.
inline Var generator_batch_adversarial(
  const model::Discriminator & d, Tape & tape, const model::SceneBatch & batch,
  const model::GeneratorOutput & out, const BatchPaths & bp)
{
  const auto pv = multipac::path_vars(tape, out.steps, bp.trees, bp.paths);
  const auto scores = model::discriminate(d, tape, track_steps(tape, batch, pv.row_of_path, pv.steps));
  return generator_adversarial_loss(scores, pv.weights, batch.rows());
}

/// Value and gradients of one network objective.
struct Objective
{
  double value{0.0};
  ParamSet grads;
};

namespace detail
{

inline Var generator_objective_on(
  Tape & tape, const std::map<std::string, Var> & gv, const ParamSet & params, const TrainConfig & cfg,
  const model::SceneBatch & batch, bool adversarial)
{
  const auto g = model::Generator::bind(gv, cfg.model);
  const auto out = model::generate(g, tape, batch);
  auto loss = likelihood_loss(out, batch);
  if (adversarial) {
    const auto d = model::Discriminator::bind(
      model::bind_prefix(tape, params, "discriminator.", false), cfg.model);
    const auto bp = batch_paths(out, batch.rows(), cfg.multipac);
    loss = numerics::add(
      generator_batch_adversarial(d, tape, batch, out, bp), numerics::scale(loss, cfg.alpha));
  }
  return loss;
}

}  // namespace detail

/**
 * @brief Generator objective of one batch with every parameter held fixed.
 *
 * Returns L_lh when @p adversarial is false, otherwise
 * generator_adversarial_loss + alpha * L_lh, with gradients for every
 * generator parameter. Used by the training step and by gradient checks.
 */
inline Objective generator_objective(
  const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch, bool adversarial)
{
  Tape tape;
  const auto gv = model::bind_prefix(tape, params, "generator.", true);
  const auto loss = detail::generator_objective_on(tape, gv, params, cfg, batch, adversarial);
  tape.backward(loss);
  return {loss.value().item(), numerics::gradients(tape, gv)};
}

/// Value of generator_objective without the backward pass.
inline double generator_objective_value(
  const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch, bool adversarial)
{
  Tape tape;
  const auto gv = model::bind_prefix(tape, params, "generator.", false);
  return detail::generator_objective_on(tape, gv, params, cfg, batch, adversarial).value().item();
}

/// Constant fake tracks of the current generator for @p batch.
inline FakeTracks generator_fakes(const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch)
{
  Tape tape;
  const auto g = model::Generator::bind(model::bind_prefix(tape, params, "generator.", false), cfg.model);
  const auto out = model::generate(g, tape, batch);
  return fake_tracks(batch_paths(out, batch.rows(), cfg.multipac), cfg.model.pred_len);
}

/// Discriminator objective of one batch against the given fake tracks.
inline Objective discriminator_objective(
  const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch, const FakeTracks & fakes)
{
  Tape tape;
  const auto dv = model::bind_prefix(tape, params, "discriminator.", true);
  const auto loss = discriminator_batch_loss(model::Discriminator::bind(dv, cfg.model), tape, batch, fakes);
  tape.backward(loss);
  return {loss.value().item(), numerics::gradients(tape, dv)};
}

/// Discriminator objective of one batch, fake paths taken from the current generator.
inline Objective discriminator_objective(
  const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch)
{
  return discriminator_objective(params, cfg, batch, generator_fakes(params, cfg, batch));
}

/// Value of discriminator_objective against fixed fake tracks, without the backward pass.
inline double discriminator_objective_value(
  const ParamSet & params, const TrainConfig & cfg, const model::SceneBatch & batch, const FakeTracks & fakes)
{
  Tape tape;
  const auto dv = model::bind_prefix(tape, params, "discriminator.", false);
  return discriminator_batch_loss(model::Discriminator::bind(dv, cfg.model), tape, batch, fakes).value().item();
}

// ---------------------------------------------------------------------------
// Report.

struct EpochRecord
{
  std::size_t epoch{0};
  double l_lh{0.0};
  double g_adv{0.0};
  double d_loss{0.0};
  double val_ade{std::numeric_limits<double>::quiet_NaN()};
  double val_fde{std::numeric_limits<double>::quiet_NaN()};
  double val_mhd{std::numeric_limits<double>::quiet_NaN()};
};

/// One record per completed epoch, in epoch order.
struct TrainReport
{
  std::vector<EpochRecord> epochs;
};

inline void write_report_csv(std::ostream & out, const TrainReport & report)
{
  out << "epoch,l_lh,g_adv,d_loss,val_ade,val_fde,val_mhd\n";
  for (const auto & e : report.epochs) {
    out << e.epoch << ',' << data::format_double(e.l_lh) << ',' << data::format_double(e.g_adv)
        << ',' << data::format_double(e.d_loss) << ',' << data::format_double(e.val_ade) << ','
        << data::format_double(e.val_fde) << ',' << data::format_double(e.val_mhd) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trainer.

/**
 * @brief Stateful training loop.
 *
 * Epochs 1..warmup update the generator on L_lh alone. Later epochs run, per
 * batch, one discriminator step followed by one generator step on
 * generator_adversarial_loss + alpha * L_lh. Adversarial losses are also
 * evaluated (without updates) during warmup so every report row is complete.
 * Batch order is reshuffled each epoch from (seed, epoch), so a resumed run
 * follows the same sequence as an uninterrupted one.
 */
class Trainer
{
public:
  Trainer(TrainConfig config, const std::vector<data::Scene> & train, std::vector<data::Scene> val = {})
  : config_(std::move(config)), val_(std::move(val))
  {
    validate(config_);
    Rng rng(config_.seed);
    params_ = model::init_params(config_.model, rng);
    prepare(train);
  }

  /// Continue from @p ck; the model configurations must agree.
  Trainer(
    TrainConfig config, const model::Checkpoint & ck, const std::vector<data::Scene> & train,
    std::vector<data::Scene> val = {})
  : config_(std::move(config)), val_(std::move(val))
  {
    validate(config_);
    if (model::to_json(ck.config) != model::to_json(config_.model)) {
      throw UsageError("resume: checkpoint model configuration differs from the train configuration");
    }
    params_ = ck.params;
    epoch_ = static_cast<std::size_t>(ck.epoch);
    if (ck.generator_optimizer && ck.discriminator_optimizer) {
      gen_opt_ = *ck.generator_optimizer;
      disc_opt_ = *ck.discriminator_optimizer;
    }
    prepare(train);
  }

  bool done() const { return epoch_ >= config_.total_epochs; }
  std::size_t epoch() const { return epoch_; }
  const ParamSet & params() const { return params_; }
  const TrainReport & report() const { return report_; }
  const TrainConfig & config() const { return config_; }

  model::Checkpoint checkpoint() const
  {
    return {config_.model, params_, static_cast<int>(epoch_), gen_opt_, disc_opt_, to_json(config_)};
  }

  /// Train one epoch and append its record.
  const EpochRecord & run_epoch()
  {
    if (done()) {
      throw UsageError("train: all epochs already completed");
    }
    const bool adversarial = epoch_ >= config_.warmup_epochs;
    std::vector<std::size_t> order(scenes_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{config_.seed, static_cast<std::uint64_t>(epoch_ + 1)};
    Rng shuffle_rng(seq);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch_ + 1;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config_.batch_size) {
      std::vector<const model::PreparedScene *> ptrs;
      for (std::size_t i = b; i < std::min(order.size(), b + config_.batch_size); ++i) {
        ptrs.push_back(&scenes_[order[i]]);
      }
      const model::SceneBatch batch(ptrs);
      const auto losses = step(batch, adversarial);
      for (double v : {losses.l_lh, losses.g_adv, losses.d_loss}) {
        if (!std::isfinite(v)) {
          throw NumericError(
            "train: non-finite loss at epoch " + std::to_string(rec.epoch) + ", batch " +
            std::to_string(batches + 1));
        }
      }
      rec.l_lh += losses.l_lh;
      rec.g_adv += losses.g_adv;
      rec.d_loss += losses.d_loss;
      ++batches;
    }
    rec.l_lh /= static_cast<double>(batches);
    rec.g_adv /= static_cast<double>(batches);
    rec.d_loss /= static_cast<double>(batches);
    if (!val_.empty()) {
      const auto row = eval::evaluate(
        eval::model_predictor(params_, config_.model, config_.multipac), val_, config_.model.obs_len,
        config_.model.pred_len);
      rec.val_ade = row.ade;
      rec.val_fde = row.fde;
      rec.val_mhd = row.mhd;
    }
    ++epoch_;
    report_.epochs.push_back(rec);
    return report_.epochs.back();
  }

private:
  struct BatchLosses
  {
    double l_lh{0.0};
    double g_adv{0.0};
    double d_loss{0.0};
  };

  void prepare(const std::vector<data::Scene> & train)
  {
    if (train.empty()) {
      throw UsageError("train: empty dataset");
    }
    for (const auto & s : train) {
      if (s.length() != config_.model.obs_len + config_.model.pred_len) {
        throw UsageError("train: scene length does not match obs_len + pred_len");
      }
      scenes_.push_back(model::prepare(s, config_.model.obs_len));
    }
    for (const auto & s : val_) {
      if (s.length() != config_.model.obs_len + config_.model.pred_len) {
        throw UsageError("train: validation scene length does not match obs_len + pred_len");
      }
    }
    gen_opt_.config.learning_rate = config_.learning_rate;
    disc_opt_.config.learning_rate = config_.learning_rate;
  }

  static ParamSet subset(const ParamSet & all, const std::string & prefix)
  {
    ParamSet out;
    for (const auto & [name, value] : all) {
      if (name.rfind(prefix, 0) == 0) {
        out.emplace(name, value);
      }
    }
    return out;
  }

  void apply(const std::string & prefix, ParamSet grads, numerics::AdamState & opt)
  {
    numerics::clip_global_norm(grads, config_.clip_norm);
    auto part = subset(params_, prefix);
    numerics::adam_step(part, grads, opt);
    for (auto & [name, value] : part) {
      params_.at(name) = std::move(value);
    }
  }

  BatchLosses step(const model::SceneBatch & batch, bool adversarial)
  {
    namespace nx = numerics;
    BatchLosses out;
    Tape tape;
    const auto gv = model::bind_prefix(tape, params_, "generator.", true);
    const auto g = model::Generator::bind(gv, config_.model);
    const auto gen = model::generate(g, tape, batch);
    const auto l_lh = likelihood_loss(gen, batch);
    out.l_lh = l_lh.value().item();
    const auto bp = batch_paths(gen, batch.rows(), config_.multipac);

    // Discriminator step on constant real and fake tracks.
    {
      Tape dtape;
      const auto dv = model::bind_prefix(dtape, params_, "discriminator.", adversarial);
      const auto d = model::Discriminator::bind(dv, config_.model);
      const auto loss = discriminator_batch_loss(d, dtape, batch, fake_tracks(bp, config_.model.pred_len));
      out.d_loss = loss.value().item();
      if (adversarial) {
        dtape.backward(loss);
        apply("discriminator.", nx::gradients(dtape, dv), disc_opt_);
      }
    }

    // Generator step against the updated discriminator.
    const auto d = model::Discriminator::bind(
      model::bind_prefix(tape, params_, "discriminator.", false), config_.model);
    const auto g_adv = generator_batch_adversarial(d, tape, batch, gen, bp);
    out.g_adv = g_adv.value().item();
    const auto objective = adversarial ? nx::add(g_adv, nx::scale(l_lh, config_.alpha)) : l_lh;
    tape.backward(objective);
    apply("generator.", nx::gradients(tape, gv), gen_opt_);
    return out;
  }

  TrainConfig config_;
  std::vector<data::Scene> val_;
  std::vector<model::PreparedScene> scenes_;
  ParamSet params_;
  numerics::AdamState gen_opt_;
  numerics::AdamState disc_opt_;
  std::size_t epoch_{0};
  TrainReport report_;
};

struct TrainResult
{
  ParamSet params;
  TrainReport report;
};

/// Called after every epoch with the fresh record and the trainer state.
using EpochCallback = std::function<void(const EpochRecord &, const Trainer &)>;

/// Run the full schedule from fresh parameters.
inline TrainResult train(
  const std::vector<data::Scene> & dataset, const TrainConfig & config,
  const std::vector<data::Scene> & val = {}, const EpochCallback & on_epoch = {})
{
  Trainer trainer(config, dataset, val);
  while (!trainer.done()) {
    const auto & rec = trainer.run_epoch();
    if (on_epoch) {
      on_epoch(rec, trainer);
    }
  }
  return {trainer.params(), trainer.report()};
}

}  // namespace pcgan::training

#endif  // PCGAN__TRAINING_HPP_
