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

#ifndef PCGAN__EVAL_HPP_
#define PCGAN__EVAL_HPP_

#include "pcgan/data.hpp"
#include "pcgan/geometry.hpp"
#include "pcgan/model.hpp"
#include "pcgan/multipac.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace pcgan::eval
{

namespace detail
{

inline void require_aligned(const Trajectory & pred, const Trajectory & truth, const char * metric)
{
  if (pred.empty() || pred.size() != truth.size()) {
    throw DimensionError(
      std::string(metric) + ": trajectories must be non-empty and of equal length");
  }
}

inline double min_distance(Point p, const Trajectory & to)
{
  double best = std::numeric_limits<double>::infinity();
  for (const auto & q : to) {
    best = std::min(best, distance(p, q));
  }
  return best;
}

}  // namespace detail

/// Mean point-wise Euclidean distance.
inline double ade(const Trajectory & pred, const Trajectory & truth)
{
  detail::require_aligned(pred, truth, "ade");
  double s = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    s += distance(pred[t], truth[t]);
  }
  return s / static_cast<double>(pred.size());
}

/// Distance at the final step.
inline double fde(const Trajectory & pred, const Trajectory & truth)
{
  detail::require_aligned(pred, truth, "fde");
  return distance(pred.back(), truth.back());
}

/**
 * @brief Directed max-of-min distance from @p pred to @p truth.
 *
 * The largest distance from any predicted point to its closest ground-truth
 * point. See mhd_symmetric for the Dubuisson-Jain form.
 */
inline double mhd(const Trajectory & pred, const Trajectory & truth)
{
  if (pred.empty() || truth.empty()) {
    throw UsageError("mhd: trajectories must be non-empty");
  }
  double worst = 0.0;
  for (const auto & p : pred) {
    worst = std::max(worst, detail::min_distance(p, truth));
  }
  return worst;
}

/// Dubuisson-Jain modified Hausdorff distance: max of the two directed mean-of-min distances.
inline double mhd_symmetric(const Trajectory & a, const Trajectory & b)
{
  if (a.empty() || b.empty()) {
    throw UsageError("mhd_symmetric: trajectories must be non-empty");
  }
  auto directed = [](const Trajectory & from, const Trajectory & to) {
    double s = 0.0;
    for (const auto & p : from) {
      s += detail::min_distance(p, to);
    }
    return s / static_cast<double>(from.size());
  };
  return std::max(directed(a, b), directed(b, a));
}

/// Repeat the last observed displacement.
inline Trajectory cvm_predict(const Trajectory & observed, std::size_t horizon)
{
  if (observed.size() < 2) {
    throw UsageError("cvm_predict: need at least two observed points");
  }
  const Point v = observed.back() - observed[observed.size() - 2];
  Trajectory out;
  Point p = observed.back();
  for (std::size_t t = 0; t < horizon; ++t) {
    p = p + v;
    out.push_back(p);
  }
  return out;
}

/// Least-squares line through x(t) and y(t) separately, extrapolated.
inline Trajectory linear_predict(const Trajectory & observed, std::size_t horizon)
{
  const std::size_t n = observed.size();
  if (n < 2) {
    throw UsageError("linear_predict: need at least two observed points");
  }
  const double t_mean = static_cast<double>(n - 1) / 2.0;
  Point mean{0.0, 0.0};
  for (const auto & p : observed) {
    mean = mean + p;
  }
  mean = (1.0 / static_cast<double>(n)) * mean;
  double stt = 0.0;
  Point sty{0.0, 0.0};
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    stt += dt * dt;
    sty = sty + dt * (observed[t] - mean);
  }
  const Point slope = (1.0 / stt) * sty;
  Trajectory out;
  for (std::size_t h = 0; h < horizon; ++h) {
    const double dt = static_cast<double>(n + h) - t_mean;
    out.push_back(mean + dt * slope);
  }
  return out;
}

/// Predicts one future trajectory per pedestrian in world coordinates.
using Predictor = std::function<std::vector<Trajectory>(const data::Scene &)>;

inline Predictor cvm_predictor(std::size_t obs_len, std::size_t horizon)
{
  return [obs_len, horizon](const data::Scene & s) {
    std::vector<Trajectory> out;
    for (const auto & t : s.pedestrians) {
      out.push_back(cvm_predict(Trajectory(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(obs_len)), horizon));
    }
    return out;
  };
}

inline Predictor linear_predictor(std::size_t obs_len, std::size_t horizon)
{
  return [obs_len, horizon](const data::Scene & s) {
    std::vector<Trajectory> out;
    for (const auto & t : s.pedestrians) {
      out.push_back(linear_predict(Trajectory(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(obs_len)), horizon));
    }
    return out;
  };
}

/// Full model prediction for one scene, in world coordinates.
struct ScenePrediction
{
  model::PreparedScene prepared;
  std::vector<gmm::GmmSequence> mixtures;
  std::vector<multipac::AgentPaths> paths;
  /// Highest-weight modal path per agent, world coordinates.
  std::vector<Trajectory> best;
};

inline ScenePrediction predict_scene(
  const model::ParamSet & params, const model::ModelConfig & config,
  const multipac::Config & mp, const data::Scene & scene)
{
  ScenePrediction out;
  out.prepared = model::prepare(scene, config.obs_len);
  out.mixtures = model::generate(params, config, out.prepared);
  for (const auto & seq : out.mixtures) {
    out.paths.push_back(multipac::analyse(seq, mp));
    Trajectory world;
    for (const auto & p : multipac::most_likely_path(out.paths.back().paths).points) {
      world.push_back(p + out.prepared.origin);
    }
    out.best.push_back(std::move(world));
  }
  return out;
}

/// Generator + modal-path clustering, scored on the most likely path.
inline Predictor model_predictor(
  const model::ParamSet & params, const model::ModelConfig & config, const multipac::Config & mp)
{
  return [&params, config, mp](const data::Scene & s) {
    return predict_scene(params, config, mp, s).best;
  };
}

struct AgentError
{
  double ade{0.0};
  double fde{0.0};
  double mhd{0.0};
};

struct MetricsRow
{
  std::string dataset;
  std::size_t horizon{0};
  double ade{0.0};
  double fde{0.0};
  double mhd{0.0};
  std::size_t scenes{0};
  std::size_t agents{0};
};

/// Errors of every agent in every scene, in scene order.
inline std::vector<AgentError> agent_errors(
  const Predictor & predict, const std::vector<data::Scene> & scenes, std::size_t obs_len,
  std::size_t horizon)
{
  std::vector<AgentError> out;
  for (const auto & s : scenes) {
    if (s.length() != obs_len + horizon) {
      throw UsageError(
        "evaluate: scene length " + std::to_string(s.length()) + " does not match " +
        std::to_string(obs_len) + " + " + std::to_string(horizon));
    }
    const auto preds = predict(s);
    if (preds.size() != s.agent_count()) {
      throw DimensionError("evaluate: predictor returned the wrong number of agents");
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const Trajectory truth(s.pedestrians[i].begin() + static_cast<std::ptrdiff_t>(obs_len), s.pedestrians[i].end());
      out.push_back({ade(preds[i], truth), fde(preds[i], truth), mhd(preds[i], truth)});
    }
  }
  return out;
}

/// Average per-agent errors over every agent of every scene.
inline MetricsRow evaluate(
  const Predictor & predict, const std::vector<data::Scene> & scenes, std::size_t obs_len,
  std::size_t horizon, const std::string & dataset = "")
{
  if (scenes.empty()) {
    throw UsageError("evaluate: empty dataset");
  }
  const auto errors = agent_errors(predict, scenes, obs_len, horizon);
  MetricsRow row;
  row.dataset = dataset;
  row.horizon = horizon;
  row.scenes = scenes.size();
  row.agents = errors.size();
  for (const auto & e : errors) {
    row.ade += e.ade;
    row.fde += e.fde;
    row.mhd += e.mhd;
  }
  const auto n = static_cast<double>(errors.size());
  row.ade /= n;
  row.fde /= n;
  row.mhd /= n;
  return row;
}

inline void write_csv_header(std::ostream & out)
{
  out << "dataset,horizon,ade,fde,mhd,scenes,agents\n";
}

inline void write_csv_row(std::ostream & out, const MetricsRow & r)
{
  out << r.dataset << ',' << r.horizon << ',' << data::format_double(r.ade) << ','
      << data::format_double(r.fde) << ',' << data::format_double(r.mhd) << ',' << r.scenes << ','
      << r.agents << '\n';
}

inline nlohmann::json to_json(const MetricsRow & r)
{
  return {
    {"dataset", r.dataset}, {"horizon", r.horizon}, {"ade", r.ade}, {"fde", r.fde},
    {"mhd", r.mhd},         {"scenes", r.scenes},   {"agents", r.agents}};
}

/**
 * @brief Plot-ready dump of one scene prediction, world coordinates.
 *
 *   { "scene": i, "frames": [first, last], "tag": s, "vehicle": [[x, y], ...] | null,
 *     "agents": [ { "id", "observed": [[x, y]...], "truth": [[x, y]...],
 *                   "gmm": <steps as in the pcgan-gmm layout>,
 *                   "tree": <tree layout>, "modal_paths": [{"weight", "nodes", "points"}],
 *                   "best_path": index } ] }
 */
inline nlohmann::json prediction_to_json(
  std::size_t index, const data::Scene & scene, const ScenePrediction & pred)
{
  auto points = [](const Trajectory & t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto & p : t) {
      arr.push_back({p.x, p.y});
    }
    return arr;
  };
  const auto obs_len = pred.prepared.observed.front().size();
  const Point origin = pred.prepared.origin;
  nlohmann::json j = {
    {"scene", index},
    {"frames", {scene.first_frame, scene.last_frame()}},
    {"tag", scene.tag},
    {"vehicle", scene.vehicle ? points(*scene.vehicle) : nlohmann::json(nullptr)}};
  j["agents"] = nlohmann::json::array();
  for (std::size_t i = 0; i < scene.agent_count(); ++i) {
    const auto & track = scene.pedestrians[i];
    gmm::GmmSequence world = pred.mixtures[i];
    for (auto & step : world) {
      for (auto & c : step.components) {
        c.mu = c.mu + origin;
      }
    }
    j["agents"].push_back(
      {{"id", scene.agent_ids[i]},
       {"observed", points(Trajectory(track.begin(), track.begin() + static_cast<std::ptrdiff_t>(obs_len)))},
       {"truth", points(Trajectory(track.begin() + static_cast<std::ptrdiff_t>(obs_len), track.end()))},
       {"gmm", gmm::sequence_to_json(world)},
       {"tree", multipac::tree_to_json(pred.paths[i].tree, origin)},
       {"modal_paths", multipac::paths_to_json(pred.paths[i].paths, origin)},
       {"best_path", multipac::most_likely_index(pred.paths[i].paths)}});
  }
  return j;
}

}  // namespace pcgan::eval

#endif  // PCGAN__EVAL_HPP_
