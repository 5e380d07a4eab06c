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

#include "oracles.hpp"
#include "support.hpp"

#include "pcgan/eval.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace ev = pcgan::eval;
namespace data = pcgan::data;
namespace model = pcgan::model;
namespace nx = pcgan::numerics;
using pcgan::Point;
using pcgan::Trajectory;

namespace
{

Trajectory random_track(std::mt19937_64 & rng, std::size_t n)
{
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({u(rng), u(rng)});
  }
  return t;
}

std::vector<pcgan::test::XY> xy(const Trajectory & t)
{
  std::vector<pcgan::test::XY> out;
  for (const auto & p : t) {
    out.emplace_back(p.x, p.y);
  }
  return out;
}

/// Scenes whose pedestrians move at exactly constant velocity on a dyadic grid.
std::vector<data::Scene> constant_velocity_scenes(std::size_t n, std::size_t len)
{
  std::vector<data::Scene> out;
  for (std::size_t s = 0; s < n; ++s) {
    data::Scene sc;
    for (std::size_t a = 0; a < 3; ++a) {
      const Point start{0.5 * static_cast<double>(s + a), -0.25 * static_cast<double>(a)};
      const Point v{0.125 * static_cast<double>(a + 1), -0.25 + 0.0625 * static_cast<double>(s % 5)};
      Trajectory t;
      for (std::size_t f = 0; f < len; ++f) {
        t.push_back(start + static_cast<double>(f) * v);
      }
      sc.agent_ids.push_back(static_cast<int>(a));
      sc.pedestrians.push_back(std::move(t));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace

TEST(Metrics, MatchLoopOracles)
{
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_track(rng, 1 + static_cast<std::size_t>(trial % 12));
    const auto b = random_track(rng, a.size());
    EXPECT_NEAR(ev::ade(a, b), pcgan::test::ade_loop(xy(a), xy(b)), 1e-12);
    EXPECT_NEAR(ev::fde(a, b), pcgan::test::fde_loop(xy(a), xy(b)), 1e-12);
    EXPECT_NEAR(ev::mhd(a, b), pcgan::test::mhd_loop(xy(a), xy(b)), 1e-12);
  }
}

TEST(Metrics, HandExamples)
{
  const Trajectory truth{{0, 0}, {1, 0}, {2, 0}};
  const Trajectory pred{{0, 1}, {1, 1}, {2, 4}};
  EXPECT_DOUBLE_EQ(ev::ade(pred, truth), 2.0);
  EXPECT_DOUBLE_EQ(ev::fde(pred, truth), 4.0);
  EXPECT_DOUBLE_EQ(ev::mhd(pred, truth), 4.0);
  // a prediction retracing the truth backwards has zero max-of-min distance
  const Trajectory reversed(truth.rbegin(), truth.rend());
  EXPECT_DOUBLE_EQ(ev::mhd(reversed, truth), 0.0);
  EXPECT_GT(ev::ade(reversed, truth), 0.0);
  // symmetric form: directed means are 1/3 and 0
  const Trajectory shorter{{0, 0}, {1, 0}};
  EXPECT_DOUBLE_EQ(ev::mhd_symmetric(truth, shorter), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ev::mhd_symmetric(shorter, truth), 1.0 / 3.0);
}

TEST(Metrics, Contracts)
{
  const Trajectory a{{0, 0}, {1, 0}};
  const Trajectory b{{0, 0}};
  EXPECT_THROW(ev::ade(a, b), pcgan::DimensionError);
  EXPECT_THROW(ev::fde({}, {}), pcgan::DimensionError);
  EXPECT_THROW(ev::mhd({}, a), pcgan::UsageError);
  EXPECT_NO_THROW(ev::mhd(a, b));
}

TEST(Baselines, CvmIsExactOnConstantVelocity)
{
  const auto scenes = constant_velocity_scenes(10, 20);
  const auto row = ev::evaluate(ev::cvm_predictor(8, 12), scenes, 8, 12, "cv");
  EXPECT_EQ(row.ade, 0.0);
  EXPECT_EQ(row.fde, 0.0);
  EXPECT_EQ(row.mhd, 0.0);
  EXPECT_EQ(row.agents, 30u);
  const auto lin = ev::evaluate(ev::linear_predictor(8, 12), scenes, 8, 12);
  EXPECT_NEAR(lin.ade, 0.0, 1e-12);
}

TEST(Baselines, LinearMatchesNormalEquations)
{
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto obs = random_track(rng, 2 + static_cast<std::size_t>(trial % 7));
    const auto pred = ev::linear_predict(obs, 5);
    // fit [1 t] * beta = x by solving the 2x2 normal equations directly
    double n = 0, st = 0, stt = 0, sx = 0, stx = 0, sy = 0, sty = 0;
    for (std::size_t t = 0; t < obs.size(); ++t) {
      const double tt = static_cast<double>(t);
      n += 1;
      st += tt;
      stt += tt * tt;
      sx += obs[t].x;
      stx += tt * obs[t].x;
      sy += obs[t].y;
      sty += tt * obs[t].y;
    }
    const double det = n * stt - st * st;
    const double bx = (n * stx - st * sx) / det, ax = (sx - bx * st) / n;
    const double by = (n * sty - st * sy) / det, ay = (sy - by * st) / n;
    for (std::size_t h = 0; h < 5; ++h) {
      const double tt = static_cast<double>(obs.size() + h);
      EXPECT_NEAR(pred[h].x, ax + bx * tt, 1e-10);
      EXPECT_NEAR(pred[h].y, ay + by * tt, 1e-10);
    }
  }
  EXPECT_THROW(ev::linear_predict({{0, 0}}, 3), pcgan::UsageError);
  EXPECT_THROW(ev::cvm_predict({{0, 0}}, 3), pcgan::UsageError);
}

TEST(Baselines, CvmRepeatsLastDisplacement)
{
  const auto p = ev::cvm_predict({{0, 0}, {5, 5}, {6, 5}}, 2);
  EXPECT_EQ(p, (Trajectory{{7, 5}, {8, 5}}));
}

TEST(Evaluate, AggregateIsMeanOverAgents)
{
  data::SfmConfig s;
  s.seed = 3;
  const auto scenes = data::generate_sfm(s, 5, false);
  const auto pred = ev::linear_predictor(8, 12);
  const auto errors = ev::agent_errors(pred, scenes, 8, 12);
  double ade = 0, fde = 0, mhd = 0;
  std::size_t agents = 0;
  for (const auto & sc : scenes) {
    const auto p = pred(sc);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Trajectory truth(sc.pedestrians[i].begin() + 8, sc.pedestrians[i].end());
      ade += pcgan::test::ade_loop(xy(p[i]), xy(truth));
      fde += pcgan::test::fde_loop(xy(p[i]), xy(truth));
      mhd += pcgan::test::mhd_loop(xy(p[i]), xy(truth));
      ++agents;
    }
  }
  ASSERT_EQ(errors.size(), agents);
  const auto row = ev::evaluate(pred, scenes, 8, 12, "sfm");
  EXPECT_NEAR(row.ade, ade / static_cast<double>(agents), 1e-12);
  EXPECT_NEAR(row.fde, fde / static_cast<double>(agents), 1e-12);
  EXPECT_NEAR(row.mhd, mhd / static_cast<double>(agents), 1e-12);
  EXPECT_EQ(row.scenes, 5u);
}

TEST(Evaluate, Contracts)
{
  EXPECT_THROW(ev::evaluate(ev::cvm_predictor(8, 12), {}, 8, 12), pcgan::UsageError);
  const auto scenes = constant_velocity_scenes(1, 20);
  EXPECT_THROW(ev::evaluate(ev::cvm_predictor(8, 8), scenes, 8, 8), pcgan::UsageError);
  const ev::Predictor wrong = [](const data::Scene &) { return std::vector<Trajectory>{}; };
  EXPECT_THROW(ev::evaluate(wrong, scenes, 8, 12), pcgan::DimensionError);
}

TEST(Evaluate, ModelPredictionIsWorldFrameModalPath)
{
  model::ModelConfig cfg;
  cfg.obs_len = 4;
  cfg.pred_len = 3;
  cfg.generator_hidden = 8;
  nx::Rng rng(7);
  const auto params = model::init_params(cfg, rng);
  data::SfmConfig s;
  s.frames = 7;
  s.seed = 4;
  const auto scenes = data::generate_sfm(s, 2, true);
  const pcgan::multipac::Config mp;
  const auto pred = ev::predict_scene(params, cfg, mp, scenes[0]);
  ASSERT_EQ(pred.best.size(), scenes[0].agent_count());
  for (std::size_t i = 0; i < pred.best.size(); ++i) {
    const auto & path = pcgan::multipac::most_likely_path(pred.paths[i].paths);
    ASSERT_EQ(pred.best[i].size(), 3u);
    EXPECT_NEAR(pred.best[i][0].x, path.points[0].x + pred.prepared.origin.x, 1e-12);
  }
  const auto row = ev::evaluate(ev::model_predictor(params, cfg, mp), scenes, 4, 3);
  EXPECT_TRUE(std::isfinite(row.ade));

  const auto j = ev::prediction_to_json(0, scenes[0], pred);
  EXPECT_EQ(j.at("tag").get<std::string>(), scenes[0].tag);
  EXPECT_FALSE(j.at("vehicle").is_null());
  const auto & a0 = j.at("agents").at(0);
  EXPECT_EQ(a0.at("observed").size(), 4u);
  EXPECT_EQ(a0.at("truth").size(), 3u);
  const auto best = a0.at("best_path").get<std::size_t>();
  EXPECT_NEAR(a0.at("modal_paths").at(best).at("points").at(0).at(0).get<double>(), pred.best[0][0].x, 1e-12);
}

TEST(Output, CsvAndJson)
{
  const ev::MetricsRow r{"zara01", 12, 0.5, 1.25, 0.375, 3, 9};
  std::ostringstream out;
  ev::write_csv_header(out);
  ev::write_csv_row(out, r);
  EXPECT_EQ(out.str(), "dataset,horizon,ade,fde,mhd,scenes,agents\nzara01,12,0.5,1.25,0.375,3,9\n");
  const auto j = ev::to_json(r);
  EXPECT_EQ(j.at("agents").get<std::size_t>(), 9u);
  EXPECT_EQ(j.at("fde").get<double>(), 1.25);
}
