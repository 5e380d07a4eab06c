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

// Acceptance run: one PASS, FAIL or SKIP line per criterion. Exits non-zero
// when any criterion fails. Criterion numbers given as arguments restrict the
// run to those criteria. Set PCGAN_ZARA01 to the UCY Zara01 annotation
// file (frame, id, x, y) to enable the baseline reproduction check.

#include "oracles.hpp"
#include "support.hpp"

#include "pcgan/data.hpp"
#include "pcgan/eval.hpp"
#include "pcgan/gmm.hpp"
#include "pcgan/model.hpp"
#include "pcgan/multipac.hpp"
#include "pcgan/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

namespace data = pcgan::data;
namespace ev = pcgan::eval;
namespace gmm = pcgan::gmm;
namespace model = pcgan::model;
namespace mp = pcgan::multipac;
namespace nx = pcgan::numerics;
namespace tr = pcgan::training;
using pcgan::Point;
using pcgan::Trajectory;

namespace
{

enum class Status { kPass, kFail, kSkip };

struct Outcome
{
  Status status{Status::kFail};
  std::string detail;
};

std::string fmt(const char * f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::kPass : Status::kFail, std::move(detail)}; }

// ---------------------------------------------------------------------------
// 1. Gradients of both network objectives against central differences.

Outcome gradient_check()
{
  model::ModelConfig m;
  m.obs_len = 4;
  m.pred_len = 2;
  m.mixture_components = 3;
  tr::TrainConfig cfg;
  cfg.model = m;
  nx::Rng rng(11);
  const auto params = model::init_params(m, rng);

  data::Scene scene;
  scene.agent_ids = {1, 2};
  scene.pedestrians = {
    {{-2.0, 0.1}, {-1.5, 0.12}, {-1.0, 0.1}, {-0.5, 0.05}, {0.0, 0.0}, {0.5, -0.05}},
    {{2.0, -0.2}, {1.6, -0.1}, {1.2, 0.0}, {0.8, 0.05}, {0.4, 0.1}, {0.0, 0.2}}};
  scene.vehicle = Trajectory{{-6.0, 1.5}, {-5.0, 1.5}, {-4.0, 1.5}, {-3.0, 1.5}, {-2.0, 1.5}, {-1.0, 1.5}};
  const auto prepared = model::prepare(scene, m.obs_len);
  const model::SceneBatch batch({&prepared});

  // Step 1e-5 keeps roundoff near 1e-10; gradients below 1e-4 are compared absolutely.
  const double h = 1e-5, floor = 1e-4;
  const auto g = tr::generator_objective(params, cfg, batch, true);
  const double g_err = pcgan::test::max_param_gradient_error(
    [&](const nx::ParamSet & p) { return tr::generator_objective_value(p, cfg, batch, true); }, params, g.grads,
    h, floor);
  // The discriminator objective sees generator output only as constant tracks.
  const auto fakes = tr::generator_fakes(params, cfg, batch);
  const auto d = tr::discriminator_objective(params, cfg, batch, fakes);
  const double d_err = pcgan::test::max_param_gradient_error(
    [&](const nx::ParamSet & p) { return tr::discriminator_objective_value(p, cfg, batch, fakes); }, params,
    d.grads, h, floor);
  std::size_t count = 0;
  for (const auto & [name, t] : params) {
    count += t.size();
  }
  const double worst = std::max(g_err, d_err);
  return verdict(
    worst < 1e-4, std::to_string(count) + " parameters, max relative error generator " + fmt("%.2e", g_err) +
                    ", discriminator " + fmt("%.2e", d_err) + " (limit 1e-4)");
}

// ---------------------------------------------------------------------------
// 2. Mixture density.

Outcome density()
{
  const double at_mean = gmm::log_pdf({0.0, 0.0}, gmm::GmmStep{{gmm::Component{}}});
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const double h = 0.02, lo = -9.0, hi = 9.0;
  for (int trial = 0; trial < 20; ++trial) {
    gmm::GmmStep s;
    double total = 0.0;
    for (int k = 0; k < 1 + trial % 6; ++k) {
      gmm::Component c{0.1 + u(rng), {4 * u(rng) - 2, 4 * u(rng) - 2}, {0.3 + u(rng), 0.3 + u(rng)}, 1.8 * u(rng) - 0.9};
      total += c.pi;
      s.components.push_back(c);
    }
    for (auto & c : s.components) {
      c.pi /= total;
    }
    double integral = 0.0;
    for (double x = lo + h / 2; x < hi; x += h) {
      for (double y = lo + h / 2; y < hi; y += h) {
        integral += std::exp(gmm::log_pdf({x, y}, s)) * h * h;
      }
    }
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  const bool ok = std::abs(at_mean - (-1.837877)) <= 1e-6 && worst <= 1e-3;
  return verdict(
    ok, "log_pdf at mean " + fmt("%.7f", at_mean) + " (expect -1.837877 +- 1e-6), worst |integral - 1| over 20 mixtures " +
          fmt("%.2e", worst) + " (limit 1e-3)");
}

// ---------------------------------------------------------------------------
// 3. Modal-path extraction.

gmm::GmmStep step_of(const std::vector<Point> & means, const std::vector<double> & w)
{
  gmm::GmmStep s;
  for (std::size_t k = 0; k < means.size(); ++k) {
    s.components.push_back({w[k], means[k], {0.3, 0.3}, 0.0});
  }
  return s;
}

Outcome multipac_correctness()
{
  gmm::GmmSequence uni, fork;
  for (int t = 0; t < 6; ++t) {
    std::vector<Point> a, b;
    for (int k = 0; k < 6; ++k) {
      a.push_back({0.4 * t + 0.008 * k, 0.004 * k});
      b.push_back({0.4 * t + 0.01 * (k % 3), (t >= 3 && k >= 3 ? 2.0 * (t - 2) : 0.0) + 0.01 * (k % 3)});
    }
    uni.push_back(step_of(a, {0.1, 0.2, 0.3, 0.1, 0.2, 0.1}));
    fork.push_back(step_of(b, {0.2, 0.2, 0.2, 0.1, 0.15, 0.15}));
  }
  const auto u = mp::analyse(uni);
  const auto f = mp::analyse(fork);
  const bool uni_ok = u.paths.size() == 1 && std::abs(u.paths[0].weight - 1.0) <= 1e-9;
  bool fork_ok = f.paths.size() == 2 && std::abs(f.paths[0].weight + f.paths[1].weight - 1.0) <= 1e-9;
  for (std::size_t t = 0; t < 6; ++t) {
    fork_ok = fork_ok && f.tree.layers[t].size() == (t < 3 ? 1u : 2u);
  }

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(0.0, 2.5), w01(0.0, 1.0);
  const double floors[] = {0.05, 0.2, 0.4, 0.9};
  std::size_t agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> p;
    std::vector<pcgan::test::XY> q;
    std::vector<double> w;
    double total = 0.0;
    for (int k = 0; k < 6; ++k) {
      p.push_back({pos(rng), pos(rng)});
      q.emplace_back(p.back().x, p.back().y);
      w.push_back(w01(rng) * w01(rng));
      total += w.back();
    }
    for (auto & x : w) {
      x /= total;
    }
    const double mw = floors[trial % 4];
    agree += mp::weighted_dbscan(p, w, 0.5, mw).labels == pcgan::test::brute_dbscan(q, w, 0.5, mw) ? 1 : 0;
  }
  return verdict(
    uni_ok && fork_ok && agree == 100,
    std::string("unimodal ") + (uni_ok ? "1 path, w = 1" : "wrong") + "; fork at step 3 of 6 " +
      (fork_ok ? "2 paths, weights sum to 1" : "wrong") + "; brute-force DBSCAN agreement " + std::to_string(agree) +
      "/100");
}

// ---------------------------------------------------------------------------
// 4. Metrics.

Outcome metric_oracles()
{
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Trajectory a, b;
    std::vector<pcgan::test::XY> qa, qb;
    for (int t = 0; t < 12; ++t) {
      a.push_back({u(rng), u(rng)});
      b.push_back({u(rng), u(rng)});
      qa.emplace_back(a.back().x, a.back().y);
      qb.emplace_back(b.back().x, b.back().y);
    }
    worst = std::max(
      {worst, std::abs(ev::ade(a, b) - pcgan::test::ade_loop(qa, qb)),
       std::abs(ev::fde(a, b) - pcgan::test::fde_loop(qa, qb)),
       std::abs(ev::mhd(a, b) - pcgan::test::mhd_loop(qa, qb))});
  }
  std::vector<data::Scene> scenes;
  for (int s = 0; s < 20; ++s) {
    data::Scene sc;
    for (int a = 0; a < 3; ++a) {
      const Point start{0.5 * (s + a), -0.25 * a}, v{0.125 * (a + 1), -0.25 + 0.0625 * (s % 5)};
      Trajectory t;
      for (int f = 0; f < 20; ++f) {
        t.push_back(start + static_cast<double>(f) * v);
      }
      sc.agent_ids.push_back(a);
      sc.pedestrians.push_back(t);
    }
    scenes.push_back(sc);
  }
  const auto cvm = ev::evaluate(ev::cvm_predictor(8, 12), scenes, 8, 12);
  return verdict(
    worst <= 1e-12 && cvm.ade == 0.0 && cvm.fde == 0.0,
    "max |metric - loop oracle| over 1000 pairs " + fmt("%.1e", worst) + " (limit 1e-12); CVM on constant velocity ADE " +
      fmt("%g", cvm.ade) + " FDE " + fmt("%g", cvm.fde));
}

// ---------------------------------------------------------------------------
// 5. CVM on UCY Zara01.

Outcome zara_baseline()
{
  const char * env = std::getenv("PCGAN_ZARA01");
  std::string path = env ? env : "";
  for (const char * candidate : {"data/zara01.txt", "data/crowds_zara01.txt", "datasets/zara1/test/crowds_zara01.txt"}) {
    if (path.empty() && std::filesystem::exists(candidate)) {
      path = candidate;
    }
  }
  if (path.empty()) {
    return {Status::kSkip, "UCY Zara01 annotations not available; set PCGAN_ZARA01 to the file to run this check"};
  }
  data::WindowConfig w;
  w.tag = "zara01";
  const auto scenes = data::window_scenes(data::load_ethucy(path), w);
  const auto row = ev::evaluate(ev::cvm_predictor(8, 12), scenes, 8, 12, "zara01");
  const bool ok = std::abs(row.ade - 0.46) <= 0.05 && std::abs(row.fde - 0.99) <= 0.05 && std::abs(row.mhd - 0.40) <= 0.05;
  return verdict(
    ok, std::to_string(row.scenes) + " windows, ADE " + fmt("%.3f", row.ade) + " FDE " + fmt("%.3f", row.fde) + " MHD " +
          fmt("%.3f", row.mhd) + " (targets 0.46 / 0.99 / 0.40 +- 0.05)");
}

// ---------------------------------------------------------------------------
// 6. Training convergence at desk scale.

Outcome convergence()
{
  tr::TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seed = 3;
  data::SfmConfig sfm;
  sfm.seed = 3;

  auto warm = cfg;
  warm.total_epochs = warm.warmup_epochs;
  const auto w = tr::train(data::generate_sfm(sfm, 50, false), warm);
  const double ratio = w.report.epochs.back().l_lh / w.report.epochs.front().l_lh;

  const auto train = data::generate_sfm(sfm, 100, false);
  auto held_cfg = sfm;
  held_cfg.seed = 1003;
  const auto held_out = data::generate_sfm(held_cfg, 50, false);
  const auto full = tr::train(train, cfg);
  const auto model_row = ev::evaluate(ev::model_predictor(full.params, cfg.model, cfg.multipac), held_out, 8, 12);
  const auto lin_row = ev::evaluate(ev::linear_predictor(8, 12), held_out, 8, 12);
  return verdict(
    ratio < 0.5 && model_row.ade < lin_row.ade,
    "warmup L_lh epoch 10 / epoch 1 = " + fmt("%.3f", ratio) + " (limit 0.5); after 10+90 epochs held-out ADE model " +
      fmt("%.3f", model_row.ade) + " vs linear " + fmt("%.3f", lin_row.ade));
}

// ---------------------------------------------------------------------------
// 7. Vehicle ablation.

bool tree_valid(const mp::AgentPaths & ap, std::size_t horizon, std::size_t k)
{
  if (ap.tree.layers.size() != horizon || ap.paths.empty()) {
    return false;
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto & layer = ap.tree.layers[t];
    double total = 0.0;
    if (layer.empty() || layer.size() > k) {
      return false;
    }
    for (const auto & node : layer) {
      total += node.weight;
      if (!std::isfinite(node.centroid.x) || !std::isfinite(node.centroid.y)) {
        return false;
      }
      if (t == 0 ? node.parent.has_value() : (!node.parent || *node.parent >= ap.tree.layers[t - 1].size())) {
        return false;
      }
    }
    if (std::abs(total - 1.0) > 1e-9) {
      return false;
    }
  }
  double wsum = 0.0;
  for (const auto & p : ap.paths) {
    wsum += p.weight;
  }
  return std::abs(wsum - 1.0) <= 1e-9;
}

Outcome vehicle_ablation()
{
  const model::ModelConfig m;
  nx::Rng rng(15);
  const auto params = model::init_params(m, rng);
  data::SfmConfig sfm;
  sfm.seed = 15;
  sfm.mix = {{"vehicle_from_behind", 1.0}};
  const auto corpus = data::generate_sfm(sfm, 20, true);

  bool identical = true;
  for (std::size_t s = 0; s < 5; ++s) {
    const auto with = model::prepare(corpus[s], m.obs_len);
    auto without = with;
    without.vehicle_observed.reset();
    nx::Tape tape;
    const auto g = model::Generator::bind(model::bind_prefix(tape, params, "generator.", false), m);
    const model::SceneBatch bw({&with}), bo({&without});
    const auto h = model::encode(g, tape, bw).h;
    const auto forced = model::gvat_pool_with_offsets(
      g, tape, bw.offsets, bw.observed_at(m.obs_len - 1), nx::Tensor::zeros({bw.rows(), 2}), h);
    const auto absent = model::gvat_pool(g, tape, bo, model::encode(g, tape, bo).h);
    identical = identical && forced.pooled.value() == absent.pooled.value();
  }

  tr::TrainConfig cfg;
  cfg.warmup_epochs = 2;
  cfg.total_epochs = 6;
  cfg.batch_size = 4;
  cfg.seed = 15;
  bool healthy = true;
  std::size_t epochs = 0;
  tr::train(corpus, cfg, {}, [&](const tr::EpochRecord & rec, const tr::Trainer & t) {
    ++epochs;
    healthy = healthy && std::isfinite(rec.l_lh) && std::isfinite(rec.g_adv) && std::isfinite(rec.d_loss);
    for (std::size_t s = 0; s < 5; ++s) {
      const auto pred = ev::predict_scene(t.params(), cfg.model, cfg.multipac, corpus[s]);
      for (const auto & ap : pred.paths) {
        healthy = healthy && tree_valid(ap, cfg.model.pred_len, cfg.model.mixture_components);
      }
    }
  });
  return verdict(
    identical && healthy && epochs == cfg.total_epochs,
    std::string("pooling without vehicle vs zero offsets: ") + (identical ? "bit-identical" : "DIFFERENT") +
      "; vehicle-from-behind training over " + std::to_string(epochs) + " epochs: " +
      (healthy ? "finite losses and valid trees every epoch" : "invalid state seen"));
}

// ---------------------------------------------------------------------------
// 8. Determinism.

struct RunArtifacts
{
  std::string checkpoint;
  std::string report;
  std::string predictions;
};

std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunArtifacts deterministic_run(const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir);
  data::SfmConfig sfm;
  sfm.seed = 16;
  const auto corpus = data::generate_sfm(sfm, 12, true);
  tr::TrainConfig cfg;
  cfg.warmup_epochs = 1;
  cfg.total_epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 16;
  tr::Trainer trainer(cfg, corpus);
  while (!trainer.done()) {
    trainer.run_epoch();
  }
  model::save_checkpoint((dir / "checkpoint.json").string(), trainer.checkpoint());
  {
    std::ofstream out(dir / "report.csv", std::ios::binary);
    tr::write_report_csv(out, trainer.report());
  }
  {
    std::ofstream out(dir / "predictions.json", std::ios::binary);
    for (std::size_t i = 0; i < 4; ++i) {
      out << ev::prediction_to_json(i, corpus[i], ev::predict_scene(trainer.params(), cfg.model, cfg.multipac, corpus[i]))
               .dump(2)
          << "\n";
    }
  }
  return {slurp(dir / "checkpoint.json"), slurp(dir / "report.csv"), slurp(dir / "predictions.json")};
}

Outcome determinism()
{
  const auto root = std::filesystem::temp_directory_path() / "pcgan_acceptance_determinism";
  std::filesystem::remove_all(root);
  const auto a = deterministic_run(root / "a");
  const auto b = deterministic_run(root / "b");
  std::filesystem::remove_all(root);
  const bool ck = a.checkpoint == b.checkpoint, rep = a.report == b.report, pred = a.predictions == b.predictions;
  auto word = [](bool same) { return same ? "identical" : "DIFFERENT"; };
  return verdict(
    ck && rep && pred && !a.checkpoint.empty(),
    std::string("checkpoint ") + word(ck) + " (" + std::to_string(a.checkpoint.size()) + " bytes), report " + word(rep) +
      ", prediction dumps " + word(pred));
}

}  // namespace

int main(int argc, char ** argv)
{
  struct Criterion
  {
    int id;
    const char * name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
    {1, "gradient correctness", gradient_check},
    {2, "mixture density", density},
    {3, "modal-path extraction", multipac_correctness},
    {4, "metric oracles", metric_oracles},
    {5, "Zara01 CVM baseline", zara_baseline},
    {6, "desk-scale convergence", convergence},
    {7, "vehicle ablation", vehicle_ablation},
    {8, "determinism", determinism}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.push_back(std::atoi(argv[i]));
  }
  int failures = 0;
  for (const auto & c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception & e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char * tag = o.status == Status::kPass ? "PASS" : o.status == Status::kSkip ? "SKIP" : "FAIL";
    failures += o.status == Status::kFail ? 1 : 0;
    std::cout << tag << " [" << c.id << "] " << c.name << ": " << o.detail << " (" << fmt("%.1f", secs) << " s)"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
