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

// pcgan command-line tool: synthetic data generation, training, evaluation,
// prediction dumps and standalone modal-path extraction.
//
// Exit codes: 0 success, 2 usage error, 3 I/O or input-format error,
// 4 numeric abort (non-finite loss or guard failure), 1 anything else.

#include "pcgan/data.hpp"
#include "pcgan/eval.hpp"
#include "pcgan/gmm.hpp"
#include "pcgan/model.hpp"
#include "pcgan/multipac.hpp"
#include "pcgan/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcgan;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

// ---------------------------------------------------------------------------
// Run configuration. Every section is echoed in full to <out>/config.json,
// which is itself a valid --config file.

struct GenDataSection
{
  std::size_t scenes{100};
  bool vehicle{false};
  data::SfmConfig sfm;
};

struct TrainSection
{
  std::string data;
  std::string val_data;
  std::string resume;
  std::size_t stride{1};
  training::TrainConfig config;
};

struct EvalSection
{
  std::string data;
  std::string checkpoint;
  /// "model", "lin" or "cvm".
  std::string baseline{"model"};
  std::size_t obs_len{8};
  std::size_t horizon{12};
  std::size_t stride{1};
  std::string name;
};

struct PredictSection
{
  std::string data;
  std::string checkpoint;
  std::size_t stride{1};
};

struct MultipacSection
{
  std::string gmm;
  multipac::Config config;
};

struct RunConfig
{
  std::uint64_t seed{1};
  std::string out{"."};
  GenDataSection gen_data;
  TrainSection train;
  EvalSection eval;
  PredictSection predict;
  MultipacSection multipac;
};

json without_seed(json j)
{
  j.erase("seed");
  return j;
}

json to_json(const RunConfig & c)
{
  return {
    {"seed", c.seed},
    {"out", c.out},
    {"gen_data",
     {{"scenes", c.gen_data.scenes},
      {"vehicle", c.gen_data.vehicle},
      {"sfm", without_seed(data::to_json(c.gen_data.sfm))}}},
    {"train",
     {{"data", c.train.data},
      {"val_data", c.train.val_data},
      {"resume", c.train.resume},
      {"stride", c.train.stride},
      {"config", without_seed(training::to_json(c.train.config))}}},
    {"eval",
     {{"data", c.eval.data},
      {"checkpoint", c.eval.checkpoint},
      {"baseline", c.eval.baseline},
      {"obs_len", c.eval.obs_len},
      {"horizon", c.eval.horizon},
      {"stride", c.eval.stride},
      {"name", c.eval.name}}},
    {"predict",
     {{"data", c.predict.data}, {"checkpoint", c.predict.checkpoint}, {"stride", c.predict.stride}}},
    {"multipac",
     {{"gmm", c.multipac.gmm},
      {"eps", c.multipac.config.eps},
      {"min_weight", c.multipac.config.min_weight}}}};
}

/// Reject keys of @p j that are absent from @p reference.
void check_keys(const json & j, const json & reference, const std::string & where)
{
  if (!j.is_object()) {
    throw UsageError("config: '" + where + "' must be an object");
  }
  for (const auto & [key, value] : j.items()) {
    if (!reference.contains(key)) {
      throw UsageError("config: unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
void read(const json & j, const char * key, T & out)
{
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

RunConfig run_config_from_json(const json & j)
{
  RunConfig c;
  const auto ref = to_json(c);
  check_keys(j, ref, "");
  try {
    read(j, "seed", c.seed);
    read(j, "out", c.out);
    if (j.contains("gen_data")) {
      const auto & g = j.at("gen_data");
      check_keys(g, ref.at("gen_data"), "gen_data.");
      read(g, "scenes", c.gen_data.scenes);
      read(g, "vehicle", c.gen_data.vehicle);
      if (g.contains("sfm")) {
        check_keys(g.at("sfm"), ref.at("gen_data").at("sfm"), "gen_data.sfm.");
        c.gen_data.sfm = data::sfm_config_from_json(g.at("sfm"), c.gen_data.sfm);
      }
    }
    if (j.contains("train")) {
      const auto & t = j.at("train");
      check_keys(t, ref.at("train"), "train.");
      read(t, "data", c.train.data);
      read(t, "val_data", c.train.val_data);
      read(t, "resume", c.train.resume);
      read(t, "stride", c.train.stride);
      if (t.contains("config")) {
        check_keys(t.at("config"), ref.at("train").at("config"), "train.config.");
        c.train.config = training::train_config_from_json(t.at("config"), c.train.config);
      }
    }
    if (j.contains("eval")) {
      const auto & e = j.at("eval");
      check_keys(e, ref.at("eval"), "eval.");
      read(e, "data", c.eval.data);
      read(e, "checkpoint", c.eval.checkpoint);
      read(e, "baseline", c.eval.baseline);
      read(e, "obs_len", c.eval.obs_len);
      read(e, "horizon", c.eval.horizon);
      read(e, "stride", c.eval.stride);
      read(e, "name", c.eval.name);
    }
    if (j.contains("predict")) {
      const auto & p = j.at("predict");
      check_keys(p, ref.at("predict"), "predict.");
      read(p, "data", c.predict.data);
      read(p, "checkpoint", c.predict.checkpoint);
      read(p, "stride", c.predict.stride);
    }
    if (j.contains("multipac")) {
      const auto & m = j.at("multipac");
      check_keys(m, ref.at("multipac"), "multipac.");
      read(m, "gmm", c.multipac.gmm);
      read(m, "eps", c.multipac.config.eps);
      read(m, "min_weight", c.multipac.config.min_weight);
    }
  } catch (const json::exception & e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// File helpers.

json read_json(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::exception & e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

fs::path prepare_out(const std::string & out)
{
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out);
  }
  return fs::path(out);
}

void echo_config(const fs::path & out, const RunConfig & c)
{
  write_text(out / "config.json", to_json(c).dump(2) + "\n");
}

std::vector<data::Scene> load_scenes(
  const std::string & path, std::size_t obs_len, std::size_t pred_len, std::size_t stride)
{
  if (path.empty()) {
    throw UsageError("no dataset path given");
  }
  if (!fs::exists(path)) {
    throw UsageError("dataset not found: " + path);
  }
  const auto tracks = data::load_ethucy(path);
  if (tracks.empty()) {
    return {};
  }
  data::WindowConfig w;
  w.obs_len = obs_len;
  w.pred_len = pred_len;
  w.stride = stride;
  w.tag = fs::path(path).filename().string();
  return data::window_scenes(tracks, w);
}

std::size_t count_agents(const std::vector<data::Scene> & scenes)
{
  std::size_t n = 0;
  for (const auto & s : scenes) {
    n += s.agent_count();
  }
  return n;
}

// ---------------------------------------------------------------------------
// Commands.

int cmd_gen_data(const RunConfig & c)
{
  const auto out = prepare_out(c.out);
  echo_config(out, c);
  auto sfm = c.gen_data.sfm;
  sfm.seed = c.seed;
  const auto scenes = data::generate_sfm(sfm, c.gen_data.scenes, c.gen_data.vehicle);
  std::ostringstream text;
  data::write_tracks(text, data::scenes_to_tracks(scenes));
  write_text(out / "scenes.txt", text.str());

  std::map<std::string, std::size_t> counts;
  for (const auto & s : scenes) {
    ++counts[s.tag.substr(s.tag.find(':') + 1)];
  }
  const json manifest = {
    {"format", "pcgan-dataset-manifest"},
    {"version", 1},
    {"file", "scenes.txt"},
    {"scenes", scenes.size()},
    {"agents", count_agents(scenes)},
    {"frames_per_scene", sfm.frames},
    {"vehicle", c.gen_data.vehicle},
    {"templates", counts},
    {"seed", c.seed}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "scenes " << scenes.size() << "\nagents " << count_agents(scenes) << "\n";
  for (const auto & [name, n] : counts) {
    std::cout << "template " << name << " " << n << "\n";
  }
  return 0;
}

int cmd_train(const RunConfig & c)
{
  const auto out = prepare_out(c.out);
  echo_config(out, c);
  auto cfg = c.train.config;
  cfg.seed = c.seed;
  training::validate(cfg);
  const auto train_scenes = load_scenes(c.train.data, cfg.model.obs_len, cfg.model.pred_len, c.train.stride);
  std::vector<data::Scene> val;
  if (!c.train.val_data.empty()) {
    val = load_scenes(c.train.val_data, cfg.model.obs_len, cfg.model.pred_len, 1);
  }
  std::optional<training::Trainer> trainer;
  if (c.train.resume.empty()) {
    trainer.emplace(cfg, train_scenes, val);
  } else {
    trainer.emplace(cfg, model::load_checkpoint(c.train.resume), train_scenes, val);
  }
  std::cout << "train scenes " << train_scenes.size() << " agents " << count_agents(train_scenes)
            << "\n";
  auto write_report = [&] {
    std::ostringstream csv;
    training::write_report_csv(csv, trainer->report());
    write_text(out / "report.csv", csv.str());
  };
  while (!trainer->done()) {
    try {
      const auto & rec = trainer->run_epoch();
      std::cout << "epoch " << rec.epoch << " l_lh " << data::format_double(rec.l_lh) << " g_adv "
                << data::format_double(rec.g_adv) << " d_loss " << data::format_double(rec.d_loss)
                << "\n";
      if (cfg.checkpoint_every > 0 && rec.epoch % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_epoch_%04zu.json", rec.epoch);
        model::save_checkpoint((out / name).string(), trainer->checkpoint());
      }
    } catch (const NumericError &) {
      write_report();
      throw;
    }
    write_report();
  }
  model::save_checkpoint((out / "checkpoint.json").string(), trainer->checkpoint());
  return 0;
}

int cmd_eval(const RunConfig & c)
{
  const auto out = prepare_out(c.out);
  echo_config(out, c);
  const auto & e = c.eval;
  std::optional<model::Checkpoint> ck;
  eval::Predictor predictor;
  if (e.baseline == "model") {
    if (e.checkpoint.empty()) {
      throw UsageError("eval: model evaluation needs --checkpoint (or use --baseline lin|cvm)");
    }
    ck = model::load_checkpoint(e.checkpoint);
    if (ck->config.pred_len != e.horizon || ck->config.obs_len != e.obs_len) {
      throw UsageError(
        "eval: horizon " + std::to_string(e.horizon) + " / observation " +
        std::to_string(e.obs_len) + " do not match the checkpoint (" +
        std::to_string(ck->config.pred_len) + " / " + std::to_string(ck->config.obs_len) + ")");
    }
    predictor = eval::model_predictor(ck->params, ck->config, c.multipac.config);
  } else if (e.baseline == "lin") {
    predictor = eval::linear_predictor(e.obs_len, e.horizon);
  } else if (e.baseline == "cvm") {
    predictor = eval::cvm_predictor(e.obs_len, e.horizon);
  } else {
    throw UsageError("eval: unknown baseline '" + e.baseline + "'");
  }
  const auto scenes = load_scenes(e.data, e.obs_len, e.horizon, e.stride);
  const std::string name = e.name.empty() ? fs::path(e.data).stem().string() : e.name;
  const auto row = eval::evaluate(predictor, scenes, e.obs_len, e.horizon, name);
  std::ostringstream csv;
  eval::write_csv_header(csv);
  eval::write_csv_row(csv, row);
  write_text(out / "metrics.csv", csv.str());
  write_text(out / "metrics.json", eval::to_json(row).dump(2) + "\n");
  std::cout << csv.str();
  return 0;
}

int cmd_predict(const RunConfig & c)
{
  const auto out = prepare_out(c.out);
  echo_config(out, c);
  if (c.predict.checkpoint.empty()) {
    throw UsageError("predict: --checkpoint is required");
  }
  const auto ck = model::load_checkpoint(c.predict.checkpoint);
  const auto scenes =
    load_scenes(c.predict.data, ck.config.obs_len, ck.config.pred_len, c.predict.stride);
  const auto dir = out / "predictions";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string());
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto pred = eval::predict_scene(ck.params, ck.config, c.multipac.config, scenes[i]);
    char name[64];
    std::snprintf(name, sizeof(name), "scene_%05zu.json", i);
    write_text(dir / name, eval::prediction_to_json(i, scenes[i], pred).dump(2) + "\n");
  }
  std::cout << "predicted scenes " << scenes.size() << "\n";
  return 0;
}

int cmd_multipac(const RunConfig & c)
{
  const auto out = prepare_out(c.out);
  echo_config(out, c);
  if (c.multipac.gmm.empty()) {
    throw UsageError("multipac: --gmm is required");
  }
  const auto agents = gmm::agents_from_json(read_json(c.multipac.gmm));
  json result = {{"format", "pcgan-modal-paths"}, {"version", 1}, {"agents", json::array()}};
  for (const auto & a : agents) {
    const auto ap = multipac::analyse(a.steps, c.multipac.config);
    result["agents"].push_back(
      {{"id", a.id},
       {"tree", multipac::tree_to_json(ap.tree)},
       {"modal_paths", multipac::paths_to_json(ap.paths)},
       {"best_path", multipac::most_likely_index(ap.paths)}});
  }
  write_text(out / "modal_paths.json", result.dump(2) + "\n");
  std::cout << "agents " << agents.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing. Flags override values from --config.

template <typename T>
void override_with(const std::optional<T> & flag, T & target)
{
  if (flag) {
    target = *flag;
  }
}

int run(int argc, char ** argv)
{
  CLI::App app{"pcgan: multimodal pedestrian trajectory prediction"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "JSON run configuration; flags override its values");
  app.add_option("--seed", seed, "Seed for data generation and training (default 1)");
  app.add_option("--out", out, "Output directory (default .)");

  auto * gen = app.add_subcommand("gen-data", "Generate synthetic social-force scenes");
  std::optional<std::size_t> gen_scenes;
  std::optional<bool> gen_vehicle;
  gen->add_option("--scenes", gen_scenes, "Number of scenes (default 100)");
  gen->add_flag("--vehicle{true}", gen_vehicle, "Attach a vehicle track to every scene");

  auto * train = app.add_subcommand("train", "Train the generator and discriminator");
  std::optional<std::string> tr_data, tr_val, tr_resume;
  std::optional<std::size_t> tr_epochs, tr_warmup, tr_batch, tr_ckpt, tr_stride;
  std::optional<double> tr_lr, tr_alpha;
  train->add_option("--data", tr_data, "Training trajectory file");
  train->add_option("--val-data", tr_val, "Validation trajectory file (optional)");
  train->add_option("--resume", tr_resume, "Checkpoint to continue from");
  train->add_option("--epochs", tr_epochs, "Total epochs (default 100)");
  train->add_option("--warmup", tr_warmup, "Likelihood-only warmup epochs (default 10)");
  train->add_option("--batch", tr_batch, "Scenes per batch (default 32)");
  train->add_option("--lr", tr_lr, "Adam learning rate (default 0.001)");
  train->add_option("--alpha", tr_alpha, "Weight on the likelihood loss (default 0.1)");
  train->add_option("--checkpoint-every", tr_ckpt, "Save a checkpoint every N epochs (0: off)");
  train->add_option("--stride", tr_stride, "Training window stride in frames (default 1)");

  auto * ev = app.add_subcommand("eval", "Compute ADE/FDE/MHD for the model or a baseline");
  std::optional<std::string> ev_data, ev_ckpt, ev_baseline, ev_name;
  std::optional<std::size_t> ev_obs, ev_horizon, ev_stride;
  ev->add_option("--data", ev_data, "Trajectory file to evaluate on");
  ev->add_option("--checkpoint", ev_ckpt, "Model checkpoint (baseline 'model')");
  ev->add_option("--baseline", ev_baseline, "model, lin or cvm (default model)")
    ->check(CLI::IsMember({"model", "lin", "cvm"}));
  ev->add_option("--obs-len", ev_obs, "Observed steps (default 8)");
  ev->add_option("--horizon", ev_horizon, "Predicted steps (default 12)");
  ev->add_option("--stride", ev_stride, "Window stride in frames (default 1)");
  ev->add_option("--name", ev_name, "Dataset label in the output row");

  auto * pr = app.add_subcommand("predict", "Write per-scene prediction dumps");
  std::optional<std::string> pr_data, pr_ckpt;
  std::optional<std::size_t> pr_stride;
  pr->add_option("--data", pr_data, "Trajectory file");
  pr->add_option("--checkpoint", pr_ckpt, "Model checkpoint");
  pr->add_option("--stride", pr_stride, "Window stride in frames (default 1)");

  auto * mp = app.add_subcommand("multipac", "Extract modal-path trees from a GMM JSON file");
  std::optional<std::string> mp_gmm;
  std::optional<double> mp_eps, mp_min_weight;
  mp->add_option("--gmm", mp_gmm, "pcgan-gmm JSON file");
  for (auto * sub : {ev, pr, mp}) {
    sub->add_option("--eps", mp_eps, "Clustering radius in meters (default 0.5)");
    sub->add_option("--min-weight", mp_min_weight, "Core-point weight threshold (default 0.05)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  RunConfig c;
  if (!config_path.empty()) {
    c = run_config_from_json(read_json(config_path));
  }
  override_with(seed, c.seed);
  override_with(out, c.out);
  override_with(gen_scenes, c.gen_data.scenes);
  override_with(gen_vehicle, c.gen_data.vehicle);
  override_with(tr_data, c.train.data);
  override_with(tr_val, c.train.val_data);
  override_with(tr_resume, c.train.resume);
  override_with(tr_epochs, c.train.config.total_epochs);
  override_with(tr_warmup, c.train.config.warmup_epochs);
  override_with(tr_batch, c.train.config.batch_size);
  override_with(tr_lr, c.train.config.learning_rate);
  override_with(tr_alpha, c.train.config.alpha);
  override_with(tr_ckpt, c.train.config.checkpoint_every);
  override_with(tr_stride, c.train.stride);
  override_with(ev_data, c.eval.data);
  override_with(ev_ckpt, c.eval.checkpoint);
  override_with(ev_baseline, c.eval.baseline);
  override_with(ev_name, c.eval.name);
  override_with(ev_obs, c.eval.obs_len);
  override_with(ev_horizon, c.eval.horizon);
  override_with(ev_stride, c.eval.stride);
  override_with(pr_data, c.predict.data);
  override_with(pr_ckpt, c.predict.checkpoint);
  override_with(pr_stride, c.predict.stride);
  override_with(mp_gmm, c.multipac.gmm);
  override_with(mp_eps, c.multipac.config.eps);
  override_with(mp_min_weight, c.multipac.config.min_weight);

  if (gen->parsed()) {
    return cmd_gen_data(c);
  }
  if (train->parsed()) {
    return cmd_train(c);
  }
  if (ev->parsed()) {
    return cmd_eval(c);
  }
  if (pr->parsed()) {
    return cmd_predict(c);
  }
  return cmd_multipac(c);
}

}  // namespace

int main(int argc, char ** argv)
{
  try {
    return run(argc, argv);
  } catch (const pcgan::UsageError & e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pcgan::NumericError & e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const pcgan::IoError & e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pcgan::ParseError & e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pcgan::DataError & e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
