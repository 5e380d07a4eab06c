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

#ifndef PCGAN__DATA_HPP_
#define PCGAN__DATA_HPP_

#include "pcgan/errors.hpp"
#include "pcgan/geometry.hpp"
#include "pcgan/numerics/params.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace pcgan::data
{

using numerics::Rng;

/// Agent id reserved for the (single) vehicle in trajectory text files.
inline constexpr int kVehicleId = -1;

/// Observations of one agent, frames strictly increasing.
struct RawTrack
{
  int id{0};
  std::vector<int> frames;
  Trajectory points;
};

/**
 * @brief A window in which every pedestrian is observed at every frame.
 *
 * `pedestrians[i][t]` is agent `agent_ids[i]` at frame `first_frame + t * frame_step`.
 */
struct Scene
{
  std::vector<int> agent_ids;
  std::vector<Trajectory> pedestrians;
  std::optional<Trajectory> vehicle;
  int first_frame{0};
  int frame_step{1};
  double frame_interval{0.4};
  std::string tag;

  std::size_t agent_count() const { return pedestrians.size(); }
  std::size_t length() const { return pedestrians.empty() ? 0 : pedestrians.front().size(); }
  int last_frame() const
  {
    return first_frame + static_cast<int>(length() == 0 ? 0 : length() - 1) * frame_step;
  }
};

/// Throws DataError if any agent (or the vehicle) misses a frame or holds a non-finite position.
inline void validate(const Scene & scene)
{
  if (scene.pedestrians.empty()) {
    throw DataError("scene has no pedestrians");
  }
  if (scene.agent_ids.size() != scene.pedestrians.size()) {
    throw DataError("scene agent id count does not match track count");
  }
  const auto len = scene.length();
  auto check = [len](const Trajectory & track, const std::string & who) {
    if (track.size() != len) {
      throw DataError(who + " is not observed at every frame of the scene");
    }
    for (const auto & p : track) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw DataError(who + " has a non-finite position");
      }
    }
  };
  for (std::size_t i = 0; i < scene.pedestrians.size(); ++i) {
    check(scene.pedestrians[i], "agent " + std::to_string(scene.agent_ids[i]));
  }
  if (scene.vehicle) {
    check(*scene.vehicle, "vehicle");
  }
}

// ---------------------------------------------------------------------------
// Trajectory text files: one observation per line, whitespace separated
//   <frame> <agent id> <x meters> <y meters>
// Blank lines and lines starting with '#' are ignored. Frame and id may be
// written as floats ("10.0") as in the public ETH/UCY releases, but must be
// integral. Agent id -1 marks the vehicle.

namespace detail
{

inline bool parse_double(const std::string & token, double & out)
{
  const char * b = token.data();
  const char * e = b + token.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace detail

/// Parse trajectory text. @p source is used in error messages.
inline std::vector<RawTrack> parse_tracks(std::istream & in, const std::string & source)
{
  std::map<int, std::vector<std::pair<int, Point>>> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::array<double, 4> v{};
    std::string token;
    std::size_t n = 0;
    while (fields >> token) {
      if (n == 4 || !detail::parse_double(token, v[n])) {
        throw ParseError(
          source + ":" + std::to_string(line_no) + ": " +
          (n == 4 ? "too many fields" : "non-numeric field '" + token + "'"));
      }
      ++n;
    }
    if (n != 4) {
      throw ParseError(
        source + ":" + std::to_string(line_no) + ": expected 4 fields, got " + std::to_string(n));
    }
    if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": frame and id must be integral");
    }
    if (!std::isfinite(v[2]) || !std::isfinite(v[3])) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": non-finite position");
    }
    by_id[static_cast<int>(v[1])].push_back({static_cast<int>(v[0]), Point{v[2], v[3]}});
  }
  std::vector<RawTrack> tracks;
  for (auto & [id, obs] : by_id) {
    std::stable_sort(obs.begin(), obs.end(), [](const auto & a, const auto & b) {
      return a.first < b.first;
    });
    RawTrack track{id, {}, {}};
    for (const auto & [frame, p] : obs) {
      if (!track.frames.empty() && track.frames.back() == frame) {
        throw ParseError(
          source + ": agent " + std::to_string(id) + " has two rows for frame " +
          std::to_string(frame));
      }
      track.frames.push_back(frame);
      track.points.push_back(p);
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

/// Load an ETH/UCY-style trajectory file, tracks grouped by id and sorted by frame.
inline std::vector<RawTrack> load_ethucy(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  return parse_tracks(in, path);
}

inline std::string format_double(double v)
{
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// Write tracks in the text format, sorted by frame then id.
inline void write_tracks(std::ostream & out, const std::vector<RawTrack> & tracks)
{
  std::vector<std::tuple<int, int, Point>> rows;
  for (const auto & t : tracks) {
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      rows.emplace_back(t.frames[i], t.id, t.points[i]);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto & a, const auto & b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (const auto & [frame, id, p] : rows) {
    out << frame << '\t' << id << '\t' << format_double(p.x) << '\t' << format_double(p.y)
        << '\n';
  }
}

/**
 * @brief Lay scenes out end to end as tracks, one empty frame between scenes.
 *
 * Agent ids are renumbered to be unique across the file. Windowing the result
 * with the scene length recovers the scenes.
 */
inline std::vector<RawTrack> scenes_to_tracks(const std::vector<Scene> & scenes, int frame_step = 10)
{
  std::vector<RawTrack> tracks;
  RawTrack vehicle{kVehicleId, {}, {}};
  int frame = 0;
  int next_id = 1;
  for (const auto & s : scenes) {
    for (const auto & ped : s.pedestrians) {
      RawTrack t{next_id++, {}, ped};
      for (std::size_t f = 0; f < ped.size(); ++f) {
        t.frames.push_back(frame + static_cast<int>(f) * frame_step);
      }
      tracks.push_back(std::move(t));
    }
    if (s.vehicle) {
      for (std::size_t f = 0; f < s.vehicle->size(); ++f) {
        vehicle.frames.push_back(frame + static_cast<int>(f) * frame_step);
        vehicle.points.push_back((*s.vehicle)[f]);
      }
    }
    frame += static_cast<int>(s.length() + 1) * frame_step;
  }
  if (!vehicle.frames.empty()) {
    tracks.insert(tracks.begin(), std::move(vehicle));
  }
  return tracks;
}

/// Spacing between consecutive observation frames: gcd of frame differences.
inline int detect_frame_step(const std::vector<RawTrack> & tracks)
{
  std::vector<int> frames;
  for (const auto & t : tracks) {
    frames.insert(frames.end(), t.frames.begin(), t.frames.end());
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  int step = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    step = std::gcd(step, frames[i] - frames[i - 1]);
  }
  return step == 0 ? 1 : step;
}

struct WindowConfig
{
  std::size_t obs_len{8};
  std::size_t pred_len{12};
  /// Windows start at every `stride`-th distinct frame.
  std::size_t stride{1};
  /// Frames between consecutive observations; 0 detects it from the data.
  int frame_step{0};
  /// Seconds per observation step.
  double frame_interval{0.4};
  std::string tag;
};

/**
 * @brief Cut tracks into fixed-length scenes.
 *
 * A window spans obs_len + pred_len observation frames. Only pedestrians
 * present at every frame of the window are kept; windows without any are
 * dropped. The vehicle (id kVehicleId) is attached when it too covers the
 * whole window.
 */
inline std::vector<Scene> window_scenes(const std::vector<RawTrack> & tracks, const WindowConfig & cfg)
{
  if (cfg.obs_len < 1 || cfg.pred_len < 1 || cfg.stride < 1) {
    throw UsageError("window_scenes: obs_len, pred_len and stride must be >= 1");
  }
  const int step = cfg.frame_step > 0 ? cfg.frame_step : detect_frame_step(tracks);
  const std::size_t len = cfg.obs_len + cfg.pred_len;
  std::vector<int> frames;
  for (const auto & t : tracks) {
    frames.insert(frames.end(), t.frames.begin(), t.frames.end());
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  // Slice of a track covering [start, start + (len-1)*step], or nullopt.
  auto cover = [&](const RawTrack & t, int start) -> std::optional<Trajectory> {
    auto it = std::lower_bound(t.frames.begin(), t.frames.end(), start);
    if (it == t.frames.end() || *it != start) {
      return std::nullopt;
    }
    auto idx = static_cast<std::size_t>(it - t.frames.begin());
    Trajectory out;
    out.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
      const int want = start + static_cast<int>(k) * step;
      while (idx < t.frames.size() && t.frames[idx] < want) {
        ++idx;
      }
      if (idx == t.frames.size() || t.frames[idx] != want) {
        return std::nullopt;
      }
      out.push_back(t.points[idx]);
    }
    return out;
  };

  std::vector<Scene> scenes;
  for (std::size_t f = 0; f < frames.size(); f += cfg.stride) {
    Scene scene;
    scene.first_frame = frames[f];
    scene.frame_step = step;
    scene.frame_interval = cfg.frame_interval;
    scene.tag = cfg.tag;
    for (const auto & t : tracks) {
      auto slice = cover(t, frames[f]);
      if (!slice) {
        continue;
      }
      if (t.id == kVehicleId) {
        scene.vehicle = std::move(slice);
      } else {
        scene.agent_ids.push_back(t.id);
        scene.pedestrians.push_back(std::move(*slice));
      }
    }
    if (!scene.pedestrians.empty()) {
      scenes.push_back(std::move(scene));
    }
  }
  return scenes;
}

/**
 * @brief Split scenes into contiguous time blocks (train, validation, test).
 *
 * Scenes are ordered by first frame; the first `train` fraction goes to the
 * training block, the next `val` fraction to validation, the rest to test.
 */
inline std::array<std::vector<Scene>, 3> split_contiguous(
  std::vector<Scene> scenes, double train = 0.6, double val = 0.2)
{
  if (train < 0 || val < 0 || train + val > 1.0) {
    throw UsageError("split_contiguous: invalid fractions");
  }
  std::stable_sort(scenes.begin(), scenes.end(), [](const Scene & a, const Scene & b) {
    return a.first_frame < b.first_frame;
  });
  const auto n = scenes.size();
  const auto n_train = static_cast<std::size_t>(std::floor(train * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(val * static_cast<double>(n)));
  std::array<std::vector<Scene>, 3> out;
  for (std::size_t i = 0; i < n; ++i) {
    out[i < n_train ? 0 : (i < n_train + n_val ? 1 : 2)].push_back(std::move(scenes[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flip augmentation

enum class Flip { none, about_x_axis, about_y_axis };

/// Mirror a scene: about_x_axis negates y, about_y_axis negates x.
inline Scene flip(Scene scene, Flip axis)
{
  if (axis == Flip::none) {
    return scene;
  }
  auto apply = [axis](Trajectory & t) {
    for (auto & p : t) {
      (axis == Flip::about_x_axis ? p.y : p.x) *= -1.0;
    }
  };
  for (auto & t : scene.pedestrians) {
    apply(t);
  }
  if (scene.vehicle) {
    apply(*scene.vehicle);
  }
  return scene;
}

/// Each scene independently left alone or mirrored about x or y, equally likely.
inline std::vector<Scene> augment_flip(std::vector<Scene> scenes, std::uint64_t seed)
{
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  for (auto & s : scenes) {
    s = flip(std::move(s), static_cast<Flip>(pick(rng)));
  }
  return scenes;
}

// ---------------------------------------------------------------------------
// Synthetic crowds: goal attraction plus exponential repulsion, Euler-integrated.

enum class Template { head_on, crossing, group_crossing, vehicle_from_behind };

inline const char * template_name(Template t)
{
  switch (t) {
    case Template::head_on:
      return "head_on";
    case Template::crossing:
      return "crossing";
    case Template::group_crossing:
      return "group_crossing";
    case Template::vehicle_from_behind:
      return "vehicle_from_behind";
  }
  return "?";
}

inline Template template_from_name(const std::string & name)
{
  for (auto t : {Template::head_on, Template::crossing, Template::group_crossing,
                 Template::vehicle_from_behind}) {
    if (name == template_name(t)) {
      return t;
    }
  }
  throw UsageError("unknown scene template '" + name + "'");
}

struct SfmConfig
{
  /// Inverse relaxation time pulling velocity toward the desired velocity, 1/s.
  double goal_gain{2.0};
  /// Pairwise repulsion A * exp((r - d) / B), m/s^2 and meters.
  double ped_repulsion{10.0};
  double ped_range{0.3};
  double ped_radius{0.3};
  double vehicle_repulsion{25.0};
  double vehicle_range{0.5};
  double vehicle_radius{1.0};
  double preferred_speed{1.3};
  /// Per-agent preferred speeds are uniform in preferred_speed +- speed_jitter.
  double speed_jitter{0.2};
  /// Initial speed as a fraction of the preferred speed, uniform in [min, 1].
  double initial_speed_min_fraction{0.3};
  double vehicle_speed{3.0};
  /// Seconds between recorded frames.
  double timestep{0.4};
  int substeps{8};
  /// Start positions are drawn within +-arena_half_extent meters.
  double arena_half_extent{6.0};
  std::size_t frames{20};
  bool random_rotation{true};
  std::uint64_t seed{1};
  /// Relative template frequencies; vehicle_from_behind is used only with a vehicle.
  std::map<std::string, double> mix{
    {"head_on", 1.0}, {"crossing", 1.0}, {"group_crossing", 1.0}, {"vehicle_from_behind", 1.0}};
};

inline void validate(const SfmConfig & c)
{
  const bool ok = c.goal_gain > 0 && c.ped_repulsion > 0 && c.ped_range > 0 && c.ped_radius > 0 &&
                  c.vehicle_repulsion > 0 && c.vehicle_range > 0 && c.vehicle_radius > 0 &&
                  c.preferred_speed > 0 && c.speed_jitter >= 0 &&
                  c.speed_jitter < c.preferred_speed && c.initial_speed_min_fraction >= 0 &&
                  c.initial_speed_min_fraction <= 1 && c.vehicle_speed > 0 && c.timestep > 0 &&
                  c.substeps > 0 && c.arena_half_extent > 0 && c.frames >= 2;
  if (!ok) {
    throw UsageError("invalid social-force configuration");
  }
  for (const auto & [name, w] : c.mix) {
    template_from_name(name);
    if (!(w >= 0)) {
      throw UsageError("template weights must be non-negative");
    }
  }
}

/// All SfmConfig fields keyed by member name.
inline nlohmann::json to_json(const SfmConfig & c)
{
  return {
    {"goal_gain", c.goal_gain},
    {"ped_repulsion", c.ped_repulsion},
    {"ped_range", c.ped_range},
    {"ped_radius", c.ped_radius},
    {"vehicle_repulsion", c.vehicle_repulsion},
    {"vehicle_range", c.vehicle_range},
    {"vehicle_radius", c.vehicle_radius},
    {"preferred_speed", c.preferred_speed},
    {"speed_jitter", c.speed_jitter},
    {"initial_speed_min_fraction", c.initial_speed_min_fraction},
    {"vehicle_speed", c.vehicle_speed},
    {"timestep", c.timestep},
    {"substeps", c.substeps},
    {"arena_half_extent", c.arena_half_extent},
    {"frames", c.frames},
    {"random_rotation", c.random_rotation},
    {"seed", c.seed},
    {"mix", c.mix}};
}

/// Overlay @p j onto @p base. Unknown keys raise UsageError.
inline SfmConfig sfm_config_from_json(const nlohmann::json & j, SfmConfig base = {})
{
  if (!j.is_object()) {
    throw UsageError("sfm config must be a JSON object");
  }
  const auto known = to_json(base);
  try {
    for (const auto & [key, value] : j.items()) {
      if (!known.contains(key)) {
        throw UsageError("sfm config: unknown key '" + key + "'");
      }
    }
    auto field = [&](const char * key, auto & member) {
      if (j.contains(key)) {
        member = j.at(key).get<std::remove_reference_t<decltype(member)>>();
      }
    };
    field("goal_gain", base.goal_gain);
    field("ped_repulsion", base.ped_repulsion);
    field("ped_range", base.ped_range);
    field("ped_radius", base.ped_radius);
    field("vehicle_repulsion", base.vehicle_repulsion);
    field("vehicle_range", base.vehicle_range);
    field("vehicle_radius", base.vehicle_radius);
    field("preferred_speed", base.preferred_speed);
    field("speed_jitter", base.speed_jitter);
    field("initial_speed_min_fraction", base.initial_speed_min_fraction);
    field("vehicle_speed", base.vehicle_speed);
    field("timestep", base.timestep);
    field("substeps", base.substeps);
    field("arena_half_extent", base.arena_half_extent);
    field("frames", base.frames);
    field("random_rotation", base.random_rotation);
    field("seed", base.seed);
    field("mix", base.mix);
  } catch (const nlohmann::json::exception & e) {
    throw UsageError(std::string("sfm config: ") + e.what());
  }
  validate(base);
  return base;
}

struct SimAgent
{
  Point position;
  Point velocity;
  Point goal;
  double preferred_speed{1.3};
};

/// Vehicle moving at constant velocity, unaffected by pedestrians.
struct SimVehicle
{
  Point position;
  Point velocity;
};

/**
 * @brief Integrate agents for cfg.frames recorded frames (frame 0 is the initial state).
 *
 * Returns one trajectory per agent and, when a vehicle is given, its track as
 * the last element.
 */
inline std::vector<Trajectory> simulate(
  const SfmConfig & cfg, std::vector<SimAgent> agents, std::optional<SimVehicle> vehicle)
{
  const double dt = cfg.timestep / cfg.substeps;
  std::vector<Trajectory> out(agents.size() + (vehicle ? 1 : 0));
  auto record = [&] {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      out[i].push_back(agents[i].position);
    }
    if (vehicle) {
      out.back().push_back(vehicle->position);
    }
  };
  record();
  std::vector<Point> force(agents.size());
  for (std::size_t frame = 1; frame < cfg.frames; ++frame) {
    for (int s = 0; s < cfg.substeps; ++s) {
      for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto & a = agents[i];
        const Point to_goal = a.goal - a.position;
        const double dist = norm(to_goal);
        Point desired{0.0, 0.0};
        if (dist > 1e-9) {
          // slow down over the final meter so agents settle on the goal
          desired = (a.preferred_speed * std::min(1.0, dist) / dist) * to_goal;
        }
        Point f = cfg.goal_gain * (desired - a.velocity);
        for (std::size_t j = 0; j < agents.size(); ++j) {
          if (j == i) {
            continue;
          }
          const Point d = a.position - agents[j].position;
          const double r = std::max(norm(d), 1e-6);
          const double mag = cfg.ped_repulsion * std::exp((2.0 * cfg.ped_radius - r) / cfg.ped_range);
          f = f + (mag / r) * d;
        }
        if (vehicle) {
          const Point d = a.position - vehicle->position;
          const double r = std::max(norm(d), 1e-6);
          const double mag =
            cfg.vehicle_repulsion * std::exp((cfg.vehicle_radius - r) / cfg.vehicle_range);
          f = f + (mag / r) * d;
        }
        force[i] = f;
      }
      for (std::size_t i = 0; i < agents.size(); ++i) {
        auto & a = agents[i];
        a.velocity = a.velocity + dt * force[i];
        const double speed = norm(a.velocity);
        const double cap = 2.0 * a.preferred_speed;
        if (speed > cap) {
          a.velocity = (cap / speed) * a.velocity;
        }
        a.position = a.position + dt * a.velocity;
      }
      if (vehicle) {
        vehicle->position = vehicle->position + dt * vehicle->velocity;
      }
    }
    record();
  }
  return out;
}

namespace detail
{

inline std::vector<Template> allocate_templates(
  const SfmConfig & cfg, std::size_t n, bool with_vehicle, Rng & rng)
{
  std::vector<std::pair<Template, double>> weights;
  double total = 0.0;
  for (const auto & [name, w] : cfg.mix) {
    const auto t = template_from_name(name);
    if (t == Template::vehicle_from_behind && !with_vehicle) {
      continue;
    }
    if (w > 0) {
      weights.emplace_back(t, w);
      total += w;
    }
  }
  if (n > 0 && total <= 0.0) {
    throw UsageError("template mix selects no scenes");
  }
  // largest remainder apportionment, ties to the earlier template
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i].second / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto & a, const auto & b) {
    return a.first > b.first;
  });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
    ++counts[remainders[r % remainders.size()].second];
  }
  std::vector<Template> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.insert(out.end(), counts[i], weights[i].first);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace detail

/// Template chosen for each of n scenes; same allocation generate_sfm uses for a given seed.
inline std::vector<Template> sfm_templates(const SfmConfig & cfg, std::size_t n, bool with_vehicle)
{
  validate(cfg);
  Rng rng(cfg.seed);
  return detail::allocate_templates(cfg, n, with_vehicle, rng);
}

/**
 * @brief Generate n synthetic scenes of cfg.frames frames each.
 *
 * Templates: head-on pair, crossing pair, two groups crossing, and a vehicle
 * approaching walkers from behind. With @p with_vehicle every scene carries a
 * vehicle track (other templates get one passing on a parallel lane).
 */
inline std::vector<Scene> generate_sfm(const SfmConfig & cfg, std::size_t n, bool with_vehicle)
{
  validate(cfg);
  Rng rng(cfg.seed);
  const auto templates = detail::allocate_templates(cfg, n, with_vehicle, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double far = 50.0;

  std::vector<Scene> scenes;
  scenes.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Template tmpl = templates[s];
    const double half = cfg.arena_half_extent;
    std::vector<SimAgent> agents;
    auto walker = [&](Point start, Point heading) {
      SimAgent a;
      a.preferred_speed =
        uniform(cfg.preferred_speed - cfg.speed_jitter, cfg.preferred_speed + cfg.speed_jitter);
      a.position = start;
      a.goal = start + far * heading;
      a.velocity = (a.preferred_speed * uniform(cfg.initial_speed_min_fraction, 1.0)) * heading;
      agents.push_back(a);
    };
    std::optional<SimVehicle> vehicle;
    switch (tmpl) {
      case Template::head_on: {
        const double lane = uniform(-1.0, 1.0);
        const double offset = uniform(-0.4, 0.4);
        walker({-uniform(0.5, 1.0) * half, lane}, {1.0, 0.0});
        walker({uniform(0.5, 1.0) * half, lane + offset}, {-1.0, 0.0});
        break;
      }
      case Template::crossing: {
        walker({-uniform(0.5, 1.0) * half, uniform(-1.0, 1.0)}, {1.0, 0.0});
        walker({uniform(-1.0, 1.0), -uniform(0.5, 1.0) * half}, {0.0, 1.0});
        break;
      }
      case Template::group_crossing: {
        const double x0 = -uniform(0.5, 1.0) * half;
        const double y0 = uniform(-1.0, 1.0);
        const auto left = static_cast<int>(2 + (unit(rng) < 0.5 ? 0 : 1));
        for (int k = 0; k < left; ++k) {
          walker({x0 + uniform(-0.2, 0.2), y0 + 0.8 * k}, {1.0, 0.0});
        }
        const double x1 = uniform(0.5, 1.0) * half;
        for (int k = 0; k < 2; ++k) {
          walker({x1 + uniform(-0.2, 0.2), y0 + 0.4 + 0.8 * k + uniform(-0.3, 0.3)}, {-1.0, 0.0});
        }
        break;
      }
      case Template::vehicle_from_behind: {
        const double x0 = -uniform(0.3, 0.8) * half;
        const auto count = static_cast<int>(2 + (unit(rng) < 0.5 ? 0 : 1));
        for (int k = 0; k < count; ++k) {
          walker({x0 + uniform(-1.0, 1.0), uniform(-1.0, 1.0)}, {1.0, 0.0});
        }
        const double lag = uniform(6.0, 10.0);
        vehicle = SimVehicle{{x0 - lag, uniform(-0.5, 0.5)}, {cfg.vehicle_speed, 0.0}};
        break;
      }
    }
    if (with_vehicle && !vehicle) {
      const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double dir = unit(rng) < 0.5 ? -1.0 : 1.0;
      vehicle = SimVehicle{
        {-dir * half * 1.5, side * uniform(3.0, 5.0)}, {dir * cfg.vehicle_speed, 0.0}};
    }
    auto tracks = simulate(cfg, agents, vehicle);

    Scene scene;
    scene.frame_step = 10;
    scene.frame_interval = cfg.timestep;
    scene.tag = std::string("sfm:") + template_name(tmpl);
    if (vehicle) {
      scene.vehicle = std::move(tracks.back());
      tracks.pop_back();
    }
    scene.pedestrians = std::move(tracks);
    for (std::size_t i = 0; i < scene.pedestrians.size(); ++i) {
      scene.agent_ids.push_back(static_cast<int>(i + 1));
    }
    if (cfg.random_rotation) {
      const double angle = uniform(-std::numbers::pi, std::numbers::pi);
      const double c = std::cos(angle), sn = std::sin(angle);
      auto rotate = [c, sn](Trajectory & t) {
        for (auto & p : t) {
          p = {c * p.x - sn * p.y, sn * p.x + c * p.y};
        }
      };
      for (auto & t : scene.pedestrians) {
        rotate(t);
      }
      if (scene.vehicle) {
        rotate(*scene.vehicle);
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace pcgan::data

#endif  // PCGAN__DATA_HPP_
