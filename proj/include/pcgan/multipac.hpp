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

#ifndef PCGAN__MULTIPAC_HPP_
#define PCGAN__MULTIPAC_HPP_

#include "pcgan/gmm.hpp"
#include "pcgan/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

// Modal-path extraction: cluster mixture components per prediction step,
// link clusters across steps into a tree, and read one path per leaf.

namespace pcgan::multipac
{

struct Config
{
  /// DBSCAN neighbourhood radius, meters.
  double eps{0.5};
  /// Summed mixture weight a neighbourhood needs for its centre to be a core point.
  double min_weight{0.05};
};

struct Clustering
{
  /// Cluster index per point, numbered in order of first appearance.
  std::vector<std::size_t> labels;
  std::size_t cluster_count{0};
};

namespace detail
{

inline Point weighted_mean(
  std::span<const Point> points, std::span<const double> weights,
  const std::vector<std::size_t> & members)
{
  double total = 0.0;
  Point acc{0.0, 0.0};
  for (auto m : members) {
    total += weights[m];
    acc = acc + weights[m] * points[m];
  }
  if (total > 0.0) {
    return (1.0 / total) * acc;
  }
  acc = {0.0, 0.0};
  for (auto m : members) {
    acc = acc + points[m];
  }
  return (1.0 / static_cast<double>(members.size())) * acc;
}

inline Clustering canonical(const std::vector<int> & raw)
{
  Clustering out;
  std::vector<int> remap;
  for (int l : raw) {
    if (l >= static_cast<int>(remap.size())) {
      remap.resize(static_cast<std::size_t>(l) + 1, -1);
    }
    if (remap[static_cast<std::size_t>(l)] < 0) {
      remap[static_cast<std::size_t>(l)] = static_cast<int>(out.cluster_count++);
    }
    out.labels.push_back(static_cast<std::size_t>(remap[static_cast<std::size_t>(l)]));
  }
  return out;
}

}  // namespace detail

/**
 * @brief DBSCAN where a point is core when its eps-neighbourhood (itself
 * included) carries at least @p min_weight summed weight.
 *
 * Clusters grow from core points through core neighbours. A non-core point
 * within eps of a core point joins the cluster of its nearest such core point.
 * Remaining noise points join the cluster with the nearest weighted centroid;
 * if no point is core, the heaviest point seeds a single cluster. Every point
 * is labelled.
 */
inline Clustering weighted_dbscan(
  std::span<const Point> points, std::span<const double> weights, double eps, double min_weight)
{
  const std::size_t n = points.size();
  if (n == 0 || weights.size() != n) {
    throw DimensionError("weighted_dbscan: need one weight per point and at least one point");
  }
  if (!(eps > 0.0)) {
    throw UsageError("weighted_dbscan: eps must be positive");
  }
  std::vector<std::vector<std::size_t>> nbr(n);
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (distance(points[i], points[j]) <= eps) {
        nbr[i].push_back(j);
        mass += weights[j];
      }
    }
    core[i] = mass >= min_weight;
  }

  std::vector<int> label(n, -1);
  int clusters = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || label[seed] >= 0) {
      continue;
    }
    std::deque<std::size_t> queue{seed};
    label[seed] = clusters;
    while (!queue.empty()) {
      const auto p = queue.front();
      queue.pop_front();
      for (auto q : nbr[p]) {
        if (core[q] && label[q] < 0) {
          label[q] = clusters;
          queue.push_back(q);
        }
      }
    }
    ++clusters;
  }
  // border points
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (auto j : nbr[i]) {
      if (core[j] && distance(points[i], points[j]) < best) {
        best = distance(points[i], points[j]);
        label[i] = label[j];
      }
    }
  }
  if (clusters == 0) {
    std::size_t heaviest = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (weights[i] > weights[heaviest]) {
        heaviest = i;
      }
    }
    label[heaviest] = clusters++;
  }
  // noise points merge into the nearest centroid of the clusters found so far
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) {
      members[static_cast<std::size_t>(label[i])].push_back(i);
    }
  }
  std::vector<Point> centroids;
  for (const auto & m : members) {
    centroids.push_back(detail::weighted_mean(points, weights, m));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) {
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = distance(points[i], centroids[c]);
      if (d < best) {
        best = d;
        label[i] = static_cast<int>(c);
      }
    }
  }
  return detail::canonical(label);
}

struct ClusterNode
{
  std::size_t layer{0};
  /// Weighted mean of member component means.
  Point centroid;
  /// Sum of member component weights.
  double weight{0.0};
  /// Component indices in this cluster.
  std::vector<std::size_t> members;
  /// Index into the previous layer; empty on the first layer.
  std::optional<std::size_t> parent;
};

/// layers[t] holds the clusters of prediction step t.
struct ModalPathTree
{
  std::vector<std::vector<ClusterNode>> layers;
};

struct ModalPath
{
  Trajectory points;
  double weight{0.0};
  /// Node index used at every layer.
  std::vector<std::size_t> nodes;
};

/// Clusters of one mixture step as tree nodes (parents unset).
inline std::vector<ClusterNode> cluster_step(const gmm::GmmStep & step, std::size_t layer, const Config & cfg)
{
  std::vector<Point> means;
  std::vector<double> weights;
  for (const auto & c : step.components) {
    means.push_back(c.mu);
    weights.push_back(c.pi);
  }
  const auto cl = weighted_dbscan(means, weights, cfg.eps, cfg.min_weight);
  std::vector<ClusterNode> nodes(cl.cluster_count);
  for (std::size_t k = 0; k < cl.labels.size(); ++k) {
    nodes[cl.labels[k]].members.push_back(k);
  }
  for (auto & node : nodes) {
    node.layer = layer;
    node.centroid = detail::weighted_mean(means, weights, node.members);
    for (auto m : node.members) {
      node.weight += weights[m];
    }
  }
  return nodes;
}

/**
 * @brief Build the modal-path tree of one agent's mixture sequence.
 *
 * Each cluster at step t+1 takes as parent the step-t cluster that shares the
 * most mixture weight with it (summed step-t weight of shared component
 * indices); ties go to the lower index, and with nothing shared the nearest
 * centroid wins.
 */
inline ModalPathTree build_tree(const gmm::GmmSequence & seq, const Config & cfg = {})
{
  if (seq.empty()) {
    throw UsageError("build_tree: empty mixture sequence");
  }
  ModalPathTree tree;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto layer = cluster_step(seq[t], t, cfg);
    if (t > 0) {
      const auto & prev = tree.layers.back();
      const auto & prev_step = seq[t - 1];
      for (auto & node : layer) {
        double best_mass = 0.0;
        std::optional<std::size_t> best;
        for (std::size_t p = 0; p < prev.size(); ++p) {
          double mass = 0.0;
          for (auto m : node.members) {
            if (std::find(prev[p].members.begin(), prev[p].members.end(), m) != prev[p].members.end()) {
              mass += prev_step.components[m].pi;
            }
          }
          if (mass > best_mass) {
            best_mass = mass;
            best = p;
          }
        }
        if (!best) {
          double best_d = std::numeric_limits<double>::infinity();
          for (std::size_t p = 0; p < prev.size(); ++p) {
            const double d = distance(node.centroid, prev[p].centroid);
            if (d < best_d) {
              best_d = d;
              best = p;
            }
          }
        }
        node.parent = best;
      }
    }
    tree.layers.push_back(std::move(layer));
  }
  return tree;
}

/// One path per last-layer node, traced back to the first layer; weights renormalized to sum to one.
inline std::vector<ModalPath> extract_modal_paths(const ModalPathTree & tree)
{
  if (tree.layers.empty() || tree.layers.back().empty()) {
    throw UsageError("extract_modal_paths: empty tree");
  }
  const auto & leaves = tree.layers.back();
  double total = 0.0;
  for (const auto & leaf : leaves) {
    total += leaf.weight;
  }
  std::vector<ModalPath> paths;
  for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
    ModalPath path;
    path.nodes.resize(tree.layers.size());
    path.points.resize(tree.layers.size());
    std::size_t idx = leaf;
    for (std::size_t t = tree.layers.size(); t-- > 0;) {
      const auto & node = tree.layers[t].at(idx);
      path.nodes[t] = idx;
      path.points[t] = node.centroid;
      if (t > 0) {
        if (!node.parent) {
          throw DataError("extract_modal_paths: node without parent");
        }
        idx = *node.parent;
      }
    }
    path.weight = total > 0.0 ? leaves[leaf].weight / total : 1.0 / static_cast<double>(leaves.size());
    paths.push_back(std::move(path));
  }
  return paths;
}

/// Index of the highest-weight path; the first one wins ties.
inline std::size_t most_likely_index(const std::vector<ModalPath> & paths)
{
  if (paths.empty()) {
    throw UsageError("most_likely_path: no paths");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < paths.size(); ++i) {
    if (paths[i].weight > paths[best].weight) {
      best = i;
    }
  }
  return best;
}

inline const ModalPath & most_likely_path(const std::vector<ModalPath> & paths)
{
  return paths[most_likely_index(paths)];
}

/// Tree and paths of one agent.
struct AgentPaths
{
  ModalPathTree tree;
  std::vector<ModalPath> paths;
};

inline AgentPaths analyse(const gmm::GmmSequence & seq, const Config & cfg = {})
{
  AgentPaths out;
  out.tree = build_tree(seq, cfg);
  out.paths = extract_modal_paths(out.tree);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable path positions.
//
// Membership is fixed by the value-level tree; centroids and path weights are
// recomputed on the tape from the mixture weights and means so gradients flow
// back into both.

struct PathVars
{
  /// Centroid of every path at step t, [paths x 2].
  std::vector<numerics::Var> steps;
  /// Renormalized path weights, [paths x 1].
  numerics::Var weights;
  /// Batch row that owns each path; paths are grouped by row in ascending order.
  std::vector<std::size_t> row_of_path;
};

/**
 * @brief Rebuild the paths of every batch row on the tape.
 *
 * @p per_row[r] are the paths of row r, as returned by extract_modal_paths
 * on that row's tree; @p trees[r] supplies the node memberships.
 */
inline PathVars path_vars(
  numerics::Tape & tape, const std::vector<gmm::MixtureVars> & steps,
  const std::vector<ModalPathTree> & trees, const std::vector<std::vector<ModalPath>> & per_row)
{
  namespace nx = numerics;
  if (steps.empty() || trees.size() != steps.front().rows() || per_row.size() != trees.size()) {
    throw DimensionError("path_vars: rows of mixtures, trees and paths disagree");
  }
  const std::size_t rows = trees.size(), k = steps.front().k();
  PathVars out;
  std::vector<std::size_t> offsets{0};
  for (std::size_t r = 0; r < rows; ++r) {
    out.row_of_path.insert(out.row_of_path.end(), per_row[r].size(), r);
    offsets.push_back(out.row_of_path.size());
  }
  const std::size_t paths = out.row_of_path.size();
  auto membership = [&](std::size_t t) {
    nx::Tensor m = nx::Tensor::zeros({paths, rows * k});
    std::size_t p = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (const auto & path : per_row[r]) {
        for (auto comp : trees[r].layers[t].at(path.nodes[t]).members) {
          m(p, r * k + comp) = 1.0;
        }
        ++p;
      }
    }
    return tape.constant(std::move(m));
  };
  nx::Var leaf_mass;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto & mix = steps[t];
    const auto m = membership(t);
    const auto pi = nx::reshape(mix.pi, {rows * k, 1});
    const auto mass = nx::matmul(m, pi);
    const auto cx = nx::div(nx::matmul(m, nx::reshape(nx::mul(mix.pi, mix.mu_x), {rows * k, 1})), mass);
    const auto cy = nx::div(nx::matmul(m, nx::reshape(nx::mul(mix.pi, mix.mu_y), {rows * k, 1})), mass);
    out.steps.push_back(nx::concat({cx, cy}));
    leaf_mass = mass;
  }
  const auto totals = nx::gather_rows(nx::segment_sum_rows(leaf_mass, offsets), out.row_of_path);
  out.weights = nx::div(leaf_mass, totals);
  return out;
}

// ---------------------------------------------------------------------------
// JSON layout of a tree:
//   { "layers": [ [ {"centroid": [x, y], "weight": w, "parent": <index|null>,
//                    "members": [component indices]}, ... ], ... ] }

inline nlohmann::json tree_to_json(const ModalPathTree & tree, Point shift = {0.0, 0.0})
{
  nlohmann::json layers = nlohmann::json::array();
  for (const auto & layer : tree.layers) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto & node : layer) {
      const Point c = node.centroid + shift;
      nodes.push_back(
        {{"centroid", {c.x, c.y}},
         {"weight", node.weight},
         {"parent", node.parent ? nlohmann::json(*node.parent) : nlohmann::json(nullptr)},
         {"members", node.members}});
    }
    layers.push_back(std::move(nodes));
  }
  return {{"layers", std::move(layers)}};
}

inline nlohmann::json paths_to_json(const std::vector<ModalPath> & paths, Point shift = {0.0, 0.0})
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto & p : paths) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto & q : p.points) {
      pts.push_back({q.x + shift.x, q.y + shift.y});
    }
    arr.push_back({{"weight", p.weight}, {"nodes", p.nodes}, {"points", std::move(pts)}});
  }
  return arr;
}

}  // namespace pcgan::multipac

#endif  // PCGAN__MULTIPAC_HPP_
