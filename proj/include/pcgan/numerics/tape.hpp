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

#ifndef PCGAN__NUMERICS__TAPE_HPP_
#define PCGAN__NUMERICS__TAPE_HPP_

#include "pcgan/numerics/tensor.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pcgan::numerics
{

class Tape;

/// Handle to a tensor recorded on a tape.
class Var
{
public:
  Var() = default;
  Var(Tape * tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape & tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  inline const Tensor & value() const;
  inline const Shape & shape() const;

private:
  Tape * tape_{nullptr};
  std::size_t id_{0};
};

/**
 * @brief Linear record of primitive operations for reverse-mode differentiation.
 *
 * Nodes are appended in execution order, so the tape is topologically sorted by
 * construction. `backward()` walks it once in reverse. A node only receives a
 * gradient buffer when some leaf below it was created with `parameter()`.
 *
 * A tape is single-threaded; independent scenes use independent tapes.
 */
class Tape
{
public:
  /// Called with the tape, the output gradient and the node index.
  using BackwardFn = std::function<void(Tape &, const Tensor &, std::size_t)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape & operator=(const Tape &) = delete;

  Var parameter(Tensor value) { return push(std::move(value), {}, nullptr, true); }
  Var constant(Tensor value) { return push(std::move(value), {}, nullptr, false); }

  /// Append the result of a primitive op. Checks the value for NaN/Inf.
  Var record(
    Tensor value, std::vector<std::size_t> inputs, BackwardFn backward, const char * op_name)
  {
    if (!value.all_finite()) {
      throw NumericError(std::string("non-finite value produced by ") + op_name);
    }
    bool needs_grad = false;
    for (auto in : inputs) {
      needs_grad = needs_grad || nodes_[in].requires_grad;
    }
    if (!needs_grad) {
      backward = nullptr;
    }
    return push(std::move(value), std::move(inputs), std::move(backward), needs_grad);
  }

  const Tensor & value(std::size_t id) const { return nodes_[id].value; }
  const std::vector<std::size_t> & inputs(std::size_t id) const { return nodes_[id].inputs; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /**
   * @brief Accumulate d(loss)/d(node) for every node reachable from @p loss.
   *
   * Any previously computed gradients are discarded first.
   */
  void backward(Var loss)
  {
    if (&loss.tape() != this) {
      throw UsageError("backward: loss belongs to another tape");
    }
    if (value(loss.id()).size() != 1) {
      throw UsageError(
        "backward: loss must be scalar, got shape " + shape_string(value(loss.id()).shape()));
    }
    for (auto & node : nodes_) {
      node.grad = Tensor();
      node.has_grad = false;
    }
    auto & seed = grad_buffer(loss.id());
    seed[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      auto & node = nodes_[i];
      if (!node.has_grad || !node.backward) {
        continue;
      }
      node.backward(*this, node.grad, i);
    }
  }

  /// Gradient after backward(); zeros for nodes the loss does not depend on.
  Tensor grad(Var v) const
  {
    const auto & node = nodes_[v.id()];
    if (node.has_grad) {
      return node.grad;
    }
    return Tensor::zeros(node.value.shape());
  }

  /**
   * @brief Gradient buffer of an input node, or nullptr when it needs none.
   *
   * Backward functions accumulate into the returned tensor.
   */
  Tensor * input_grad(std::size_t id)
  {
    if (!nodes_[id].requires_grad) {
      return nullptr;
    }
    return &grad_buffer(id);
  }

private:
  struct Node
  {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad{false};
    bool has_grad{false};
  };

  Var push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward, bool requires_grad)
  {
    Node node;
    node.value = std::move(value);
    node.inputs = std::move(inputs);
    node.backward = std::move(backward);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
  }

  Tensor & grad_buffer(std::size_t id)
  {
    auto & node = nodes_[id];
    if (!node.has_grad) {
      node.grad = Tensor::zeros(node.value.shape());
      node.has_grad = true;
    }
    return node.grad;
  }

  std::vector<Node> nodes_;
};

inline const Tensor & Var::value() const { return tape_->value(id_); }
inline const Shape & Var::shape() const { return tape_->value(id_).shape(); }

}  // namespace pcgan::numerics

#endif  // PCGAN__NUMERICS__TAPE_HPP_
