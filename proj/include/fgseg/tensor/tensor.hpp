/* Copyright 2026 The fgseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef FGSEG_TENSOR_TENSOR_HPP_
#define FGSEG_TENSOR_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fgseg {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

// One vertex of the autograd graph. Every Tensor handle points at a Node;
// nodes produced by differentiable ops keep their inputs alive through
// `parents` and know how to push their gradient back into them.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until the first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node& self)> backward;

  std::vector<double>& ensure_grad();
  void accumulate(std::span<const double> g);
};

}  // namespace detail

// Dense row-major double-precision tensor with reverse-mode gradients.
//
// Copies share storage and graph position (handle semantics). A Tensor built
// from values is a leaf; results of ops record their inputs when gradient
// recording is enabled and at least one input requires a gradient.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  // Writable view of the values. Only meaningful on leaves (parameters,
  // inputs); mutating an op result does not re-run its graph.
  std::span<double> mutable_values();
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  // Accumulated gradient; empty span when nothing has been accumulated.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Reverse sweep from a scalar. Each reachable node is visited exactly once,
  // in reverse topological order. Leaf gradients accumulate across calls.
  void backward() const;

  // Same values, fresh leaf, no history.
  Tensor detach() const;
  // Deep copy of values into a new leaf carrying the same requires_grad flag.
  Tensor clone() const;

  const char* op_name() const;
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  // Builds an op result. `backward` receives the result node after its
  // gradient is complete and must accumulate into `self.parents`.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            const std::vector<Tensor>& inputs, const char* op,
                            std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const detail::Node& node() const;

  std::shared_ptr<detail::Node> node_;
};

bool grad_enabled();

// Disables graph recording for its lifetime (evaluation passes).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace fgseg

#endif  // FGSEG_TENSOR_TENSOR_HPP_
