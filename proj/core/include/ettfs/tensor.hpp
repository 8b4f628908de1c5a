// Copyright 2026 The ETTFS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ETTFS_TENSOR_HPP_
#define ETTFS_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ettfs/error.hpp"

namespace ettfs {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major tensor with optional gradient buffer. The handle has
// shared-node semantics: copies alias the same storage, which is what the
// tape needs to route gradients back to the tensors an op consumed.
//
// Scalar is float in training paths; double instantiations exist for
// finite-difference verification, where float rounding would drown the
// quantity under test.
template <typename Scalar>
class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<Scalar> val;
    std::vector<Scalar> grad;  // allocated lazily, same length as val
    bool requires_grad = false;
    bool op_output = false;  // produced by a recorded op (not a leaf)
  };

  Tensor() : node_(std::make_shared<Node>()) {}

  explicit Tensor(Shape shape) : node_(std::make_shared<Node>()) {
    node_->shape = std::move(shape);
    node_->val.assign(static_cast<size_t>(numel(node_->shape)), Scalar(0));
  }

  Tensor(Shape shape, std::vector<Scalar> values)
      : node_(std::make_shared<Node>()) {
    node_->shape = std::move(shape);
    node_->val = std::move(values);
    if (static_cast<int64_t>(node_->val.size()) != numel(node_->shape)) {
      throw ShapeError(msg("tensor data length ", node_->val.size(),
                           " does not match shape ", shape_str(node_->shape)));
    }
  }

  static Tensor scalar(Scalar v) { return Tensor({1}, {v}); }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, Scalar v) {
    Tensor t(std::move(shape));
    std::fill(t.val().begin(), t.val().end(), v);
    return t;
  }

  static Tensor ones(Shape shape) { return full(std::move(shape), Scalar(1)); }

  // U(-bound, bound), deterministic under the generator state.
  static Tensor uniform(Shape shape, Scalar bound, std::mt19937& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-double(bound), double(bound));
    for (auto& v : t.val()) v = Scalar(dist(rng));
    return t;
  }

  const Shape& shape() const { return node_->shape; }
  int64_t dim(size_t i) const { return node_->shape[i]; }
  size_t rank() const { return node_->shape.size(); }
  int64_t size() const { return static_cast<int64_t>(node_->val.size()); }

  std::vector<Scalar>& val() { return node_->val; }
  const std::vector<Scalar>& val() const { return node_->val; }
  Scalar* data() { return node_->val.data(); }
  const Scalar* data() const { return node_->val.data(); }

  Scalar item() const {
    if (size() != 1) {
      throw UsageError(
          msg("item() on tensor of shape ", shape_str(node_->shape)));
    }
    return node_->val[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) {
    node_->requires_grad = on;
    if (!on) node_->grad.clear();
  }

  bool has_grad() const { return !node_->grad.empty(); }
  std::vector<Scalar>& grad() {
    ensure_grad();
    return node_->grad;
  }
  const std::vector<Scalar>& grad() const { return node_->grad; }

  void ensure_grad() {
    if (node_->grad.size() != node_->val.size()) {
      node_->grad.assign(node_->val.size(), Scalar(0));
    }
  }
  void zero_grad() {
    std::fill(node_->grad.begin(), node_->grad.end(), Scalar(0));
  }

  std::shared_ptr<Node> node() const { return node_; }
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  // Deep copy, detached from any tape bookkeeping.
  Tensor clone() const {
    Tensor t;
    t.node_->shape = node_->shape;
    t.node_->val = node_->val;
    return t;
  }

  template <typename To>
  Tensor<To> cast() const {
    Tensor<To> t(node_->shape);
    for (int64_t i = 0; i < size(); ++i) t.val()[i] = To(node_->val[i]);
    return t;
  }

  bool has_nan() const {
    for (Scalar v : node_->val) {
      if (!std::isfinite(double(v))) return true;
    }
    return false;
  }

 private:
  std::shared_ptr<Node> node_;
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

template <typename Scalar>
void check_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                      const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(msg(op, ": shapes ", shape_str(a.shape()), " and ",
                         shape_str(b.shape()), " differ"));
  }
}

}  // namespace ettfs

#endif  // ETTFS_TENSOR_HPP_
