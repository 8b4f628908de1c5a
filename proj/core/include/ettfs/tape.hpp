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

#ifndef ETTFS_TAPE_HPP_
#define ETTFS_TAPE_HPP_

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "ettfs/tensor.hpp"

namespace ettfs {

// Reverse-mode tape. Ops append their backward closure in execution order;
// backward() replays them strictly in reverse.
//
// Gradient semantics:
//   - op outputs (intermediates) get their grad buffers reset at the start
//     of every backward() pass;
//   - leaves (parameters, inputs marked requires_grad) accumulate across
//     passes until explicitly zeroed. Accumulation inside one pass is what
//     makes weight sharing across time-steps come out right.
//
// A tape is single-threaded. It is installed as the active tape for the
// current thread with TapeScope; ops record onto it only while one is
// installed and some input requires a gradient. With no scope installed
// the same ops run as plain forward arithmetic.
template <typename Scalar>
class Tape {
 public:
  using NodePtr = std::shared_ptr<typename Tensor<Scalar>::Node>;

  void record(const Tensor<Scalar>& out, std::function<void()> backward) {
    auto node = out.node();
    node->requires_grad = true;
    node->op_output = true;
    ops_.push_back(Op{std::move(backward), std::move(node)});
  }

  size_t size() const { return ops_.size(); }
  bool empty() const { return ops_.empty(); }
  void clear() { ops_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and replays the tape backward. Repeated calls
  // without clearing accumulate into leaf gradients deterministically.
  void backward(const Tensor<Scalar>& loss) {
    if (loss.size() != 1) {
      throw UsageError(msg("backward: loss must be scalar, got shape ",
                           shape_str(loss.shape())));
    }
    if (!loss.requires_grad()) {
      throw UsageError("backward: loss is not connected to the tape");
    }
    for (auto& op : ops_) {
      if (op.out->grad.size() != op.out->val.size()) {
        op.out->grad.assign(op.out->val.size(), Scalar(0));
      } else {
        std::fill(op.out->grad.begin(), op.out->grad.end(), Scalar(0));
      }
    }
    auto loss_node = loss.node();
    if (loss_node->grad.size() != loss_node->val.size()) {
      loss_node->grad.assign(loss_node->val.size(), Scalar(0));
    }
    loss_node->grad[0] = Scalar(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      it->backward();
    }
  }

 private:
  struct Op {
    std::function<void()> backward;
    NodePtr out;
  };
  std::vector<Op> ops_;
};

template <typename Scalar>
inline Tape<Scalar>*& active_tape() {
  thread_local Tape<Scalar>* tape = nullptr;
  return tape;
}

// RAII installer; nesting restores the previous tape on exit.
template <typename Scalar>
class TapeScope {
 public:
  explicit TapeScope(Tape<Scalar>& tape) : prev_(active_tape<Scalar>()) {
    active_tape<Scalar>() = &tape;
  }
  ~TapeScope() { active_tape<Scalar>() = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<Scalar>* prev_;
};

namespace detail {

// True when the op should be recorded: a tape is active and at least one
// input participates in autograd.
template <typename Scalar, typename... Ts>
bool tracing(const Tensor<Scalar>& first, const Ts&... rest) {
  if (active_tape<Scalar>() == nullptr) return false;
  bool any = first.requires_grad();
  ((any = any || rest.requires_grad()), ...);
  return any;
}

template <typename Scalar>
void accumulate(typename Tensor<Scalar>::Node& node,
                const std::vector<Scalar>& delta) {
  if (node.grad.size() != node.val.size()) {
    node.grad.assign(node.val.size(), Scalar(0));
  }
  for (size_t i = 0; i < delta.size(); ++i) node.grad[i] += delta[i];
}

template <typename Scalar>
std::vector<Scalar>& grad_buffer(typename Tensor<Scalar>::Node& node) {
  if (node.grad.size() != node.val.size()) {
    node.grad.assign(node.val.size(), Scalar(0));
  }
  return node.grad;
}

}  // namespace detail

}  // namespace ettfs

#endif  // ETTFS_TAPE_HPP_
