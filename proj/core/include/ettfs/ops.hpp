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

#ifndef ETTFS_OPS_HPP_
#define ETTFS_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "ettfs/tape.hpp"
#include "ettfs/tensor.hpp"

namespace ettfs {

namespace kernels {

// C[m,n] += A[m,k] B[k,n]
template <typename S>
void mm_nn(const S* a, const S* b, S* c, int64_t m, int64_t k, int64_t n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 16384)
#endif
  for (int64_t i = 0; i < m; ++i) {
    const S* arow = a + i * k;
    S* crow = c + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const S av = arow[p];
      if (av == S(0)) continue;
      const S* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,k] += A[m,n] B[k,n]^T
template <typename S>
void mm_nt(const S* a, const S* b, S* c, int64_t m, int64_t n, int64_t k) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 16384)
#endif
  for (int64_t i = 0; i < m; ++i) {
    const S* arow = a + i * n;
    S* crow = c + i * k;
    for (int64_t j = 0; j < k; ++j) {
      const S* brow = b + j * n;
      S acc = S(0);
      for (int64_t p = 0; p < n; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T B[m,n]
template <typename S>
void mm_tn(const S* a, const S* b, S* c, int64_t m, int64_t k, int64_t n) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 16384)
#endif
  for (int64_t i = 0; i < k; ++i) {
    S* crow = c + i * n;
    for (int64_t p = 0; p < m; ++p) {
      const S av = a[p * k + i];
      if (av == S(0)) continue;
      const S* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace kernels

// ---------------------------------------------------------------------------
// Elementwise arithmetic
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "add");
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] + b.val()[i];
  if (detail::tracing(a, b)) {
    active_tape<S>()->record(out, [an = a.node(), bn = b.node(),
                                   on = out.node()] {
      if (an->requires_grad) detail::accumulate<S>(*an, on->grad);
      if (bn->requires_grad) detail::accumulate<S>(*bn, on->grad);
    });
  }
  return out;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "sub");
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] - b.val()[i];
  if (detail::tracing(a, b)) {
    active_tape<S>()->record(out, [an = a.node(), bn = b.node(),
                                   on = out.node()] {
      if (an->requires_grad) detail::accumulate<S>(*an, on->grad);
      if (bn->requires_grad) {
        auto& g = detail::grad_buffer<S>(*bn);
        for (size_t i = 0; i < g.size(); ++i) g[i] -= on->grad[i];
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  check_same_shape(a, b, "mul");
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] * b.val()[i];
  if (detail::tracing(a, b)) {
    active_tape<S>()->record(out, [an = a.node(), bn = b.node(),
                                   on = out.node()] {
      if (an->requires_grad) {
        auto& g = detail::grad_buffer<S>(*an);
        for (size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * bn->val[i];
      }
      if (bn->requires_grad) {
        auto& g = detail::grad_buffer<S>(*bn);
        for (size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * an->val[i];
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> mul_scalar(const Tensor<S>& a, S c) {
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] * c;
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node(), c] {
      auto& g = detail::grad_buffer<S>(*an);
      for (size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i] * c;
    });
  }
  return out;
}

template <typename S>
Tensor<S> add_scalar(const Tensor<S>& a, S c) {
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = a.val()[i] + c;
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node()] {
      detail::accumulate<S>(*an, on->grad);
    });
  }
  return out;
}

// c - a
template <typename S>
Tensor<S> scalar_sub(S c, const Tensor<S>& a) {
  Tensor<S> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.val()[i] = c - a.val()[i];
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node()] {
      auto& g = detail::grad_buffer<S>(*an);
      for (size_t i = 0; i < g.size(); ++i) g[i] -= on->grad[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> sum_all(const Tensor<S>& a) {
  S acc = S(0);
  for (S v : a.val()) acc += v;
  Tensor<S> out = Tensor<S>::scalar(acc);
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node()] {
      auto& g = detail::grad_buffer<S>(*an);
      const S up = on->grad[0];
      for (auto& v : g) v += up;
    });
  }
  return out;
}

template <typename S>
Tensor<S> mean_all(const Tensor<S>& a) {
  S acc = S(0);
  for (S v : a.val()) acc += v;
  const S inv = S(1) / S(a.size());
  Tensor<S> out = Tensor<S>::scalar(acc * inv);
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node(), inv] {
      auto& g = detail::grad_buffer<S>(*an);
      const S up = on->grad[0] * inv;
      for (auto& v : g) v += up;
    });
  }
  return out;
}

namespace detail {
template <typename S>
void axis_extents(const Tensor<S>& a, size_t axis, int64_t& outer, int64_t& d,
                  int64_t& inner) {
  if (axis >= a.rank()) {
    throw UsageError(msg("reduce: axis ", axis, " out of range for ",
                         shape_str(a.shape())));
  }
  outer = 1;
  inner = 1;
  for (size_t i = 0; i < axis; ++i) outer *= a.dim(i);
  d = a.dim(axis);
  for (size_t i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
}
}  // namespace detail

template <typename S>
Tensor<S> sum_axis(const Tensor<S>& a, size_t axis) {
  int64_t outer, d, inner;
  detail::axis_extents(a, axis, outer, d, inner);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + static_cast<ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  Tensor<S> out(out_shape);
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t j = 0; j < d; ++j) {
      const S* src = a.data() + (o * d + j) * inner;
      S* dst = out.data() + o * inner;
      for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  if (detail::tracing(a)) {
    active_tape<S>()->record(
        out, [an = a.node(), on = out.node(), outer, d, inner] {
          auto& g = detail::grad_buffer<S>(*an);
          for (int64_t o = 0; o < outer; ++o) {
            for (int64_t j = 0; j < d; ++j) {
              S* dst = g.data() + (o * d + j) * inner;
              const S* src = on->grad.data() + o * inner;
              for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
            }
          }
        });
  }
  return out;
}

template <typename S>
Tensor<S> mean_axis(const Tensor<S>& a, size_t axis) {
  Tensor<S> s = sum_axis(a, axis);
  return mul_scalar(s, S(1) / S(a.dim(axis)));
}

// ---------------------------------------------------------------------------
// Shape plumbing
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, Shape new_shape) {
  if (numel(new_shape) != a.size()) {
    throw ShapeError(msg("reshape: ", shape_str(a.shape()), " -> ",
                         shape_str(new_shape), " changes element count"));
  }
  Tensor<S> out(std::move(new_shape), a.val());
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node()] {
      detail::accumulate<S>(*an, on->grad);
    });
  }
  return out;
}

// [T, B, d...] -> [T, B, prod(d...)]
template <typename S>
Tensor<S> flatten_features(const Tensor<S>& a) {
  if (a.rank() < 3) {
    throw ShapeError(
        msg("flatten_features: need rank >= 3, got ", shape_str(a.shape())));
  }
  int64_t feat = 1;
  for (size_t i = 2; i < a.rank(); ++i) feat *= a.dim(i);
  return reshape(a, {a.dim(0), a.dim(1), feat});
}

// Copy of slice t along the leading axis: [T, rest...] -> [rest...]
template <typename S>
Tensor<S> slice_time(const Tensor<S>& a, int64_t t) {
  if (a.rank() < 2 || t < 0 || t >= a.dim(0)) {
    throw UsageError(msg("slice_time: t=", t, " invalid for shape ",
                         shape_str(a.shape())));
  }
  const int64_t stride = a.size() / a.dim(0);
  Shape out_shape(a.shape().begin() + 1, a.shape().end());
  Tensor<S> out(out_shape);
  std::copy_n(a.data() + t * stride, stride, out.data());
  if (detail::tracing(a)) {
    active_tape<S>()->record(out, [an = a.node(), on = out.node(), t, stride] {
      auto& g = detail::grad_buffer<S>(*an);
      for (int64_t i = 0; i < stride; ++i) g[t * stride + i] += on->grad[i];
    });
  }
  return out;
}

// Inverse of slice_time: T tensors of shape [rest...] -> [T, rest...]
template <typename S>
Tensor<S> stack_time(const std::vector<Tensor<S>>& slices) {
  if (slices.empty()) throw UsageError("stack_time: empty slice list");
  const Shape& s0 = slices[0].shape();
  const int64_t stride = slices[0].size();
  Shape out_shape;
  out_shape.push_back(static_cast<int64_t>(slices.size()));
  out_shape.insert(out_shape.end(), s0.begin(), s0.end());
  Tensor<S> out(out_shape);
  bool needs_grad = false;
  for (size_t t = 0; t < slices.size(); ++t) {
    if (slices[t].shape() != s0) {
      throw ShapeError(msg("stack_time: slice ", t, " has shape ",
                           shape_str(slices[t].shape()), ", expected ",
                           shape_str(s0)));
    }
    std::copy_n(slices[t].data(), stride, out.data() + int64_t(t) * stride);
    needs_grad = needs_grad || slices[t].requires_grad();
  }
  if (active_tape<S>() != nullptr && needs_grad) {
    std::vector<typename Tape<S>::NodePtr> nodes;
    nodes.reserve(slices.size());
    for (const auto& s : slices) nodes.push_back(s.node());
    active_tape<S>()->record(
        out, [nodes = std::move(nodes), on = out.node(), stride] {
          for (size_t t = 0; t < nodes.size(); ++t) {
            if (!nodes[t]->requires_grad) continue;
            auto& g = detail::grad_buffer<S>(*nodes[t]);
            const S* src = on->grad.data() + int64_t(t) * stride;
            for (int64_t i = 0; i < stride; ++i) g[i] += src[i];
          }
        });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError(msg("matmul: incompatible shapes ", shape_str(a.shape()),
                         " and ", shape_str(b.shape())));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<S> out({m, n});
  kernels::mm_nn(a.data(), b.data(), out.data(), m, k, n);
  if (detail::tracing(a, b)) {
    active_tape<S>()->record(
        out, [an = a.node(), bn = b.node(), on = out.node(), m, k, n] {
          if (an->requires_grad) {
            kernels::mm_nt(on->grad.data(), bn->val.data(),
                           detail::grad_buffer<S>(*an).data(), m, n, k);
          }
          if (bn->requires_grad) {
            kernels::mm_tn(an->val.data(), on->grad.data(),
                           detail::grad_buffer<S>(*bn).data(), m, k, n);
          }
        });
  }
  return out;
}

// x[..., N] W[N, M] -> [..., M]; leading axes are treated as rows, so one
// weight matrix is shared across every time-step and batch element.
// Optional bias[M] (fused inference path).
template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w,
                 const Tensor<S>* bias = nullptr) {
  if (x.rank() < 1 || w.rank() != 2 || x.dim(x.rank() - 1) != w.dim(0)) {
    throw ShapeError(msg("linear: input ", shape_str(x.shape()),
                         " incompatible with weight ", shape_str(w.shape())));
  }
  const int64_t n = w.dim(0), m = w.dim(1);
  const int64_t rows = x.size() / n;
  Shape out_shape = x.shape();
  out_shape.back() = m;
  Tensor<S> out(out_shape);
  kernels::mm_nn(x.data(), w.data(), out.data(), rows, n, m);
  if (bias != nullptr) {
    if (bias->size() != m) {
      throw ShapeError(msg("linear: bias ", shape_str(bias->shape()),
                           " does not match ", m, " outputs"));
    }
    for (int64_t r = 0; r < rows; ++r) {
      S* row = out.data() + r * m;
      for (int64_t j = 0; j < m; ++j) row[j] += bias->val()[j];
    }
  }
  if (detail::tracing(x, w)) {
    active_tape<S>()->record(
        out, [xn = x.node(), wn = w.node(), on = out.node(), rows, n, m] {
          if (xn->requires_grad) {
            kernels::mm_nt(on->grad.data(), wn->val.data(),
                           detail::grad_buffer<S>(*xn).data(), rows, m, n);
          }
          if (wn->requires_grad) {
            kernels::mm_tn(xn->val.data(), on->grad.data(),
                           detail::grad_buffer<S>(*wn).data(), rows, n, m);
          }
        });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature-wise affine (the learnable transform after weight normalization)
// ---------------------------------------------------------------------------

// y = x * gamma[f] + beta[f] along `axis`; gamma/beta broadcast over every
// other axis. dgamma/dbeta reduce over those axes.
template <typename S>
Tensor<S> affine_features(const Tensor<S>& x, const Tensor<S>& gamma,
                          const Tensor<S>& beta, size_t axis) {
  int64_t outer, d, inner;
  detail::axis_extents(x, axis, outer, d, inner);
  if (gamma.size() != d || beta.size() != d) {
    throw ShapeError(msg("affine_features: gamma/beta sized ", gamma.size(),
                         "/", beta.size(), ", axis ", axis, " of ",
                         shape_str(x.shape()), " has ", d));
  }
  Tensor<S> out(x.shape());
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t f = 0; f < d; ++f) {
      const S g = gamma.val()[f], b = beta.val()[f];
      const S* src = x.data() + (o * d + f) * inner;
      S* dst = out.data() + (o * d + f) * inner;
      for (int64_t i = 0; i < inner; ++i) dst[i] = src[i] * g + b;
    }
  }
  if (detail::tracing(x, gamma, beta)) {
    active_tape<S>()->record(out, [xn = x.node(), gn = gamma.node(),
                                   bn = beta.node(), on = out.node(), outer, d,
                                   inner] {
      for (int64_t o = 0; o < outer; ++o) {
        for (int64_t f = 0; f < d; ++f) {
          const int64_t base = (o * d + f) * inner;
          const S* up = on->grad.data() + base;
          if (xn->requires_grad) {
            auto& gx = detail::grad_buffer<S>(*xn);
            const S g = gn->val[f];
            for (int64_t i = 0; i < inner; ++i) gx[base + i] += up[i] * g;
          }
          if (gn->requires_grad) {
            auto& gg = detail::grad_buffer<S>(*gn);
            S acc = S(0);
            const S* xv = xn->val.data() + base;
            for (int64_t i = 0; i < inner; ++i) acc += up[i] * xv[i];
            gg[f] += acc;
          }
          if (bn->requires_grad) {
            auto& gb = detail::grad_buffer<S>(*bn);
            S acc = S(0);
            for (int64_t i = 0; i < inner; ++i) acc += up[i];
            gb[f] += acc;
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight standardization
// ---------------------------------------------------------------------------

// y = (x - mean(x)) / sqrt(var(x) + eps) * sigma_target, statistics over the
// whole tensor (population variance). Differentiable through mean/variance.
template <typename S>
Tensor<S> standardize_to(const Tensor<S>& x, S sigma_target, S eps) {
  const int64_t n = x.size();
  S mean = S(0);
  for (S v : x.val()) mean += v;
  mean /= S(n);
  S var = S(0);
  for (S v : x.val()) var += (v - mean) * (v - mean);
  var /= S(n);
  const S denom = var + eps;
  if (!(denom > S(0))) {
    throw NumericError(
        msg("standardize_to: variance+eps = ", double(denom), " not positive"));
  }
  const S inv_std = S(1) / std::sqrt(denom);
  Tensor<S> out(x.shape());
  for (int64_t i = 0; i < n; ++i) {
    out.val()[i] = (x.val()[i] - mean) * inv_std * sigma_target;
  }
  if (detail::tracing(x)) {
    active_tape<S>()->record(
        out, [xn = x.node(), on = out.node(), inv_std, sigma_target, n] {
          // d/dx of z-scoring: remove the mean and the projection onto the
          // standardized values themselves.
          auto& gx = detail::grad_buffer<S>(*xn);
          const std::vector<S>& up = on->grad;
          S g_mean = S(0), gx_mean = S(0);
          const S inv_sig = S(1) / sigma_target;
          for (int64_t i = 0; i < n; ++i) {
            g_mean += up[i];
            gx_mean += up[i] * on->val[i] * inv_sig;  // up . xhat
          }
          g_mean /= S(n);
          gx_mean /= S(n);
          const S scale = sigma_target * inv_std;
          for (int64_t i = 0; i < n; ++i) {
            const S xhat = on->val[i] * inv_sig;
            gx[i] += scale * (up[i] - g_mean - xhat * gx_mean);
          }
        });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time-axis weighting
// ---------------------------------------------------------------------------

// y[t, ...] = x[t, ...] * w[t]; the broadcast-over-leading-axis multiply.
template <typename S>
Tensor<S> scale_time(const Tensor<S>& x, const Tensor<S>& w) {
  if (x.rank() < 1 || w.rank() != 1 || w.dim(0) != x.dim(0)) {
    throw ShapeError(msg("scale_time: weights ", shape_str(w.shape()),
                         " do not match leading axis of ",
                         shape_str(x.shape())));
  }
  const int64_t t_len = x.dim(0);
  const int64_t stride = x.size() / t_len;
  Tensor<S> out(x.shape());
  for (int64_t t = 0; t < t_len; ++t) {
    const S wv = w.val()[t];
    const S* src = x.data() + t * stride;
    S* dst = out.data() + t * stride;
    for (int64_t i = 0; i < stride; ++i) dst[i] = src[i] * wv;
  }
  if (detail::tracing(x, w)) {
    active_tape<S>()->record(out, [xn = x.node(), wn = w.node(),
                                   on = out.node(), t_len, stride] {
      for (int64_t t = 0; t < t_len; ++t) {
        const S* up = on->grad.data() + t * stride;
        if (xn->requires_grad) {
          auto& gx = detail::grad_buffer<S>(*xn);
          const S wv = wn->val[t];
          for (int64_t i = 0; i < stride; ++i) gx[t * stride + i] += up[i] * wv;
        }
        if (wn->requires_grad) {
          auto& gw = detail::grad_buffer<S>(*wn);
          const S* xv = xn->val.data() + t * stride;
          S acc = S(0);
          for (int64_t i = 0; i < stride; ++i) acc += up[i] * xv[i];
          gw[t] += acc;
        }
      }
    });
  }
  return out;
}

// y[b,c] = sum_t w[t] x[t,b,c]; w is a fixed coefficient vector.
template <typename S>
Tensor<S> temporal_weighted_sum(const Tensor<S>& x, const std::vector<S>& w) {
  if (x.rank() < 2 || static_cast<int64_t>(w.size()) != x.dim(0)) {
    throw ShapeError(msg("temporal_weighted_sum: ", w.size(),
                         " weights vs leading axis of ",
                         shape_str(x.shape())));
  }
  const int64_t t_len = x.dim(0);
  const int64_t stride = x.size() / t_len;
  Shape out_shape(x.shape().begin() + 1, x.shape().end());
  Tensor<S> out(out_shape);
  for (int64_t t = 0; t < t_len; ++t) {
    const S wv = w[static_cast<size_t>(t)];
    const S* src = x.data() + t * stride;
    for (int64_t i = 0; i < stride; ++i) out.val()[i] += wv * src[i];
  }
  if (detail::tracing(x)) {
    active_tape<S>()->record(
        out, [xn = x.node(), on = out.node(), w, t_len, stride] {
          auto& gx = detail::grad_buffer<S>(*xn);
          for (int64_t t = 0; t < t_len; ++t) {
            const S wv = w[static_cast<size_t>(t)];
            S* dst = gx.data() + t * stride;
            for (int64_t i = 0; i < stride; ++i) dst[i] += wv * on->grad[i];
          }
        });
  }
  return out;
}

}  // namespace ettfs

#endif  // ETTFS_OPS_HPP_
