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

#ifndef ETTFS_CONV_HPP_
#define ETTFS_CONV_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ettfs/ops.hpp"

namespace ettfs {

// Cross-correlation with valid padding by default. Input carries arbitrary
// leading axes (time, batch) that are folded into one batch extent; the
// kernel is shared across all of them.
//
//   x: [..., C, H, W], w: [O, C, kh, kw] -> [..., O, H', W']
//   H' = (H + 2*padding - kh) / stride + 1
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, int64_t stride = 1,
                 int64_t padding = 0, const Tensor<S>* bias = nullptr) {
  if (x.rank() < 3 || w.rank() != 4) {
    throw ShapeError(msg("conv2d: input ", shape_str(x.shape()), " kernel ",
                         shape_str(w.shape())));
  }
  if (stride < 1) throw ConfigError(msg("conv2d: stride ", stride, " < 1"));
  const int64_t wdim = x.dim(x.rank() - 1), hdim = x.dim(x.rank() - 2),
                cdim = x.dim(x.rank() - 3);
  const int64_t out_ch = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != cdim) {
    throw ShapeError(msg("conv2d: ", cdim, " input channels vs kernel ",
                         shape_str(w.shape())));
  }
  const int64_t oh = (hdim + 2 * padding - kh) / stride + 1;
  const int64_t ow = (wdim + 2 * padding - kw) / stride + 1;
  if (oh <= 0 || ow <= 0) {
    throw ConfigError(msg("conv2d: kernel ", kh, "x", kw, " does not fit ",
                          hdim, "x", wdim, " input (stride ", stride,
                          ", padding ", padding, ")"));
  }
  const int64_t batch = x.size() / (cdim * hdim * wdim);
  Shape out_shape(x.shape().begin(), x.shape().end() - 3);
  out_shape.insert(out_shape.end(), {out_ch, oh, ow});
  Tensor<S> out(out_shape);

  const S* xv = x.data();
  const S* wv = w.data();
  S* ov = out.data();
  const int64_t x_im = cdim * hdim * wdim;  // one image
  const int64_t o_im = out_ch * oh * ow;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (batch > 1)
#endif
  for (int64_t b = 0; b < batch; ++b) {
    const S* xb = xv + b * x_im;
    S* outb = ov + b * o_im;
    for (int64_t o = 0; o < out_ch; ++o) {
      const S* wo = wv + o * cdim * kh * kw;
      const S bias_v = bias ? bias->val()[o] : S(0);
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t xo = 0; xo < ow; ++xo) {
          S acc = bias_v;
          const int64_t hy = y * stride - padding;
          const int64_t wx = xo * stride - padding;
          for (int64_t c = 0; c < cdim; ++c) {
            const S* xc = xb + c * hdim * wdim;
            const S* wc = wo + c * kh * kw;
            for (int64_t i = 0; i < kh; ++i) {
              const int64_t yy = hy + i;
              if (yy < 0 || yy >= hdim) continue;
              for (int64_t j = 0; j < kw; ++j) {
                const int64_t xx = wx + j;
                if (xx < 0 || xx >= wdim) continue;
                acc += xc[yy * wdim + xx] * wc[i * kw + j];
              }
            }
          }
          outb[(o * oh + y) * ow + xo] = acc;
        }
      }
    }
  }

  if (detail::tracing(x, w)) {
    active_tape<S>()->record(out, [xn = x.node(), wn = w.node(),
                                   on = out.node(), batch, cdim, hdim, wdim,
                                   out_ch, kh, kw, oh, ow, stride, padding] {
      const int64_t x_im = cdim * hdim * wdim;
      const int64_t o_im = out_ch * oh * ow;
      if (xn->requires_grad) {
        auto& gx = detail::grad_buffer<S>(*xn);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (batch > 1)
#endif
        for (int64_t b = 0; b < batch; ++b) {
          S* gxb = gx.data() + b * x_im;
          const S* upb = on->grad.data() + b * o_im;
          for (int64_t o = 0; o < out_ch; ++o) {
            const S* wo = wn->val.data() + o * cdim * kh * kw;
            for (int64_t y = 0; y < oh; ++y) {
              for (int64_t xo = 0; xo < ow; ++xo) {
                const S up = upb[(o * oh + y) * ow + xo];
                if (up == S(0)) continue;
                const int64_t hy = y * stride - padding;
                const int64_t wx = xo * stride - padding;
                for (int64_t c = 0; c < cdim; ++c) {
                  S* gc = gxb + c * hdim * wdim;
                  const S* wc = wo + c * kh * kw;
                  for (int64_t i = 0; i < kh; ++i) {
                    const int64_t yy = hy + i;
                    if (yy < 0 || yy >= hdim) continue;
                    for (int64_t j = 0; j < kw; ++j) {
                      const int64_t xx = wx + j;
                      if (xx < 0 || xx >= wdim) continue;
                      gc[yy * wdim + xx] += up * wc[i * kw + j];
                    }
                  }
                }
              }
            }
          }
        }
      }
      if (wn->requires_grad) {
        auto& gw = detail::grad_buffer<S>(*wn);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (out_ch > 1)
#endif
        for (int64_t o = 0; o < out_ch; ++o) {
          S* gwo = gw.data() + o * cdim * kh * kw;
          for (int64_t b = 0; b < batch; ++b) {
            const S* xb = xn->val.data() + b * x_im;
            const S* upb = on->grad.data() + b * o_im;
            for (int64_t y = 0; y < oh; ++y) {
              for (int64_t xo = 0; xo < ow; ++xo) {
                const S up = upb[(o * oh + y) * ow + xo];
                if (up == S(0)) continue;
                const int64_t hy = y * stride - padding;
                const int64_t wx = xo * stride - padding;
                for (int64_t c = 0; c < cdim; ++c) {
                  const S* xc = xb + c * hdim * wdim;
                  S* gwc = gwo + c * kh * kw;
                  for (int64_t i = 0; i < kh; ++i) {
                    const int64_t yy = hy + i;
                    if (yy < 0 || yy >= hdim) continue;
                    for (int64_t j = 0; j < kw; ++j) {
                      const int64_t xx = wx + j;
                      if (xx < 0 || xx >= wdim) continue;
                      gwc[i * kw + j] += up * xc[yy * wdim + xx];
                    }
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

// Spatial mean over non-overlapping size x size windows, per time-step.
// x: [..., C, H, W] -> [..., C, H/size, W/size]
template <typename S>
Tensor<S> avg_pool2d(const Tensor<S>& x, int64_t size) {
  if (x.rank() < 3) {
    throw ShapeError(msg("avg_pool2d: input ", shape_str(x.shape())));
  }
  const int64_t wdim = x.dim(x.rank() - 1), hdim = x.dim(x.rank() - 2);
  if (size < 1 || hdim % size != 0 || wdim % size != 0) {
    throw ConfigError(msg("avg_pool2d: window ", size, " does not divide ",
                          hdim, "x", wdim));
  }
  const int64_t oh = hdim / size, ow = wdim / size;
  const int64_t planes = x.size() / (hdim * wdim);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = oh;
  out_shape[out_shape.size() - 1] = ow;
  Tensor<S> out(out_shape);
  const S inv = S(1) / S(size * size);
  for (int64_t p = 0; p < planes; ++p) {
    const S* src = x.data() + p * hdim * wdim;
    S* dst = out.data() + p * oh * ow;
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t xo = 0; xo < ow; ++xo) {
        S acc = S(0);
        for (int64_t i = 0; i < size; ++i) {
          for (int64_t j = 0; j < size; ++j) {
            acc += src[(y * size + i) * wdim + xo * size + j];
          }
        }
        dst[y * ow + xo] = acc * inv;
      }
    }
  }
  if (detail::tracing(x)) {
    active_tape<S>()->record(out, [xn = x.node(), on = out.node(), planes,
                                   hdim, wdim, oh, ow, size, inv] {
      auto& gx = detail::grad_buffer<S>(*xn);
      for (int64_t p = 0; p < planes; ++p) {
        S* dst = gx.data() + p * hdim * wdim;
        const S* up = on->grad.data() + p * oh * ow;
        for (int64_t y = 0; y < oh; ++y) {
          for (int64_t xo = 0; xo < ow; ++xo) {
            const S g = up[y * ow + xo] * inv;
            for (int64_t i = 0; i < size; ++i) {
              for (int64_t j = 0; j < size; ++j) {
                dst[(y * size + i) * wdim + xo * size + j] += g;
              }
            }
          }
        }
      }
    });
  }
  return out;
}

// Spatial max over non-overlapping windows, per time-step. Gradient is routed
// to the first maximal element in row-major window order (deterministic).
template <typename S>
Tensor<S> max_pool2d(const Tensor<S>& x, int64_t size) {
  if (x.rank() < 3) {
    throw ShapeError(msg("max_pool2d: input ", shape_str(x.shape())));
  }
  const int64_t wdim = x.dim(x.rank() - 1), hdim = x.dim(x.rank() - 2);
  if (size < 1 || hdim % size != 0 || wdim % size != 0) {
    throw ConfigError(msg("max_pool2d: window ", size, " does not divide ",
                          hdim, "x", wdim));
  }
  const int64_t oh = hdim / size, ow = wdim / size;
  const int64_t planes = x.size() / (hdim * wdim);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = oh;
  out_shape[out_shape.size() - 1] = ow;
  Tensor<S> out(out_shape);
  auto argmax = std::make_shared<std::vector<int64_t>>(
      static_cast<size_t>(out.size()));
  for (int64_t p = 0; p < planes; ++p) {
    const S* src = x.data() + p * hdim * wdim;
    S* dst = out.data() + p * oh * ow;
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t xo = 0; xo < ow; ++xo) {
        S best = src[(y * size) * wdim + xo * size];
        int64_t best_at = (y * size) * wdim + xo * size;
        for (int64_t i = 0; i < size; ++i) {
          for (int64_t j = 0; j < size; ++j) {
            const int64_t at = (y * size + i) * wdim + xo * size + j;
            if (src[at] > best) {
              best = src[at];
              best_at = at;
            }
          }
        }
        dst[y * ow + xo] = best;
        (*argmax)[static_cast<size_t>(p * oh * ow + y * ow + xo)] =
            p * hdim * wdim + best_at;
      }
    }
  }
  if (detail::tracing(x)) {
    active_tape<S>()->record(out, [xn = x.node(), on = out.node(), argmax] {
      auto& gx = detail::grad_buffer<S>(*xn);
      for (size_t i = 0; i < argmax->size(); ++i) {
        gx[static_cast<size_t>((*argmax)[i])] += on->grad[i];
      }
    });
  }
  return out;
}

}  // namespace ettfs

#endif  // ETTFS_CONV_HPP_
