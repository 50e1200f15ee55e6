#pragma once

#include "dhvton/autodiff.hpp"

#include <cmath>

namespace dhvton {

// ---------------------------------------------------------------- elementwise

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a.value(), b.value(), "add");
  return make_op<T>(tadd(a.value(), b.value()), {a, b}, [](Node<T>& n) {
    for (int p = 0; p < 2; ++p)
      if (n.parents[p]->requires_grad)
        for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[p]->grad[i] += n.grad[i];
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a.value(), b.value(), "sub");
  return make_op<T>(tsub(a.value(), b.value()), {a, b}, [](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i];
    if (n.parents[1]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[1]->grad[i] -= n.grad[i];
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a.value(), b.value(), "mul");
  return make_op<T>(tmul(a.value(), b.value()), {a, b}, [](Node<T>& n) {
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i] * bv[i];
    if (n.parents[1]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[1]->grad[i] += n.grad[i] * av[i];
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  return make_op<T>(tscale(a.value(), s), {a}, [s](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += s * n.grad[i];
  });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  return scale(a, T(-1));
}

template <typename T>
Var<T> silu(const Var<T>& x) {
  Tensor<T> out = x.value();
  for (auto& v : out.data) v = v / (T(1) + std::exp(-v));
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    const Tensor<T>& xv = n.parents[0]->value;
    for (int64_t i = 0; i < n.grad.numel(); ++i) {
      T s = T(1) / (T(1) + std::exp(-xv[i]));
      n.parents[0]->grad[i] += n.grad[i] * s * (T(1) + xv[i] * (T(1) - s));
    }
  });
}

// ---------------------------------------------------------------- matrix ops

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.shape[1] != bv.shape[0])
    throw ShapeError("matmul: inner dimensions disagree: " + shape_str(av.shape) + " vs " +
                     shape_str(bv.shape));
  Tensor<T> out({av.shape[0], bv.shape[1]});
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  return make_op<T>(std::move(out), {a, b}, [](Node<T>& n) {
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad)
      as_matrix(n.parents[0]->grad).noalias() += as_matrix(n.grad) * as_matrix(bv).transpose();
    if (n.parents[1]->requires_grad)
      as_matrix(n.parents[1]->grad).noalias() += as_matrix(av).transpose() * as_matrix(n.grad);
  });
}

template <typename T>
Var<T> transpose(const Var<T>& x) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("transpose: expected rank-2, got " + shape_str(xv.shape));
  Tensor<T> out({xv.shape[1], xv.shape[0]});
  as_matrix(out) = as_matrix(xv).transpose();
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      as_matrix(n.parents[0]->grad) += as_matrix(n.grad).transpose();
  });
}

// Row-wise softmax with per-row max subtraction.
template <typename T>
Var<T> softmax_rows(const Var<T>& x) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("softmax_rows: expected rank-2, got " + shape_str(xv.shape));
  int64_t rows = xv.shape[0], cols = xv.shape[1];
  Tensor<T> out(xv.shape);
  for (int64_t r = 0; r < rows; ++r) {
    T mx = xv.at(r, 0);
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, xv.at(r, c));
    T sum = 0;
    for (int64_t c = 0; c < cols; ++c) {
      T e = std::exp(xv.at(r, c) - mx);
      out.at(r, c) = e;
      sum += e;
    }
    for (int64_t c = 0; c < cols; ++c) out.at(r, c) /= sum;
  }
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    const Tensor<T>& s = n.value;
    int64_t rows = s.shape[0], cols = s.shape[1];
    for (int64_t r = 0; r < rows; ++r) {
      T dot = 0;
      for (int64_t c = 0; c < cols; ++c) dot += n.grad.at(r, c) * s.at(r, c);
      for (int64_t c = 0; c < cols; ++c)
        n.parents[0]->grad.at(r, c) += s.at(r, c) * (n.grad.at(r, c) - dot);
    }
  });
}

// ---------------------------------------------------------------- reshaping

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  if (shape_numel(shape) != x.value().numel())
    throw ShapeError("reshape: cannot view " + shape_str(x.value().shape) + " as " +
                     shape_str(shape));
  Tensor<T> out(shape, x.value().data);
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i];
  });
}

// Concatenate along axis 0; inputs must share trailing dimensions.
template <typename T>
Var<T> concat0(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("concat0: empty input list");
  Shape tail(xs[0].shape().begin() + 1, xs[0].shape().end());
  int64_t rows = 0;
  for (const auto& x : xs) {
    Shape t(x.shape().begin() + 1, x.shape().end());
    if (t != tail)
      throw ShapeError("concat0: trailing shape mismatch " + shape_str(xs[0].shape()) + " vs " +
                       shape_str(x.shape()));
    rows += x.shape()[0];
  }
  Shape os = xs[0].shape();
  os[0] = rows;
  Tensor<T> out(os);
  int64_t off = 0;
  for (const auto& x : xs) {
    const auto& d = x.value().data;
    std::copy(d.begin(), d.end(), out.data.begin() + off);
    off += (int64_t)d.size();
  }
  return make_op<T>(std::move(out), xs, [](Node<T>& n) {
    int64_t off = 0;
    for (auto& p : n.parents) {
      int64_t sz = p->value.numel();
      if (p->requires_grad)
        for (int64_t i = 0; i < sz; ++i) p->grad[i] += n.grad[off + i];
      off += sz;
    }
  });
}

// Rows [r0, r1) along axis 0.
template <typename T>
Var<T> slice0(const Var<T>& x, int64_t r0, int64_t r1) {
  const Tensor<T>& xv = x.value();
  if (r0 < 0 || r1 > xv.shape[0] || r0 >= r1)
    throw IndexError("slice0: range [" + std::to_string(r0) + "," + std::to_string(r1) +
                     ") out of bounds for " + shape_str(xv.shape));
  Shape os = xv.shape;
  os[0] = r1 - r0;
  int64_t stride = xv.numel() / xv.shape[0];
  Tensor<T> out(os);
  std::copy(xv.data.begin() + r0 * stride, xv.data.begin() + r1 * stride, out.data.begin());
  return make_op<T>(std::move(out), {x}, [r0, stride](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      n.parents[0]->grad[r0 * stride + i] += n.grad[i];
  });
}

// Concatenate [N,Ci,H,W] inputs along the channel axis.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  const Shape& s0 = xs[0].shape();
  if (s0.size() != 4) throw ShapeError("concat_channels: expected rank-4, got " + shape_str(s0));
  int64_t N = s0[0], H = s0[2], W = s0[3], C = 0;
  for (const auto& x : xs) {
    const Shape& s = x.shape();
    if (s.size() != 4 || s[0] != N || s[2] != H || s[3] != W)
      throw ShapeError("concat_channels: incompatible shapes " + shape_str(s0) + " vs " +
                       shape_str(s));
    C += s[1];
  }
  Tensor<T> out({N, C, H, W});
  int64_t hw = H * W;
  for (int64_t n = 0; n < N; ++n) {
    int64_t coff = 0;
    for (const auto& x : xs) {
      int64_t ci = x.shape()[1];
      const T* src = x.value().data.data() + n * ci * hw;
      T* dst = out.data.data() + (n * C + coff) * hw;
      std::copy(src, src + ci * hw, dst);
      coff += ci;
    }
  }
  return make_op<T>(std::move(out), xs, [N, C, hw](Node<T>& n) {
    for (int64_t b = 0; b < N; ++b) {
      int64_t coff = 0;
      for (auto& p : n.parents) {
        int64_t ci = p->value.shape[1];
        if (p->requires_grad) {
          const T* g = n.grad.data.data() + (b * C + coff) * hw;
          T* dst = p->grad.data.data() + b * ci * hw;
          for (int64_t i = 0; i < ci * hw; ++i) dst[i] += g[i];
        }
        coff += ci;
      }
    }
  });
}

// ---------------------------------------------------------------- bias adds

// x[N,C,H,W] + b[C]
template <typename T>
Var<T> add_channel_bias(const Var<T>& x, const Var<T>& b) {
  const Shape& s = x.shape();
  if (s.size() != 4 || b.shape() != Shape{s[1]})
    throw ShapeError("add_channel_bias: " + shape_str(s) + " vs bias " + shape_str(b.shape()));
  Tensor<T> out = x.value();
  int64_t N = s[0], C = s[1], hw = s[2] * s[3];
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      T bv = b.value()[c];
      T* p = out.data.data() + (n * C + c) * hw;
      for (int64_t i = 0; i < hw; ++i) p[i] += bv;
    }
  return make_op<T>(std::move(out), {x, b}, [N, C, hw](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i];
    if (n.parents[1]->requires_grad)
      for (int64_t b = 0; b < N; ++b)
        for (int64_t c = 0; c < C; ++c) {
          const T* g = n.grad.data.data() + (b * C + c) * hw;
          T acc = 0;
          for (int64_t i = 0; i < hw; ++i) acc += g[i];
          n.parents[1]->grad[c] += acc;
        }
  });
}

// x[N,C,H,W] + b[N,C]  (per-sample channel bias, e.g. time-embedding injection)
template <typename T>
Var<T> add_channel_bias_nc(const Var<T>& x, const Var<T>& b) {
  const Shape& s = x.shape();
  if (s.size() != 4 || b.shape() != Shape{s[0], s[1]})
    throw ShapeError("add_channel_bias_nc: " + shape_str(s) + " vs bias " + shape_str(b.shape()));
  Tensor<T> out = x.value();
  int64_t N = s[0], C = s[1], hw = s[2] * s[3];
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      T bv = b.value().at(n, c);
      T* p = out.data.data() + (n * C + c) * hw;
      for (int64_t i = 0; i < hw; ++i) p[i] += bv;
    }
  return make_op<T>(std::move(out), {x, b}, [N, C, hw](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i];
    if (n.parents[1]->requires_grad)
      for (int64_t b = 0; b < N; ++b)
        for (int64_t c = 0; c < C; ++c) {
          const T* g = n.grad.data.data() + (b * C + c) * hw;
          T acc = 0;
          for (int64_t i = 0; i < hw; ++i) acc += g[i];
          n.parents[1]->grad.at(b, c) += acc;
        }
  });
}

// x[n,c] + b[c]
template <typename T>
Var<T> add_row_bias(const Var<T>& x, const Var<T>& b) {
  const Shape& s = x.shape();
  if (s.size() != 2 || b.shape() != Shape{s[1]})
    throw ShapeError("add_row_bias: " + shape_str(s) + " vs bias " + shape_str(b.shape()));
  Tensor<T> out = x.value();
  int64_t rows = s[0], cols = s[1];
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) out.at(r, c) += b.value()[c];
  return make_op<T>(std::move(out), {x, b}, [rows, cols](Node<T>& n) {
    if (n.parents[0]->requires_grad)
      for (int64_t i = 0; i < n.grad.numel(); ++i) n.parents[0]->grad[i] += n.grad[i];
    if (n.parents[1]->requires_grad)
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) n.parents[1]->grad[c] += n.grad.at(r, c);
  });
}

// ---------------------------------------------------------------- reductions

template <typename T>
Var<T> reduce_sum(const Var<T>& x) {
  T s = 0;
  for (T v : x.value().data) s += v;
  return make_op<T>(Tensor<T>::scalar(s), {x}, [](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    T g = n.grad[0];
    for (int64_t i = 0; i < n.parents[0]->value.numel(); ++i) n.parents[0]->grad[i] += g;
  });
}

// Mean squared error over all elements.
template <typename T>
Var<T> mse(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a.value(), b.value(), "mse");
  int64_t n = a.value().numel();
  T s = 0;
  for (int64_t i = 0; i < n; ++i) {
    T d = a.value()[i] - b.value()[i];
    s += d * d;
  }
  return make_op<T>(Tensor<T>::scalar(s / (T)n), {a, b}, [n](Node<T>& nd) {
    const Tensor<T>& av = nd.parents[0]->value;
    const Tensor<T>& bv = nd.parents[1]->value;
    T g = nd.grad[0] * T(2) / (T)n;
    if (nd.parents[0]->requires_grad)
      for (int64_t i = 0; i < n; ++i) nd.parents[0]->grad[i] += g * (av[i] - bv[i]);
    if (nd.parents[1]->requires_grad)
      for (int64_t i = 0; i < n; ++i) nd.parents[1]->grad[i] -= g * (av[i] - bv[i]);
  });
}

// ---------------------------------------------------------------- conv & resampling

namespace detail {

inline int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// cols buffer layout: [C*kh*kw, Ho*Wo] row-major.
template <typename T>
void im2col(const T* x, int64_t C, int64_t H, int64_t W, int64_t kh, int64_t kw, int64_t stride,
            int64_t pad, int64_t Ho, int64_t Wo, T* cols) {
  for (int64_t c = 0; c < C; ++c)
    for (int64_t ky = 0; ky < kh; ++ky)
      for (int64_t kx = 0; kx < kw; ++kx) {
        T* row = cols + ((c * kh + ky) * kw + kx) * Ho * Wo;
        for (int64_t oy = 0; oy < Ho; ++oy) {
          int64_t iy = oy * stride + ky - pad;
          for (int64_t ox = 0; ox < Wo; ++ox) {
            int64_t ix = ox * stride + kx - pad;
            row[oy * Wo + ox] = (iy >= 0 && iy < H && ix >= 0 && ix < W)
                                    ? x[(c * H + iy) * W + ix]
                                    : T(0);
          }
        }
      }
}

template <typename T>
void col2im_acc(const T* cols, int64_t C, int64_t H, int64_t W, int64_t kh, int64_t kw,
                int64_t stride, int64_t pad, int64_t Ho, int64_t Wo, T* dx) {
  for (int64_t c = 0; c < C; ++c)
    for (int64_t ky = 0; ky < kh; ++ky)
      for (int64_t kx = 0; kx < kw; ++kx) {
        const T* row = cols + ((c * kh + ky) * kw + kx) * Ho * Wo;
        for (int64_t oy = 0; oy < Ho; ++oy) {
          int64_t iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= H) continue;
          for (int64_t ox = 0; ox < Wo; ++ox) {
            int64_t ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= W) continue;
            dx[(c * H + iy) * W + ix] += row[oy * Wo + ox];
          }
        }
      }
}

}  // namespace detail

// 2-D convolution, x[N,Ci,H,W] * w[Co,Ci,kh,kw] + b[Co].
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int64_t stride, int64_t pad) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.size() != 4 || ws.size() != 4 || xs[1] != ws[1])
    throw ShapeError("conv2d: input " + shape_str(xs) + " incompatible with weight " +
                     shape_str(ws));
  if (b.shape() != Shape{ws[0]})
    throw ShapeError("conv2d: bias " + shape_str(b.shape()) + " vs Cout " + std::to_string(ws[0]));
  int64_t N = xs[0], Ci = xs[1], H = xs[2], W = xs[3];
  int64_t Co = ws[0], kh = ws[2], kw = ws[3];
  int64_t Ho = detail::conv_out_dim(H, kh, stride, pad);
  int64_t Wo = detail::conv_out_dim(W, kw, stride, pad);
  if (Ho <= 0 || Wo <= 0)
    throw ShapeError("conv2d: empty output for input " + shape_str(xs));

  Tensor<T> out({N, Co, Ho, Wo});
  std::vector<T> cols((size_t)(Ci * kh * kw * Ho * Wo));
  for (int64_t n = 0; n < N; ++n) {
    detail::im2col(x.value().data.data() + n * Ci * H * W, Ci, H, W, kh, kw, stride, pad, Ho, Wo,
                   cols.data());
    auto wmat = as_matrix(w.value().data.data(), Co, Ci * kh * kw);
    auto cmat = as_matrix(cols.data(), Ci * kh * kw, Ho * Wo);
    auto omat = as_matrix(out.data.data() + n * Co * Ho * Wo, Co, Ho * Wo);
    omat.noalias() = wmat * cmat;
    for (int64_t c = 0; c < Co; ++c) omat.row(c).array() += b.value()[c];
  }

  auto bw = [stride, pad, N, Ci, H, W, Co, kh, kw, Ho, Wo](Node<T>& nd) {
    const Tensor<T>& xv = nd.parents[0]->value;
    const Tensor<T>& wv = nd.parents[1]->value;
    std::vector<T> cols((size_t)(Ci * kh * kw * Ho * Wo));
    std::vector<T> dcols;
    for (int64_t n = 0; n < N; ++n) {
      auto gmat = as_matrix(nd.grad.data.data() + n * Co * Ho * Wo, Co, Ho * Wo);
      if (nd.parents[1]->requires_grad || nd.parents[0]->requires_grad)
        detail::im2col(xv.data.data() + n * Ci * H * W, Ci, H, W, kh, kw, stride, pad, Ho, Wo,
                       cols.data());
      if (nd.parents[1]->requires_grad) {
        auto cmat = as_matrix(cols.data(), Ci * kh * kw, Ho * Wo);
        as_matrix(nd.parents[1]->grad.data.data(), Co, Ci * kh * kw).noalias() +=
            gmat * cmat.transpose();
      }
      if (nd.parents[2]->requires_grad)
        for (int64_t c = 0; c < Co; ++c) nd.parents[2]->grad[c] += gmat.row(c).sum();
      if (nd.parents[0]->requires_grad) {
        dcols.assign((size_t)(Ci * kh * kw * Ho * Wo), T(0));
        auto wmat = as_matrix(wv.data.data(), Co, Ci * kh * kw);
        as_matrix(dcols.data(), Ci * kh * kw, Ho * Wo).noalias() = wmat.transpose() * gmat;
        detail::col2im_acc(dcols.data(), Ci, H, W, kh, kw, stride, pad, Ho, Wo,
                           nd.parents[0]->grad.data.data() + n * Ci * H * W);
      }
    }
  };
  return make_op<T>(std::move(out), {x, w, b}, bw);
}

// Nearest-neighbor upsample by integer factor.
template <typename T>
Var<T> upsample_nearest(const Var<T>& x, int64_t f) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("upsample_nearest: expected rank-4, got " + shape_str(s));
  int64_t N = s[0], C = s[1], H = s[2], W = s[3];
  Tensor<T> out({N, C, H * f, W * f});
  for (int64_t nc = 0; nc < N * C; ++nc) {
    const T* src = x.value().data.data() + nc * H * W;
    T* dst = out.data.data() + nc * H * f * W * f;
    for (int64_t y = 0; y < H * f; ++y)
      for (int64_t xx = 0; xx < W * f; ++xx) dst[y * W * f + xx] = src[(y / f) * W + xx / f];
  }
  return make_op<T>(std::move(out), {x}, [N, C, H, W, f](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    for (int64_t nc = 0; nc < N * C; ++nc) {
      const T* g = n.grad.data.data() + nc * H * f * W * f;
      T* dst = n.parents[0]->grad.data.data() + nc * H * W;
      for (int64_t y = 0; y < H * f; ++y)
        for (int64_t xx = 0; xx < W * f; ++xx) dst[(y / f) * W + xx / f] += g[y * W * f + xx];
    }
  });
}

// Nearest-neighbor downsample: keep every f-th pixel (top-left of each cell).
template <typename T>
Var<T> downsample_nearest(const Var<T>& x, int64_t f) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("downsample_nearest: expected rank-4, got " + shape_str(s));
  if (s[2] % f != 0 || s[3] % f != 0)
    throw ShapeError("downsample_nearest: dims " + shape_str(s) + " not divisible by " +
                     std::to_string(f));
  int64_t N = s[0], C = s[1], H = s[2], W = s[3], Ho = H / f, Wo = W / f;
  Tensor<T> out({N, C, Ho, Wo});
  for (int64_t nc = 0; nc < N * C; ++nc) {
    const T* src = x.value().data.data() + nc * H * W;
    T* dst = out.data.data() + nc * Ho * Wo;
    for (int64_t y = 0; y < Ho; ++y)
      for (int64_t xx = 0; xx < Wo; ++xx) dst[y * Wo + xx] = src[y * f * W + xx * f];
  }
  return make_op<T>(std::move(out), {x}, [N, C, H, W, Ho, Wo, f](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    for (int64_t nc = 0; nc < N * C; ++nc) {
      const T* g = n.grad.data.data() + nc * Ho * Wo;
      T* dst = n.parents[0]->grad.data.data() + nc * H * W;
      for (int64_t y = 0; y < Ho; ++y)
        for (int64_t xx = 0; xx < Wo; ++xx) dst[y * f * W + xx * f] += g[y * Wo + xx];
    }
  });
}

// ---------------------------------------------------------------- group norm

// y = gamma_c * (x - mu_g)/sqrt(var_g + eps) + beta_c, stats over each
// (sample, group) slab of C/groups channels.
template <typename T>
Var<T> group_norm(const Var<T>& x, int64_t groups, const Var<T>& gamma, const Var<T>& beta,
                  T eps = T(1e-5)) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("group_norm: expected rank-4, got " + shape_str(s));
  int64_t N = s[0], C = s[1], H = s[2], W = s[3];
  if (C % groups != 0)
    throw ShapeError("group_norm: channels " + std::to_string(C) + " not divisible by groups " +
                     std::to_string(groups));
  if (gamma.shape() != Shape{C} || beta.shape() != Shape{C})
    throw ShapeError("group_norm: affine params must be [C]");
  int64_t cg = C / groups, m = cg * H * W;

  Tensor<T> out(s);
  for (int64_t n = 0; n < N; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      const T* src = x.value().data.data() + (n * C + g * cg) * H * W;
      T mu = 0;
      for (int64_t i = 0; i < m; ++i) mu += src[i];
      mu /= (T)m;
      T var = 0;
      for (int64_t i = 0; i < m; ++i) {
        T d = src[i] - mu;
        var += d * d;
      }
      var /= (T)m;
      T inv = T(1) / std::sqrt(var + eps);
      T* dst = out.data.data() + (n * C + g * cg) * H * W;
      for (int64_t c = 0; c < cg; ++c) {
        T ga = gamma.value()[g * cg + c], be = beta.value()[g * cg + c];
        for (int64_t i = 0; i < H * W; ++i)
          dst[c * H * W + i] = ga * (src[c * H * W + i] - mu) * inv + be;
      }
    }

  auto bw = [N, C, H, W, groups, cg, m, eps](Node<T>& nd) {
    const Tensor<T>& xv = nd.parents[0]->value;
    const Tensor<T>& ga = nd.parents[1]->value;
    bool need_x = nd.parents[0]->requires_grad;
    bool need_g = nd.parents[1]->requires_grad;
    bool need_b = nd.parents[2]->requires_grad;
    for (int64_t n = 0; n < N; ++n)
      for (int64_t g = 0; g < groups; ++g) {
        const T* src = xv.data.data() + (n * C + g * cg) * H * W;
        const T* go = nd.grad.data.data() + (n * C + g * cg) * H * W;
        T mu = 0;
        for (int64_t i = 0; i < m; ++i) mu += src[i];
        mu /= (T)m;
        T var = 0;
        for (int64_t i = 0; i < m; ++i) {
          T d = src[i] - mu;
          var += d * d;
        }
        var /= (T)m;
        T inv = T(1) / std::sqrt(var + eps);

        if (need_g || need_b)
          for (int64_t c = 0; c < cg; ++c) {
            T dg = 0, db = 0;
            for (int64_t i = 0; i < H * W; ++i) {
              T xhat = (src[c * H * W + i] - mu) * inv;
              dg += go[c * H * W + i] * xhat;
              db += go[c * H * W + i];
            }
            if (need_g) nd.parents[1]->grad[g * cg + c] += dg;
            if (need_b) nd.parents[2]->grad[g * cg + c] += db;
          }

        if (need_x) {
          // dx = inv * (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat))
          T mean_dxhat = 0, mean_dxhat_xhat = 0;
          for (int64_t c = 0; c < cg; ++c) {
            T gac = ga[g * cg + c];
            for (int64_t i = 0; i < H * W; ++i) {
              T dxhat = go[c * H * W + i] * gac;
              T xhat = (src[c * H * W + i] - mu) * inv;
              mean_dxhat += dxhat;
              mean_dxhat_xhat += dxhat * xhat;
            }
          }
          mean_dxhat /= (T)m;
          mean_dxhat_xhat /= (T)m;
          T* dx = nd.parents[0]->grad.data.data() + (n * C + g * cg) * H * W;
          for (int64_t c = 0; c < cg; ++c) {
            T gac = ga[g * cg + c];
            for (int64_t i = 0; i < H * W; ++i) {
              T dxhat = go[c * H * W + i] * gac;
              T xhat = (src[c * H * W + i] - mu) * inv;
              dx[c * H * W + i] += inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
            }
          }
        }
      }
  };
  return make_op<T>(std::move(out), {x, gamma, beta}, bw);
}

// ---------------------------------------------------------------- embeddings

// Gather rows of a trainable table; gradient scatter-adds per index.
template <typename T>
Var<T> embedding_rows(const Var<T>& table, const std::vector<int64_t>& idx) {
  const Shape& s = table.shape();
  if (s.size() != 2) throw ShapeError("embedding_rows: table must be rank-2");
  for (int64_t i : idx)
    if (i < 0 || i >= s[0])
      throw IndexError("embedding_rows: index " + std::to_string(i) + " out of range [0," +
                       std::to_string(s[0]) + ")");
  int64_t cols = s[1];
  Tensor<T> out({(int64_t)idx.size(), cols});
  for (size_t r = 0; r < idx.size(); ++r)
    std::copy(table.value().data.begin() + idx[r] * cols,
              table.value().data.begin() + (idx[r] + 1) * cols, out.data.begin() + r * cols);
  return make_op<T>(std::move(out), {table}, [idx, cols](Node<T>& n) {
    if (!n.parents[0]->requires_grad) return;
    for (size_t r = 0; r < idx.size(); ++r)
      for (int64_t c = 0; c < cols; ++c)
        n.parents[0]->grad[idx[r] * cols + c] += n.grad[(int64_t)r * cols + c];
  });
}

// Fixed sinusoidal embedding of an integer timestep; a constant producer.
template <typename T>
Tensor<T> sinusoidal_embedding(int64_t t, int64_t dim) {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("sinusoidal_embedding: dim must be even and >= 2");
  int64_t half = dim / 2;
  Tensor<T> e({1, dim});
  for (int64_t k = 0; k < half; ++k) {
    double freq = std::exp(-std::log(10000.0) * (double)k / (double)half);
    e[k] = (T)std::sin((double)t * freq);
    e[half + k] = (T)std::cos((double)t * freq);
  }
  return e;
}

}  // namespace dhvton
