#pragma once

#include "dhvton/ops.hpp"

namespace dhvton {

enum class TokenOrigin { SpatialFeatures, GarmentTokens };

// A token matrix [n, c] tagged with where it came from. Feature maps flatten
// height-major (token index = h*W + w), which map_from_tokens inverts.
template <typename T>
struct TokenSeq {
  Var<T> tokens;
  TokenOrigin origin = TokenOrigin::SpatialFeatures;
};

// [1,C,H,W] -> [H*W, C]
template <typename T>
Var<T> tokens_from_map(const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[0] != 1)
    throw ShapeError("tokens_from_map: expected [1,C,H,W], got " + shape_str(s));
  return transpose(reshape(x, {s[1], s[2] * s[3]}));
}

// [H*W, C] -> [1,C,H,W]
template <typename T>
Var<T> map_from_tokens(const Var<T>& tok, int64_t C, int64_t H, int64_t W) {
  const Shape& s = tok.shape();
  if (s.size() != 2 || s[0] != H * W || s[1] != C)
    throw ShapeError("map_from_tokens: token shape " + shape_str(s) + " does not match " +
                     std::to_string(C) + "x" + std::to_string(H) + "x" + std::to_string(W));
  return reshape(transpose(tok), {1, C, H, W});
}

// Softmax(q k^T / sqrt(d)) v with d = projection width of q.
template <typename T>
Var<T> scaled_dot_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v) {
  int64_t d = q.shape()[1];
  Var<T> scores = scale(matmul(q, transpose(k)), (T)(1.0 / std::sqrt((double)d)));
  return matmul(softmax_rows(scores), v);
}

template <typename T>
Var<T> self_attention(const Var<T>& x, const Var<T>& wq, const Var<T>& wk, const Var<T>& wv) {
  if (x.shape().size() != 2 || x.shape()[1] != wq.shape()[0])
    throw ShapeError("self_attention: tokens " + shape_str(x.shape()) + " vs W_q " +
                     shape_str(wq.shape()));
  return scaled_dot_attention(matmul(x, wq), matmul(x, wk), matmul(x, wv));
}

// Plain cross attention: queries from x, keys/values from ctx tokens.
template <typename T>
Var<T> cross_attention(const Var<T>& x, const Var<T>& ctx, const Var<T>& wq, const Var<T>& wk,
                       const Var<T>& wv) {
  if (ctx.shape()[1] != wk.shape()[0])
    throw ShapeError("cross_attention: ctx " + shape_str(ctx.shape()) + " vs W_k " +
                     shape_str(wk.shape()));
  return scaled_dot_attention(matmul(x, wq), matmul(ctx, wk), matmul(ctx, wv));
}

// The five projections of the hybrid block; lambda is a run-level
// hyper-parameter, not a trainable weight.
template <typename T>
struct HybridWeights {
  Var<T> wq, wk, wv;    // applied to o_s, [c x d_head]
  Var<T> wk_g, wv_g;    // applied to i_g, [c_g x d_head]
};

// O_h = Softmax(Q K^T / sqrt(d)) V + lambda * Softmax(Q K'^T / sqrt(d)) V'
// with Q projected from o_s once and reused by both terms. lambda == 0
// returns the self term itself so the reduction is exact to the bit.
template <typename T>
Var<T> hybrid_attention(const Var<T>& o_s, const Var<T>& i_g, const HybridWeights<T>& w,
                        double lambda) {
  if (lambda < 0.0 || lambda > 1.5)
    throw ConfigError("hybrid_attention: lambda " + std::to_string(lambda) +
                      " outside [0, 1.5]");
  if (o_s.shape().size() != 2 || o_s.shape()[1] != w.wq.shape()[0])
    throw ShapeError("hybrid_attention: o_s " + shape_str(o_s.shape()) + " vs W_q " +
                     shape_str(w.wq.shape()));
  if (i_g.shape().size() != 2 || i_g.shape()[0] < 1)
    throw ShapeError("hybrid_attention: garment token count is zero");
  if (i_g.shape()[1] != w.wk_g.shape()[0])
    throw ShapeError("hybrid_attention: i_g " + shape_str(i_g.shape()) + " vs W'_k " +
                     shape_str(w.wk_g.shape()));

  Var<T> q = matmul(o_s, w.wq);  // shared query
  Var<T> self_term = scaled_dot_attention(q, matmul(o_s, w.wk), matmul(o_s, w.wv));
  if (lambda == 0.0) return self_term;
  Var<T> cross_term = scaled_dot_attention(q, matmul(i_g, w.wk_g), matmul(i_g, w.wv_g));
  return add(self_term, scale(cross_term, (T)lambda));
}

}  // namespace dhvton
