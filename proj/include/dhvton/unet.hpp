#pragma once

#include "dhvton/attention.hpp"
#include "dhvton/ops.hpp"
#include "dhvton/params.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dhvton {

inline int64_t gn_groups_for(int64_t c) {
  int64_t g = std::min<int64_t>(8, c);
  while (c % g) --g;
  return g;
}

struct LayerCtx {
  ParamStore<float>& ps;
  SeededRng& rng;
};

// Weight layers support a function-preserving learning-rate gain: parameters
// are stored scaled by 1/gain and the layer output is multiplied by gain, so
// the initial function is unchanged while Adam's fixed per-parameter step
// moves the effective weights gain times faster. This is what makes the
// desk-scale network trainable at the reference learning rate.
struct Conv2dLayer {
  ParamStore<float>* ps = nullptr;
  std::string w, b;
  int64_t stride = 1, pad = 1;
  float gain = 1.0f;

  Conv2dLayer() = default;
  Conv2dLayer(LayerCtx ctx, const std::string& prefix, int64_t cin, int64_t cout, int64_t k,
              int64_t stride_, int64_t pad_, Init init = Init::HeNormal, float gain_ = 1.0f)
      : ps(&ctx.ps), w(prefix + "/w"), b(prefix + "/b"), stride(stride_), pad(pad_),
        gain(gain_) {
    Tensor<float> wt = init_tensor<float>({cout, cin, k, k}, init, cin * k * k, ctx.rng);
    if (gain != 1.0f) wt = tscale(wt, 1.0f / gain);
    ctx.ps.create(w, std::move(wt));
    ctx.ps.create(b, Tensor<float>::zeros({cout}));
  }
  Var<float> fwd(const Var<float>& x) const {
    Var<float> y = conv2d(x, ps->var(w), ps->var(b), stride, pad);
    return gain == 1.0f ? y : scale(y, gain);
  }
};

struct LinearLayer {
  ParamStore<float>* ps = nullptr;
  std::string w, b;
  float gain = 1.0f;

  LinearLayer() = default;
  LinearLayer(LayerCtx ctx, const std::string& prefix, int64_t in, int64_t out,
              float gain_ = 1.0f)
      : ps(&ctx.ps), w(prefix + "/w"), b(prefix + "/b"), gain(gain_) {
    Tensor<float> wt = init_tensor<float>({in, out}, Init::XavierNormal, in, ctx.rng);
    if (gain != 1.0f) wt = tscale(wt, 1.0f / gain);
    ctx.ps.create(w, std::move(wt));
    ctx.ps.create(b, Tensor<float>::zeros({out}));
  }
  Var<float> fwd(const Var<float>& x) const {
    Var<float> y = add_row_bias(matmul(x, ps->var(w)), ps->var(b));
    return gain == 1.0f ? y : scale(y, gain);
  }
};

struct GroupNormLayer {
  ParamStore<float>* ps = nullptr;
  std::string g, b;
  int64_t groups = 1;

  GroupNormLayer() = default;
  GroupNormLayer(LayerCtx ctx, const std::string& prefix, int64_t channels)
      : ps(&ctx.ps), g(prefix + "/g"), b(prefix + "/b"), groups(gn_groups_for(channels)) {
    ctx.ps.create(g, Tensor<float>::full({channels}, 1.0f));
    ctx.ps.create(b, Tensor<float>::zeros({channels}));
  }
  Var<float> fwd(const Var<float>& x) const {
    return group_norm(x, groups, ps->var(g), ps->var(b));
  }
};

struct ResBlock {
  GroupNormLayer gn1, gn2;
  Conv2dLayer conv1, conv2;
  LinearLayer temb_proj;
  std::optional<Conv2dLayer> skip;

  ResBlock() = default;
  ResBlock(LayerCtx ctx, const std::string& p, int64_t cin, int64_t cout, int64_t temb_dim,
           float gain = 1.0f) {
    gn1 = GroupNormLayer(ctx, p + "/gn1", cin);
    conv1 = Conv2dLayer(ctx, p + "/conv1", cin, cout, 3, 1, 1, Init::HeNormal, gain);
    temb_proj = LinearLayer(ctx, p + "/temb", temb_dim, cout, gain);
    gn2 = GroupNormLayer(ctx, p + "/gn2", cout);
    conv2 = Conv2dLayer(ctx, p + "/conv2", cout, cout, 3, 1, 1, Init::HeNormal, gain);
    if (cin != cout) skip = Conv2dLayer(ctx, p + "/skip", cin, cout, 1, 1, 0, Init::HeNormal, gain);
  }

  Var<float> fwd(const Var<float>& x, const Var<float>& temb) const {
    Var<float> h = conv1.fwd(silu(gn1.fwd(x)));
    h = add_channel_bias_nc(h, temb_proj.fwd(silu(temb)));
    h = conv2.fwd(silu(gn2.fwd(h)));
    return add(skip ? skip->fwd(x) : x, h);
  }
};

// Self-attention sub-layer over spatial tokens, pre-GroupNorm + residual.
// The value projection carries the lr gain (stored 1/gain, output x gain).
struct SelfAttnSub {
  GroupNormLayer gn;
  ParamStore<float>* ps = nullptr;
  std::string wq, wk, wv;
  float gain = 1.0f;

  SelfAttnSub() = default;
  SelfAttnSub(LayerCtx ctx, const std::string& p, int64_t channels, float gain_ = 1.0f)
      : ps(&ctx.ps), gain(gain_) {
    gn = GroupNormLayer(ctx, p + "/gn", channels);
    wq = p + "/wq";
    wk = p + "/wk";
    wv = p + "/wv";
    for (const auto& n : {wq, wk})
      ctx.ps.create(n, init_tensor<float>({channels, channels}, Init::XavierNormal, channels,
                                          ctx.rng));
    Tensor<float> vt =
        init_tensor<float>({channels, channels}, Init::XavierNormal, channels, ctx.rng);
    if (gain != 1.0f) vt = tscale(vt, 1.0f / gain);
    ctx.ps.create(wv, std::move(vt));
  }

  Var<float> fwd(const Var<float>& x) const {
    const Shape& s = x.shape();
    Var<float> h = gn.fwd(x);
    std::vector<Var<float>> outs;
    for (int64_t n = 0; n < s[0]; ++n) {
      Var<float> tok = tokens_from_map(slice0(h, n, n + 1));
      Var<float> o = self_attention(tok, ps->var(wq), ps->var(wk), ps->var(wv));
      if (gain != 1.0f) o = scale(o, gain);
      outs.push_back(map_from_tokens(o, s[1], s[2], s[3]));
    }
    return add(x, outs.size() == 1 ? outs[0] : concat0(outs));
  }
};

// Plain cross-attention sub-layer; context tokens are per batch item.
struct CrossAttnSub {
  GroupNormLayer gn;
  ParamStore<float>* ps = nullptr;
  std::string wq, wk, wv;
  float gain = 1.0f;

  CrossAttnSub() = default;
  CrossAttnSub(LayerCtx ctx, const std::string& p, int64_t channels, int64_t ctx_dim,
               float gain_ = 1.0f)
      : ps(&ctx.ps), gain(gain_) {
    gn = GroupNormLayer(ctx, p + "/gn", channels);
    wq = p + "/wq";
    wk = p + "/wk";
    wv = p + "/wv";
    ctx.ps.create(wq, init_tensor<float>({channels, channels}, Init::XavierNormal, channels,
                                         ctx.rng));
    ctx.ps.create(wk, init_tensor<float>({ctx_dim, channels}, Init::XavierNormal, ctx_dim,
                                         ctx.rng));
    Tensor<float> vt = init_tensor<float>({ctx_dim, channels}, Init::XavierNormal, ctx_dim,
                                          ctx.rng);
    if (gain != 1.0f) vt = tscale(vt, 1.0f / gain);
    ctx.ps.create(wv, std::move(vt));
  }

  Var<float> fwd(const Var<float>& x, const std::vector<Var<float>>& ctx_tokens) const {
    const Shape& s = x.shape();
    if ((int64_t)ctx_tokens.size() != s[0])
      throw ShapeError("cross attention: context token arity mismatch");
    Var<float> h = gn.fwd(x);
    std::vector<Var<float>> outs;
    for (int64_t n = 0; n < s[0]; ++n) {
      Var<float> tok = tokens_from_map(slice0(h, n, n + 1));
      Var<float> o = cross_attention(tok, ctx_tokens[(size_t)n], ps->var(wq), ps->var(wk),
                                     ps->var(wv));
      if (gain != 1.0f) o = scale(o, gain);
      outs.push_back(map_from_tokens(o, s[1], s[2], s[3]));
    }
    return add(x, outs.size() == 1 ? outs[0] : concat0(outs));
  }
};

// Hybrid sub-layer (the Eq.-2 block): consumes the output of the preceding
// self-attention sub-layer, shares its query projection across the self and
// garment branches, and scales the garment branch by lambda. use_hybrid=false
// degrades it to a plain second self-attention over the same projections.
struct HybridSub {
  GroupNormLayer gn;
  ParamStore<float>* ps = nullptr;
  std::string wq, wk, wv, wkg, wvg;
  float gain = 1.0f;

  HybridSub() = default;
  HybridSub(LayerCtx ctx, const std::string& p, int64_t channels, int64_t ctx_dim,
            float gain_ = 1.0f)
      : ps(&ctx.ps), gain(gain_) {
    gn = GroupNormLayer(ctx, p + "/gn", channels);
    wq = p + "/wq";
    wk = p + "/wk";
    wv = p + "/wv";
    wkg = p + "/wkg";
    wvg = p + "/wvg";
    for (const auto& n : {wq, wk})
      ctx.ps.create(n, init_tensor<float>({channels, channels}, Init::XavierNormal, channels,
                                          ctx.rng));
    Tensor<float> vt =
        init_tensor<float>({channels, channels}, Init::XavierNormal, channels, ctx.rng);
    if (gain != 1.0f) vt = tscale(vt, 1.0f / gain);
    ctx.ps.create(wv, std::move(vt));
    ctx.ps.create(wkg, init_tensor<float>({ctx_dim, channels}, Init::XavierNormal, ctx_dim,
                                          ctx.rng));
    Tensor<float> vgt =
        init_tensor<float>({ctx_dim, channels}, Init::XavierNormal, ctx_dim, ctx.rng);
    if (gain != 1.0f) vgt = tscale(vgt, 1.0f / gain);
    ctx.ps.create(wvg, std::move(vgt));
  }

  HybridWeights<float> weights() const {
    return {ps->var(wq), ps->var(wk), ps->var(wv), ps->var(wkg), ps->var(wvg)};
  }

  Var<float> fwd(const Var<float>& x, const std::vector<Var<float>>& ig_tokens, double lambda,
                 bool use_hybrid) const {
    const Shape& s = x.shape();
    if ((int64_t)ig_tokens.size() != s[0])
      throw ShapeError("hybrid attention: garment token arity mismatch");
    Var<float> h = gn.fwd(x);
    std::vector<Var<float>> outs;
    for (int64_t n = 0; n < s[0]; ++n) {
      Var<float> o_s = tokens_from_map(slice0(h, n, n + 1));
      Var<float> o = use_hybrid
                         ? hybrid_attention(o_s, ig_tokens[(size_t)n], weights(), lambda)
                         : self_attention(o_s, ps->var(wq), ps->var(wk), ps->var(wv));
      if (gain != 1.0f) o = scale(o, gain);
      outs.push_back(map_from_tokens(o, s[1], s[2], s[3]));
    }
    return add(x, outs.size() == 1 ? outs[0] : concat0(outs));
  }
};

// ---------------------------------------------------------------- backbone

struct BackboneConfig {
  int img_channels = 3;
  int base_channels = 16;
  std::vector<int> channel_multipliers = {1, 2, 4};
  std::set<int> attention_levels = {2};
  int time_embed_dim = 64;
  int token_dim = 32;    // garment token width entering cross attention
  float out_gain = 1.0f;
  float lr_gain = 1.0f;  // function-preserving per-layer learning-rate gain

  int in_channels() const { return 2 * img_channels + 1; }  // x_t + mask + masked image
  int levels() const { return (int)channel_multipliers.size(); }
  int channels_at(int l) const { return base_channels * channel_multipliers[(size_t)l]; }

  void validate() const {
    if (levels() < 1) throw ConfigError("backbone: need at least one resolution level");
    bool any = false;
    for (int l : attention_levels) any = any || (l >= 0 && l < levels());
    if (!any)
      throw ConfigError("backbone: at least one attention level must exist so garment "
                        "conditioning reaches the network");
  }
};

// Control vectors emitted by the GFC branch: one per decoder skip connection
// (index == resolution level) plus the middle block.
struct ControlVectorsVar {
  std::vector<Var<float>> skips;
  Var<float> middle;
};

// Exemplar-inpainting UNet. Inputs are the noisy image, the inpainting mask
// and the masked person; garment context enters through cross attention over
// the thumbnail tokens at the configured attention levels and in the middle
// block.
class BackboneUNet {
 public:
  BackboneUNet() = default;
  BackboneUNet(ParamStore<float>& ps, SeededRng& rng, const BackboneConfig& cfg,
               const std::string& prefix = "backbone/")
      : cfg_(cfg) {
    cfg.validate();
    LayerCtx ctx{ps, rng};
    int L = cfg.levels();
    float g = cfg.lr_gain;
    stem_ = Conv2dLayer(ctx, prefix + "stem", cfg.in_channels(), cfg.channels_at(0), 3, 1, 1,
                        Init::HeNormal, g);
    temb_lin1_ = LinearLayer(ctx, prefix + "temb/lin1", cfg.time_embed_dim, cfg.time_embed_dim, g);
    temb_lin2_ = LinearLayer(ctx, prefix + "temb/lin2", cfg.time_embed_dim, cfg.time_embed_dim, g);

    for (int l = 0; l < L; ++l) {
      int64_t cin = l == 0 ? cfg.channels_at(0) : cfg.channels_at(l);
      enc_res_.emplace_back(ctx, prefix + "enc" + std::to_string(l) + "/res", cin,
                            cfg.channels_at(l), cfg.time_embed_dim, g);
      if (cfg.attention_levels.count(l)) {
        enc_self_[l] = SelfAttnSub(ctx, prefix + "enc" + std::to_string(l) + "/attn/self",
                                   cfg.channels_at(l), g);
        enc_cross_[l] = CrossAttnSub(ctx, prefix + "enc" + std::to_string(l) + "/attn/cross",
                                     cfg.channels_at(l), cfg.token_dim, g);
      }
      if (l + 1 < L)
        downs_.emplace_back(ctx, prefix + "down" + std::to_string(l), cfg.channels_at(l),
                            cfg.channels_at(l + 1), 3, 2, 1, Init::HeNormal, g);
    }

    int64_t cm = cfg.channels_at(L - 1);
    mid_res1_ = ResBlock(ctx, prefix + "mid/res1", cm, cm, cfg.time_embed_dim, g);
    mid_self_ = SelfAttnSub(ctx, prefix + "mid/attn/self", cm, g);
    mid_cross_ = CrossAttnSub(ctx, prefix + "mid/attn/cross", cm, cfg.token_dim, g);
    mid_res2_ = ResBlock(ctx, prefix + "mid/res2", cm, cm, cfg.time_embed_dim, g);

    for (int l = L - 1; l >= 0; --l) {
      dec_res_[l] = ResBlock(ctx, prefix + "dec" + std::to_string(l) + "/res",
                             2 * cfg.channels_at(l), cfg.channels_at(l), cfg.time_embed_dim, g);
      if (cfg.attention_levels.count(l)) {
        dec_self_[l] = SelfAttnSub(ctx, prefix + "dec" + std::to_string(l) + "/attn/self",
                                   cfg.channels_at(l), g);
        dec_cross_[l] = CrossAttnSub(ctx, prefix + "dec" + std::to_string(l) + "/attn/cross",
                                     cfg.channels_at(l), cfg.token_dim, g);
      }
      if (l > 0)
        ups_[l] = Conv2dLayer(ctx, prefix + "up" + std::to_string(l), cfg.channels_at(l),
                              cfg.channels_at(l - 1), 3, 1, 1, Init::HeNormal, g);
    }

    out_gn_ = GroupNormLayer(ctx, prefix + "out/gn", cfg.channels_at(0));
    out_conv_ = Conv2dLayer(ctx, prefix + "out/conv", cfg.channels_at(0), cfg.img_channels, 3, 1,
                            1, Init::Zero);
  }

  Var<float> time_embedding(const std::vector<int>& ts) const {
    std::vector<Var<float>> rows;
    for (int t : ts)
      rows.push_back(Var<float>::constant(sinusoidal_embedding<float>(t, cfg_.time_embed_dim)));
    Var<float> e = rows.size() == 1 ? rows[0] : concat0(rows);
    return temb_lin2_.fwd(silu(temb_lin1_.fwd(e)));
  }

  // cv == nullptr runs the plain backbone; otherwise cv->skips[l] is added to
  // each skip before the decoder uses it and cv->middle to the middle output.
  Var<float> fwd(const Var<float>& x_t, const Var<float>& mask, const Var<float>& x0_masked,
                 const std::vector<Var<float>>& thumb_tokens, const std::vector<int>& ts,
                 const ControlVectorsVar* cv = nullptr) const {
    if (x_t.shape()[1] != cfg_.img_channels || mask.shape()[1] != 1)
      throw ConfigError("backbone: condition channels do not match configuration");
    int L = cfg_.levels();
    Var<float> temb = time_embedding(ts);
    Var<float> h = stem_.fwd(concat_channels<float>({x_t, mask, x0_masked}));

    std::vector<Var<float>> skips;
    for (int l = 0; l < L; ++l) {
      h = enc_res_[(size_t)l].fwd(h, temb);
      if (auto it = enc_self_.find(l); it != enc_self_.end()) {
        h = it->second.fwd(h);
        h = enc_cross_.at(l).fwd(h, thumb_tokens);
      }
      skips.push_back(h);
      if (l + 1 < L) h = downs_[(size_t)l].fwd(h);
    }

    h = mid_res1_.fwd(h, temb);
    h = mid_self_.fwd(h);
    h = mid_cross_.fwd(h, thumb_tokens);
    h = mid_res2_.fwd(h, temb);
    if (cv) {
      if ((int)cv->skips.size() != L)
        throw ShapeError("control vectors: expected " + std::to_string(L) + " skip sites");
      h = add(h, cv->middle);
    }

    for (int l = L - 1; l >= 0; --l) {
      Var<float> skip = cv ? add(skips[(size_t)l], cv->skips[(size_t)l]) : skips[(size_t)l];
      h = dec_res_.at(l).fwd(concat_channels<float>({h, skip}), temb);
      if (auto it = dec_self_.find(l); it != dec_self_.end()) {
        h = it->second.fwd(h);
        h = dec_cross_.at(l).fwd(h, thumb_tokens);
      }
      if (l > 0) h = ups_.at(l).fwd(upsample_nearest(h, 2));
    }

    Var<float> out = out_conv_.fwd(silu(out_gn_.fwd(h)));
    return cfg_.out_gain == 1.0f ? out : scale(out, cfg_.out_gain);
  }

  const BackboneConfig& config() const { return cfg_; }

 private:
  BackboneConfig cfg_;
  Conv2dLayer stem_;
  LinearLayer temb_lin1_, temb_lin2_;
  std::vector<ResBlock> enc_res_;
  std::map<int, SelfAttnSub> enc_self_, dec_self_;
  std::map<int, CrossAttnSub> enc_cross_, dec_cross_;
  std::vector<Conv2dLayer> downs_;
  ResBlock mid_res1_, mid_res2_;
  SelfAttnSub mid_self_;
  CrossAttnSub mid_cross_;
  std::map<int, ResBlock> dec_res_;
  std::map<int, Conv2dLayer> ups_;
  GroupNormLayer out_gn_;
  Conv2dLayer out_conv_;
};

// ---------------------------------------------------------------- GFC branch

struct GfcConfig {
  int pose_channels = 8;       // keypoint heatmaps
  int densepose_channels = 5;  // body-part one-hot
  bool zero_init = true;
  float control_gain = 1.0f;

  int extra_in_channels() const { return pose_channels + densepose_channels; }
};

// Trainable copy of the backbone's encoder + middle topology whose attention
// blocks are hybrid blocks over the full fine-grained token sequence. Each
// site output passes through a zero-initialized 1x1 projection, so an
// untrained branch contributes exactly nothing.
class GfcBranch {
 public:
  GfcBranch() = default;
  GfcBranch(ParamStore<float>& ps, SeededRng& rng, const BackboneConfig& bb, const GfcConfig& gc,
            const std::string& prefix = "gfc/")
      : bb_(bb), gc_(gc) {
    LayerCtx ctx{ps, rng};
    int L = bb.levels();
    float g = bb.lr_gain;
    stem_ = Conv2dLayer(ctx, prefix + "stem", bb.in_channels() + gc.extra_in_channels(),
                        bb.channels_at(0), 3, 1, 1, Init::HeNormal, g);
    temb_lin1_ = LinearLayer(ctx, prefix + "temb/lin1", bb.time_embed_dim, bb.time_embed_dim, g);
    temb_lin2_ = LinearLayer(ctx, prefix + "temb/lin2", bb.time_embed_dim, bb.time_embed_dim, g);

    for (int l = 0; l < L; ++l) {
      int64_t cin = l == 0 ? bb.channels_at(0) : bb.channels_at(l);
      enc_res_.emplace_back(ctx, prefix + "enc" + std::to_string(l) + "/res", cin,
                            bb.channels_at(l), bb.time_embed_dim, g);
      if (bb.attention_levels.count(l)) {
        enc_self_[l] = SelfAttnSub(ctx, prefix + "enc" + std::to_string(l) + "/attn/self",
                                   bb.channels_at(l), g);
        enc_hybrid_[l] = HybridSub(ctx, prefix + "enc" + std::to_string(l) + "/attn/hybrid",
                                   bb.channels_at(l), bb.token_dim, g);
      }
      if (l + 1 < L)
        downs_.emplace_back(ctx, prefix + "down" + std::to_string(l), bb.channels_at(l),
                            bb.channels_at(l + 1), 3, 2, 1, Init::HeNormal, g);
      Init zi = gc.zero_init ? Init::Zero : Init::HeNormal;
      zp_.emplace_back(ctx, prefix + "zp" + std::to_string(l), bb.channels_at(l),
                       bb.channels_at(l), 1, 1, 0, zi);
    }

    int64_t cm = bb.channels_at(L - 1);
    mid_res1_ = ResBlock(ctx, prefix + "mid/res1", cm, cm, bb.time_embed_dim, g);
    mid_self_ = SelfAttnSub(ctx, prefix + "mid/attn/self", cm, g);
    mid_hybrid_ = HybridSub(ctx, prefix + "mid/attn/hybrid", cm, bb.token_dim, g);
    mid_res2_ = ResBlock(ctx, prefix + "mid/res2", cm, cm, bb.time_embed_dim, g);
    zp_mid_ = Conv2dLayer(ctx, prefix + "zp_mid", cm, cm, 1, 1, 0,
                          gc.zero_init ? Init::Zero : Init::HeNormal);
  }

  ControlVectorsVar fwd(const Var<float>& x_t, const Var<float>& mask,
                        const Var<float>& x0_masked, const Var<float>& pose,
                        const Var<float>& densepose, const std::vector<Var<float>>& ig_tokens,
                        const std::vector<int>& ts, double lambda, bool use_hybrid) const {
    if (pose.shape()[1] != gc_.pose_channels || densepose.shape()[1] != gc_.densepose_channels)
      throw ConfigError("gfc: pose/densepose channels do not match configuration");
    int L = bb_.levels();
    std::vector<Var<float>> rows;
    for (int t : ts)
      rows.push_back(Var<float>::constant(sinusoidal_embedding<float>(t, bb_.time_embed_dim)));
    Var<float> temb =
        temb_lin2_.fwd(silu(temb_lin1_.fwd(rows.size() == 1 ? rows[0] : concat0(rows))));

    Var<float> h = stem_.fwd(concat_channels<float>({x_t, mask, x0_masked, pose, densepose}));
    ControlVectorsVar cv;
    auto project = [&](const Conv2dLayer& zp, const Var<float>& g) {
      Var<float> c = zp.fwd(g);
      return gc_.control_gain == 1.0f ? c : scale(c, gc_.control_gain);
    };

    for (int l = 0; l < L; ++l) {
      h = enc_res_[(size_t)l].fwd(h, temb);
      if (auto it = enc_self_.find(l); it != enc_self_.end()) {
        h = it->second.fwd(h);
        h = enc_hybrid_.at(l).fwd(h, ig_tokens, lambda, use_hybrid);
      }
      cv.skips.push_back(project(zp_[(size_t)l], h));
      if (l + 1 < L) h = downs_[(size_t)l].fwd(h);
    }

    h = mid_res1_.fwd(h, temb);
    h = mid_self_.fwd(h);
    h = mid_hybrid_.fwd(h, ig_tokens, lambda, use_hybrid);
    h = mid_res2_.fwd(h, temb);
    cv.middle = project(zp_mid_, h);
    return cv;
  }

  const HybridSub& mid_hybrid() const { return mid_hybrid_; }

 private:
  BackboneConfig bb_;
  GfcConfig gc_;
  Conv2dLayer stem_;
  LinearLayer temb_lin1_, temb_lin2_;
  std::vector<ResBlock> enc_res_;
  std::map<int, SelfAttnSub> enc_self_;
  std::map<int, HybridSub> enc_hybrid_;
  std::vector<Conv2dLayer> downs_;
  std::vector<Conv2dLayer> zp_;
  ResBlock mid_res1_, mid_res2_;
  SelfAttnSub mid_self_;
  HybridSub mid_hybrid_;
  Conv2dLayer zp_mid_;
};

}  // namespace dhvton
