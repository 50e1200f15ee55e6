#pragma once

#include "dhvton/checkpoint.hpp"
#include "dhvton/diffusion.hpp"
#include "dhvton/garment_encoder.hpp"
#include "dhvton/unet.hpp"

#include <memory>

namespace dhvton {

struct ModelConfig {
  BackboneConfig backbone;
  GfcConfig gfc;
  TokenizerConfig tokenizer;
  bool gfc_enabled = true;
  bool hybrid_enabled = true;
  double lambda = 1.0;
  std::string extractor = "tiled";
};

// The two-branch denoiser: a backbone that can be frozen after pretraining
// and the trainable control branch whose vectors are added at the middle
// block and the decoder skip connections. Parameter namespaces: backbone/,
// gfc/, tok/.
class TryOnModel : public EpsModel {
 public:
  TryOnModel(ParamStore<float>& ps, SeededRng init_rng, const ModelConfig& cfg)
      : ps_(&ps), cfg_(cfg) {
    if (cfg.lambda < 0.0 || cfg.lambda > 1.5)
      throw ConfigError("model: lambda " + std::to_string(cfg.lambda) + " outside [0, 1.5]");
    if (cfg.backbone.token_dim != cfg.tokenizer.token_dim)
      throw ConfigError("model: backbone token_dim must match tokenizer token_dim");
    backbone_ = BackboneUNet(ps, init_rng, cfg.backbone);
    gfc_ = GfcBranch(ps, init_rng, cfg.backbone, cfg.gfc);
    tokenizer_ = std::make_unique<TiledTokenizer>(ps, "tok/", cfg.tokenizer, init_rng);
    if (cfg.extractor == "tiled") {
      extractor_ = tokenizer_.get();
    } else if (cfg.extractor == "pooled") {
      pooled_ = std::make_unique<PooledPatchExtractor>(ps, "tok/pooled/", cfg.tokenizer,
                                                       init_rng);
      extractor_ = pooled_.get();
    } else {
      throw ConfigError("model: unknown extractor '" + cfg.extractor + "'");
    }
  }

  // Batched conditioning tensors from the per-item records.
  struct Conds {
    Var<float> mask, x0_masked, pose, densepose;
    std::vector<Var<float>> thumb_tokens, full_tokens;
  };

  Conds build_conds(const std::vector<const Sample*>& samples) {
    Conds c;
    std::vector<Var<float>> ms, xs, ps, ds;
    for (const Sample* s : samples) {
      ms.push_back(as_batch(s->mask));
      xs.push_back(as_batch(s->masked_person));
      ps.push_back(as_batch(s->pose));
      ds.push_back(as_batch(s->densepose));
      GarmentTokensVar tok = extractor_->encode(s->garment);
      c.thumb_tokens.push_back(tok.thumb_tokens);
      c.full_tokens.push_back(tok.combined);
    }
    c.mask = cat(ms);
    c.x0_masked = cat(xs);
    c.pose = cat(ps);
    c.densepose = cat(ds);
    return c;
  }

  // Backbone alone (no control vectors).
  Var<float> backbone_forward(const Var<float>& x_t, const std::vector<const Sample*>& samples,
                              const std::vector<int>& ts) {
    Conds c = build_conds(samples);
    return backbone_.fwd(x_t, c.mask, c.x0_masked, c.thumb_tokens, ts, nullptr);
  }

  ControlVectorsVar gfc_forward(const Var<float>& x_t, const std::vector<const Sample*>& samples,
                                const std::vector<int>& ts) {
    Conds c = build_conds(samples);
    return gfc_.fwd(x_t, c.mask, c.x0_masked, c.pose, c.densepose, c.full_tokens, ts,
                    cfg_.lambda, cfg_.hybrid_enabled);
  }

  // Combined pass; with gfc disabled this is the backbone alone.
  Var<float> predict(const Var<float>& x_t, const std::vector<const Sample*>& samples,
                     const std::vector<int>& ts) override {
    Conds c = build_conds(samples);
    if (!cfg_.gfc_enabled)
      return backbone_.fwd(x_t, c.mask, c.x0_masked, c.thumb_tokens, ts, nullptr);
    ControlVectorsVar cv = gfc_.fwd(x_t, c.mask, c.x0_masked, c.pose, c.densepose, c.full_tokens,
                                    ts, cfg_.lambda, cfg_.hybrid_enabled);
    return backbone_.fwd(x_t, c.mask, c.x0_masked, c.thumb_tokens, ts, &cv);
  }

  ParamStore<float>& params() { return *ps_; }
  const ModelConfig& config() const { return cfg_; }
  ModelConfig& config() { return cfg_; }
  BackboneUNet& backbone() { return backbone_; }
  GfcBranch& gfc() { return gfc_; }
  TiledTokenizer& tokenizer() { return *tokenizer_; }
  GarmentExtractor& extractor() { return *extractor_; }

  void set_lambda(double l) {
    if (l < 0.0 || l > 1.5) throw ConfigError("model: lambda outside [0, 1.5]");
    cfg_.lambda = l;
  }
  void set_hybrid(bool h) { cfg_.hybrid_enabled = h; }
  void set_gfc_enabled(bool g) { cfg_.gfc_enabled = g; }

 private:
  static Var<float> as_batch(const Tensor<float>& t) {
    // [C,H,W] -> [1,C,H,W]
    return Var<float>::constant(
        Tensor<float>({1, t.shape[0], t.shape[1], t.shape[2]}, t.data));
  }
  static Var<float> cat(std::vector<Var<float>>& v) { return v.size() == 1 ? v[0] : concat0(v); }

  ParamStore<float>* ps_;
  ModelConfig cfg_;
  BackboneUNet backbone_;
  GfcBranch gfc_;
  std::unique_ptr<TiledTokenizer> tokenizer_;
  std::unique_ptr<PooledPatchExtractor> pooled_;
  GarmentExtractor* extractor_ = nullptr;
};

// Bitwise check of every backbone/ parameter against a reference checkpoint.
inline FrozenReport assert_frozen(const ParamStore<float>& ps, const std::string& ckpt_path) {
  return compare_checkpoint(ckpt_path, ps, "backbone/");
}

}  // namespace dhvton
