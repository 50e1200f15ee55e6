#pragma once

#include "dhvton/ops.hpp"
#include "dhvton/params.hpp"
#include "dhvton/tiling.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dhvton {

struct TokenizerConfig {
  int tile_px = 16;
  int patch_px = 4;
  int max_tiles = 6;
  int channels = 3;
  int token_dim = 32;
  int hidden_dim = 64;
  float lr_gain = 1.0f;  // function-preserving gain on the projection layers

  int patches_per_tile() const {
    int s = tile_px / patch_px;
    return s * s;
  }
  int patch_vec() const { return channels * patch_px * patch_px; }
};

// Where a tile token's patch came from in the resized source image.
struct TokenProvenance {
  int tile_index;  // row-major tile id; thumbnail tokens use -1
  int row, col;    // patch position inside the tile
};

// The fine-grained garment token sequence: per-tile patch tokens followed by
// thumbnail tokens, concatenated tile-major.
struct GarmentTokensVar {
  Var<float> tile_tokens;   // [n_t, c_g]
  Var<float> thumb_tokens;  // [n_th, c_g]
  Var<float> combined;      // [n_t + n_th, c_g]
  std::vector<TokenProvenance> provenance;  // tile tokens then thumbnail tokens
  TileGrid grid;
};

// Anything that can turn a garment image into the token sequence. Swapping
// the extractor is how the feature-extractor ablation slot is exercised.
struct GarmentExtractor {
  virtual ~GarmentExtractor() = default;
  virtual GarmentTokensVar encode(const Tensor<float>& img) = 0;
  virtual std::string name() const = 0;
  virtual int token_dim() const = 0;
};

// Feature pathway used by the perceptual metrics: intermediate activations of
// the thumbnail encoding plus a pooled whole-image feature vector.
struct FeatureEncoder {
  virtual ~FeatureEncoder() = default;
  virtual std::vector<Tensor<float>> features(const Tensor<float>& img) const = 0;
  virtual Tensor<float> feature_vector(const Tensor<float>& img) const = 0;
};

// Toy patch tokenizer: per tile, patches are flattened, linearly projected,
// run through a 2-layer MLP, then summed with learned patch-position and
// tile-index embeddings. The thumbnail shares all weights but carries the
// distinguished last tile-index slot.
class TiledTokenizer : public GarmentExtractor, public FeatureEncoder {
 public:
  TiledTokenizer() = default;
  TiledTokenizer(ParamStore<float>& ps, const std::string& prefix, const TokenizerConfig& cfg,
                 SeededRng& init_rng);

  GarmentTokensVar encode(const Tensor<float>& img) override;
  std::string name() const override { return "tiled"; }
  int token_dim() const override { return cfg_.token_dim; }

  std::vector<Tensor<float>> features(const Tensor<float>& img) const override;
  Tensor<float> feature_vector(const Tensor<float>& img) const override;

  const TokenizerConfig& config() const { return cfg_; }

 private:
  // Tokens for one tile_px x tile_px crop at the given tile-index slot.
  Var<float> encode_tile(const Tensor<float>& tile, int tile_slot) const;
  Tensor<float> patchify(const Tensor<float>& tile) const;

  ParamStore<float>* ps_ = nullptr;
  std::string p_;
  TokenizerConfig cfg_;
};

// Ablation extractor: same tiling geometry, but tokens are a fixed seeded
// linear projection of raw patches (no MLP, nothing trainable). Stands in for
// a frozen off-the-shelf encoder behind the same interface.
class PooledPatchExtractor : public GarmentExtractor {
 public:
  PooledPatchExtractor() = default;
  PooledPatchExtractor(ParamStore<float>& ps, const std::string& prefix,
                       const TokenizerConfig& cfg, SeededRng& init_rng);

  GarmentTokensVar encode(const Tensor<float>& img) override;
  std::string name() const override { return "pooled"; }
  int token_dim() const override { return cfg_.token_dim; }

 private:
  ParamStore<float>* ps_ = nullptr;
  std::string p_;
  TokenizerConfig cfg_;
};

inline TiledTokenizer::TiledTokenizer(ParamStore<float>& ps, const std::string& prefix,
                                      const TokenizerConfig& cfg, SeededRng& init_rng)
    : ps_(&ps), p_(prefix), cfg_(cfg) {
  if (cfg.tile_px % cfg.patch_px != 0)
    throw ConfigError("tokenizer: patch_px " + std::to_string(cfg.patch_px) +
                      " does not divide tile_px " + std::to_string(cfg.tile_px));
  int pv = cfg.patch_vec(), td = cfg.token_dim, hd = cfg.hidden_dim;
  float g = cfg.lr_gain;
  auto gained = [&](Tensor<float> t) { return g == 1.0f ? t : tscale(t, 1.0f / g); };
  ps.create(p_ + "proj/w", gained(init_tensor<float>({pv, td}, Init::XavierNormal, pv, init_rng)));
  ps.create(p_ + "proj/b", Tensor<float>::zeros({td}));
  ps.create(p_ + "mlp1/w", gained(init_tensor<float>({td, hd}, Init::XavierNormal, td, init_rng)));
  ps.create(p_ + "mlp1/b", Tensor<float>::zeros({hd}));
  ps.create(p_ + "mlp2/w", gained(init_tensor<float>({hd, td}, Init::XavierNormal, hd, init_rng)));
  ps.create(p_ + "mlp2/b", Tensor<float>::zeros({td}));
  ps.create(p_ + "pos_emb", init_tensor<float>({cfg.patches_per_tile(), td}, Init::XavierNormal,
                                               td, init_rng));
  ps.create(p_ + "tile_emb",
            init_tensor<float>({cfg.max_tiles + 1, td}, Init::XavierNormal, td, init_rng));
}

inline Tensor<float> TiledTokenizer::patchify(const Tensor<float>& tile) const {
  int n = cfg_.tile_px / cfg_.patch_px, pp = cfg_.patch_px;
  int64_t C = tile.shape[0];
  Tensor<float> out({(int64_t)n * n, (int64_t)cfg_.patch_vec()});
  for (int pr = 0; pr < n; ++pr)
    for (int pc = 0; pc < n; ++pc) {
      int64_t row = pr * n + pc, k = 0;
      for (int64_t c = 0; c < C; ++c)
        for (int y = 0; y < pp; ++y)
          for (int x = 0; x < pp; ++x)
            out.at(row, k++) = tile.at3(c, pr * pp + y, pc * pp + x);
    }
  return out;
}

inline Var<float> TiledTokenizer::encode_tile(const Tensor<float>& tile, int tile_slot) const {
  auto patches = Var<float>::constant(patchify(tile));
  auto& ps = *const_cast<ParamStore<float>*>(ps_);
  float g = cfg_.lr_gain;
  auto lin = [&](const Var<float>& x, const char* name) {
    Var<float> y = add_row_bias(matmul(x, ps.var(p_ + name + std::string("/w"))),
                                ps.var(p_ + name + std::string("/b")));
    return g == 1.0f ? y : scale(y, g);
  };
  Var<float> h = lin(patches, "proj");
  h = lin(silu(h), "mlp1");
  h = lin(silu(h), "mlp2");
  h = add(h, ps.var(p_ + "pos_emb"));
  std::vector<int64_t> idx((size_t)cfg_.patches_per_tile(), tile_slot);
  return add(h, embedding_rows(ps.var(p_ + "tile_emb"), idx));
}

inline GarmentTokensVar TiledTokenizer::encode(const Tensor<float>& img) {
  GarmentTokensVar out;
  TileGrid grid = select_grid((int)img.shape[2], (int)img.shape[1], cfg_.tile_px, cfg_.max_tiles);
  TileSet ts = tile_image(img, grid);
  out.grid = grid;

  int n = cfg_.tile_px / cfg_.patch_px;
  std::vector<Var<float>> tiles;
  for (size_t i = 0; i < ts.tiles.size(); ++i) {
    tiles.push_back(encode_tile(ts.tiles[i], (int)i));
    for (int pr = 0; pr < n; ++pr)
      for (int pc = 0; pc < n; ++pc) out.provenance.push_back({(int)i, pr, pc});
  }
  out.tile_tokens = tiles.size() == 1 ? tiles[0] : concat0(tiles);
  out.thumb_tokens = encode_tile(ts.thumbnail, cfg_.max_tiles);
  for (int pr = 0; pr < n; ++pr)
    for (int pc = 0; pc < n; ++pc) out.provenance.push_back({-1, pr, pc});
  out.combined = concat0<float>({out.tile_tokens, out.thumb_tokens});
  return out;
}

inline std::vector<Tensor<float>> TiledTokenizer::features(const Tensor<float>& img) const {
  NoGradGuard ng;
  Tensor<float> thumb = bilinear_resize(img, cfg_.tile_px, cfg_.tile_px);
  auto patches = Var<float>::constant(patchify(thumb));
  auto& ps = *const_cast<ParamStore<float>*>(ps_);
  float g = cfg_.lr_gain;
  auto lin = [&](const Var<float>& x, const char* name) {
    Var<float> y = add_row_bias(matmul(x, ps.var(p_ + name + std::string("/w"))),
                                ps.var(p_ + name + std::string("/b")));
    return g == 1.0f ? y : scale(y, g);
  };
  Var<float> h1 = lin(patches, "proj");
  Var<float> h2 = lin(silu(h1), "mlp1");
  Var<float> h3 = lin(silu(h2), "mlp2");
  return {h1.value(), h2.value(), h3.value()};
}

inline Tensor<float> TiledTokenizer::feature_vector(const Tensor<float>& img) const {
  NoGradGuard ng;
  Tensor<float> thumb = bilinear_resize(img, cfg_.tile_px, cfg_.tile_px);
  Var<float> tok = encode_tile(thumb, cfg_.max_tiles);
  const Tensor<float>& t = tok.value();
  Tensor<float> mean({t.shape[1]});
  for (int64_t r = 0; r < t.shape[0]; ++r)
    for (int64_t c = 0; c < t.shape[1]; ++c) mean[c] += t.at(r, c);
  for (auto& v : mean.data) v /= (float)t.shape[0];
  return mean;
}

inline PooledPatchExtractor::PooledPatchExtractor(ParamStore<float>& ps,
                                                  const std::string& prefix,
                                                  const TokenizerConfig& cfg, SeededRng& init_rng)
    : ps_(&ps), p_(prefix), cfg_(cfg) {
  if (cfg.tile_px % cfg.patch_px != 0)
    throw ConfigError("extractor: patch_px does not divide tile_px");
  int pv = cfg.patch_vec(), td = cfg.token_dim;
  ps.create(p_ + "fixed_proj/w", init_tensor<float>({pv, td}, Init::XavierNormal, pv, init_rng),
            /*trainable=*/false);
  ps.create(p_ + "fixed_tile_emb",
            init_tensor<float>({cfg.max_tiles + 1, td}, Init::XavierNormal, td, init_rng),
            /*trainable=*/false);
}

inline GarmentTokensVar PooledPatchExtractor::encode(const Tensor<float>& img) {
  GarmentTokensVar out;
  TileGrid grid = select_grid((int)img.shape[2], (int)img.shape[1], cfg_.tile_px, cfg_.max_tiles);
  TileSet ts = tile_image(img, grid);
  out.grid = grid;
  int n = cfg_.tile_px / cfg_.patch_px;
  int pp = cfg_.patch_px;
  auto patchify = [&](const Tensor<float>& tile) {
    Tensor<float> p({(int64_t)n * n, (int64_t)cfg_.patch_vec()});
    for (int pr = 0; pr < n; ++pr)
      for (int pc = 0; pc < n; ++pc) {
        int64_t row = pr * n + pc, k = 0;
        for (int64_t c = 0; c < tile.shape[0]; ++c)
          for (int y = 0; y < pp; ++y)
            for (int x = 0; x < pp; ++x) p.at(row, k++) = tile.at3(c, pr * pp + y, pc * pp + x);
      }
    return p;
  };
  auto encode_one = [&](const Tensor<float>& tile, int slot) {
    Var<float> h = matmul(Var<float>::constant(patchify(tile)), ps_->var(p_ + "fixed_proj/w"));
    std::vector<int64_t> idx((size_t)n * n, slot);
    return add(h, embedding_rows(ps_->var(p_ + "fixed_tile_emb"), idx));
  };
  std::vector<Var<float>> tiles;
  for (size_t i = 0; i < ts.tiles.size(); ++i) {
    tiles.push_back(encode_one(ts.tiles[i], (int)i));
    for (int pr = 0; pr < n; ++pr)
      for (int pc = 0; pc < n; ++pc) out.provenance.push_back({(int)i, pr, pc});
  }
  out.tile_tokens = tiles.size() == 1 ? tiles[0] : concat0(tiles);
  out.thumb_tokens = encode_one(ts.thumbnail, cfg_.max_tiles);
  for (int pr = 0; pr < n; ++pr)
    for (int pc = 0; pc < n; ++pc) out.provenance.push_back({-1, pr, pc});
  out.combined = concat0<float>({out.tile_tokens, out.thumb_tokens});
  return out;
}

}  // namespace dhvton
