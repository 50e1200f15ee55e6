#include "dhvton/config.hpp"

#include <json.hpp>

#include <fstream>

using nlohmann::json;

namespace dhvton {

void RunConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.5)
    throw ConfigError("config: lambda " + std::to_string(lambda) + " outside [0, 1.5]");
  if (height < 16 || width < 16) throw ConfigError("config: resolution too small");
  if (height % 4 != 0 || width % 4 != 0)
    throw ConfigError("config: resolution must be divisible by 4 for the UNet levels");
  if (T < 1) throw ConfigError("config: T must be >= 1");
  if (!(beta_start > 0) || !(beta_start <= beta_end) || !(beta_end < 1))
    throw ConfigError("config: invalid beta range");
  if (tile_px % patch_px != 0) throw ConfigError("config: patch_px must divide tile_px");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (dataset_size < 2) throw ConfigError("config: dataset_size must be >= 2");
  if (extractor != "tiled" && extractor != "pooled")
    throw ConfigError("config: unknown extractor '" + extractor + "'");
  if (phase_a_steps < 0 || phase_b_steps < 0) throw ConfigError("config: negative step count");
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s;
  s.height = height;
  s.width = width;
  s.channels = channels;
  s.keypoints = keypoints;
  s.parts = parts;
  return s;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.backbone.img_channels = channels;
  m.backbone.base_channels = base_channels;
  m.backbone.channel_multipliers = channel_multipliers;
  m.backbone.attention_levels =
      std::set<int>(attention_levels.begin(), attention_levels.end());
  m.backbone.time_embed_dim = time_embed_dim;
  m.backbone.token_dim = token_dim;
  m.backbone.out_gain = (float)out_gain;
  m.backbone.lr_gain = (float)lr_gain;
  m.gfc.pose_channels = keypoints;
  m.gfc.densepose_channels = parts;
  m.gfc.zero_init = zero_init;
  m.gfc.control_gain = (float)control_gain;
  m.tokenizer.tile_px = tile_px;
  m.tokenizer.patch_px = patch_px;
  m.tokenizer.max_tiles = max_tiles;
  m.tokenizer.channels = channels;
  m.tokenizer.token_dim = token_dim;
  m.tokenizer.hidden_dim = token_hidden;
  m.tokenizer.lr_gain = (float)lr_gain;
  m.gfc_enabled = gfc_enabled;
  m.hybrid_enabled = hybrid_enabled;
  m.lambda = lambda;
  m.extractor = extractor;
  return m;
}

namespace {

json to_json(const RunConfig& c) {
  return json{{"resolution", {{"height", c.height}, {"width", c.width}}},
              {"channels", c.channels},
              {"keypoints", c.keypoints},
              {"parts", c.parts},
              {"dataset_size", c.dataset_size},
              {"holdout", c.holdout},
              {"T", c.T},
              {"beta_start", c.beta_start},
              {"beta_end", c.beta_end},
              {"lambda", c.lambda},
              {"tile_px", c.tile_px},
              {"patch_px", c.patch_px},
              {"max_tiles", c.max_tiles},
              {"token_dim", c.token_dim},
              {"token_hidden", c.token_hidden},
              {"extractor", c.extractor},
              {"base_channels", c.base_channels},
              {"channel_multipliers", c.channel_multipliers},
              {"attention_levels", c.attention_levels},
              {"time_embed_dim", c.time_embed_dim},
              {"out_gain", c.out_gain},
              {"control_gain", c.control_gain},
              {"lr_gain", c.lr_gain},
              {"zero_init", c.zero_init},
              {"hybrid_enabled", c.hybrid_enabled},
              {"gfc_enabled", c.gfc_enabled},
              {"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"batch_size", c.batch_size},
              {"phase_a_steps", c.phase_a_steps},
              {"phase_b_steps", c.phase_b_steps},
              {"freeze_encoder", c.freeze_encoder},
              {"checkpoint_every", c.checkpoint_every},
              {"seed", c.seed},
              {"eval_pairs", c.eval_pairs},
              {"kid_subset_size", c.kid_subset_size},
              {"kid_n_subsets", c.kid_n_subsets},
              {"output_dir", c.output_dir}};
}

RunConfig from_json(const json& j) {
  RunConfig c;
  if (j.contains("resolution")) {
    c.height = j["resolution"].value("height", c.height);
    c.width = j["resolution"].value("width", c.width);
  }
  c.channels = j.value("channels", c.channels);
  c.keypoints = j.value("keypoints", c.keypoints);
  c.parts = j.value("parts", c.parts);
  c.dataset_size = j.value("dataset_size", c.dataset_size);
  c.holdout = j.value("holdout", c.holdout);
  c.T = j.value("T", c.T);
  c.beta_start = j.value("beta_start", c.beta_start);
  c.beta_end = j.value("beta_end", c.beta_end);
  c.lambda = j.value("lambda", c.lambda);
  c.tile_px = j.value("tile_px", c.tile_px);
  c.patch_px = j.value("patch_px", c.patch_px);
  c.max_tiles = j.value("max_tiles", c.max_tiles);
  c.token_dim = j.value("token_dim", c.token_dim);
  c.token_hidden = j.value("token_hidden", c.token_hidden);
  c.extractor = j.value("extractor", c.extractor);
  c.base_channels = j.value("base_channels", c.base_channels);
  c.channel_multipliers = j.value("channel_multipliers", c.channel_multipliers);
  c.attention_levels = j.value("attention_levels", c.attention_levels);
  c.time_embed_dim = j.value("time_embed_dim", c.time_embed_dim);
  c.out_gain = j.value("out_gain", c.out_gain);
  c.control_gain = j.value("control_gain", c.control_gain);
  c.lr_gain = j.value("lr_gain", c.lr_gain);
  c.zero_init = j.value("zero_init", c.zero_init);
  c.hybrid_enabled = j.value("hybrid_enabled", c.hybrid_enabled);
  c.gfc_enabled = j.value("gfc_enabled", c.gfc_enabled);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.phase_a_steps = j.value("phase_a_steps", c.phase_a_steps);
  c.phase_b_steps = j.value("phase_b_steps", c.phase_b_steps);
  c.freeze_encoder = j.value("freeze_encoder", c.freeze_encoder);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.seed = j.value("seed", c.seed);
  c.eval_pairs = j.value("eval_pairs", c.eval_pairs);
  c.kid_subset_size = j.value("kid_subset_size", c.kid_subset_size);
  c.kid_n_subsets = j.value("kid_n_subsets", c.kid_n_subsets);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.validate();
  return c;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON");
  return from_json(j);
}

std::string config_to_json_text(const RunConfig& cfg) { return to_json(cfg).dump(2); }

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

void save_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw DataError("config: cannot open for write: " + path);
  os << config_to_json_text(cfg) << "\n";
}

std::vector<std::string> config_diff(const RunConfig& a, const RunConfig& b) {
  json ja = to_json(a), jb = to_json(b);
  std::vector<std::string> keys;
  for (auto& [k, v] : ja.items())
    if (jb.at(k) != v) keys.push_back(k + ": " + v.dump() + " vs " + jb.at(k).dump());
  return keys;
}

}  // namespace dhvton
