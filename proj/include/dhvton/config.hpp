#pragma once

#include "dhvton/denoiser.hpp"
#include "dhvton/optimizer.hpp"
#include "dhvton/schedule.hpp"
#include "dhvton/synthdata.hpp"

#include <string>
#include <vector>

namespace dhvton {

// One canonical source of truth per run; serialized verbatim into the run
// directory before any computation happens.
struct RunConfig {
  // data
  int height = 64, width = 48, channels = 3;
  int keypoints = 8, parts = 5;
  int dataset_size = 200, holdout = 20;

  // diffusion (T=1000 is the training-target convention; toy runs use 50)
  int T = 1000;
  double beta_start = 1e-4, beta_end = 0.02;

  // hybrid attention + garment encoder
  double lambda = 1.0;
  int tile_px = 16, patch_px = 4, max_tiles = 6;
  int token_dim = 32, token_hidden = 64;
  std::string extractor = "tiled";  // or "pooled"

  // denoiser
  int base_channels = 16;
  std::vector<int> channel_multipliers = {1, 2, 4};
  std::vector<int> attention_levels = {2};
  int time_embed_dim = 64;
  double out_gain = 30.0, control_gain = 30.0, lr_gain = 30.0;
  bool zero_init = true;
  bool hybrid_enabled = true, gfc_enabled = true;

  // optimization
  double lr = 3e-5, weight_decay = 0.01, beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int batch_size = 2;
  int phase_a_steps = 400, phase_b_steps = 500;
  bool freeze_encoder = false;
  int checkpoint_every = 0;  // 0 = final checkpoints only
  uint64_t seed = 1234;

  // evaluation
  int eval_pairs = 20;
  int kid_subset_size = 10, kid_n_subsets = 10;

  std::string output_dir = "runs/out";

  void validate() const;
  SynthConfig synth_config() const;
  ModelConfig model_config() const;
  NoiseSchedule schedule() const { return make_schedule(T, beta_start, beta_end); }
  AdamWConfig adamw() const { return {lr, beta1, beta2, adam_eps, weight_decay}; }
};

RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& cfg);
RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& cfg);

// Keys whose values differ (for the resume-with-mismatched-config refusal).
std::vector<std::string> config_diff(const RunConfig& a, const RunConfig& b);

}  // namespace dhvton
