#pragma once

#include "dhvton/rng.hpp"
#include "dhvton/sample.hpp"

#include <vector>

namespace dhvton {

struct SynthConfig {
  int height = 64;
  int width = 48;
  int channels = 3;
  int keypoints = 8;  // head, neck, shoulders, hands, hips
  int parts = 5;      // head, torso, left arm, right arm, legs
};

// Deterministic paired record: procedural body with seeded pose wearing the
// seeded garment texture, flat garment image, agnostic mask, keypoint
// heatmaps, body-part one-hot map. Bit-identical per (seeds, config).
Sample gen_sample(uint64_t person_seed, uint64_t garment_seed, const SynthConfig& cfg);

// The flat garment image alone; region_out (optional, [1,H,W]) receives the
// garment-shape indicator used by the texture-variance property.
Tensor<float> gen_garment_flat(uint64_t garment_seed, const SynthConfig& cfg,
                               Tensor<float>* region_out = nullptr);

struct SplitPair {
  int index = 0;
  uint64_t person_seed = 0;
  uint64_t garment_seed = 0;
  int unpaired_from = 0;  // derangement target: garment borrowed from this pair
};

struct SplitManifest {
  uint64_t seed = 0;
  std::vector<SplitPair> pairs;
};

// Paired list plus a seeded derangement for the unpaired setting.
SplitManifest make_split(int n_pairs, uint64_t seed);

}  // namespace dhvton
