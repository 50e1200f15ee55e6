#pragma once

#include "dhvton/tensor.hpp"

#include <cstdint>

namespace dhvton {

// One paired try-on record. person is the ground truth the model denoises
// toward; masked_person is person with the garment region blanked
// (masked_person == person * (1 - mask), exactly).
struct Sample {
  Tensor<float> person;         // [C,H,W] in [-1,1]
  Tensor<float> garment;        // [C,Hg,Wg]
  Tensor<float> mask;           // [1,H,W] in {0,1}
  Tensor<float> masked_person;  // [C,H,W]
  Tensor<float> pose;           // [K,H,W] keypoint heatmaps
  Tensor<float> densepose;      // [P,H,W] one-hot part map (all-zero = background)
  uint64_t person_seed = 0;
  uint64_t garment_seed = 0;
  bool aux_synthesized = false;  // pose/densepose were filled with zeros on ingest
};

inline double mask_fraction(const Tensor<float>& mask) {
  double s = 0;
  for (float v : mask.data) s += v;
  return s / (double)mask.numel();
}

}  // namespace dhvton
