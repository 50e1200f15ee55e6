#pragma once

#include "dhvton/dataset.hpp"
#include "dhvton/diffusion.hpp"
#include "dhvton/metrics.hpp"

namespace dhvton {

struct TryOnGenerator {
  virtual ~TryOnGenerator() = default;
  virtual Tensor<float> generate(const Sample& conds, uint64_t item) = 0;
};

// Production path: ancestral sampling with a per-item RNG stream.
class ModelGenerator : public TryOnGenerator {
 public:
  ModelGenerator(EpsModel& model, NoiseSchedule sched, uint64_t seed)
      : model_(&model), sched_(std::move(sched)), seed_(seed) {}
  Tensor<float> generate(const Sample& conds, uint64_t item) override {
    return sample_loop(*model_, conds, sched_, SeededRng(seed_, stream_id(7, item)));
  }

 private:
  EpsModel* model_;
  NoiseSchedule sched_;
  uint64_t seed_;
};

// Self-test oracle: returns the ground truth untouched.
struct OracleGenerator : TryOnGenerator {
  Tensor<float> generate(const Sample& conds, uint64_t) override { return conds.person; }
};

// Runs the generator over dataset indices [begin, end) and assembles the
// metric suite for the setting: paired compares against ground truth with all
// four metrics; unpaired swaps in the deranged garment and reports only the
// distribution metrics. Per-item generation failures are skipped and counted.
MetricReport evaluate(const SynthDataset& ds, size_t begin, size_t end, TryOnGenerator& gen,
                      const FeatureEncoder& enc, EvalSetting setting, int kid_subset_size,
                      int kid_n_subsets, uint64_t kid_seed);

}  // namespace dhvton
