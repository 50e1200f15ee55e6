#pragma once

#include "dhvton/config.hpp"
#include "dhvton/dataset.hpp"
#include "dhvton/denoiser.hpp"
#include "dhvton/optimizer.hpp"

#include <memory>
#include <string>

namespace dhvton {

// RNG stream purposes (seed-level namespacing; synthdata owns 1..3).
constexpr uint64_t kStreamInit = 4;
constexpr uint64_t kStreamBatch = 5;
constexpr uint64_t kStreamNoise = 6;
constexpr uint64_t kStreamSample = 7;  // per-item generation streams
constexpr uint64_t kStreamT = 8;
constexpr uint64_t kStreamKid = 9;

struct TrainOutputs {
  std::vector<double> loss_a, loss_b;
  std::string run_dir;
  std::string phase_a_ckpt;
  std::string final_ckpt;
  std::string loss_log;
  FrozenReport frozen;
};

// Two-phase training session: phase A pretrains the backbone (+tokenizer)
// alone, which then freezes; phase B trains the control branch and hybrid
// projections against the frozen backbone, with the freeze checked bitwise.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);

  // Full run into run_dir: config snapshot, loss log, checkpoints.
  TrainOutputs run(const std::string& run_dir);

  // Pieces (used by the sweep and the acceptance suite).
  double train_step(int phase_id, int step, AdamW<float>& opt);
  std::vector<double> train_phase(int phase_id, int steps, AdamW<float>& opt,
                                  std::ostream* log = nullptr);
  void freeze_backbone();

  AdamW<float> make_phase_a_optimizer();
  AdamW<float> make_phase_b_optimizer();

  RunConfig& config() { return cfg_; }
  TryOnModel& model() { return *model_; }
  ParamStore<float>& store() { return *store_; }
  SynthDataset& data() { return *data_; }
  const NoiseSchedule& schedule() const { return sched_; }
  size_t train_size() const { return (size_t)cfg_.dataset_size; }

 private:
  RunConfig cfg_;
  NoiseSchedule sched_;
  std::unique_ptr<ParamStore<float>> store_;
  std::unique_ptr<TryOnModel> model_;
  std::unique_ptr<SynthDataset> data_;
};

}  // namespace dhvton
