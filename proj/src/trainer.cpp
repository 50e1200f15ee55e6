#include "dhvton/trainer.hpp"

#include "dhvton/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace dhvton {

Trainer::Trainer(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  sched_ = cfg_.schedule();
  store_ = std::make_unique<ParamStore<float>>();
  SeededRng init_rng(cfg_.seed, stream_id(kStreamInit));
  model_ = std::make_unique<TryOnModel>(*store_, init_rng, cfg_.model_config());
  data_ = std::make_unique<SynthDataset>(make_split(cfg_.dataset_size + cfg_.holdout, cfg_.seed),
                                         cfg_.synth_config());
}

AdamW<float> Trainer::make_phase_a_optimizer() {
  return AdamW<float>(*store_, cfg_.adamw(), {"backbone/", "tok/"});
}

AdamW<float> Trainer::make_phase_b_optimizer() {
  return AdamW<float>(*store_, cfg_.adamw(), {"gfc/", "tok/"});
}

void Trainer::freeze_backbone() {
  store_->set_trainable_prefix("backbone/", false);
  if (cfg_.freeze_encoder) store_->set_trainable_prefix("tok/", false);
}

double Trainer::train_step(int phase_id, int step, AdamW<float>& opt) {
  SeededRng idx_rng(cfg_.seed, stream_id(kStreamBatch, (uint64_t)phase_id, (uint64_t)step));
  SeededRng t_rng(cfg_.seed, stream_id(kStreamT, (uint64_t)phase_id, (uint64_t)step));

  std::vector<const Sample*> batch;
  std::vector<int> ts;
  std::vector<Tensor<float>> epss;
  for (int b = 0; b < cfg_.batch_size; ++b) {
    size_t idx = (size_t)idx_rng.randint((uint64_t)train_size());
    const Sample& s = data_->get(idx);
    batch.push_back(&s);
    ts.push_back(1 + (int)t_rng.randint((uint64_t)cfg_.T));
    SeededRng eps_rng(cfg_.seed, stream_id(kStreamNoise, (uint64_t)phase_id,
                                           (uint64_t)(step * cfg_.batch_size + b)));
    epss.push_back(gaussian<float>(s.person.shape, eps_rng));
  }

  store_->zero_grad();
  Var<float> loss = training_loss_batch(*model_, batch, ts, epss, sched_);
  loss.backward();
  opt.step();
  return (double)loss.value()[0];
}

std::vector<double> Trainer::train_phase(int phase_id, int steps, AdamW<float>& opt,
                                         std::ostream* log) {
  std::vector<double> losses;
  const char* tag = phase_id == 0 ? "A" : "B";
  for (int s = 0; s < steps; ++s) {
    double l = train_step(phase_id, s, opt);
    losses.push_back(l);
    if (log) {
      nlohmann::json j = {{"phase", tag}, {"step", s}, {"loss", l}};
      (*log) << j.dump() << "\n";
    }
  }
  return losses;
}

TrainOutputs Trainer::run(const std::string& run_dir) {
  TrainOutputs out;
  out.run_dir = run_dir;
  fs::create_directories(fs::path(run_dir) / "checkpoints");

  // Config snapshot and seed/version record precede any computation.
  save_config((fs::path(run_dir) / "config.json").string(), cfg_);
  {
    std::ofstream info((fs::path(run_dir) / "run_info.json").string());
    info << nlohmann::json{{"version", kVersion}, {"seed", cfg_.seed}}.dump(2) << "\n";
  }

  out.loss_log = (fs::path(run_dir) / "loss_log.jsonl").string();
  std::ofstream log(out.loss_log);
  if (!log) throw DataError("trainer: cannot open loss log for write");

  // Phase A: backbone (+ tokenizer) alone.
  model_->set_gfc_enabled(false);
  {
    AdamW<float> opt = make_phase_a_optimizer();
    out.loss_a = train_phase(0, cfg_.phase_a_steps, opt, &log);
    if (cfg_.checkpoint_every > 0 && cfg_.phase_a_steps > 0)
      save_checkpoint((fs::path(run_dir) / "checkpoints" / "phase_a_end.dhvt").string(),
                      *store_);
  }
  out.phase_a_ckpt = (fs::path(run_dir) / "checkpoints" / "phase_a.dhvt").string();
  save_checkpoint(out.phase_a_ckpt, *store_);

  // Phase B: freeze, then train GFC+ / hybrid projections (+ tokenizer unless
  // frozen) with the control branch active.
  freeze_backbone();
  if (cfg_.gfc_enabled) {
    model_->set_gfc_enabled(true);
    AdamW<float> opt = make_phase_b_optimizer();
    for (int s = 0; s < cfg_.phase_b_steps; ++s) {
      double l = train_step(1, s, opt);
      out.loss_b.push_back(l);
      nlohmann::json j = {{"phase", "B"}, {"step", s}, {"loss", l}};
      log << j.dump() << "\n";
      if (cfg_.checkpoint_every > 0 && (s + 1) % cfg_.checkpoint_every == 0)
        save_checkpoint((fs::path(run_dir) / "checkpoints" /
                         ("step_" + std::to_string(s + 1) + ".dhvt"))
                            .string(),
                        *store_);
    }
    out.frozen = assert_frozen(*store_, out.phase_a_ckpt);
    if (!out.frozen.pass) {
      std::string names;
      for (const auto& n : out.frozen.mismatched) names += " " + n;
      throw DataError("trainer: frozen backbone drifted:" + names);
    }
  } else {
    out.frozen = assert_frozen(*store_, out.phase_a_ckpt);
  }

  out.final_ckpt = (fs::path(run_dir) / "checkpoints" / "final.dhvt").string();
  save_checkpoint(out.final_ckpt, *store_);
  return out;
}

}  // namespace dhvton
