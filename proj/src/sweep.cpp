#include "dhvton/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace dhvton {

std::vector<double> default_lambda_values() { return {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}; }

SweepResult sweep_lambda(const RunConfig& base, const std::vector<double>& values,
                         const std::string& run_dir) {
  for (double v : values)
    if (v < 0.0 || v > 1.5)
      throw ConfigError("sweep: lambda " + std::to_string(v) + " outside [0, 1.5]");

  fs::create_directories(run_dir);
  Trainer trainer(base);
  save_config((fs::path(run_dir) / "config.json").string(), base);

  // Shared phase A, snapshotted so every row restarts from identical state.
  trainer.model().set_gfc_enabled(false);
  {
    AdamW<float> opt = trainer.make_phase_a_optimizer();
    trainer.train_phase(0, base.phase_a_steps, opt);
  }
  std::string snap = (fs::path(run_dir) / "sweep_base.dhvt").string();
  save_checkpoint(snap, trainer.store());
  trainer.freeze_backbone();

  size_t eval_begin = trainer.train_size();
  size_t eval_end = eval_begin + (size_t)base.eval_pairs;

  auto run_row = [&](bool hybrid, double lambda) {
    load_checkpoint(snap, trainer.store());
    trainer.model().set_hybrid(hybrid);
    trainer.model().set_lambda(hybrid ? lambda : 0.0);
    trainer.model().set_gfc_enabled(true);
    {
      AdamW<float> opt = trainer.make_phase_b_optimizer();
      trainer.train_phase(1, base.phase_b_steps, opt);
    }
    SweepRow row;
    row.hybrid = hybrid;
    row.lambda = lambda;
    ModelGenerator gen(trainer.model(), trainer.schedule(), base.seed);
    const FeatureEncoder& enc = trainer.model().tokenizer();
    row.paired = evaluate(trainer.data(), eval_begin, eval_end, gen, enc, EvalSetting::Paired,
                          base.kid_subset_size, base.kid_n_subsets, base.seed);
    row.unpaired = evaluate(trainer.data(), eval_begin, eval_end, gen, enc,
                            EvalSetting::Unpaired, base.kid_subset_size, base.kid_n_subsets,
                            base.seed);
    return row;
  };

  SweepResult result;
  result.rows.push_back(run_row(false, 0.0));
  for (double v : values) result.rows.push_back(run_row(true, v));
  return result;
}

std::string sweep_table(const SweepResult& r) {
  std::ostringstream os;
  os << "# hybrid-attention lambda sweep; KID raw scale (not x100)\n";
  os << std::setw(7) << "hybrid" << std::setw(8) << "lambda" << " |" << std::setw(9)
     << "SSIM↑" << std::setw(10) << "FID↓" << std::setw(10) << "KID↓"
     << std::setw(10) << "LPIPS↓" << " |" << std::setw(10) << "FID↓" << std::setw(10)
     << "KID↓" << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& row : r.rows) {
    os << std::setw(7) << (row.hybrid ? "v" : "x");
    if (row.hybrid)
      os << std::setw(8) << std::setprecision(2) << row.lambda << std::setprecision(4);
    else
      os << std::setw(8) << "-";
    os << " |" << std::setw(8) << (row.paired.ssim ? *row.paired.ssim : 0.0) << std::setw(10)
       << row.paired.fid << std::setw(10) << row.paired.kid << std::setw(10)
       << (row.paired.lpips ? *row.paired.lpips : 0.0) << " |" << std::setw(10)
       << row.unpaired.fid << std::setw(10) << row.unpaired.kid << "\n";
  }
  return os.str();
}

std::string sweep_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j;
    j["hybrid"] = row.hybrid;
    if (row.hybrid) j["lambda"] = row.lambda;
    j["paired"] = nlohmann::json::parse(report_json(row.paired));
    j["unpaired"] = nlohmann::json::parse(report_json(row.unpaired));
    rows.push_back(j);
  }
  return nlohmann::json{{"kid_scale", "raw"}, {"rows", rows}}.dump(2);
}

}  // namespace dhvton
