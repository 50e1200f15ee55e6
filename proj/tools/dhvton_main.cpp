#include "dhvton/evaluate.hpp"
#include "dhvton/gradcheck_suite.hpp"
#include "dhvton/image_io.hpp"
#include "dhvton/sweep.hpp"
#include "dhvton/trainer.hpp"
#include "dhvton/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dhvton;

namespace {

// Exit codes: 0 success, 1 usage, 2 validation failure, 3 runtime error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

RunConfig effective_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : load_config(config_path);
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, bool export_images) {
  RunConfig cfg = effective_config(config_path);
  cfg.validate();
  fs::create_directories(out_dir);
  save_config((fs::path(out_dir) / "config.json").string(), cfg);

  SplitManifest split = make_split(cfg.dataset_size + cfg.holdout, cfg.seed);
  std::string manifest = (fs::path(out_dir) / "manifest.jsonl").string();
  write_manifest(manifest, split);
  std::cout << "manifest: " << manifest << " (" << split.pairs.size() << " pairs)\n";

  if (export_images) {
    for (const char* d : {"image", "cloth", "agnostic-mask", "pose", "densepose"})
      fs::create_directories(fs::path(out_dir) / d);
    SynthConfig sc = cfg.synth_config();
    for (const auto& p : split.pairs) {
      Sample s = gen_sample(p.person_seed, p.garment_seed, sc);
      char name[32];
      std::snprintf(name, sizeof(name), "%05d", p.index);
      write_png((fs::path(out_dir) / "image" / (std::string(name) + ".png")).string(),
                to_u8(s.person));
      write_png((fs::path(out_dir) / "cloth" / (std::string(name) + ".png")).string(),
                to_u8(s.garment));
      Tensor<float> m = s.mask;
      for (auto& v : m.data) v = v * 2.0f - 1.0f;  // {0,1} -> [-1,1] for PNG export
      write_png((fs::path(out_dir) / "agnostic-mask" / (std::string(name) + ".png")).string(),
                to_u8(m));
      // First three pose planes / part indices as gray composites.
      Tensor<float> pose3({3, s.pose.shape[1], s.pose.shape[2]});
      for (int64_t c = 0; c < 3 && c < s.pose.shape[0]; ++c)
        for (int64_t i = 0; i < s.pose.shape[1] * s.pose.shape[2]; ++i)
          pose3.data[(size_t)(c * s.pose.shape[1] * s.pose.shape[2] + i)] =
              s.pose.data[(size_t)(c * s.pose.shape[1] * s.pose.shape[2] + i)] * 2.0f - 1.0f;
      write_png((fs::path(out_dir) / "pose" / (std::string(name) + ".png")).string(),
                to_u8(pose3));
      Tensor<float> dp({1, s.densepose.shape[1], s.densepose.shape[2]});
      int64_t hw = s.densepose.shape[1] * s.densepose.shape[2];
      for (int64_t i = 0; i < hw; ++i) {
        float v = 0;
        for (int64_t c = 0; c < s.densepose.shape[0]; ++c)
          if (s.densepose.data[(size_t)(c * hw + i)] == 1.0f) v = (float)(c + 1);
        dp[i] = v / (float)s.densepose.shape[0] * 2.0f - 1.0f;
      }
      write_png((fs::path(out_dir) / "densepose" / (std::string(name) + ".png")).string(),
                to_u8(dp));
    }
    std::cout << "exported " << split.pairs.size() << " records under " << out_dir << "\n";
  }
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& resume_dir) {
  RunConfig cfg = effective_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  if (!resume_dir.empty()) {
    RunConfig prev = load_config((fs::path(resume_dir) / "config.json").string());
    std::vector<std::string> diff = config_diff(prev, cfg);
    // output_dir may legitimately differ between the original run and a resume
    diff.erase(std::remove_if(diff.begin(), diff.end(),
                              [](const std::string& k) { return k.rfind("output_dir", 0) == 0; }),
               diff.end());
    if (!diff.empty()) {
      std::cerr << "refusing to resume " << resume_dir << ": config mismatch\n";
      for (const auto& d : diff) std::cerr << "  " << d << "\n";
      return kExitValidation;
    }
    Trainer trainer(cfg);
    load_checkpoint((fs::path(resume_dir) / "checkpoints" / "final.dhvt").string(),
                    trainer.store());
    trainer.freeze_backbone();
    trainer.model().set_gfc_enabled(cfg.gfc_enabled);
    fs::create_directories(fs::path(cfg.output_dir));
    std::ofstream log((fs::path(cfg.output_dir) / "loss_log.jsonl").string());
    AdamW<float> opt = trainer.make_phase_b_optimizer();
    trainer.train_phase(1, cfg.phase_b_steps, opt, &log);
    save_checkpoint((fs::path(cfg.output_dir) / "final.dhvt").string(), trainer.store());
    std::cout << "resumed phase B for " << cfg.phase_b_steps << " steps\n";
    return kExitOk;
  }

  Trainer trainer(cfg);
  TrainOutputs out = trainer.run(cfg.output_dir);
  std::cout << "run dir: " << out.run_dir << "\n";
  std::cout << "phase A steps: " << out.loss_a.size() << ", phase B steps: " << out.loss_b.size()
            << "\n";
  std::cout << "frozen backbone check: " << (out.frozen.pass ? "pass" : "FAIL") << " ("
            << out.frozen.compared << " parameters)\n";
  std::cout << "final checkpoint: " << out.final_ckpt << "\n";
  return kExitOk;
}

int cmd_sample(const std::string& config_path, const std::string& ckpt,
               const std::string& out_dir, int n) {
  RunConfig cfg = effective_config(config_path);
  cfg.validate();
  fs::create_directories(out_dir);
  Trainer trainer(cfg);
  if (!ckpt.empty()) load_checkpoint(ckpt, trainer.store());
  trainer.model().set_gfc_enabled(cfg.gfc_enabled);

  ModelGenerator gen(trainer.model(), trainer.schedule(), cfg.seed);
  std::vector<Tensor<float>> imgs;
  for (int i = 0; i < n; ++i) {
    const Sample& conds = trainer.data().get((size_t)(cfg.dataset_size + i) %
                                             trainer.data().size());
    Tensor<float> img = gen.generate(conds, (uint64_t)i);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%03d.png", i);
    write_png((fs::path(out_dir) / name).string(), to_u8(img));
    imgs.push_back(img);
  }
  write_png((fs::path(out_dir) / "sheet.png").string(),
            to_u8(make_grid(imgs, std::max(1, (int)std::ceil(std::sqrt((double)n))))));
  std::cout << "wrote " << n << " samples + sheet.png under " << out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt, const std::string& setting,
             const std::string& out_dir, bool oracle) {
  RunConfig cfg = effective_config(config_path);
  cfg.validate();
  if (setting != "paired" && setting != "unpaired")
    throw ConfigError("eval: setting must be 'paired' or 'unpaired'");
  EvalSetting es = setting == "paired" ? EvalSetting::Paired : EvalSetting::Unpaired;

  Trainer trainer(cfg);
  if (!ckpt.empty()) load_checkpoint(ckpt, trainer.store());
  trainer.model().set_gfc_enabled(cfg.gfc_enabled);

  std::unique_ptr<TryOnGenerator> gen;
  if (oracle)
    gen = std::make_unique<OracleGenerator>();
  else
    gen = std::make_unique<ModelGenerator>(trainer.model(), trainer.schedule(), cfg.seed);

  size_t begin = trainer.train_size();
  size_t end = begin + (size_t)cfg.eval_pairs;
  MetricReport rep = evaluate(trainer.data(), begin, end, *gen, trainer.model().tokenizer(), es,
                              cfg.kid_subset_size, cfg.kid_n_subsets, cfg.seed);

  std::string table = report_table(rep);
  std::cout << table;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / ("metrics_" + setting + ".json"))
        << report_json(rep) << "\n";
    std::ofstream(fs::path(out_dir) / ("metrics_" + setting + ".txt")) << table;
    std::cout << "report written under " << out_dir << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::vector<double> values) {
  RunConfig cfg = effective_config(config_path);
  cfg.validate();
  if (values.empty()) values = default_lambda_values();
  std::string dir = out_dir.empty() ? cfg.output_dir + "_sweep" : out_dir;
  SweepResult res = sweep_lambda(cfg, values, dir);
  std::string table = sweep_table(res);
  std::cout << table;
  std::ofstream(fs::path(dir) / "sweep.txt") << table;
  std::ofstream(fs::path(dir) / "sweep.json") << sweep_json(res) << "\n";
  std::cout << "sweep written under " << dir << "\n";
  return kExitOk;
}

int cmd_tile(const std::vector<std::string>& args, int tile_px, int max_tiles) {
  int w = 0, h = 0;
  if (args.size() == 1) {
    ImageU8 img = read_image(args[0]);
    w = img.width;
    h = img.height;
  } else if (args.size() >= 2) {
    w = std::stoi(args[0]);
    h = std::stoi(args[1]);
    if (args.size() >= 3) tile_px = std::stoi(args[2]);
    if (args.size() >= 4) max_tiles = std::stoi(args[3]);
  } else {
    throw ConfigError("tile: expected an image path or WIDTH HEIGHT [TILE_PX MAX_TILES]");
  }
  TileGrid g = select_grid(w, h, tile_px, max_tiles);
  std::cout << "grid " << g.cols << "x" << g.rows << ", resized " << g.resized_w << "x"
            << g.resized_h << ", " << g.n_tiles() << " tiles + thumbnail\n";
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      std::cout << "  tile " << r * g.cols + c << ": crop x=" << c * g.tile_px
                << " y=" << r * g.tile_px << " size " << g.tile_px << "x" << g.tile_px << "\n";
  std::cout << "  thumbnail: full image resized to " << g.tile_px << "x" << g.tile_px << "\n";
  return kExitOk;
}

int cmd_gradcheck(const std::vector<std::string>& only) {
  auto suite = standard_gradcheck_suite();
  int failures = 0, ran = 0;
  for (auto& c : suite) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.name) == only.end())
      continue;
    ++ran;
    GradReport r = c.run();
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << c.name
              << "  max_rel_err=" << r.max_rel_err;
    if (r.suspected_nondiff) std::cout << "  [suspected non-differentiable point]";
    if (!r.pass) std::cout << "  (" << r.worst << "; " << r.detail << ")";
    std::cout << "\n";
    if (!r.pass) ++failures;
  }
  if (ran == 0) throw ConfigError("grad-check: no matching case");
  std::cout << ran - failures << "/" << ran << " grad checks passed\n";
  return failures == 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - exemplar-inpainting try-on diffusion with a hybrid-attention garment "
               "control branch"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt, resume_dir, setting = "paired";
  bool export_images = true, oracle = false;
  int n_samples = 8, tile_px = 448, max_tiles = 6;
  std::vector<double> lambda_values;
  std::vector<std::string> tile_args, only_cases;

  auto* synth = app.add_subcommand("synth", "materialize the synthetic dataset + manifest");
  synth->add_option("--config", config_path, "run config JSON");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_flag("--export-images,!--no-export-images", export_images,
                  "also write image/cloth/mask/pose/densepose PNG folders");

  auto* train = app.add_subcommand("train", "two-phase training (backbone pretrain, freeze, "
                                            "GFC+ training)");
  train->add_option("--config", config_path, "run config JSON");
  train->add_option("--out", out_dir, "run directory (overrides config output_dir)");
  train->add_option("--resume", resume_dir, "resume phase B from an existing run directory");

  auto* sample = app.add_subcommand("sample", "generate try-on images from a checkpoint");
  sample->add_option("--config", config_path, "run config JSON");
  sample->add_option("--checkpoint", ckpt, "checkpoint file");
  sample->add_option("--out", out_dir, "output directory")->required();
  sample->add_option("-n,--n", n_samples, "number of images");

  auto* eval = app.add_subcommand("eval", "run the metric suite for a setting");
  eval->add_option("--config", config_path, "run config JSON");
  eval->add_option("--checkpoint", ckpt, "checkpoint file");
  eval->add_option("--setting", setting, "paired | unpaired");
  eval->add_option("--out", out_dir, "directory for metric reports");
  eval->add_flag("--oracle", oracle, "self-test: generator returns the ground truth");

  auto* sweep = app.add_subcommand("sweep-lambda", "hybrid-off row plus one row per lambda");
  sweep->add_option("--config", config_path, "run config JSON");
  sweep->add_option("--out", out_dir, "sweep output directory");
  sweep->add_option("--values", lambda_values, "lambda values (default 0.25..1.5)");

  auto* tile = app.add_subcommand("tile", "print the dynamic tiling grid for an image or size");
  tile->add_option("args", tile_args, "IMAGE | WIDTH HEIGHT [TILE_PX MAX_TILES]")
      ->expected(1, 4);
  tile->add_option("--tile-px", tile_px, "tile size in pixels");
  tile->add_option("--max-tiles", max_tiles, "maximum tile count");

  auto* gc = app.add_subcommand("grad-check", "finite-difference checks for all trainable ops");
  gc->add_option("--only", only_cases, "restrict to named cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, out_dir, export_images);
    if (train->parsed()) return cmd_train(config_path, out_dir, resume_dir);
    if (sample->parsed()) return cmd_sample(config_path, ckpt, out_dir, n_samples);
    if (eval->parsed()) return cmd_eval(config_path, ckpt, setting, out_dir, oracle);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, lambda_values);
    if (tile->parsed()) return cmd_tile(tile_args, tile_px, max_tiles);
    if (gc->parsed()) return cmd_gradcheck(only_cases);
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
