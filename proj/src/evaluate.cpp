#include "dhvton/evaluate.hpp"

namespace dhvton {

MetricReport evaluate(const SynthDataset& ds, size_t begin, size_t end, TryOnGenerator& gen,
                      const FeatureEncoder& enc, EvalSetting setting, int kid_subset_size,
                      int kid_n_subsets, uint64_t kid_seed) {
  if (end > ds.size() || begin >= end) throw ConfigError("evaluate: bad index range");

  std::vector<Tensor<float>> real_feats, gen_feats;
  double ssim_acc = 0, lpips_acc = 0;
  int ok = 0, failed = 0;

  for (size_t i = begin; i < end; ++i) {
    Sample conds = setting == EvalSetting::Paired ? ds.get(i) : ds.unpaired(i);
    Tensor<float> img;
    try {
      img = gen.generate(conds, (uint64_t)i);
    } catch (const std::exception&) {
      ++failed;
      continue;
    }
    const Sample& truth = ds.get(i);
    real_feats.push_back(enc.feature_vector(truth.person));
    gen_feats.push_back(enc.feature_vector(img));
    if (setting == EvalSetting::Paired) {
      ssim_acc += ssim(to_unit_range(img), to_unit_range(truth.person));
      lpips_acc += lpips_proxy(img, truth.person, enc);
    }
    ++ok;
  }
  if (ok < 2) throw DataError("evaluate: fewer than 2 generated images (" +
                              std::to_string(failed) + " failures)");

  auto stack = [](const std::vector<Tensor<float>>& v) {
    Tensor<float> m({(int64_t)v.size(), v[0].numel()});
    for (size_t r = 0; r < v.size(); ++r)
      std::copy(v[r].data.begin(), v[r].data.end(), m.data.begin() + (int64_t)r * v[0].numel());
    return m;
  };
  Tensor<float> fr = stack(real_feats), fg = stack(gen_feats);

  MetricReport rep;
  rep.setting = setting;
  rep.n_images = ok;
  rep.n_failed = failed;
  rep.fid = fid(fr, fg);
  int subset = std::min(kid_subset_size, ok);
  rep.kid = kid(fr, fg, subset, kid_n_subsets, SeededRng(kid_seed, stream_id(9)));
  if (setting == EvalSetting::Paired) {
    rep.ssim = ssim_acc / ok;
    rep.lpips = lpips_acc / ok;
  }
  return rep;
}

}  // namespace dhvton
