#pragma once

#include "dhvton/garment_encoder.hpp"
#include "dhvton/rng.hpp"
#include "dhvton/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhvton {

// ------------------------------------------------------------------- SSIM

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1=0.01,
// K2=0.03, dynamic range 1). Inputs are [C,H,W] in [0,1]; channels averaged.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

// Same, averaged only over window centers where mask[0,y,x] == 1.
double ssim_masked(const Tensor<float>& a, const Tensor<float>& b, const Tensor<float>& mask);

// [-1,1] -> [0,1] affine remap for the SSIM precondition.
Tensor<float> to_unit_range(const Tensor<float>& img);

// Crop to the mask's bounding box (plus pad, clamped).
Tensor<float> crop_mask_bbox(const Tensor<float>& img, const Tensor<float>& mask, int pad = 2);

// -------------------------------------------------------------------- FID

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}); the square root comes
// from eigendecompositions of symmetrized products. Eigenvalues below -1e-6
// raise DataError; small negatives clamp to 0.
double fid(const Tensor<float>& feats_a, const Tensor<float>& feats_b);

double fid_from_moments(const std::vector<double>& mu_a, const std::vector<double>& cov_a,
                        const std::vector<double>& mu_b, const std::vector<double>& cov_b,
                        int dim);

// -------------------------------------------------------------------- KID

// Unbiased MMD^2 with polynomial kernel (x.y/c + 1)^3, c = feature dimension,
// averaged over n_subsets seeded equal-size subsets (may be slightly
// negative). kid_subsets exposes the per-subset estimates.
double kid(const Tensor<float>& feats_a, const Tensor<float>& feats_b, int subset_size,
           int n_subsets, SeededRng rng);
std::vector<double> kid_subsets(const Tensor<float>& feats_a, const Tensor<float>& feats_b,
                                int subset_size, int n_subsets, SeededRng rng);

// ------------------------------------------------------------------ LPIPS

// Mean over encoder layers of the mean squared distance between
// unit-normalized feature rows. Requires >= 2 intermediate layers.
double lpips_proxy(const Tensor<float>& a, const Tensor<float>& b, const FeatureEncoder& enc);

// ----------------------------------------------------------------- report

enum class EvalSetting { Paired, Unpaired };

struct MetricReport {
  std::optional<double> ssim;   // paired only
  std::optional<double> lpips;  // paired only
  double fid = 0.0;
  double kid = 0.0;
  int n_images = 0;
  int n_failed = 0;
  EvalSetting setting = EvalSetting::Paired;
};

std::string report_json(const MetricReport& r);
// Aligned text table; paired column order SSIM^ FID_ KID_ LPIPS_, unpaired
// FID_ KID_. KID is reported raw (not x100), noted in the header.
std::string report_table(const MetricReport& r);

}  // namespace dhvton
