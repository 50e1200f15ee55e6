#include "dhvton/metrics.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace dhvton {

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel_1d() {
  std::vector<double> k(kWin);
  double sum = 0;
  for (int i = 0; i < kWin; ++i) {
    double d = i - kWin / 2;
    k[(size_t)i] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += k[(size_t)i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable weighted local sums of img and img^2 products at valid centers.
struct LocalStats {
  int vh = 0, vw = 0;                  // valid-center grid size
  std::vector<double> mu_a, mu_b, saa, sbb, sab;
};

LocalStats local_stats(const Tensor<float>& a, const Tensor<float>& b, int64_t c) {
  static const std::vector<double> k = gaussian_kernel_1d();
  int64_t H = a.shape[1], W = a.shape[2];
  int r = kWin / 2;
  LocalStats st;
  st.vh = (int)(H - 2 * r);
  st.vw = (int)(W - 2 * r);
  if (st.vh <= 0 || st.vw <= 0)
    throw ShapeError("ssim: image smaller than the 11x11 window");

  // horizontal pass over full rows, then vertical pass at valid centers
  auto hpass = [&](auto&& f) {
    std::vector<double> tmp((size_t)(H * st.vw));
    for (int64_t y = 0; y < H; ++y)
      for (int64_t x = 0; x < st.vw; ++x) {
        double s = 0;
        for (int i = 0; i < kWin; ++i) s += k[(size_t)i] * f(y, x + i);
        tmp[(size_t)(y * st.vw + x)] = s;
      }
    std::vector<double> out((size_t)(st.vh * st.vw));
    for (int64_t y = 0; y < st.vh; ++y)
      for (int64_t x = 0; x < st.vw; ++x) {
        double s = 0;
        for (int i = 0; i < kWin; ++i) s += k[(size_t)i] * tmp[(size_t)((y + i) * st.vw + x)];
        out[(size_t)(y * st.vw + x)] = s;
      }
    return out;
  };

  st.mu_a = hpass([&](int64_t y, int64_t x) { return (double)a.at3(c, y, x); });
  st.mu_b = hpass([&](int64_t y, int64_t x) { return (double)b.at3(c, y, x); });
  st.saa = hpass([&](int64_t y, int64_t x) { return (double)a.at3(c, y, x) * a.at3(c, y, x); });
  st.sbb = hpass([&](int64_t y, int64_t x) { return (double)b.at3(c, y, x) * b.at3(c, y, x); });
  st.sab = hpass([&](int64_t y, int64_t x) { return (double)a.at3(c, y, x) * b.at3(c, y, x); });
  return st;
}

double ssim_at(const LocalStats& s, size_t i) {
  double ma = s.mu_a[i], mb = s.mu_b[i];
  double va = s.saa[i] - ma * ma;
  double vb = s.sbb[i] - mb * mb;
  double cov = s.sab[i] - ma * mb;
  return ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
         ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
}

Eigen::MatrixXd to_eigen(const Tensor<float>& f) {
  if (f.rank() != 2) throw ShapeError("features must be [n,c]");
  Eigen::MatrixXd m(f.shape[0], f.shape[1]);
  for (int64_t r = 0; r < f.shape[0]; ++r)
    for (int64_t c = 0; c < f.shape[1]; ++c) m((Eigen::Index)r, (Eigen::Index)c) = f.at(r, c);
  return m;
}

// Symmetric PSD square root; eigenvalues below -1e-6 are a data error, small
// negatives clamp to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
  if (eig.info() != Eigen::Success) throw DataError("fid: eigendecomposition failed");
  Eigen::VectorXd l = eig.eigenvalues();
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l[i] < -1e-6) throw DataError("fid: negative eigenvalue " + std::to_string(l[i]));
    l[i] = std::sqrt(std::max(0.0, l[i]));
  }
  return eig.eigenvectors() * l.asDiagonal() * eig.eigenvectors().transpose();
}

double fid_eigen(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                 const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b) {
  if (!mu_a.allFinite() || !cov_a.allFinite() || !mu_b.allFinite() || !cov_b.allFinite())
    throw DataError("fid: non-finite moments");
  double mean_term = (mu_a - mu_b).squaredNorm();
  Eigen::MatrixXd a_half = psd_sqrt(cov_a);
  Eigen::MatrixXd m = a_half * cov_b * a_half;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) throw DataError("fid: eigendecomposition failed");
  double tr_sqrt = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    double l = eig.eigenvalues()[i];
    if (l < -1e-6) throw DataError("fid: negative eigenvalue " + std::to_string(l));
    tr_sqrt += std::sqrt(std::max(0.0, l));
  }
  double v = mean_term + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt;
  if (v < -1e-3) throw DataError("fid: strongly negative value " + std::to_string(v));
  return std::max(0.0, v);
}

double poly_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double c) {
  double v = x.dot(y) / c + 1.0;
  return v * v * v;
}

}  // namespace

Tensor<float> to_unit_range(const Tensor<float>& img) {
  Tensor<float> out = img;
  for (auto& v : out.data) v = (v + 1.0f) * 0.5f;
  return out;
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
  check_same_shape(a, b, "ssim");
  if (a.rank() != 3) throw ShapeError("ssim: expected [C,H,W]");
  double acc = 0;
  int64_t count = 0;
  for (int64_t c = 0; c < a.shape[0]; ++c) {
    LocalStats st = local_stats(a, b, c);
    for (size_t i = 0; i < st.mu_a.size(); ++i) acc += ssim_at(st, i);
    count += (int64_t)st.mu_a.size();
  }
  return acc / (double)count;
}

double ssim_masked(const Tensor<float>& a, const Tensor<float>& b, const Tensor<float>& mask) {
  check_same_shape(a, b, "ssim");
  if (mask.rank() != 3 || mask.shape[0] != 1 || mask.shape[1] != a.shape[1] ||
      mask.shape[2] != a.shape[2])
    throw ShapeError("ssim_masked: mask must be [1,H,W] matching the images");
  int r = kWin / 2;
  double acc = 0;
  int64_t count = 0;
  for (int64_t c = 0; c < a.shape[0]; ++c) {
    LocalStats st = local_stats(a, b, c);
    for (int64_t y = 0; y < st.vh; ++y)
      for (int64_t x = 0; x < st.vw; ++x)
        if (mask.at3(0, y + r, x + r) == 1.0f) {
          acc += ssim_at(st, (size_t)(y * st.vw + x));
          ++count;
        }
  }
  if (count == 0) throw DataError("ssim_masked: mask selects no valid window centers");
  return acc / (double)count;
}

Tensor<float> crop_mask_bbox(const Tensor<float>& img, const Tensor<float>& mask, int pad) {
  int64_t H = img.shape[1], W = img.shape[2];
  int64_t y0 = H, y1 = -1, x0 = W, x1 = -1;
  for (int64_t y = 0; y < H; ++y)
    for (int64_t x = 0; x < W; ++x)
      if (mask.at3(0, y, x) == 1.0f) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
      }
  if (y1 < 0) throw DataError("crop_mask_bbox: empty mask");
  y0 = std::max<int64_t>(0, y0 - pad);
  x0 = std::max<int64_t>(0, x0 - pad);
  y1 = std::min(H - 1, y1 + pad);
  x1 = std::min(W - 1, x1 + pad);
  Tensor<float> out({img.shape[0], y1 - y0 + 1, x1 - x0 + 1});
  for (int64_t c = 0; c < img.shape[0]; ++c)
    for (int64_t y = y0; y <= y1; ++y)
      for (int64_t x = x0; x <= x1; ++x) out.at3(c, y - y0, x - x0) = img.at3(c, y, x);
  return out;
}

double fid(const Tensor<float>& feats_a, const Tensor<float>& feats_b) {
  Eigen::MatrixXd a = to_eigen(feats_a), b = to_eigen(feats_b);
  if (a.rows() < 2 || b.rows() < 2) throw ConfigError("fid: need at least 2 samples per set");
  if (a.cols() != b.cols()) throw ShapeError("fid: feature dimensions disagree");
  Eigen::VectorXd mu_a = a.colwise().mean(), mu_b = b.colwise().mean();
  Eigen::MatrixXd ca = a.rowwise() - mu_a.transpose();
  Eigen::MatrixXd cb = b.rowwise() - mu_b.transpose();
  Eigen::MatrixXd cov_a = ca.transpose() * ca / (double)(a.rows() - 1);
  Eigen::MatrixXd cov_b = cb.transpose() * cb / (double)(b.rows() - 1);
  return fid_eigen(mu_a, cov_a, mu_b, cov_b);
}

double fid_from_moments(const std::vector<double>& mu_a, const std::vector<double>& cov_a,
                        const std::vector<double>& mu_b, const std::vector<double>& cov_b,
                        int dim) {
  if ((int)mu_a.size() != dim || (int)mu_b.size() != dim ||
      (int)cov_a.size() != dim * dim || (int)cov_b.size() != dim * dim)
    throw ShapeError("fid_from_moments: moment sizes do not match dim");
  Eigen::VectorXd ma(dim), mb(dim);
  Eigen::MatrixXd sa(dim, dim), sb(dim, dim);
  for (int i = 0; i < dim; ++i) {
    ma[i] = mu_a[(size_t)i];
    mb[i] = mu_b[(size_t)i];
    for (int j = 0; j < dim; ++j) {
      sa(i, j) = cov_a[(size_t)(i * dim + j)];
      sb(i, j) = cov_b[(size_t)(i * dim + j)];
    }
  }
  return fid_eigen(ma, sa, mb, sb);
}

std::vector<double> kid_subsets(const Tensor<float>& feats_a, const Tensor<float>& feats_b,
                                int subset_size, int n_subsets, SeededRng rng) {
  Eigen::MatrixXd a = to_eigen(feats_a), b = to_eigen(feats_b);
  int n = (int)a.rows(), m = (int)b.rows();
  if (subset_size < 2) throw ConfigError("kid: subset_size must be >= 2");
  if (subset_size > std::min(n, m))
    throw ConfigError("kid: subset_size " + std::to_string(subset_size) +
                      " exceeds set sizes " + std::to_string(n) + "/" + std::to_string(m));
  if (n_subsets < 1) throw ConfigError("kid: n_subsets must be >= 1");
  double c = (double)a.cols();

  auto draw = [&](int total, int count) {
    std::vector<int> idx((size_t)total);
    for (int i = 0; i < total; ++i) idx[(size_t)i] = i;
    for (int i = 0; i < count; ++i)
      std::swap(idx[(size_t)i], idx[(size_t)(i + (int)rng.randint((uint64_t)(total - i)))]);
    idx.resize((size_t)count);
    return idx;
  };

  std::vector<double> out;
  for (int s = 0; s < n_subsets; ++s) {
    std::vector<int> ia = draw(n, subset_size), ib = draw(m, subset_size);
    // Gretton's unbiased estimator: h(i,j) summed over ordered pairs i != j.
    double acc = 0;
    for (int i = 0; i < subset_size; ++i)
      for (int j = 0; j < subset_size; ++j) {
        if (i == j) continue;
        const auto xi = a.row(ia[(size_t)i]), xj = a.row(ia[(size_t)j]);
        const auto yi = b.row(ib[(size_t)i]), yj = b.row(ib[(size_t)j]);
        acc += poly_kernel(xi.transpose(), xj.transpose(), c) +
               poly_kernel(yi.transpose(), yj.transpose(), c) -
               poly_kernel(xi.transpose(), yj.transpose(), c) -
               poly_kernel(xj.transpose(), yi.transpose(), c);
      }
    out.push_back(acc / ((double)subset_size * (subset_size - 1)));
  }
  return out;
}

double kid(const Tensor<float>& feats_a, const Tensor<float>& feats_b, int subset_size,
           int n_subsets, SeededRng rng) {
  std::vector<double> vals = kid_subsets(feats_a, feats_b, subset_size, n_subsets, rng);
  double s = 0;
  for (double v : vals) s += v;
  return s / (double)vals.size();
}

double lpips_proxy(const Tensor<float>& a, const Tensor<float>& b, const FeatureEncoder& enc) {
  std::vector<Tensor<float>> fa = enc.features(a), fb = enc.features(b);
  if (fa.size() < 2)
    throw ConfigError("lpips_proxy: encoder must expose at least 2 intermediate layers");
  if (fa.size() != fb.size()) throw ShapeError("lpips_proxy: layer count mismatch");

  auto unit_rows = [](const Tensor<float>& f) {
    Tensor<double> u({f.shape[0], f.shape[1]});
    for (int64_t r = 0; r < f.shape[0]; ++r) {
      double norm = 0;
      for (int64_t c = 0; c < f.shape[1]; ++c) norm += (double)f.at(r, c) * f.at(r, c);
      norm = std::sqrt(norm) + 1e-12;
      for (int64_t c = 0; c < f.shape[1]; ++c) u.at(r, c) = f.at(r, c) / norm;
    }
    return u;
  };

  double total = 0;
  for (size_t l = 0; l < fa.size(); ++l) {
    check_same_shape(fa[l], fb[l], "lpips_proxy layer");
    Tensor<double> ua = unit_rows(fa[l]), ub = unit_rows(fb[l]);
    double s = 0;
    for (int64_t i = 0; i < ua.numel(); ++i) {
      double d = ua[i] - ub[i];
      s += d * d;
    }
    total += s / (double)ua.numel();
  }
  return total / (double)fa.size();
}

std::string report_json(const MetricReport& r) {
  nlohmann::json j;
  j["setting"] = r.setting == EvalSetting::Paired ? "paired" : "unpaired";
  j["n_images"] = r.n_images;
  j["n_failed"] = r.n_failed;
  j["fid"] = r.fid;
  j["kid"] = r.kid;
  j["kid_scale"] = "raw";
  if (r.ssim) j["ssim"] = *r.ssim;
  if (r.lpips) j["lpips_proxy"] = *r.lpips;
  return j.dump(2);
}

std::string report_table(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "# " << (r.setting == EvalSetting::Paired ? "paired" : "unpaired") << " metrics over "
     << r.n_images << " images";
  if (r.n_failed) os << " (" << r.n_failed << " failed)";
  os << "; KID raw scale (not x100)\n";
  if (r.setting == EvalSetting::Paired) {
    os << std::setw(10) << "SSIM↑" << std::setw(12) << "FID↓" << std::setw(12)
       << "KID↓" << std::setw(12) << "LPIPS↓" << "\n";
    os << std::setw(9) << (r.ssim ? *r.ssim : 0.0) << std::setw(11) << r.fid << std::setw(11)
       << r.kid << std::setw(11) << (r.lpips ? *r.lpips : 0.0) << "\n";
  } else {
    os << std::setw(12) << "FID↓" << std::setw(12) << "KID↓" << "\n";
    os << std::setw(11) << r.fid << std::setw(11) << r.kid << "\n";
  }
  return os.str();
}

}  // namespace dhvton
