#include "dhvton/dataset.hpp"

#include "dhvton/image_io.hpp"
#include "dhvton/tiling.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dhvton {

void write_manifest(const std::string& path, const SplitManifest& m) {
  std::ofstream os(path);
  if (!os) throw DataError("manifest: cannot open for write: " + path);
  for (const auto& p : m.pairs) {
    json j = {{"i", p.index},
              {"person_seed", p.person_seed},
              {"garment_seed", p.garment_seed},
              {"unpaired_from", p.unpaired_from},
              {"split_seed", m.seed}};
    os << j.dump() << "\n";
  }
}

SplitManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("manifest: cannot open: " + path);
  SplitManifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("manifest: bad JSON line in " + path);
    SplitPair p;
    p.index = j.at("i").get<int>();
    p.person_seed = j.at("person_seed").get<uint64_t>();
    p.garment_seed = j.at("garment_seed").get<uint64_t>();
    p.unpaired_from = j.at("unpaired_from").get<int>();
    m.seed = j.value("split_seed", (uint64_t)0);
    m.pairs.push_back(p);
  }
  if (m.pairs.empty()) throw DataError("manifest: empty file: " + path);
  return m;
}

uint64_t manifest_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("manifest: cannot open: " + path);
  uint64_t h = 1469598103934665603ull;
  char c;
  while (is.get(c)) {
    h ^= (uint64_t)(unsigned char)c;
    h *= 1099511628211ull;
  }
  return h;
}

const Sample& SynthDataset::get(size_t i) const {
  if (i >= split_.pairs.size()) throw IndexError("dataset index out of range");
  if (!cache_[i]) {
    const SplitPair& p = split_.pairs[i];
    cache_[i] = gen_sample(p.person_seed, p.garment_seed, cfg_);
  }
  return *cache_[i];
}

Sample SynthDataset::unpaired(size_t i) const {
  const SplitPair& p = split_.pairs.at(i);
  Sample s = get(i);
  s.garment = gen_garment_flat(split_.pairs.at((size_t)p.unpaired_from).garment_seed, cfg_);
  s.garment_seed = split_.pairs.at((size_t)p.unpaired_from).garment_seed;
  return s;
}

namespace {

Tensor<float> load_resized(const std::string& path, int h, int w) {
  return bilinear_resize(from_u8(read_image(path)), h, w);
}

std::string find_with_basename(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".png", ".ppm", ".pgm", ".jpg", ".jpeg"}) {
    fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p.string();
  }
  return {};
}

}  // namespace

DirDataset::DirDataset(const std::string& root, SynthConfig cfg) : root_(root), cfg_(cfg) {
  fs::path image_dir = fs::path(root) / "image";
  if (!fs::is_directory(image_dir))
    throw DataError("dataset: missing image/ directory under " + root);
  for (const auto& e : fs::directory_iterator(image_dir))
    if (e.is_regular_file()) names_.push_back(e.path().stem().string());
  std::sort(names_.begin(), names_.end());
  if (names_.empty()) throw DataError("dataset: empty image/ directory under " + root);
  has_pose_ = fs::is_directory(fs::path(root) / "pose");
  has_densepose_ = fs::is_directory(fs::path(root) / "densepose");
}

LoadItem DirDataset::load(size_t i) const {
  LoadItem item;
  item.name = names_.at(i);
  try {
    fs::path root(root_);
    std::string person_p = find_with_basename(root / "image", item.name);
    std::string cloth_p = find_with_basename(root / "cloth", item.name);
    std::string mask_p = find_with_basename(root / "agnostic-mask", item.name);
    if (person_p.empty()) throw DataError("missing person image for " + item.name);
    if (cloth_p.empty()) throw DataError("missing cloth image for " + item.name);
    if (mask_p.empty()) throw DataError("missing agnostic-mask image for " + item.name);

    Sample s;
    s.person = load_resized(person_p, cfg_.height, cfg_.width);
    s.garment = load_resized(cloth_p, cfg_.height, cfg_.width);

    Tensor<float> m3 = load_resized(mask_p, cfg_.height, cfg_.width);
    s.mask = Tensor<float>({1, (int64_t)cfg_.height, (int64_t)cfg_.width});
    for (int64_t px = 0; px < (int64_t)cfg_.height * cfg_.width; ++px)
      s.mask[px] = m3[px] > 0.0f ? 1.0f : 0.0f;  // u8 128+ maps above 0 in [-1,1]

    double frac = mask_fraction(s.mask);
    if (frac < 0.08 || frac > 0.45)
      throw DataError("mask fraction " + std::to_string(frac) + " outside [0.08,0.45] for " +
                      item.name);

    s.pose = Tensor<float>({(int64_t)cfg_.keypoints, (int64_t)cfg_.height, (int64_t)cfg_.width});
    s.densepose = Tensor<float>({(int64_t)cfg_.parts, (int64_t)cfg_.height, (int64_t)cfg_.width});
    std::string pose_p = has_pose_ ? find_with_basename(root / "pose", item.name) : "";
    std::string dp_p = has_densepose_ ? find_with_basename(root / "densepose", item.name) : "";
    if (pose_p.empty() && dp_p.empty()) s.aux_synthesized = true;

    if (!pose_p.empty()) {
      // RGB channels fill the first three keypoint planes, remapped to [0,1].
      Tensor<float> pm = load_resized(pose_p, cfg_.height, cfg_.width);
      int64_t hw = (int64_t)cfg_.height * cfg_.width;
      for (int64_t c = 0; c < std::min<int64_t>(3, cfg_.keypoints); ++c)
        for (int64_t px = 0; px < hw; ++px)
          s.pose.data[(size_t)(c * hw + px)] = (pm.data[(size_t)(c * hw + px)] + 1.0f) * 0.5f;
    }
    if (!dp_p.empty()) {
      // Gray level quantized into part bins; 0 stays background.
      Tensor<float> dm = load_resized(dp_p, cfg_.height, cfg_.width);
      int64_t hw = (int64_t)cfg_.height * cfg_.width;
      for (int64_t px = 0; px < hw; ++px) {
        double v = (dm[px] + 1.0) * 0.5;
        int part = (int)std::lround(v * cfg_.parts);
        if (part >= 1 && part <= cfg_.parts) s.densepose.data[(size_t)((part - 1) * hw + px)] = 1.0f;
      }
    }

    s.masked_person = s.person;
    int64_t hw = (int64_t)cfg_.height * cfg_.width;
    for (int64_t c = 0; c < 3; ++c)
      for (int64_t px = 0; px < hw; ++px)
        s.masked_person.data[(size_t)(c * hw + px)] *= 1.0f - s.mask[px];

    if (!s.person.all_finite() || !s.garment.all_finite())
      throw DataError("non-finite pixels in " + item.name);
    item.sample = std::move(s);
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

}  // namespace dhvton
