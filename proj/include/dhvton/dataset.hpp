#pragma once

#include "dhvton/sample.hpp"
#include "dhvton/synthdata.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhvton {

// JSONL manifest for synthetic splits: one pair record per line.
void write_manifest(const std::string& path, const SplitManifest& m);
SplitManifest read_manifest(const std::string& path);

// Stable content hash of a manifest file (FNV-1a over bytes).
uint64_t manifest_hash(const std::string& path);

// Lazily generated synthetic dataset over a split.
class SynthDataset {
 public:
  SynthDataset(SplitManifest split, SynthConfig cfg)
      : split_(std::move(split)), cfg_(cfg), cache_(split_.pairs.size()) {}

  size_t size() const { return split_.pairs.size(); }
  const SplitManifest& split() const { return split_; }
  const SynthConfig& config() const { return cfg_; }

  const Sample& get(size_t i) const;
  // Person i's record conditioned on pair j's garment (unpaired setting).
  Sample unpaired(size_t i) const;

 private:
  SplitManifest split_;
  SynthConfig cfg_;
  mutable std::vector<std::optional<Sample>> cache_;
};

struct LoadItem {
  std::optional<Sample> sample;
  std::string name;   // shared basename
  std::string error;  // non-empty if this item failed to load
};

// VITON-HD style folder ingestion: image/, cloth/, agnostic-mask/, and
// optionally pose/ and densepose/, with shared basenames. Images are resized
// to the configured resolution; missing auxiliary maps become zeros with the
// sample's warning flag set. Unreadable files yield item-level errors and the
// stream continues.
class DirDataset {
 public:
  DirDataset(const std::string& root, SynthConfig cfg);

  size_t size() const { return names_.size(); }
  LoadItem load(size_t i) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string root_;
  SynthConfig cfg_;
  std::vector<std::string> names_;
  bool has_pose_ = false, has_densepose_ = false;
};

}  // namespace dhvton
