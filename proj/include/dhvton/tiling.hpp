#pragma once

#include "dhvton/tensor.hpp"

#include <vector>

namespace dhvton {

// A cols x rows tile layout; the source image is resized to exactly
// (cols*tile_px) x (rows*tile_px) before cropping.
struct TileGrid {
  int cols = 1;
  int rows = 1;
  int tile_px = 448;
  int resized_w = 448;
  int resized_h = 448;
  int n_tiles() const { return cols * rows; }
};

// Pick the grid whose cols/rows ratio is closest to w/h among all grids with
// 1 <= cols*rows <= max_tiles. Candidates are scanned in (product, cols)
// order; on a ratio tie the larger grid wins only when the source area
// exceeds half the grid's pixel budget (w*h > 0.5 * tile_px^2 * cols*rows).
TileGrid select_grid(int w, int h, int tile_px, int max_tiles);

// Bilinear resample of a [C,H,W] image (half-pixel centers, edge clamp).
// Identity sizes return a bit-equal copy.
Tensor<float> bilinear_resize(const Tensor<float>& img, int out_h, int out_w);

struct TileSet {
  TileGrid grid;
  std::vector<Tensor<float>> tiles;  // row-major crops, each [C,tile,tile]
  Tensor<float> thumbnail;           // [C,tile,tile]
  Tensor<float> resized;             // [C,resized_h,resized_w]
};

// Resize to the grid resolution, crop non-overlapping tiles row-major, and
// produce the global-context thumbnail.
TileSet tile_image(const Tensor<float>& img, const TileGrid& grid);

}  // namespace dhvton
