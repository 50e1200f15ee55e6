#include "dhvton/tiling.hpp"

#include <cmath>

namespace dhvton {

TileGrid select_grid(int w, int h, int tile_px, int max_tiles) {
  if (w < 1 || h < 1) throw ConfigError("select_grid: image dimensions must be >= 1");
  if (max_tiles < 1) throw ConfigError("select_grid: max_tiles must be >= 1");
  double target = (double)w / (double)h;

  // Candidates ordered by (product, cols) so the tie-break is deterministic.
  std::vector<std::pair<int, int>> cands;
  for (int p = 1; p <= max_tiles; ++p)
    for (int c = 1; c <= p; ++c)
      if (p % c == 0) cands.emplace_back(c, p / c);

  int best_c = 1, best_r = 1;
  double best_diff = 1e300;
  for (auto [c, r] : cands) {
    double diff = std::abs((double)c / (double)r - target);
    if (diff < best_diff) {
      best_diff = diff;
      best_c = c;
      best_r = r;
    } else if (diff == best_diff) {
      if ((double)w * h > 0.5 * (double)tile_px * tile_px * c * r) {
        best_c = c;
        best_r = r;
      }
    }
  }
  TileGrid g;
  g.cols = best_c;
  g.rows = best_r;
  g.tile_px = tile_px;
  g.resized_w = best_c * tile_px;
  g.resized_h = best_r * tile_px;
  return g;
}

Tensor<float> bilinear_resize(const Tensor<float>& img, int out_h, int out_w) {
  if (img.rank() != 3) throw ShapeError("bilinear_resize: expected [C,H,W]");
  int64_t C = img.shape[0], H = img.shape[1], W = img.shape[2];
  if (out_h == H && out_w == W) return img;

  Tensor<float> out({C, out_h, out_w});
  double sy = (double)H / out_h, sx = (double)W / out_w;
  for (int64_t y = 0; y < out_h; ++y) {
    double fy = ((double)y + 0.5) * sy - 0.5;
    int64_t y0 = (int64_t)std::floor(fy);
    double wy = fy - (double)y0;
    int64_t ya = std::min(std::max(y0, (int64_t)0), H - 1);
    int64_t yb = std::min(std::max(y0 + 1, (int64_t)0), H - 1);
    for (int64_t x = 0; x < out_w; ++x) {
      double fx = ((double)x + 0.5) * sx - 0.5;
      int64_t x0 = (int64_t)std::floor(fx);
      double wx = fx - (double)x0;
      int64_t xa = std::min(std::max(x0, (int64_t)0), W - 1);
      int64_t xb = std::min(std::max(x0 + 1, (int64_t)0), W - 1);
      for (int64_t c = 0; c < C; ++c) {
        double v00 = img.at3(c, ya, xa), v01 = img.at3(c, ya, xb);
        double v10 = img.at3(c, yb, xa), v11 = img.at3(c, yb, xb);
        double v = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        out.at3(c, y, x) = (float)v;
      }
    }
  }
  return out;
}

TileSet tile_image(const Tensor<float>& img, const TileGrid& grid) {
  if (img.rank() != 3 || img.shape[1] < 1 || img.shape[2] < 1)
    throw ShapeError("tile_image: expected non-empty [C,H,W]");
  TileSet out;
  out.grid = grid;
  out.resized = bilinear_resize(img, grid.resized_h, grid.resized_w);
  int64_t C = img.shape[0];
  int tp = grid.tile_px;
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      Tensor<float> tile({C, tp, tp});
      for (int64_t ch = 0; ch < C; ++ch)
        for (int y = 0; y < tp; ++y)
          for (int x = 0; x < tp; ++x)
            tile.at3(ch, y, x) = out.resized.at3(ch, r * tp + y, c * tp + x);
      out.tiles.push_back(std::move(tile));
    }
  out.thumbnail = bilinear_resize(img, tp, tp);
  return out;
}

}  // namespace dhvton
