#pragma once

#include "dhvton/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dhvton {

struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // interleaved, 3 bytes per pixel
};

// PNG (8-bit gray / RGB / RGBA, non-interlaced) and binary PPM/PGM.
// Decoding failures throw DataError with the offending path in the message.
ImageU8 read_image(const std::string& path);
void write_png(const std::string& path, const ImageU8& img);
void write_ppm(const std::string& path, const ImageU8& img);

// [-1,1] [C,H,W] float <-> interleaved u8, C in {1,3}.
ImageU8 to_u8(const Tensor<float>& img);
Tensor<float> from_u8(const ImageU8& img);

// Tile equally-sized [-1,1] images into one sheet, row-major, `cols` wide.
Tensor<float> make_grid(const std::vector<Tensor<float>>& images, int cols, int pad = 2);

}  // namespace dhvton
