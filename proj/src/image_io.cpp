#include "dhvton/image_io.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace dhvton {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open image: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
}

uint32_t be32(const uint8_t* p) {
  return ((uint32_t)p[0] << 24) | ((uint32_t)p[1] << 16) | ((uint32_t)p[2] << 8) | p[3];
}

void put_be32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back((uint8_t)(x >> 24));
  v.push_back((uint8_t)(x >> 16));
  v.push_back((uint8_t)(x >> 8));
  v.push_back((uint8_t)x);
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
  put_be32(out, (uint32_t)data.size());
  size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uint32_t crc = crc32(0, out.data() + start, (uInt)(out.size() - start));
  put_be32(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

ImageU8 decode_png(const std::vector<uint8_t>& buf, const std::string& path) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
    throw DataError("not a PNG: " + path);
  size_t off = 8;
  uint32_t w = 0, h = 0;
  int bitdepth = 0, color = -1;
  std::vector<uint8_t> idat;
  while (off + 8 <= buf.size()) {
    uint32_t len = be32(buf.data() + off);
    if (off + 12 + len > buf.size()) throw DataError("truncated PNG: " + path);
    const char* type = (const char*)buf.data() + off + 4;
    const uint8_t* data = buf.data() + off + 8;
    if (!std::memcmp(type, "IHDR", 4)) {
      if (len != 13) throw DataError("bad IHDR: " + path);
      w = be32(data);
      h = be32(data + 4);
      bitdepth = data[8];
      color = data[9];
      if (data[12] != 0) throw DataError("interlaced PNG unsupported: " + path);
      if (bitdepth != 8) throw DataError("only 8-bit PNG supported: " + path);
      if (color != 0 && color != 2 && color != 6)
        throw DataError("unsupported PNG color type " + std::to_string(color) + ": " + path);
    } else if (!std::memcmp(type, "IDAT", 4)) {
      idat.insert(idat.end(), data, data + len);
    } else if (!std::memcmp(type, "IEND", 4)) {
      break;
    }
    off += 12 + len;
  }
  if (w == 0 || h == 0 || idat.empty()) throw DataError("incomplete PNG: " + path);

  int ch = color == 0 ? 1 : (color == 2 ? 3 : 4);
  size_t stride = (size_t)w * ch;
  std::vector<uint8_t> raw((stride + 1) * h);
  uLongf rawlen = (uLongf)raw.size();
  if (uncompress(raw.data(), &rawlen, idat.data(), (uLong)idat.size()) != Z_OK ||
      rawlen != raw.size())
    throw DataError("PNG inflate failed: " + path);

  std::vector<uint8_t> pix(stride * h);
  std::vector<uint8_t> prev(stride, 0);
  for (uint32_t y = 0; y < h; ++y) {
    uint8_t filter = raw[y * (stride + 1)];
    const uint8_t* src = raw.data() + y * (stride + 1) + 1;
    uint8_t* dst = pix.data() + y * stride;
    for (size_t i = 0; i < stride; ++i) {
      int a = i >= (size_t)ch ? dst[i - ch] : 0;
      int b = prev[i];
      int c = i >= (size_t)ch ? prev[i - ch] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw DataError("bad PNG filter: " + path);
      }
      dst[i] = (uint8_t)v;
    }
    std::memcpy(prev.data(), dst, stride);
  }

  ImageU8 out;
  out.width = (int)w;
  out.height = (int)h;
  out.rgb.resize((size_t)w * h * 3);
  for (size_t p = 0; p < (size_t)w * h; ++p) {
    const uint8_t* s = pix.data() + p * ch;
    uint8_t r = s[0], g = ch >= 3 ? s[1] : s[0], b = ch >= 3 ? s[2] : s[0];
    out.rgb[p * 3] = r;
    out.rgb[p * 3 + 1] = g;
    out.rgb[p * 3 + 2] = b;
  }
  return out;
}

ImageU8 decode_pnm(const std::vector<uint8_t>& buf, const std::string& path) {
  if (buf.size() < 2) throw DataError("truncated PNM: " + path);
  bool gray = buf[1] == '5';
  size_t pos = 2;
  auto next_int = [&]() {
    while (pos < buf.size() && (std::isspace(buf[pos]) || buf[pos] == '#')) {
      if (buf[pos] == '#')
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      else
        ++pos;
    }
    int v = 0;
    bool any = false;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
      v = v * 10 + (buf[pos++] - '0');
      any = true;
    }
    if (!any) throw DataError("bad PNM header: " + path);
    return v;
  };
  int w = next_int(), h = next_int(), maxv = next_int();
  if (maxv != 255) throw DataError("PNM maxval must be 255: " + path);
  ++pos;  // single whitespace after maxval
  size_t ch = gray ? 1 : 3;
  if (pos + (size_t)w * h * ch > buf.size()) throw DataError("truncated PNM payload: " + path);
  ImageU8 out;
  out.width = w;
  out.height = h;
  out.rgb.resize((size_t)w * h * 3);
  for (size_t p = 0; p < (size_t)w * h; ++p) {
    const uint8_t* s = buf.data() + pos + p * ch;
    out.rgb[p * 3] = s[0];
    out.rgb[p * 3 + 1] = gray ? s[0] : s[1];
    out.rgb[p * 3 + 2] = gray ? s[0] : s[2];
  }
  return out;
}

}  // namespace

ImageU8 read_image(const std::string& path) {
  std::vector<uint8_t> buf = read_file(path);
  if (buf.size() >= 8 && buf[0] == 0x89 && buf[1] == 'P') return decode_png(buf, path);
  if (buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '6'))
    return decode_pnm(buf, path);
  throw DataError("unsupported image format (PNG/PPM expected): " + path);
}

void write_png(const std::string& path, const ImageU8& img) {
  size_t stride = (size_t)img.width * 3;
  std::vector<uint8_t> raw((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw[(size_t)y * (stride + 1)] = 0;  // filter: none
    std::memcpy(raw.data() + (size_t)y * (stride + 1) + 1, img.rgb.data() + (size_t)y * stride,
                stride);
  }
  uLongf bound = compressBound((uLong)raw.size());
  std::vector<uint8_t> comp(bound);
  if (compress2(comp.data(), &bound, raw.data(), (uLong)raw.size(), 6) != Z_OK)
    throw DataError("PNG deflate failed: " + path);
  comp.resize(bound);

  std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<uint8_t> ihdr;
  put_be32(ihdr, (uint32_t)img.width);
  put_be32(ihdr, (uint32_t)img.height);
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});

  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  os.write((const char*)out.data(), (std::streamsize)out.size());
  if (!os) throw DataError("write failed: " + path);
}

void write_ppm(const std::string& path, const ImageU8& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  os.write((const char*)img.rgb.data(), (std::streamsize)img.rgb.size());
  if (!os) throw DataError("write failed: " + path);
}

ImageU8 to_u8(const Tensor<float>& img) {
  if (img.rank() != 3 || (img.shape[0] != 1 && img.shape[0] != 3))
    throw ShapeError("to_u8: expected [1|3,H,W], got " + shape_str(img.shape));
  int64_t C = img.shape[0], H = img.shape[1], W = img.shape[2];
  ImageU8 out;
  out.width = (int)W;
  out.height = (int)H;
  out.rgb.resize((size_t)(H * W * 3));
  for (int64_t y = 0; y < H; ++y)
    for (int64_t x = 0; x < W; ++x)
      for (int64_t c = 0; c < 3; ++c) {
        float v = img.at3(C == 1 ? 0 : c, y, x);
        float s = (v + 1.0f) * 127.5f;
        out.rgb[(size_t)((y * W + x) * 3 + c)] =
            (uint8_t)std::min(255.0f, std::max(0.0f, std::round(s)));
      }
  return out;
}

Tensor<float> from_u8(const ImageU8& img) {
  Tensor<float> out({3, img.height, img.width});
  for (int64_t y = 0; y < img.height; ++y)
    for (int64_t x = 0; x < img.width; ++x)
      for (int64_t c = 0; c < 3; ++c)
        out.at3(c, y, x) = (float)img.rgb[(size_t)((y * img.width + x) * 3 + c)] / 127.5f - 1.0f;
  return out;
}

Tensor<float> make_grid(const std::vector<Tensor<float>>& images, int cols, int pad) {
  if (images.empty()) throw ShapeError("make_grid: no images");
  int64_t C = images[0].shape[0], H = images[0].shape[1], W = images[0].shape[2];
  for (const auto& im : images) check_same_shape(im, images[0], "make_grid");
  int rows = ((int)images.size() + cols - 1) / cols;
  Tensor<float> sheet =
      Tensor<float>::full({C, rows * (H + pad) + pad, cols * (W + pad) + pad}, 1.0f);
  for (size_t i = 0; i < images.size(); ++i) {
    int64_t oy = (int64_t)(i / (size_t)cols) * (H + pad) + pad;
    int64_t ox = (int64_t)(i % (size_t)cols) * (W + pad) + pad;
    for (int64_t c = 0; c < C; ++c)
      for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) sheet.at3(c, oy + y, ox + x) = images[i].at3(c, y, x);
  }
  return sheet;
}

}  // namespace dhvton
