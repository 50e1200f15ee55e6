#include "dhvton/synthdata.hpp"

#include <array>
#include <cmath>

namespace dhvton {

namespace {

struct P2 {
  double x = 0, y = 0;
};

double seg_dist(double px, double py, P2 a, P2 b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Parameter along a segment, clamped to [0,1].
double seg_param(double px, double py, P2 a, P2 b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  return std::min(1.0, std::max(0.0, t));
}

using Col = std::array<float, 3>;

double fract(double v) { return v - std::floor(v); }

// Seeded high-frequency texture shared by the flat garment image and the
// garment as worn; contrast per channel is at least 1.0 so the within-garment
// variance floor always holds.
struct GarmentPattern {
  int kind = 0;
  Col c1{}, c2{};
  double f1 = 4, f2 = 4, phase = 0;
  uint64_t glyph_key = 0;

  Col at(double u, double v) const {
    bool second = false;
    switch (kind) {
      case 0:  // stripes
        second = fract(f1 * u + f2 * v + phase) < 0.5;
        break;
      case 1:  // checker
        second = (((int64_t)std::floor(u * f1) + (int64_t)std::floor(v * f2)) & 1) != 0;
        break;
      default: {  // glyph-like marks: per-cell hash picks mark shape
        int64_t cu = (int64_t)std::floor(u * f1), cv = (int64_t)std::floor(v * f2);
        uint64_t hsh = mix64(glyph_key ^ mix64((uint64_t)(cu * 73 + cv * 1009) + kGolden));
        double lu = fract(u * f1), lv = fract(v * f2);
        switch (hsh % 4) {
          case 0: second = std::hypot(lu - 0.5, lv - 0.5) < 0.32; break;          // dot
          case 1: second = std::abs(lu - lv) < 0.18; break;                       // slash
          case 2: second = lv > 0.35 && lv < 0.65; break;                         // bar
          default: second = false;
        }
        break;
      }
    }
    return second ? c2 : c1;
  }
};

GarmentPattern make_pattern(SeededRng& rng) {
  GarmentPattern p;
  p.kind = (int)rng.randint(3);
  for (int c = 0; c < 3; ++c) {
    double v = rng.uniform(-0.9, 0.9);
    p.c1[c] = (float)v;
    p.c2[c] = (float)std::max(-1.0, std::min(1.0, v > 0 ? v - 1.1 : v + 1.1));
  }
  p.f1 = 3.0 + rng.uniform() * 5.0;
  p.f2 = 3.0 + rng.uniform() * 5.0;
  p.phase = rng.uniform();
  p.glyph_key = rng.next_u64();
  return p;
}

// Body layout in isotropic units (y in [0,1], x in [0, W/H]).
struct Body {
  double cx = 0;
  P2 head, neck, lsho, rsho, lhand, rhand, lhip, rhip, lfoot, rfoot;
  double head_r = 0.07, arm_r = 0.034, leg_r = 0.042;
  double sho_y = 0.24, hip_y = 0.55;
  Col skin{}, pants{}, under{}, bg1{}, bg2{};
};

Body make_body(SeededRng& rng, double aspect) {
  Body b;
  b.cx = aspect * 0.5 + rng.uniform(-0.03, 0.03);
  double sw = 0.13 + rng.uniform(-0.02, 0.02);
  double hw = 0.085 + rng.uniform(-0.012, 0.012);
  b.head_r = 0.065 + rng.uniform(-0.008, 0.008);
  b.head = {b.cx + rng.uniform(-0.01, 0.01), 0.10};
  b.neck = {b.cx, 0.19};
  b.sho_y = 0.24 + rng.uniform(-0.01, 0.01);
  b.hip_y = 0.55 + rng.uniform(-0.02, 0.02);
  b.lsho = {b.cx - sw, b.sho_y};
  b.rsho = {b.cx + sw, b.sho_y};
  double la = rng.uniform(0.12, 0.55), ra = rng.uniform(0.12, 0.55), len = 0.27;
  b.lhand = {b.lsho.x - std::sin(la) * len, b.lsho.y + std::cos(la) * len};
  b.rhand = {b.rsho.x + std::sin(ra) * len, b.rsho.y + std::cos(ra) * len};
  b.lhip = {b.cx - hw, b.hip_y};
  b.rhip = {b.cx + hw, b.hip_y};
  b.lfoot = {b.lhip.x + rng.uniform(-0.03, 0.02), 0.93};
  b.rfoot = {b.rhip.x + rng.uniform(-0.02, 0.03), 0.93};

  auto col = [&](double r0, double r1, double g0, double g1, double b0, double b1) {
    return Col{(float)rng.uniform(r0, r1), (float)rng.uniform(g0, g1),
               (float)rng.uniform(b0, b1)};
  };
  b.skin = col(0.35, 0.75, 0.1, 0.45, -0.15, 0.2);
  b.pants = col(-0.8, -0.2, -0.8, -0.2, -0.7, 0.1);
  b.under = col(-0.2, 0.2, -0.2, 0.2, -0.2, 0.2);
  b.bg1 = col(0.3, 0.8, 0.3, 0.8, 0.3, 0.8);
  b.bg2 = col(-0.1, 0.4, -0.1, 0.4, -0.1, 0.4);
  return b;
}

// Torso horizontal extent at height y (linear shoulder->hip), padded.
void torso_edges(const Body& b, double y, double pad, double& lx, double& rx) {
  double s = (y - b.sho_y) / (b.hip_y - b.sho_y);
  lx = b.lsho.x + (b.lhip.x - b.lsho.x) * s - pad;
  rx = b.rsho.x + (b.rhip.x - b.rsho.x) * s + pad;
}

bool in_torso(const Body& b, double x, double y, double pad) {
  if (y < b.sho_y - pad * 0.5 || y > b.hip_y + pad) return false;
  double yy = std::min(std::max(y, b.sho_y), b.hip_y);
  double lx, rx;
  torso_edges(b, yy, pad, lx, rx);
  return x >= lx && x <= rx;
}

// Sleeve: the upper stretch of each arm capsule.
bool in_sleeve(const Body& b, double x, double y, double extent, double pad, bool left) {
  P2 a = left ? b.lsho : b.rsho;
  P2 h = left ? b.lhand : b.rhand;
  double t = seg_param(x, y, a, h);
  return t <= extent && seg_dist(x, y, a, h) <= b.arm_r + pad;
}

bool in_shirt(const Body& b, double x, double y, double pad) {
  return in_torso(b, x, y, 0.012 + pad) || in_sleeve(b, x, y, 0.55, 0.010 + pad, true) ||
         in_sleeve(b, x, y, 0.55, 0.010 + pad, false);
}

}  // namespace

Tensor<float> gen_garment_flat(uint64_t garment_seed, const SynthConfig& cfg,
                               Tensor<float>* region_out) {
  SeededRng rng(garment_seed, stream_id(2));
  GarmentPattern pat = make_pattern(rng);
  int H = cfg.height, W = cfg.width;
  double aspect = (double)W / H;

  // Flat product view: body rectangle plus two sleeve stubs on light ground.
  double cx = aspect * 0.5;
  double bw = 0.17 + rng.uniform(-0.015, 0.015);
  double bt = 0.18, bb = 0.66;
  double sleeve_drop = 0.22 + rng.uniform(-0.03, 0.03);

  Tensor<float> img({(int64_t)cfg.channels, (int64_t)H, (int64_t)W});
  if (region_out) *region_out = Tensor<float>({1, (int64_t)H, (int64_t)W});
  P2 lsl{cx - bw, bt}, lse{cx - bw - 0.13, bt + sleeve_drop};
  P2 rsl{cx + bw, bt}, rse{cx + bw + 0.13, bt + sleeve_drop};

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double py = ((double)y + 0.5) / H, px = ((double)x + 0.5) / H;
      Col c{0.75f, 0.75f, 0.72f};  // light ground
      bool inside = false;
      if (px >= cx - bw && px <= cx + bw && py >= bt && py <= bb) {
        double u = (px - (cx - bw)) / (2 * bw);
        double v = (py - bt) / (bb - bt);
        c = pat.at(u, v);
        inside = true;
      } else if (seg_dist(px, py, lsl, lse) < 0.055) {
        double t = seg_param(px, py, lsl, lse);
        c = pat.at(0.12, t * 0.5);
        inside = true;
      } else if (seg_dist(px, py, rsl, rse) < 0.055) {
        double t = seg_param(px, py, rsl, rse);
        c = pat.at(0.88, t * 0.5);
        inside = true;
      }
      for (int ch = 0; ch < cfg.channels; ++ch) img.at3(ch, y, x) = c[(size_t)ch % 3];
      if (region_out) region_out->at3(0, y, x) = inside ? 1.0f : 0.0f;
    }
  return img;
}

Sample gen_sample(uint64_t person_seed, uint64_t garment_seed, const SynthConfig& cfg) {
  int H = cfg.height, W = cfg.width;
  double aspect = (double)W / H;
  SeededRng prng(person_seed, stream_id(1));
  Body body = make_body(prng, aspect);
  SeededRng grng(garment_seed, stream_id(2));
  GarmentPattern pat = make_pattern(grng);

  Sample s;
  s.person_seed = person_seed;
  s.garment_seed = garment_seed;
  s.person = Tensor<float>({(int64_t)cfg.channels, (int64_t)H, (int64_t)W});
  s.mask = Tensor<float>({1, (int64_t)H, (int64_t)W});
  s.pose = Tensor<float>({(int64_t)cfg.keypoints, (int64_t)H, (int64_t)W});
  s.densepose = Tensor<float>({(int64_t)cfg.parts, (int64_t)H, (int64_t)W});

  const P2 kp[8] = {body.head, body.neck, body.lsho, body.rsho,
                    body.lhand, body.rhand, body.lhip, body.rhip};
  const double sigma = 0.022;

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double py = ((double)y + 0.5) / H, px = ((double)x + 0.5) / H;

      // background gradient
      double g = py * 0.8 + px / aspect * 0.2;
      Col c;
      for (int ch = 0; ch < 3; ++ch)
        c[(size_t)ch] = (float)(body.bg1[(size_t)ch] * (1 - g) + body.bg2[(size_t)ch] * g);

      int part = -1;  // densepose: 0 head, 1 torso, 2 left arm, 3 right arm, 4 legs
      if (seg_dist(px, py, body.lhip, body.lfoot) < body.leg_r ||
          seg_dist(px, py, body.rhip, body.rfoot) < body.leg_r) {
        c = body.pants;
        part = 4;
      }
      bool larm = seg_dist(px, py, body.lsho, body.lhand) < body.arm_r;
      bool rarm = seg_dist(px, py, body.rsho, body.rhand) < body.arm_r;
      if (larm || rarm) {
        c = body.skin;
        part = larm ? 2 : 3;
      }
      if (in_torso(body, px, py, 0.0)) {
        c = body.under;
        part = 1;
      }
      // garment worn over torso and upper arms
      if (in_shirt(body, px, py, 0.0)) {
        double u, v;
        if (in_torso(body, px, py, 0.012)) {
          double lx, rx;
          double yy = std::min(std::max(py, body.sho_y), body.hip_y);
          torso_edges(body, yy, 0.012, lx, rx);
          u = (px - lx) / std::max(1e-9, rx - lx);
          v = (py - body.sho_y) / (body.hip_y - body.sho_y);
        } else {
          bool left = seg_dist(px, py, body.lsho, body.lhand) <
                      seg_dist(px, py, body.rsho, body.rhand);
          double t = seg_param(px, py, left ? body.lsho : body.rsho,
                               left ? body.lhand : body.rhand);
          u = left ? 0.12 : 0.88;
          v = t * 0.5;
        }
        c = pat.at(u, v);
        if (part != 4 && part != 0) part = 1;
      }
      double dh = std::hypot(px - body.head.x, py - body.head.y);
      if (dh < body.head_r) {
        c = body.skin;
        part = 0;
      }

      for (int ch = 0; ch < cfg.channels; ++ch) s.person.at3(ch, y, x) = c[(size_t)ch % 3];
      s.mask.at3(0, y, x) = in_shirt(body, px, py, 0.02) ? 1.0f : 0.0f;
      if (part >= 0 && part < cfg.parts) s.densepose.at3(part, y, x) = 1.0f;
      for (int k = 0; k < std::min(cfg.keypoints, 8); ++k) {
        double d2 = std::pow(px - kp[k].x, 2) + std::pow(py - kp[k].y, 2);
        s.pose.at3(k, y, x) = (float)std::exp(-d2 / (2 * sigma * sigma));
      }
    }

  s.garment = gen_garment_flat(garment_seed, cfg);

  s.masked_person = s.person;
  for (int64_t ch = 0; ch < (int64_t)cfg.channels; ++ch)
    for (int64_t i = 0; i < (int64_t)H * W; ++i)
      s.masked_person.data[(size_t)(ch * H * W + i)] *= 1.0f - s.mask.data[(size_t)i];
  return s;
}

SplitManifest make_split(int n_pairs, uint64_t seed) {
  if (n_pairs < 2) throw ConfigError("make_split: need n_pairs >= 2 to derange");
  SplitManifest m;
  m.seed = seed;
  // Sattolo's algorithm: a uniformly random single cycle, hence a derangement.
  std::vector<int> sigma((size_t)n_pairs);
  for (int i = 0; i < n_pairs; ++i) sigma[(size_t)i] = i;
  SeededRng rng(seed, stream_id(3));
  for (int i = n_pairs - 1; i >= 1; --i)
    std::swap(sigma[(size_t)i], sigma[(size_t)rng.randint((uint64_t)i)]);
  for (int i = 0; i < n_pairs; ++i) {
    SplitPair p;
    p.index = i;
    p.person_seed = stream_id(seed, 101, (uint64_t)i);
    p.garment_seed = stream_id(seed, 202, (uint64_t)i);
    p.unpaired_from = sigma[(size_t)i];
    m.pairs.push_back(p);
  }
  return m;
}

}  // namespace dhvton
