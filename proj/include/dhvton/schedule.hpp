#pragma once

#include "dhvton/tensor.hpp"

#include <vector>

namespace dhvton {

// DDPM noise schedule; index t in {1..T} maps to slot t-1.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  void check_t(int t) const {
    if (t < 1 || t > T)
      throw IndexError("schedule: t=" + std::to_string(t) + " outside [1," + std::to_string(T) +
                       "]");
  }
  double beta(int t) const {
    check_t(t);
    return betas[(size_t)(t - 1)];
  }
  double alpha(int t) const {
    check_t(t);
    return alphas[(size_t)(t - 1)];
  }
  double alpha_bar(int t) const {
    check_t(t);
    return alpha_bars[(size_t)(t - 1)];
  }
};

// Linear beta interpolation from beta_start to beta_end over T steps.
NoiseSchedule make_schedule(int T, double beta_start, double beta_end);

}  // namespace dhvton
