#include "dhvton/schedule.hpp"

namespace dhvton {

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw ConfigError("make_schedule: T must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw ConfigError("make_schedule: need 0 < beta_start <= beta_end < 1, got [" +
                      std::to_string(beta_start) + ", " + std::to_string(beta_end) + "]");
  NoiseSchedule s;
  s.T = T;
  s.betas.resize((size_t)T);
  s.alphas.resize((size_t)T);
  s.alpha_bars.resize((size_t)T);
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    double beta = T == 1 ? beta_start
                         : beta_start + (beta_end - beta_start) * (double)i / (double)(T - 1);
    s.betas[(size_t)i] = beta;
    s.alphas[(size_t)i] = 1.0 - beta;
    prod *= 1.0 - beta;
    s.alpha_bars[(size_t)i] = prod;
  }
  // 0 < beta < 1 guarantees alpha_bar strictly decreasing and in (0,1).
  for (int i = 1; i < T; ++i)
    if (s.alpha_bars[(size_t)i] >= s.alpha_bars[(size_t)(i - 1)])
      throw ConfigError("make_schedule: alpha_bar not strictly decreasing");
  return s;
}

}  // namespace dhvton
