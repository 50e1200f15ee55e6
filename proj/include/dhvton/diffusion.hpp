#pragma once

#include "dhvton/ops.hpp"
#include "dhvton/rng.hpp"
#include "dhvton/sample.hpp"
#include "dhvton/schedule.hpp"

#include <vector>

namespace dhvton {

// Noise-prediction model interface. x_t is batched [N,C,H,W]; conds supplies
// the per-item conditioning record (its person field is never read here) and
// ts the per-item diffusion step.
struct EpsModel {
  virtual ~EpsModel() = default;
  virtual Var<float> predict(const Var<float>& x_t, const std::vector<const Sample*>& conds,
                             const std::vector<int>& ts) = 0;
};

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
template <typename T>
Tensor<T> q_sample(const Tensor<T>& x0, int t, const Tensor<T>& eps, const NoiseSchedule& s) {
  check_same_shape(x0, eps, "q_sample");
  double ab = s.alpha_bar(t);
  T a = (T)std::sqrt(ab), b = (T)std::sqrt(1.0 - ab);
  Tensor<T> out = x0;
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a * out[i] + b * eps[i];
  return out;
}

// Differentiable variant (linear in both inputs).
template <typename T>
Var<T> q_sample(const Var<T>& x0, int t, const Var<T>& eps, const NoiseSchedule& s) {
  double ab = s.alpha_bar(t);
  return add(scale(x0, (T)std::sqrt(ab)), scale(eps, (T)std::sqrt(1.0 - ab)));
}

// Eq-style training objective: || eps - model(x_t, conds, t) ||^2 averaged
// over every element of the batch.
inline Var<float> training_loss_batch(EpsModel& model, const std::vector<const Sample*>& batch,
                                      const std::vector<int>& ts,
                                      const std::vector<Tensor<float>>& epss,
                                      const NoiseSchedule& sched) {
  if (batch.empty() || batch.size() != ts.size() || batch.size() != epss.size())
    throw ConfigError("training_loss: batch/ts/eps arity mismatch");
  std::vector<Var<float>> xts, epsv;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = *batch[i];
    Tensor<float> xt = q_sample(s.person, ts[i], epss[i], sched);
    Shape s4 = {1, xt.shape[0], xt.shape[1], xt.shape[2]};
    xts.push_back(Var<float>::constant(Tensor<float>(s4, std::move(xt.data))));
    epsv.push_back(Var<float>::constant(Tensor<float>(s4, epss[i].data)));
  }
  Var<float> x_t = xts.size() == 1 ? xts[0] : concat0(xts);
  Var<float> eps = epsv.size() == 1 ? epsv[0] : concat0(epsv);
  Var<float> pred = model.predict(x_t, batch, ts);
  if (pred.shape() != x_t.shape())
    throw ConfigError("training_loss: model output " + shape_str(pred.shape()) +
                      " does not match x_t " + shape_str(x_t.shape()));
  return mse(eps, pred);
}

inline Var<float> training_loss(EpsModel& model, const Sample& s, int t,
                                const Tensor<float>& eps, const NoiseSchedule& sched) {
  return training_loss_batch(model, {&s}, {t}, {eps}, sched);
}

// One ancestral reverse step:
//   x_{t-1} = (x_t - beta_t/sqrt(1-abar_t) * eps_theta)/sqrt(alpha_t) + sigma_t z
// with z = 0 at t = 1 and sigma_t = sqrt(beta_t).
inline Tensor<float> ddpm_step(EpsModel& model, const Tensor<float>& x_t, int t,
                               const Sample& conds, const NoiseSchedule& sched, SeededRng& rng) {
  sched.check_t(t);
  NoGradGuard ng;
  Shape s4 = {1, x_t.shape[0], x_t.shape[1], x_t.shape[2]};
  Var<float> xv = Var<float>::constant(Tensor<float>(s4, x_t.data));
  Tensor<float> eps = model.predict(xv, {&conds}, {t}).value();

  double beta = sched.beta(t), alpha = sched.alpha(t), ab = sched.alpha_bar(t);
  double c_eps = beta / std::sqrt(1.0 - ab);
  double inv_sqrt_a = 1.0 / std::sqrt(alpha);
  double sigma = t == 1 ? 0.0 : std::sqrt(beta);

  Tensor<float> out = x_t;
  for (int64_t i = 0; i < out.numel(); ++i) {
    double v = inv_sqrt_a * ((double)out[i] - c_eps * (double)eps[i]);
    if (sigma != 0.0) v += sigma * rng.normal();
    out[i] = (float)v;
  }
  return out;
}

// Full reverse loop from pure noise; the final image is clamped to [-1,1] and
// composited so pixels with mask==0 are bit-equal to the background.
inline Tensor<float> sample_loop(EpsModel& model, const Sample& conds, const NoiseSchedule& sched,
                                 SeededRng rng) {
  Tensor<float> x = gaussian<float>(conds.masked_person.shape, rng);
  for (int t = sched.T; t >= 1; --t) x = ddpm_step(model, x, t, conds, sched, rng);
  x = tclamp(x, -1.0f, 1.0f);
  return tselect(conds.mask, x, conds.masked_person);
}

}  // namespace dhvton
