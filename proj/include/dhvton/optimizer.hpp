#pragma once

#include "dhvton/params.hpp"

namespace dhvton {

struct AdamWConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled-weight-decay Adam. Only parameters that are trainable AND match
// one of the include prefixes are stepped; everything else is untouched (the
// frozen-parameter bit-identity invariant rides on this).
template <typename T>
class AdamW {
 public:
  AdamW(ParamStore<T>& store, AdamWConfig cfg, std::vector<std::string> include_prefixes = {})
      : store_(&store), cfg_(cfg), prefixes_(std::move(include_prefixes)) {}

  bool included(const std::string& name) const {
    if (prefixes_.empty()) return true;
    for (const auto& p : prefixes_)
      if (name.rfind(p, 0) == 0) return true;
    return false;
  }

  void step() {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, (double)t_);
    double bc2 = 1.0 - std::pow(cfg_.beta2, (double)t_);
    for (auto& [name, p] : store_->all()) {
      if (!p.trainable || !included(name)) continue;
      auto& st = state_[name];
      if (st.m.data.empty()) {
        st.m = Tensor<T>::zeros(p.value().shape);
        st.v = Tensor<T>::zeros(p.value().shape);
      }
      Tensor<T>& val = p.value();
      Tensor<T>& g = p.grad();
      for (int64_t i = 0; i < val.numel(); ++i) {
        double gi = (double)g[i];
        double m = cfg_.beta1 * (double)st.m[i] + (1.0 - cfg_.beta1) * gi;
        double v = cfg_.beta2 * (double)st.v[i] + (1.0 - cfg_.beta2) * gi * gi;
        st.m[i] = (T)m;
        st.v[i] = (T)v;
        double mhat = m / bc1;
        double vhat = v / bc2;
        double upd = mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * (double)val[i];
        val[i] = (T)((double)val[i] - cfg_.lr * upd);
      }
    }
  }

  int64_t steps() const { return t_; }

 private:
  struct State {
    Tensor<T> m, v;
  };
  ParamStore<T>* store_;
  AdamWConfig cfg_;
  std::vector<std::string> prefixes_;
  std::map<std::string, State> state_;
  int64_t t_ = 0;
};

}  // namespace dhvton
