#pragma once

#include "dhvton/autodiff.hpp"
#include "dhvton/rng.hpp"

#include <map>
#include <string>

namespace dhvton {

// A named trainable (or frozen) tensor. The node is persistent: graphs built
// during training link straight to it and backward() accumulates into grad.
template <typename T>
struct Parameter {
  std::string name;
  NodePtr<T> node;
  bool trainable = true;

  Tensor<T>& value() { return node->value; }
  const Tensor<T>& value() const { return node->value; }
  Tensor<T>& grad() {
    node->ensure_grad();
    return node->grad;
  }
};

template <typename T>
class ParamStore {
 public:
  Parameter<T>& create(const std::string& name, Tensor<T> init, bool trainable = true) {
    if (params_.count(name)) throw ConfigError("parameter already registered: " + name);
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(init);
    n->requires_grad = trainable;
    auto [it, ok] = params_.emplace(name, Parameter<T>{name, std::move(n), trainable});
    (void)ok;
    return it->second;
  }

  bool has(const std::string& name) const { return params_.count(name) != 0; }

  Parameter<T>& get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }
  const Parameter<T>& get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }

  Var<T> var(const std::string& name) { return Var<T>(get(name).node); }

  void zero_grad() {
    for (auto& [_, p] : params_) {
      p.node->ensure_grad();
      std::fill(p.node->grad.data.begin(), p.node->grad.data.end(), T(0));
    }
  }

  void set_trainable(const std::string& name, bool t) {
    auto& p = get(name);
    p.trainable = t;
    p.node->requires_grad = t;
  }

  void set_trainable_prefix(const std::string& prefix, bool t) {
    for (auto& [name, p] : params_)
      if (name.rfind(prefix, 0) == 0) {
        p.trainable = t;
        p.node->requires_grad = t;
      }
  }

  std::vector<std::string> names(const std::string& prefix = "") const {
    std::vector<std::string> out;
    for (auto& [name, _] : params_)
      if (prefix.empty() || name.rfind(prefix, 0) == 0) out.push_back(name);
    return out;  // std::map keeps them sorted
  }

  int64_t count_scalars(const std::string& prefix = "") const {
    int64_t n = 0;
    for (auto& [name, p] : params_)
      if (prefix.empty() || name.rfind(prefix, 0) == 0) n += p.value().numel();
    return n;
  }

  std::map<std::string, Parameter<T>>& all() { return params_; }
  const std::map<std::string, Parameter<T>>& all() const { return params_; }

 private:
  std::map<std::string, Parameter<T>> params_;
};

// Initializers. fan_in-scaled normal draws from the store's init stream.
enum class Init { Zero, One, HeNormal, XavierNormal };

template <typename T>
Tensor<T> init_tensor(Shape shape, Init kind, int64_t fan_in, SeededRng& rng) {
  Tensor<T> t(std::move(shape));
  switch (kind) {
    case Init::Zero:
      break;
    case Init::One:
      std::fill(t.data.begin(), t.data.end(), T(1));
      break;
    case Init::HeNormal: {
      double std = std::sqrt(2.0 / (double)fan_in);
      for (auto& v : t.data) v = (T)(rng.normal() * std);
      break;
    }
    case Init::XavierNormal: {
      double std = std::sqrt(1.0 / (double)fan_in);
      for (auto& v : t.data) v = (T)(rng.normal() * std);
      break;
    }
  }
  return t;
}

}  // namespace dhvton
