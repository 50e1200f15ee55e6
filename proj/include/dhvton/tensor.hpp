#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhvton {

// Error taxonomy. CLI maps ConfigError to exit code 2, the rest to 3.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

// Dense row-major tensor over a scalar type (float for training/inference,
// double for finite-difference checking).
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(shape_numel(shape), T(0)) {
    for (int64_t d : shape)
      if (d <= 0) throw ShapeError("Tensor: non-positive dimension in " + shape_str(shape));
  }
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if ((int64_t)data.size() != shape_numel(shape))
      throw ShapeError("Tensor: data size " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
  }

  static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
  static Tensor full(Shape s, T v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor from(Shape s, std::initializer_list<T> vals) {
    return Tensor(std::move(s), std::vector<T>(vals));
  }
  static Tensor scalar(T v) { return full({1}, v); }

  int64_t numel() const { return (int64_t)data.size(); }
  int rank() const { return (int)shape.size(); }
  int64_t dim(int i) const { return shape[(size_t)i]; }

  T& operator[](int64_t i) { return data[(size_t)i]; }
  const T& operator[](int64_t i) const { return data[(size_t)i]; }

  // 2-D / 4-D accessors for the common layouts [rows,cols] and [N,C,H,W].
  T& at(int64_t r, int64_t c) { return data[(size_t)(r * shape[1] + c)]; }
  const T& at(int64_t r, int64_t c) const { return data[(size_t)(r * shape[1] + c)]; }
  T& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data[(size_t)(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  const T& at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data[(size_t)(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  T& at3(int64_t c, int64_t h, int64_t w) {
    return data[(size_t)((c * shape[1] + h) * shape[2] + w)];
  }
  const T& at3(int64_t c, int64_t h, int64_t w) const {
    return data[(size_t)((c * shape[1] + h) * shape[2] + w)];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite((double)v)) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = (U)data[i];
    return out;
  }
};

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Map a rank-2 tensor (or an explicitly shaped buffer) as an Eigen matrix.
template <typename T>
Eigen::Map<MatrixRM<T>> as_matrix(Tensor<T>& t) {
  return Eigen::Map<MatrixRM<T>>(t.data.data(), t.shape[0], t.shape[1]);
}
template <typename T>
Eigen::Map<const MatrixRM<T>> as_matrix(const Tensor<T>& t) {
  return Eigen::Map<const MatrixRM<T>>(t.data.data(), t.shape[0], t.shape[1]);
}
template <typename T>
Eigen::Map<MatrixRM<T>> as_matrix(T* p, int64_t r, int64_t c) {
  return Eigen::Map<MatrixRM<T>>(p, r, c);
}
template <typename T>
Eigen::Map<const MatrixRM<T>> as_matrix(const T* p, int64_t r, int64_t c) {
  return Eigen::Map<const MatrixRM<T>>(p, r, c);
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
}

// Plain (non-differentiable) elementwise helpers.
template <typename T>
Tensor<T> tadd(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "add");
  Tensor<T> o = a;
  for (int64_t i = 0; i < o.numel(); ++i) o[i] += b[i];
  return o;
}
template <typename T>
Tensor<T> tsub(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "sub");
  Tensor<T> o = a;
  for (int64_t i = 0; i < o.numel(); ++i) o[i] -= b[i];
  return o;
}
template <typename T>
Tensor<T> tmul(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "mul");
  Tensor<T> o = a;
  for (int64_t i = 0; i < o.numel(); ++i) o[i] *= b[i];
  return o;
}
template <typename T>
Tensor<T> tscale(const Tensor<T>& a, T s) {
  Tensor<T> o = a;
  for (auto& v : o.data) v *= s;
  return o;
}
template <typename T>
Tensor<T> tclamp(const Tensor<T>& a, T lo, T hi) {
  Tensor<T> o = a;
  for (auto& v : o.data) v = std::min(hi, std::max(lo, v));
  return o;
}

// out[i] = cond[i] == 1 ? a[i] : b[i]. Used for exact mask compositing.
template <typename T>
Tensor<T> tselect(const Tensor<T>& cond, const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "select");
  if (cond.numel() != a.numel() && a.numel() % cond.numel() != 0)
    throw ShapeError("select: mask numel does not divide operand numel");
  Tensor<T> o = a;
  int64_t rep = a.numel() / cond.numel();
  // mask is [1,H,W]-like, operands [C,H,W]: channel-major replication
  int64_t per = cond.numel();
  for (int64_t c = 0; c < rep; ++c)
    for (int64_t i = 0; i < per; ++i)
      o[c * per + i] = cond[i] == T(1) ? a[c * per + i] : b[c * per + i];
  return o;
}

template <typename T>
T tmax_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "max_abs_diff");
  T m = 0;
  for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename T>
bool bit_equal(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(T)) == 0;
}

template <typename T>
T tmean(const Tensor<T>& a) {
  T s = 0;
  for (T v : a.data) s += v;
  return s / (T)a.numel();
}

}  // namespace dhvton
