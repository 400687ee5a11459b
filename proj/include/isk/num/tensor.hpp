#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "isk/num/error.hpp"

namespace isk::num {

#ifdef ISK_REAL_FLOAT
using real = float;
#else
using real = double;
#endif

// Dense n-dimensional array of reals. Row-major storage. Most operations
// treat dimension 0 as a batch dimension and flatten the rest; a rank-1
// tensor acts as a single row.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<size_t>(checked_size(shape_)), real(0));
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, real value) {
    Tensor t(std::move(shape));
    for (auto& x : t.v_) x = value;
    return t;
  }

  static Tensor from(std::vector<int> shape, std::vector<real> values) {
    Tensor t;
    t.shape_ = std::move(shape);
    ISK_CHECK(static_cast<long long>(values.size()) == checked_size(t.shape_),
              "tensor value count " << values.size() << " does not match shape "
                                    << shape_string(t.shape_));
    t.v_ = std::move(values);
    return t;
  }

  static Tensor scalar(real v) { return from({1}, {v}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const { return static_cast<int>(v_.size()); }
  bool empty() const { return v_.empty(); }

  // Batch-view helpers: rows = extent 0 for rank >= 2, else 1.
  int rows() const { return rank() >= 2 ? shape_[0] : 1; }
  int row_size() const { return rows() == 0 ? 0 : size() / rows(); }

  real* data() { return v_.data(); }
  const real* data() const { return v_.data(); }
  real& operator[](int i) { return v_[static_cast<size_t>(i)]; }
  real operator[](int i) const { return v_[static_cast<size_t>(i)]; }

  real& at(int r, int c) { return v_[static_cast<size_t>(r) * row_size() + c]; }
  real at(int r, int c) const { return v_[static_cast<size_t>(r) * row_size() + c]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (real x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(real v) {
    for (auto& x : v_) x = v;
  }

  std::string shape_str() const { return shape_string(shape_); }

  static std::string shape_string(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  static long long checked_size(const std::vector<int>& shape) {
    long long n = 1;
    for (int e : shape) {
      ISK_CHECK(e > 0, "tensor extent must be positive, got " << shape_string(shape));
      n *= e;
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<real> v_;
};

}  // namespace isk::num
