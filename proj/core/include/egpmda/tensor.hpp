#pragma once
// Dense row-major tensor of 64-bit floats. Shapes are small (vectors and
// matrices); everything the model needs fits comfortably in flat arrays.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace egpmda {

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int64_t> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(static_cast<size_t>(product(t.shape_)), 0.0);
    return t;
  }

  static Tensor full(std::vector<int64_t> shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
  }

  static Tensor scalar(double value) { return full({1}, value); }

  static Tensor from(std::vector<int64_t> shape, std::vector<double> data) {
    if (static_cast<int64_t>(data.size()) != product(shape))
      throw std::invalid_argument("Tensor::from: data length does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  int64_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int64_t cols() const {
    if (shape_.size() == 1) return 1;
    return shape_.size() >= 2 ? shape_[1] : 0;
  }

  bool is_scalar() const { return size() == 1; }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  double at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> values() const { return {data_.data(), data_.size()}; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static int64_t product(const std::vector<int64_t>& shape) {
    int64_t p = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      p *= d;
    }
    return p;
  }

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace egpmda
