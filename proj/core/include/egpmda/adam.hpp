#pragma once
// Bias-corrected Adam over a flat list of named parameter tensors.

#include <cstdint>
#include <vector>

#include "egpmda/tensor.hpp"

namespace egpmda {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config) : config_(config) {}

  // Updates params in place; moment buffers are created lazily on first use.
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

  int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  int64_t step_ = 0;
};

}  // namespace egpmda
