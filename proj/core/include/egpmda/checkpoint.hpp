#pragma once
// Named-parameter store and the on-disk checkpoint: a JSON header (config,
// frozen shape, parameter names and shapes) followed by little-endian f64
// blobs, one per parameter, in header order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "egpmda/graph.hpp"
#include "egpmda/tensor.hpp"

namespace egpmda {

struct ModelConfig {
  int64_t dim = 64;
  int64_t layers = 2;
  int64_t heads = 4;
  int64_t conv_k = 8;
  int64_t d_b = 64;
  bool use_node_features = true;
  bool include_mda = false;
  uint64_t seed = 0;

  int64_t head_dim() const { return dim / heads; }
  void validate() const;  // structural checks only (divisibility, positivity)
};

class ModelParams {
 public:
  int add(std::string name, Tensor tensor);
  int64_t count() const { return static_cast<int64_t>(tensors_.size()); }
  const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }
  Tensor& tensor(int i) { return tensors_[static_cast<size_t>(i)]; }
  const Tensor& tensor(int i) const { return tensors_[static_cast<size_t>(i)]; }
  int index(const std::string& name) const;  // -1 when absent
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, int> lookup_;
};

// Data-dependent dimensions frozen when the model is first built.
struct ModelShape {
  int64_t l_s = 0;
  int64_t l_m1 = 0;
  int64_t l_m2 = 0;
  std::vector<MetaRelation> relations;

  int64_t seq_len() const { return l_s + l_m1 + l_m2; }
  bool operator==(const ModelShape&) const = default;
};

namespace param_names {
std::string linear_w(const std::string& prefix);
std::string linear_b(const std::string& prefix);
std::string qkm(int layer, char which, NodeType type, int head);  // 'q','k','m' prefix
std::string att_w(int layer, const MetaRelation& rel, int head);
std::string msg_w(int layer, const MetaRelation& rel, int head);
std::string mu(int layer, const MetaRelation& rel, int head);
std::string a_linear(int layer, NodeType type);
std::string alpha(int layer, NodeType type);
}  // namespace param_names

struct Checkpoint {
  ModelConfig config;
  ModelShape shape;
  ModelParams params;

  std::vector<uint8_t> serialize() const;
  static Checkpoint deserialize(std::span<const uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load_file(const std::filesystem::path& path);
};

}  // namespace egpmda
