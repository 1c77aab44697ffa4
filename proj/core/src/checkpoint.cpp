#include "egpmda/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace egpmda {

using ordered_json = nlohmann::ordered_json;

void ModelConfig::validate() const {
  if (dim <= 0 || layers < 0 || heads <= 0 || conv_k <= 0 || d_b <= 0)
    throw std::invalid_argument("model config: dim/heads/conv_k/d_b must be positive, layers >= 0");
  if (dim % heads != 0)
    throw std::invalid_argument("model config: dim (" + std::to_string(dim) + ") must be divisible by heads (" +
                                std::to_string(heads) + ")");
}

int ModelParams::add(std::string name, Tensor tensor) {
  if (lookup_.contains(name)) throw std::logic_error("duplicate parameter name '" + name + "'");
  const int idx = static_cast<int>(tensors_.size());
  lookup_.emplace(name, idx);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(tensor));
  return idx;
}

int ModelParams::index(const std::string& name) const {
  auto it = lookup_.find(name);
  return it == lookup_.end() ? -1 : it->second;
}

const Tensor& ModelParams::at(const std::string& name) const {
  const int i = index(name);
  if (i < 0) throw std::out_of_range("unknown parameter '" + name + "'");
  return tensors_[static_cast<size_t>(i)];
}

Tensor& ModelParams::at(const std::string& name) {
  const int i = index(name);
  if (i < 0) throw std::out_of_range("unknown parameter '" + name + "'");
  return tensors_[static_cast<size_t>(i)];
}

namespace param_names {

std::string linear_w(const std::string& prefix) { return prefix + ".weight"; }
std::string linear_b(const std::string& prefix) { return prefix + ".bias"; }

std::string qkm(int layer, char which, NodeType type, int head) {
  return "l" + std::to_string(layer) + "." + std::string(1, which) + "." + to_string(type) + ".h" +
         std::to_string(head);
}

std::string att_w(int layer, const MetaRelation& rel, int head) {
  return "l" + std::to_string(layer) + ".att." + rel.key() + ".h" + std::to_string(head) + ".weight";
}

std::string msg_w(int layer, const MetaRelation& rel, int head) {
  return "l" + std::to_string(layer) + ".msg." + rel.key() + ".h" + std::to_string(head) + ".weight";
}

std::string mu(int layer, const MetaRelation& rel, int head) {
  return "l" + std::to_string(layer) + ".mu." + rel.key() + ".h" + std::to_string(head);
}

std::string a_linear(int layer, NodeType type) {
  return "l" + std::to_string(layer) + ".a." + std::string(to_string(type));
}

std::string alpha(int layer, NodeType type) {
  return "l" + std::to_string(layer) + ".alpha." + std::string(to_string(type));
}

}  // namespace param_names

namespace {
constexpr char kMagic[4] = {'E', 'G', 'P', 'C'};
constexpr uint32_t kVersion = 1;
}  // namespace

std::vector<uint8_t> Checkpoint::serialize() const {
  ordered_json header;
  header["format"] = "egpmda-checkpoint";
  header["version"] = kVersion;
  header["config"] = {{"dim", config.dim},
                      {"layers", config.layers},
                      {"heads", config.heads},
                      {"conv_k", config.conv_k},
                      {"d_b", config.d_b},
                      {"use_node_features", config.use_node_features},
                      {"include_mda", config.include_mda},
                      {"seed", config.seed}};
  ordered_json rels = ordered_json::array();
  for (const MetaRelation& rel : shape.relations)
    rels.push_back({{"src", to_string(rel.src)}, {"kind", rel.kind}, {"dst", to_string(rel.dst)}});
  header["shape"] = {{"l_s", shape.l_s}, {"l_m1", shape.l_m1}, {"l_m2", shape.l_m2}, {"relations", std::move(rels)}};
  ordered_json plist = ordered_json::array();
  for (int i = 0; i < params.count(); ++i)
    plist.push_back({{"name", params.name(i)}, {"shape", params.tensor(i).shape()}});
  header["params"] = std::move(plist);

  const std::string header_str = header.dump();
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  const uint32_t version = kVersion;
  const uint64_t header_len = header_str.size();
  out.resize(16);
  std::memcpy(out.data() + 4, &version, sizeof(version));
  std::memcpy(out.data() + 8, &header_len, sizeof(header_len));
  out.insert(out.end(), header_str.begin(), header_str.end());
  for (int i = 0; i < params.count(); ++i) {
    const Tensor& t = params.tensor(i);
    const size_t at = out.size();
    out.resize(at + static_cast<size_t>(t.size()) * sizeof(double));
    std::memcpy(out.data() + at, t.data(), static_cast<size_t>(t.size()) * sizeof(double));
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not an egpmda checkpoint");
  uint32_t version = 0;
  uint64_t header_len = 0;
  std::memcpy(&version, bytes.data() + 4, sizeof(version));
  std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  if (16 + header_len > bytes.size()) throw std::runtime_error("checkpoint truncated");
  const ordered_json header =
      ordered_json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<size_t>(header_len));

  Checkpoint cp;
  const auto& cfg = header.at("config");
  cp.config.dim = cfg.at("dim").get<int64_t>();
  cp.config.layers = cfg.at("layers").get<int64_t>();
  cp.config.heads = cfg.at("heads").get<int64_t>();
  cp.config.conv_k = cfg.at("conv_k").get<int64_t>();
  cp.config.d_b = cfg.at("d_b").get<int64_t>();
  cp.config.use_node_features = cfg.at("use_node_features").get<bool>();
  cp.config.include_mda = cfg.at("include_mda").get<bool>();
  cp.config.seed = cfg.at("seed").get<uint64_t>();
  const auto& sh = header.at("shape");
  cp.shape.l_s = sh.at("l_s").get<int64_t>();
  cp.shape.l_m1 = sh.at("l_m1").get<int64_t>();
  cp.shape.l_m2 = sh.at("l_m2").get<int64_t>();
  for (const auto& r : sh.at("relations")) {
    const auto src = node_type_from(r.at("src").get<std::string>());
    const auto dst = node_type_from(r.at("dst").get<std::string>());
    if (!src || !dst) throw std::runtime_error("checkpoint: unknown node type in relation registry");
    cp.shape.relations.push_back({*src, r.at("kind").get<std::string>(), *dst});
  }

  size_t cursor = 16 + static_cast<size_t>(header_len);
  for (const auto& p : header.at("params")) {
    const auto shape = p.at("shape").get<std::vector<int64_t>>();
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    const size_t need = static_cast<size_t>(n) * sizeof(double);
    if (cursor + need > bytes.size()) throw std::runtime_error("checkpoint truncated in parameter blobs");
    std::vector<double> data(static_cast<size_t>(n));
    std::memcpy(data.data(), bytes.data() + cursor, need);
    cursor += need;
    cp.params.add(p.at("name").get<std::string>(), Tensor::from(shape, std::move(data)));
  }
  return cp;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace egpmda
