#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csikd/adam.hpp"
#include "csikd/dataset.hpp"
#include "csikd/io.hpp"
#include "csikd/ops.hpp"
#include "csikd/rng.hpp"
#include "csikd/sha256.hpp"

namespace csikd {

enum class LayerKind : std::uint8_t {
  conv2d,
  dense,
  batch_norm,
  leaky_relu,
  sigmoid,
  concat,
  add,
  scale_gate,
  flatten,
  reshape,
};

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::dense: return "dense";
    case LayerKind::batch_norm: return "batch_norm";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::concat: return "concat";
    case LayerKind::add: return "add";
    case LayerKind::scale_gate: return "scale_gate";
    case LayerKind::flatten: return "flatten";
    case LayerKind::reshape: return "reshape";
  }
  return "?";
}

// One node of the layer DAG. `inputs` are node ids: id 0 is the model
// input, layer i produces node id i+1.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::sigmoid;
  std::vector<int> inputs;
  // conv2d
  int in_ch = 0, out_ch = 0, kh = 0, kw = 0;
  // dense
  int in_len = 0, out_len = 0;
  // batch_norm
  int channels = 0;
  // leaky_relu
  double slope = 0.3;
  // reshape
  Shape target_shape;

  bool operator==(const LayerSpec&) const = default;
};

enum class ModelRole : std::uint8_t { encoder = 0, decoder = 1 };

struct ModelSpec {
  std::string name;
  ModelRole role = ModelRole::encoder;
  Shape input_shape;  // without the batch dimension
  std::vector<LayerSpec> layers;

  bool operator==(const ModelSpec&) const = default;

  // Propagates shapes through the DAG, validating parameters as it goes.
  // Returns the per-node shapes (index 0 is the input).
  std::vector<Shape> propagate_shapes() const {
    std::vector<Shape> shapes(layers.size() + 1);
    shapes[0] = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const LayerSpec& l = layers[i];
      auto in_shape = [&](std::size_t which) -> const Shape& {
        if (which >= l.inputs.size() || l.inputs[which] < 0 ||
            l.inputs[which] > static_cast<int>(i))
          throw std::invalid_argument("layer '" + l.name + "': bad input reference");
        return shapes[static_cast<std::size_t>(l.inputs[which])];
      };
      Shape out;
      switch (l.kind) {
        case LayerKind::conv2d: {
          const Shape& in = in_shape(0);
          if (in.size() != 3 || in[0] != l.in_ch)
            throw std::invalid_argument("layer '" + l.name + "': conv input mismatch, got " +
                                        shape_str(in));
          if (l.in_ch < 1 || l.out_ch < 1 || l.kh < 1 || l.kw < 1)
            throw std::invalid_argument("layer '" + l.name + "': conv parameters incomplete");
          out = {l.out_ch, in[1], in[2]};
          break;
        }
        case LayerKind::dense: {
          const Shape& in = in_shape(0);
          if (in.size() != 1 || in[0] != l.in_len)
            throw std::invalid_argument("layer '" + l.name + "': dense input mismatch, got " +
                                        shape_str(in));
          if (l.in_len < 1 || l.out_len < 1)
            throw std::invalid_argument("layer '" + l.name + "': dense parameters incomplete");
          out = {l.out_len};
          break;
        }
        case LayerKind::batch_norm: {
          const Shape& in = in_shape(0);
          if (in.size() != 3 || in[0] != l.channels)
            throw std::invalid_argument("layer '" + l.name + "': batch_norm channel mismatch");
          out = in;
          break;
        }
        case LayerKind::leaky_relu:
        case LayerKind::sigmoid:
        case LayerKind::scale_gate:
          out = in_shape(0);
          break;
        case LayerKind::concat: {
          const Shape& a = in_shape(0);
          const Shape& b = in_shape(1);
          if (a.size() != 3 || b.size() != 3 || a[1] != b[1] || a[2] != b[2])
            throw std::invalid_argument("layer '" + l.name + "': concat input mismatch");
          out = {a[0] + b[0], a[1], a[2]};
          break;
        }
        case LayerKind::add: {
          if (in_shape(0) != in_shape(1))
            throw std::invalid_argument("layer '" + l.name + "': add input shapes differ");
          out = in_shape(0);
          break;
        }
        case LayerKind::flatten: {
          out = {static_cast<int>(numel(in_shape(0)))};
          break;
        }
        case LayerKind::reshape: {
          if (numel(l.target_shape) != numel(in_shape(0)))
            throw std::invalid_argument("layer '" + l.name + "': reshape element count mismatch");
          out = l.target_shape;
          break;
        }
      }
      shapes[i + 1] = std::move(out);
    }
    return shapes;
  }

  Shape output_shape() const { return propagate_shapes().back(); }
};

// --- JSON serialization (inspection + stable hashing) ----------------------

inline nlohmann::json layer_to_json(const LayerSpec& l) {
  nlohmann::json j{{"name", l.name}, {"kind", layer_kind_name(l.kind)}, {"inputs", l.inputs}};
  switch (l.kind) {
    case LayerKind::conv2d:
      j["in_ch"] = l.in_ch;
      j["out_ch"] = l.out_ch;
      j["kh"] = l.kh;
      j["kw"] = l.kw;
      break;
    case LayerKind::dense:
      j["in_len"] = l.in_len;
      j["out_len"] = l.out_len;
      break;
    case LayerKind::batch_norm:
      j["channels"] = l.channels;
      break;
    case LayerKind::leaky_relu:
      j["slope"] = l.slope;
      break;
    case LayerKind::reshape:
      j["target_shape"] = l.target_shape;
      break;
    default:
      break;
  }
  return j;
}

inline LayerKind layer_kind_from_name(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(LayerKind::reshape); ++k)
    if (s == layer_kind_name(static_cast<LayerKind>(k))) return static_cast<LayerKind>(k);
  throw std::invalid_argument("unknown layer kind: " + s);
}

inline LayerSpec layer_from_json(const nlohmann::json& j) {
  LayerSpec l;
  l.name = j.at("name").get<std::string>();
  l.kind = layer_kind_from_name(j.at("kind").get<std::string>());
  l.inputs = j.at("inputs").get<std::vector<int>>();
  switch (l.kind) {
    case LayerKind::conv2d:
      l.in_ch = j.at("in_ch").get<int>();
      l.out_ch = j.at("out_ch").get<int>();
      l.kh = j.at("kh").get<int>();
      l.kw = j.at("kw").get<int>();
      break;
    case LayerKind::dense:
      l.in_len = j.at("in_len").get<int>();
      l.out_len = j.at("out_len").get<int>();
      break;
    case LayerKind::batch_norm:
      l.channels = j.at("channels").get<int>();
      break;
    case LayerKind::leaky_relu:
      l.slope = j.at("slope").get<double>();
      break;
    case LayerKind::reshape:
      l.target_shape = j.at("target_shape").get<Shape>();
      break;
    default:
      break;
  }
  return l;
}

inline nlohmann::json model_spec_to_json(const ModelSpec& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : m.layers) layers.push_back(layer_to_json(l));
  return {{"name", m.name},
          {"role", m.role == ModelRole::encoder ? "encoder" : "decoder"},
          {"input_shape", m.input_shape},
          {"layers", layers}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.name = j.at("name").get<std::string>();
  m.role = j.at("role").get<std::string>() == "encoder" ? ModelRole::encoder : ModelRole::decoder;
  m.input_shape = j.at("input_shape").get<Shape>();
  for (const auto& lj : j.at("layers")) m.layers.push_back(layer_from_json(lj));
  return m;
}

// Stable digest of the canonical JSON serialization (nlohmann orders keys).
inline std::array<std::uint8_t, 32> spec_hash(const ModelSpec& m) {
  return Sha256::hash(model_spec_to_json(m).dump());
}

// --- Architecture builders -------------------------------------------------

namespace detail {

inline LayerSpec conv(std::string name, int input, int in_ch, int out_ch, int kh, int kw) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::conv2d;
  l.inputs = {input};
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.kh = kh;
  l.kw = kw;
  return l;
}

inline LayerSpec bn(std::string name, int input, int channels) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::batch_norm;
  l.inputs = {input};
  l.channels = channels;
  return l;
}

inline LayerSpec act(std::string name, int input) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::leaky_relu;
  l.inputs = {input};
  l.slope = 0.3;
  return l;
}

inline LayerSpec simple(std::string name, LayerKind kind, std::vector<int> inputs) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = kind;
  l.inputs = std::move(inputs);
  return l;
}

// conv + batch norm + LeakyReLU; returns the id of the activation output.
inline int conv_bn_act(ModelSpec& m, const std::string& base, int input, int in_ch, int out_ch,
                       int kh, int kw) {
  m.layers.push_back(conv(base, input, in_ch, out_ch, kh, kw));
  const int conv_id = static_cast<int>(m.layers.size());
  m.layers.push_back(bn(base + "_bn", conv_id, out_ch));
  const int bn_id = static_cast<int>(m.layers.size());
  m.layers.push_back(act(base + "_act", bn_id));
  return static_cast<int>(m.layers.size());
}

}  // namespace detail

// Lightweight encoder: one 3x3 feature conv (2->2) and a compressing dense
// layer down to the codeword length.
inline ModelSpec build_student_encoder(int n_t, int n_c, int n_s) {
  if (n_t < 1 || n_c < 1 || n_s < 1)
    throw std::invalid_argument("build_student_encoder: dims must be >= 1");
  ModelSpec m;
  m.name = "crnet_se_encoder";
  m.role = ModelRole::encoder;
  m.input_shape = {2, n_t, n_c};
  const int feat = detail::conv_bn_act(m, "conv", 0, 2, 2, 3, 3);
  m.layers.push_back(detail::simple("flatten", LayerKind::flatten, {feat}));
  const int flat = static_cast<int>(m.layers.size());
  LayerSpec fc;
  fc.name = "fc";
  fc.kind = LayerKind::dense;
  fc.inputs = {flat};
  fc.in_len = 2 * n_t * n_c;
  fc.out_len = n_s;
  m.layers.push_back(fc);
  m.propagate_shapes();
  return m;
}

// Multi-resolution encoder: a 3x3 branch and a 1x9/9x1 branch, concatenated
// and merged back to two channels before compression.
inline ModelSpec build_teacher_encoder(int n_t, int n_c, int n_s) {
  if (n_t < 1 || n_c < 1 || n_s < 1)
    throw std::invalid_argument("build_teacher_encoder: dims must be >= 1");
  ModelSpec m;
  m.name = "crnet_encoder";
  m.role = ModelRole::encoder;
  m.input_shape = {2, n_t, n_c};
  const int a_out = detail::conv_bn_act(m, "a_conv", 0, 2, 16, 3, 3);
  const int b1_out = detail::conv_bn_act(m, "b_conv1", 0, 2, 16, 1, 9);
  const int b2_out = detail::conv_bn_act(m, "b_conv2", b1_out, 16, 16, 9, 1);
  m.layers.push_back(detail::simple("cat", LayerKind::concat, {a_out, b2_out}));
  const int cat_id = static_cast<int>(m.layers.size());
  const int merged = detail::conv_bn_act(m, "merge", cat_id, 32, 2, 1, 1);
  m.layers.push_back(detail::simple("flatten", LayerKind::flatten, {merged}));
  const int flat = static_cast<int>(m.layers.size());
  LayerSpec fc;
  fc.name = "fc";
  fc.kind = LayerKind::dense;
  fc.inputs = {flat};
  fc.in_len = 2 * n_t * n_c;
  fc.out_len = n_s;
  m.layers.push_back(fc);
  m.propagate_shapes();
  return m;
}

// Decoder shared by teacher and student: expanding dense layer, 5x5 head
// conv, then two multi-resolution CRBlocks with ReZero-gated skip
// connections, closed by a sigmoid. The final 1x1 merge conv of each block
// carries no batch norm or activation.
inline ModelSpec build_decoder(int n_t, int n_c, int n_s, int crblock_width = 8) {
  if (n_t < 1 || n_c < 1 || n_s < 1)
    throw std::invalid_argument("build_decoder: dims must be >= 1");
  if (crblock_width < 2) throw std::invalid_argument("build_decoder: crblock_width must be >= 2");
  ModelSpec m;
  m.name = "crnet_decoder_w" + std::to_string(crblock_width);
  m.role = ModelRole::decoder;
  m.input_shape = {n_s};
  LayerSpec fc;
  fc.name = "fc";
  fc.kind = LayerKind::dense;
  fc.inputs = {0};
  fc.in_len = n_s;
  fc.out_len = 2 * n_t * n_c;
  m.layers.push_back(fc);
  LayerSpec rs;
  rs.name = "reshape";
  rs.kind = LayerKind::reshape;
  rs.inputs = {static_cast<int>(m.layers.size())};
  rs.target_shape = {2, n_t, n_c};
  m.layers.push_back(rs);
  int cur = detail::conv_bn_act(m, "head", static_cast<int>(m.layers.size()), 2, 2, 5, 5);

  const int w = crblock_width;
  for (int blk = 1; blk <= 2; ++blk) {
    const std::string p = "block" + std::to_string(blk) + "_";
    const int block_in = cur;
    int a = detail::conv_bn_act(m, p + "a1", block_in, 2, w, 3, 3);
    a = detail::conv_bn_act(m, p + "a2", a, w, w, 3, 3);
    int b = detail::conv_bn_act(m, p + "b1", block_in, 2, w, 1, 9);
    b = detail::conv_bn_act(m, p + "b2", b, w, w, 9, 1);
    m.layers.push_back(detail::simple(p + "cat", LayerKind::concat, {a, b}));
    const int cat_id = static_cast<int>(m.layers.size());
    m.layers.push_back(detail::conv(p + "merge", cat_id, 2 * w, 2, 1, 1));
    const int merge_id = static_cast<int>(m.layers.size());
    m.layers.push_back(detail::simple(p + "gate", LayerKind::scale_gate, {merge_id}));
    const int gate_id = static_cast<int>(m.layers.size());
    m.layers.push_back(detail::simple(p + "skip", LayerKind::add, {block_in, gate_id}));
    cur = static_cast<int>(m.layers.size());
  }
  m.layers.push_back(detail::simple("sigmoid", LayerKind::sigmoid, {cur}));
  m.propagate_shapes();
  return m;
}

inline double compression_ratio(const ModelSpec& encoder) {
  if (encoder.role != ModelRole::encoder)
    throw std::invalid_argument("compression_ratio: spec is not an encoder");
  const Shape out = encoder.output_shape();
  return static_cast<double>(numel(out)) / static_cast<double>(numel(encoder.input_shape));
}

// --- Runtime model ----------------------------------------------------------

// A ModelSpec instantiated with parameters and batch-norm state. One Model
// is owned by at most one training run; eval-mode forwards do not mutate.
class Model {
public:
  Model() = default;  // empty shell; assign a real model before use

  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {
    shapes_ = spec_.propagate_shapes();
    layer_params_.resize(spec_.layers.size(), {-1, -1});
    bn_index_.resize(spec_.layers.size(), -1);
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerSpec& l = spec_.layers[i];
      switch (l.kind) {
        case LayerKind::conv2d:
          layer_params_[i].first = add_param(l.name + ".w", {l.out_ch, l.in_ch, l.kh, l.kw});
          layer_params_[i].second = add_param(l.name + ".b", {l.out_ch});
          break;
        case LayerKind::dense:
          layer_params_[i].first = add_param(l.name + ".w", {l.out_len, l.in_len});
          layer_params_[i].second = add_param(l.name + ".b", {l.out_len});
          break;
        case LayerKind::batch_norm:
          layer_params_[i].first = add_param(l.name + ".gamma", {l.channels});
          layer_params_[i].second = add_param(l.name + ".beta", {l.channels});
          bn_index_[i] = static_cast<int>(bn_states_.size());
          bn_states_.emplace_back(l.channels);
          break;
        case LayerKind::scale_gate:
          layer_params_[i].first = add_param(l.name + ".alpha", {1});
          break;
        default:
          break;
      }
    }
  }

  // Glorot-uniform conv/dense weights, zero biases, unit gammas, zero
  // betas, zero ReZero gates. Draw order follows layer order.
  void init_params(Rng& rng) {
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerSpec& l = spec_.layers[i];
      if (l.kind == LayerKind::conv2d || l.kind == LayerKind::dense) {
        const double fan_in = l.kind == LayerKind::conv2d
                                  ? static_cast<double>(l.in_ch) * l.kh * l.kw
                                  : static_cast<double>(l.in_len);
        const double fan_out = l.kind == LayerKind::conv2d
                                   ? static_cast<double>(l.out_ch) * l.kh * l.kw
                                   : static_cast<double>(l.out_len);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : params_[layer_params_[i].first].tensor.values())
          v = rng.uniform(-limit, limit);
        for (double& v : params_[layer_params_[i].second].tensor.values()) v = 0.0;
      } else if (l.kind == LayerKind::batch_norm) {
        for (double& v : params_[layer_params_[i].first].tensor.values()) v = 1.0;
        for (double& v : params_[layer_params_[i].second].tensor.values()) v = 0.0;
      } else if (l.kind == LayerKind::scale_gate) {
        params_[layer_params_[i].first].tensor.values()[0] = 0.0;
      }
    }
    for (BatchNormState& st : bn_states_) {
      std::fill(st.running_mean.begin(), st.running_mean.end(), 0.0);
      std::fill(st.running_var.begin(), st.running_var.end(), 1.0);
    }
  }

  Tensor forward(const Tensor& input, BnMode mode) {
    Shape expect = spec_.input_shape;
    expect.insert(expect.begin(), input.shape().empty() ? 0 : input.shape()[0]);
    if (input.shape() != expect)
      throw std::invalid_argument("model '" + spec_.name + "': input shape " +
                                  shape_str(input.shape()) + " does not match " +
                                  shape_str(expect));
    const int batch = input.shape()[0];
    std::vector<Tensor> acts(spec_.layers.size() + 1);
    acts[0] = input;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
      const LayerSpec& l = spec_.layers[i];
      const Tensor& x = acts[static_cast<std::size_t>(l.inputs[0])];
      switch (l.kind) {
        case LayerKind::conv2d:
          acts[i + 1] = conv2d(x, params_[layer_params_[i].first].tensor,
                               params_[layer_params_[i].second].tensor);
          break;
        case LayerKind::dense:
          acts[i + 1] = dense(x, params_[layer_params_[i].first].tensor,
                              params_[layer_params_[i].second].tensor);
          break;
        case LayerKind::batch_norm:
          acts[i + 1] = batch_norm(x, params_[layer_params_[i].first].tensor,
                                   params_[layer_params_[i].second].tensor,
                                   bn_states_[static_cast<std::size_t>(bn_index_[i])], mode);
          break;
        case LayerKind::leaky_relu:
          acts[i + 1] = leaky_relu(x, l.slope);
          break;
        case LayerKind::sigmoid:
          acts[i + 1] = sigmoid(x);
          break;
        case LayerKind::concat:
          acts[i + 1] = concat_channels(x, acts[static_cast<std::size_t>(l.inputs[1])]);
          break;
        case LayerKind::add:
          acts[i + 1] = add(x, acts[static_cast<std::size_t>(l.inputs[1])]);
          break;
        case LayerKind::scale_gate:
          acts[i + 1] = scale_gate(x, params_[layer_params_[i].first].tensor);
          break;
        case LayerKind::flatten:
          acts[i + 1] = flatten(x);
          break;
        case LayerKind::reshape: {
          Shape s = l.target_shape;
          s.insert(s.begin(), batch);
          acts[i + 1] = reshape(x, s);
          break;
        }
      }
    }
    return acts.back();
  }

  // Forward without building the backward graph (frozen-model inference).
  Tensor forward_nograd(const Tensor& input, BnMode mode) {
    std::vector<bool> saved(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      saved[i] = params_[i].tensor.requires_grad();
      params_[i].tensor.set_requires_grad(false);
    }
    Tensor out;
    try {
      out = forward(input, mode);
    } catch (...) {
      for (std::size_t i = 0; i < params_.size(); ++i)
        params_[i].tensor.set_requires_grad(saved[i]);
      throw;
    }
    for (std::size_t i = 0; i < params_.size(); ++i)
      params_[i].tensor.set_requires_grad(saved[i]);
    return out;
  }

  const ModelSpec& spec() const { return spec_; }
  const std::vector<Shape>& node_shapes() const { return shapes_; }
  std::span<Parameter> parameters() { return params_; }
  const std::vector<Parameter>& parameters_const() const { return params_; }
  std::vector<BatchNormState>& bn_states() { return bn_states_; }
  const std::vector<BatchNormState>& bn_states_const() const { return bn_states_; }
  NormalizationMeta& norm_meta() { return norm_meta_; }
  const NormalizationMeta& norm_meta() const { return norm_meta_; }

  Parameter* find_param(const std::string& name) {
    for (Parameter& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  int codeword_length() const {
    const Shape out = shapes_.back();
    return static_cast<int>(numel(out));
  }

  // Deep copy with fresh graph nodes (parameters in a Model must never
  // alias another Model's nodes).
  Model clone() const {
    Model m(spec_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m.params_[i].tensor.values() = params_[i].tensor.values();
      m.params_[i].m = params_[i].m;
      m.params_[i].v = params_[i].v;
      m.params_[i].step = params_[i].step;
    }
    m.bn_states_ = bn_states_;
    m.norm_meta_ = norm_meta_;
    return m;
  }

private:
  int add_param(std::string name, Shape shape) {
    params_.emplace_back(std::move(name), Tensor::zeros(std::move(shape)));
    return static_cast<int>(params_.size()) - 1;
  }

  ModelSpec spec_;
  std::vector<Shape> shapes_;
  std::vector<Parameter> params_;
  std::vector<std::pair<int, int>> layer_params_;
  std::vector<int> bn_index_;
  std::vector<BatchNormState> bn_states_;
  NormalizationMeta norm_meta_{0.0, 1.0, "unset"};
};

// --- Checkpoints ------------------------------------------------------------
// Format "CSIK" (little-endian): magic | version u32 | spec-hash 32 bytes |
// epoch u64 | best val loss f64 | seed u64 | norm min f64 | norm max f64 |
// array count u64 | per array: name (u32 length + bytes), ndim u32,
// dims u32 each, values f64 each. Arrays cover parameters and batch-norm
// running statistics in model order.

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  std::uint64_t epoch = 0;
  double val_loss = 0.0;
  std::uint64_t seed = 0;
};

inline void save_checkpoint(const Model& model, const std::string& path,
                            const CheckpointMeta& meta = {}) {
  BinaryWriter w(path);
  w.write_magic("CSIK");
  w.write_u32(kCheckpointFormatVersion);
  const auto hash = spec_hash(model.spec());
  w.write_bytes(hash.data(), hash.size());
  w.write_u64(meta.epoch);
  w.write_f64(meta.val_loss);
  w.write_u64(meta.seed);
  w.write_f64(model.norm_meta().global_min);
  w.write_f64(model.norm_meta().global_max);

  std::uint64_t count = model.parameters_const().size();
  for (std::size_t i = 0; i < model.bn_states_const().size(); ++i) count += 2;
  w.write_u64(count);
  auto write_array = [&w](const std::string& name, const Shape& shape,
                          const std::vector<double>& vals) {
    w.write_string(name);
    w.write_u32(static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) w.write_u32(static_cast<std::uint32_t>(d));
    w.write_f64_array(vals);
  };
  for (const Parameter& p : model.parameters_const())
    write_array(p.name, p.tensor.shape(), p.tensor.values());
  int bn_i = 0;
  for (const auto& st : model.bn_states_const()) {
    const int c = static_cast<int>(st.running_mean.size());
    write_array("bn" + std::to_string(bn_i) + ".running_mean", {c}, st.running_mean);
    write_array("bn" + std::to_string(bn_i) + ".running_var", {c}, st.running_var);
    ++bn_i;
  }
  w.close();
}

inline Model load_checkpoint(const ModelSpec& spec, const std::string& path,
                             CheckpointMeta* meta_out = nullptr) {
  BinaryReader r(path);
  r.expect_magic("CSIK", "checkpoint");
  const std::uint32_t version = r.read_u32();
  if (version != kCheckpointFormatVersion)
    throw std::runtime_error("checkpoint format version mismatch: " + std::to_string(version));
  std::array<std::uint8_t, 32> hash;
  r.read_bytes(hash.data(), hash.size());
  if (hash != spec_hash(spec))
    throw std::runtime_error("checkpoint spec hash does not match the provided spec: " + path);
  CheckpointMeta meta;
  meta.epoch = r.read_u64();
  meta.val_loss = r.read_f64();
  meta.seed = r.read_u64();
  Model model(spec);
  model.norm_meta().global_min = r.read_f64();
  model.norm_meta().global_max = r.read_f64();
  model.norm_meta().computed_over = "train";
  const std::uint64_t count = r.read_u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.read_string();
    const std::uint32_t ndim = r.read_u32();
    Shape shape(ndim);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<int>(r.read_u32());
      n *= static_cast<std::size_t>(shape[d]);
    }
    std::vector<double> vals = r.read_f64_array(n);
    if (name.rfind("bn", 0) == 0 &&
        (name.find(".running_mean") != std::string::npos ||
         name.find(".running_var") != std::string::npos)) {
      const std::size_t idx = static_cast<std::size_t>(
          std::stoi(name.substr(2, name.find('.') - 2)));
      if (idx >= model.bn_states().size())
        throw std::runtime_error("checkpoint has unexpected batch-norm state: " + name);
      auto& st = model.bn_states()[idx];
      if (name.find("mean") != std::string::npos)
        st.running_mean = std::move(vals);
      else
        st.running_var = std::move(vals);
    } else {
      Parameter* p = model.find_param(name);
      if (!p) throw std::runtime_error("checkpoint array has no matching parameter: " + name);
      if (p->tensor.shape() != shape)
        throw std::runtime_error("checkpoint array shape mismatch for: " + name);
      p->tensor.values() = std::move(vals);
    }
  }
  if (meta_out) *meta_out = meta;
  return model;
}

// --- Encoder/decoder composition -------------------------------------------

struct Autoencoder {
  Model encoder;
  Model decoder;

  Tensor forward(const Tensor& x, BnMode mode) {
    return decoder.forward(encoder.forward(x, mode), mode);
  }

  Tensor forward_nograd(const Tensor& x, BnMode mode) {
    return decoder.forward_nograd(encoder.forward_nograd(x, mode), mode);
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (Parameter& p : encoder.parameters()) out.push_back(&p);
    for (Parameter& p : decoder.parameters()) out.push_back(&p);
    return out;
  }

  Autoencoder clone() const { return {encoder.clone(), decoder.clone()}; }
};

// Joins an encoder and a decoder; codeword lengths must agree.
inline Autoencoder combine(Model encoder, Model decoder) {
  const int n_s = encoder.codeword_length();
  const Shape dec_in = decoder.spec().input_shape;
  if (dec_in.size() != 1 || dec_in[0] != n_s)
    throw std::invalid_argument("combine: encoder emits " + std::to_string(n_s) +
                                " values but decoder expects " + shape_str(dec_in));
  return {std::move(encoder), std::move(decoder)};
}

}  // namespace csikd
