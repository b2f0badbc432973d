#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csikd/adam.hpp"
#include "csikd/dataset.hpp"
#include "csikd/metrics.hpp"
#include "csikd/model.hpp"

namespace csikd {

// Optimization schedule. Epochs are 1-based; the learning rate drops from
// initial_lr to dropped_lr after lr_drop_epoch epochs, and training stops
// when the validation loss has not improved for `patience` epochs.
struct TrainConfig {
  double initial_lr = 1e-3;
  int lr_drop_epoch = 100;
  double dropped_lr = 1e-4;
  int patience = 50;
  int batch_size = 200;
  int max_epochs = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(dropped_lr > 0.0) || dropped_lr > initial_lr)
      throw std::invalid_argument("train config: need 0 < dropped_lr <= initial_lr");
    if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be >= 2");
    if (max_epochs < 0) throw std::invalid_argument("train config: max_epochs must be >= 0");
  }

  double lr_at(int epoch) const { return epoch <= lr_drop_epoch ? initial_lr : dropped_lr; }

  // Desk-scale defaults: the drop epoch scales proportionally when the
  // epoch budget shrinks below the reference 200.
  static TrainConfig desk(int max_epochs, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.max_epochs = max_epochs;
    cfg.lr_drop_epoch = max_epochs < 200 ? std::max(1, max_epochs / 2) : 100;
    cfg.seed = seed;
    return cfg;
  }
};

struct KdConfig {
  double alpha = 0.3;
  double temperature = 5.0;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("kd config: alpha must be in [0,1]");
    if (!(temperature > 0.0))
      throw std::invalid_argument("kd config: temperature must be > 0");
  }
};

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("initial_lr")) c.initial_lr = j.at("initial_lr").get<double>();
  if (j.contains("lr_drop_epoch")) c.lr_drop_epoch = j.at("lr_drop_epoch").get<int>();
  if (j.contains("dropped_lr")) c.dropped_lr = j.at("dropped_lr").get<double>();
  if (j.contains("patience")) c.patience = j.at("patience").get<int>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("max_epochs")) c.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"initial_lr", c.initial_lr},   {"lr_drop_epoch", c.lr_drop_epoch},
          {"dropped_lr", c.dropped_lr},   {"patience", c.patience},
          {"batch_size", c.batch_size},   {"max_epochs", c.max_epochs},
          {"seed", c.seed}};
}

struct TrainReport {
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  int best_epoch = 0;  // 1-based
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::string stop_reason;
  double wall_seconds = 0.0;
  double final_nmse_linear = std::numeric_limits<double>::quiet_NaN();
  double final_nmse_db = std::numeric_limits<double>::quiet_NaN();

  int epochs_run() const { return static_cast<int>(train_losses.size()); }
};

inline nlohmann::json train_report_to_json(const TrainReport& r) {
  nlohmann::json j{{"best_epoch", r.best_epoch},
                   {"best_val_loss", r.best_val_loss},
                   {"stop_reason", r.stop_reason},
                   {"epochs_run", r.epochs_run()},
                   {"wall_seconds", r.wall_seconds}};
  j["train_losses"] = r.train_losses;
  j["val_losses"] = r.val_losses;
  if (std::isfinite(r.final_nmse_linear)) {
    j["final_nmse_linear"] = r.final_nmse_linear;
    j["final_nmse_db"] = r.final_nmse_db;
  }
  return j;
}

// --- Row views and batching --------------------------------------------------

using RowView = std::vector<const std::vector<double>*>;

enum class Split { train, val, test };

inline RowView split_view(const CsiDataset& ds, Split split) {
  RowView v;
  std::size_t begin = 0, count = ds.n_train;
  if (split == Split::val) {
    begin = ds.n_train;
    count = ds.n_val;
  } else if (split == Split::test) {
    begin = ds.n_train + ds.n_val;
    count = ds.n_test;
  }
  v.reserve(count);
  for (std::size_t i = 0; i < count; ++i) v.push_back(&ds.samples[begin + i].values);
  return v;
}

inline Tensor gather(const RowView& rows, std::span<const std::size_t> idx,
                     const Shape& sample_shape) {
  Shape shape = sample_shape;
  shape.insert(shape.begin(), static_cast<int>(idx.size()));
  const std::size_t n = static_cast<std::size_t>(numel(sample_shape));
  std::vector<double> vals(idx.size() * n);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy(rows[idx[i]]->begin(), rows[idx[i]]->end(), vals.begin() + i * n);
  return Tensor(std::move(shape), std::move(vals));
}

// Fixed evaluation chunk so eval outputs are bit-identical no matter which
// code path computes them.
inline constexpr std::size_t kEvalBatch = 100;

inline std::vector<std::vector<double>> forward_all(Model& model, const RowView& rows,
                                                    const Shape& sample_shape, BnMode mode) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < rows.size(); start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, rows.size() - start);
    Tensor x = gather(rows, std::span<const std::size_t>(idx.data() + start, len), sample_shape);
    Tensor y = model.forward_nograd(x, mode);
    const std::size_t n = y.values().size() / len;
    for (std::size_t i = 0; i < len; ++i)
      out.emplace_back(y.values().begin() + i * n, y.values().begin() + (i + 1) * n);
  }
  return out;
}

inline RowView as_view(const std::vector<std::vector<double>>& rows, std::size_t begin = 0,
                       std::size_t count = SIZE_MAX) {
  RowView v;
  const std::size_t end = std::min(rows.size(), count == SIZE_MAX ? rows.size() : begin + count);
  for (std::size_t i = begin; i < end; ++i) v.push_back(&rows[i]);
  return v;
}

// --- Core epoch loop ----------------------------------------------------------

namespace detail {

inline constexpr std::uint64_t kStreamEncoderInit = 0x45;
inline constexpr std::uint64_t kStreamDecoderInit = 0x44;
inline constexpr std::uint64_t kStreamShuffle = 0x5a;

struct LoopHooks {
  std::function<double(std::span<const std::size_t>, double)> train_batch;
  std::function<double()> validation_loss;
  std::function<void(int, double)> on_best;
};

inline int effective_batch_size(const TrainConfig& cfg, std::size_t n_train) {
  // small desk datasets keep more batches per epoch
  return n_train < 1000 ? std::min(cfg.batch_size, 32) : cfg.batch_size;
}

inline TrainReport run_epoch_loop(std::size_t n_train, const TrainConfig& cfg, int max_epochs,
                                  double fixed_lr, const LoopHooks& hooks) {
  cfg.validate();
  TrainReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  Rng shuffle_rng = Rng::stream(cfg.seed, kStreamShuffle);
  std::vector<std::size_t> idx(n_train);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(effective_batch_size(cfg, n_train));
  rep.stop_reason = "max_epochs";
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    for (std::size_t i = n_train - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.next_u64() % (i + 1);
      std::swap(idx[i], idx[j]);
    }
    const double lr = fixed_lr > 0.0 ? fixed_lr : cfg.lr_at(epoch);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t len = std::min(batch, n_train - start);
      if (len < 2) continue;  // batch-norm train mode needs at least 2
      const double l =
          hooks.train_batch(std::span<const std::size_t>(idx.data() + start, len), lr);
      if (!std::isfinite(l))
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
      loss_sum += l * static_cast<double>(len);
      seen += len;
    }
    rep.train_losses.push_back(seen ? loss_sum / static_cast<double>(seen) : 0.0);
    const double vloss = hooks.validation_loss();
    if (!std::isfinite(vloss))
      throw std::runtime_error("validation diverged at epoch " + std::to_string(epoch));
    rep.val_losses.push_back(vloss);
    if (vloss < rep.best_val_loss) {
      rep.best_val_loss = vloss;
      rep.best_epoch = epoch;
      hooks.on_best(epoch, vloss);
    } else if (epoch - rep.best_epoch >= cfg.patience) {
      rep.stop_reason = "early_stopping";
      break;
    }
  }
  if (max_epochs == 0) rep.stop_reason = "zero_budget";
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline double mse_rows(Model& model, const RowView& inputs, const RowView& targets,
                       const Shape& in_shape) {
  double sq = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> idx(inputs.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < inputs.size(); start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, inputs.size() - start);
    Tensor x = gather(inputs, std::span<const std::size_t>(idx.data() + start, len), in_shape);
    Tensor y = model.forward_nograd(x, BnMode::eval);
    const std::size_t n = y.values().size() / len;
    for (std::size_t i = 0; i < len; ++i) {
      const auto& t = *targets[start + i];
      for (std::size_t k = 0; k < n; ++k) {
        const double d = y.values()[i * n + k] - t[k];
        sq += d * d;
      }
      count += n;
    }
  }
  return sq / static_cast<double>(count);
}

inline double mse_rows_autoencoder(Autoencoder& ae, const RowView& inputs, const Shape& in_shape) {
  double sq = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> idx(inputs.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < inputs.size(); start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, inputs.size() - start);
    Tensor x = gather(inputs, std::span<const std::size_t>(idx.data() + start, len), in_shape);
    Tensor y = ae.forward_nograd(x, BnMode::eval);
    for (std::size_t k = 0; k < y.values().size(); ++k) {
      const double d = y.values()[k] - x.values()[k];
      sq += d * d;
    }
    count += y.values().size();
  }
  return sq / static_cast<double>(count);
}

}  // namespace detail

// Deterministic construction: encoder and decoder parameters come from
// fixed per-component substreams of the seed.
inline Autoencoder make_autoencoder(const ModelSpec& enc_spec, const ModelSpec& dec_spec,
                                    std::uint64_t seed, const NormalizationMeta& meta) {
  Autoencoder ae = combine(Model(enc_spec), Model(dec_spec));
  Rng enc_rng = Rng::stream(seed, detail::kStreamEncoderInit);
  Rng dec_rng = Rng::stream(seed, detail::kStreamDecoderInit);
  ae.encoder.init_params(enc_rng);
  ae.decoder.init_params(dec_rng);
  ae.encoder.norm_meta() = meta;
  ae.decoder.norm_meta() = meta;
  return ae;
}

inline Model make_encoder(const ModelSpec& spec, std::uint64_t seed,
                          const NormalizationMeta& meta) {
  Model m(spec);
  Rng rng = Rng::stream(seed, detail::kStreamEncoderInit);
  m.init_params(rng);
  m.norm_meta() = meta;
  return m;
}

// Dataset rows translated into the model's normalization space (clamped to
// [0,1]); a bitwise copy when the metas already agree.
inline std::vector<std::vector<double>> to_model_space(const RowView& rows,
                                                       const NormalizationMeta& data_meta,
                                                       const NormalizationMeta& model_meta) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  const bool same = data_meta == model_meta;
  for (const auto* r : rows) {
    out.push_back(*r);
    if (!same)
      for (double& v : out.back())
        v = std::clamp(model_meta.normalize(data_meta.denormalize(v)), 0.0, 1.0);
  }
  return out;
}

// Test-split NMSE of an autoencoder, computed on de-normalized CSI. The
// reference is the dataset's truth; inputs are translated into the model's
// normalization space when the two metas differ.
inline NmseResult evaluate_autoencoder(Autoencoder& ae, const CsiDataset& ds,
                                       Split split = Split::test) {
  const Shape in_shape{2, ds.scenario.n_tx_antennas, ds.scenario.n_subcarriers};
  const RowView rows = split_view(ds, split);
  const NormalizationMeta& model_meta = ae.encoder.norm_meta();
  const auto inputs = to_model_space(rows, ds.meta, model_meta);

  std::vector<std::vector<double>> rec;
  {
    const RowView in_view = as_view(inputs);
    std::vector<std::size_t> idx(in_view.size());
    std::iota(idx.begin(), idx.end(), 0);
    rec.reserve(in_view.size());
    for (std::size_t start = 0; start < in_view.size(); start += kEvalBatch) {
      const std::size_t len = std::min(kEvalBatch, in_view.size() - start);
      Tensor x = gather(in_view, std::span<const std::size_t>(idx.data() + start, len), in_shape);
      Tensor y = ae.forward_nograd(x, BnMode::eval);
      const std::size_t n = y.values().size() / len;
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> row(y.values().begin() + i * n, y.values().begin() + (i + 1) * n);
        for (double& v : row) v = model_meta.denormalize(v);
        rec.push_back(std::move(row));
      }
    }
  }
  std::vector<std::vector<double>> ref;
  ref.reserve(rows.size());
  for (const auto* r : rows) {
    ref.push_back(*r);
    for (double& v : ref.back()) v = ds.meta.denormalize(v);
  }
  return nmse_denormalized(ref, rec);
}

// --- Vanilla and autoencoder-distillation training ---------------------------

struct AutoencoderResult {
  Autoencoder model;
  TrainReport report;
  CheckpointMeta meta;
};

namespace detail {

// Shared loop for vanilla MSE training and the combined-loss distillation;
// soft targets are nullopt for vanilla and for alpha == 1, where the loss
// reduces to the plain reconstruction MSE bitwise.
inline AutoencoderResult train_autoencoder_mse(
    Autoencoder ae, const CsiDataset& ds, const TrainConfig& cfg, int max_epochs,
    double fixed_lr, const std::optional<KdConfig>& kd,
    const std::vector<std::vector<double>>* teacher_soft_targets) {
  const Shape in_shape{2, ds.scenario.n_tx_antennas, ds.scenario.n_subcarriers};
  const RowView train_rows = split_view(ds, Split::train);
  const RowView val_rows = split_view(ds, Split::val);
  auto params = ae.parameters();
  Autoencoder best = ae.clone();
  const bool distilling = kd.has_value() && kd->alpha < 1.0;

  LoopHooks hooks;
  hooks.train_batch = [&](std::span<const std::size_t> idx, double lr) {
    Tensor x = gather(train_rows, idx, in_shape);
    Tensor out = ae.forward(x, BnMode::train);
    Tensor loss;
    if (!distilling) {
      loss = mse_loss(out, x);
    } else if (kd->alpha == 0.0) {
      Tensor ps = softmax_t(flatten(out), kd->temperature);
      Tensor pt = gather(as_view(*teacher_soft_targets), idx,
                         {static_cast<int>((*teacher_soft_targets)[0].size())});
      loss = soft_cross_entropy(pt, ps);
    } else {
      Tensor h1 = mse_loss(out, x);
      Tensor ps = softmax_t(flatten(out), kd->temperature);
      Tensor pt = gather(as_view(*teacher_soft_targets), idx,
                         {static_cast<int>((*teacher_soft_targets)[0].size())});
      Tensor h2 = soft_cross_entropy(pt, ps);
      loss = add(mul_scalar(h1, kd->alpha), mul_scalar(h2, 1.0 - kd->alpha));
    }
    loss.backward();
    adam_step(params, lr);
    zero_grads(params);
    return loss.item();
  };
  hooks.validation_loss = [&] { return mse_rows_autoencoder(ae, val_rows, in_shape); };
  hooks.on_best = [&](int, double) { best = ae.clone(); };

  AutoencoderResult res;
  res.report = run_epoch_loop(train_rows.size(), cfg, max_epochs, fixed_lr, hooks);
  res.model = res.report.best_epoch > 0 ? std::move(best) : ae.clone();
  res.meta = {static_cast<std::uint64_t>(res.report.best_epoch), res.report.best_val_loss,
              cfg.seed};
  const NmseResult n = evaluate_autoencoder(res.model, ds);
  res.report.final_nmse_linear = n.linear;
  res.report.final_nmse_db = n.db;
  return res;
}

}  // namespace detail

// Plain MSE training from the given initial weights.
inline AutoencoderResult train_vanilla(Autoencoder ae, const CsiDataset& ds,
                                       const TrainConfig& cfg) {
  return detail::train_autoencoder_mse(std::move(ae), ds, cfg, cfg.max_epochs, -1.0,
                                       std::nullopt, nullptr);
}

// Combined-loss distillation: alpha * mse(truth, student) +
// (1-alpha) * soft cross entropy between temperature-softened teacher and
// student reconstructions. The teacher is frozen; its reconstructions are
// computed once up front in eval mode.
inline AutoencoderResult distill_autoencoder(Autoencoder& teacher, Autoencoder student,
                                             const CsiDataset& ds, const TrainConfig& cfg,
                                             const KdConfig& kd) {
  kd.validate();
  std::vector<std::vector<double>> soft_targets;
  if (kd.alpha < 1.0) {
    const Shape in_shape{2, ds.scenario.n_tx_antennas, ds.scenario.n_subcarriers};
    const RowView train_rows = split_view(ds, Split::train);
    std::vector<std::size_t> idx(train_rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    soft_targets.reserve(train_rows.size());
    for (std::size_t start = 0; start < train_rows.size(); start += kEvalBatch) {
      const std::size_t len = std::min(kEvalBatch, train_rows.size() - start);
      Tensor x = gather(train_rows, std::span<const std::size_t>(idx.data() + start, len),
                        in_shape);
      Tensor z = teacher.forward_nograd(x, BnMode::eval);
      const std::size_t n = z.values().size() / len;
      for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> row(z.values().begin() + i * n, z.values().begin() + (i + 1) * n);
        // temperature softmax of the flattened teacher reconstruction
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        double zsum = 0.0;
        for (double& v : row) {
          v = std::exp((v - mx) / kd.temperature);
          zsum += v;
        }
        for (double& v : row) v /= zsum;
        soft_targets.push_back(std::move(row));
      }
    }
  }
  return detail::train_autoencoder_mse(std::move(student), ds, cfg, cfg.max_epochs, -1.0, kd,
                                       soft_targets.empty() ? nullptr : &soft_targets);
}

// Short end-to-end MSE fine-tune at the dropped learning rate.
inline AutoencoderResult fine_tune_end_to_end(Autoencoder ae, const CsiDataset& ds,
                                              const TrainConfig& cfg, int epochs_budget) {
  if (epochs_budget < 0) throw std::invalid_argument("fine_tune: negative budget");
  if (epochs_budget == 0) {
    AutoencoderResult res{std::move(ae), {}, {}};
    res.report.stop_reason = "zero_budget";
    const NmseResult n = evaluate_autoencoder(res.model, ds);
    res.report.final_nmse_linear = n.linear;
    res.report.final_nmse_db = n.db;
    res.meta = {0, res.report.best_val_loss, cfg.seed};
    return res;
  }
  return detail::train_autoencoder_mse(std::move(ae), ds, cfg, epochs_budget, cfg.dropped_lr,
                                       std::nullopt, nullptr);
}

// --- Encoder distillation and the pair-dataset protocol ----------------------

// CSI rows paired with the codewords some encoder produced for them. CSI is
// stored in the producer's normalization space; min/max travel with the
// file so the consumer can normalize deployment inputs identically.
struct CodewordPairDataset {
  int n_t = 0;
  int n_c = 0;
  int n_s = 0;
  std::string producer;  // "teacher_encoder" or "student_encoder"
  NormalizationMeta norm;
  std::vector<std::vector<double>> csi;
  std::vector<std::vector<double>> codewords;

  std::size_t size() const { return csi.size(); }

  void validate() const {
    if (csi.size() != codewords.size())
      throw std::invalid_argument("pair dataset: csi/codeword count mismatch");
    for (const auto& c : codewords)
      if (static_cast<int>(c.size()) != n_s)
        throw std::invalid_argument("pair dataset: codeword length mismatch");
  }
};

enum class PairSubset { all, train_val };

// Encodes dataset CSI (translated into the encoder's normalization space)
// and returns the aligned (CSI, codeword) rows.
inline CodewordPairDataset generate_codeword_pairs(Model& encoder, const CsiDataset& ds,
                                                   PairSubset subset = PairSubset::all) {
  CodewordPairDataset pairs;
  pairs.n_t = ds.scenario.n_tx_antennas;
  pairs.n_c = ds.scenario.n_subcarriers;
  pairs.n_s = encoder.codeword_length();
  pairs.producer = encoder.spec().name.find("crnet_se") != std::string::npos
                       ? "student_encoder"
                       : "teacher_encoder";
  pairs.norm = encoder.norm_meta();

  RowView rows = split_view(ds, Split::train);
  const RowView val_rows = split_view(ds, Split::val);
  rows.insert(rows.end(), val_rows.begin(), val_rows.end());
  if (subset == PairSubset::all) {
    const RowView test_rows = split_view(ds, Split::test);
    rows.insert(rows.end(), test_rows.begin(), test_rows.end());
  }
  pairs.csi = to_model_space(rows, ds.meta, encoder.norm_meta());
  const Shape in_shape{2, pairs.n_t, pairs.n_c};
  pairs.codewords = forward_all(encoder, as_view(pairs.csi), in_shape, BnMode::eval);
  return pairs;
}

// Re-encodes existing pair CSI with another encoder (the UE-side step of
// the pair exchange: no dataset access, only received rows).
inline CodewordPairDataset reencode_pairs(Model& encoder, const CodewordPairDataset& src) {
  CodewordPairDataset pairs;
  pairs.n_t = src.n_t;
  pairs.n_c = src.n_c;
  pairs.n_s = encoder.codeword_length();
  pairs.producer = "student_encoder";
  pairs.norm = src.norm;
  pairs.csi = src.csi;
  const Shape in_shape{2, pairs.n_t, pairs.n_c};
  pairs.codewords = forward_all(encoder, as_view(pairs.csi), in_shape, BnMode::eval);
  return pairs;
}

struct EncoderResult {
  Model model;
  TrainReport report;
  CheckpointMeta meta;
};

namespace detail {

// Codeword regression shared by teacher-driven distillation and
// pair-dataset training. Targets are fixed rows; the loss is the codeword
// MSE.
inline EncoderResult train_encoder_regression(Model enc, const RowView& csi_train,
                                              const RowView& code_train, const RowView& csi_val,
                                              const RowView& code_val, const TrainConfig& cfg,
                                              int max_epochs, double fixed_lr) {
  const Shape in_shape = enc.spec().input_shape;
  const Shape code_shape = enc.node_shapes().back();
  auto params = enc.parameters();
  Model best = enc.clone();

  LoopHooks hooks;
  hooks.train_batch = [&](std::span<const std::size_t> idx, double lr) {
    Tensor x = gather(csi_train, idx, in_shape);
    Tensor target = gather(code_train, idx, code_shape);
    Tensor out = enc.forward(x, BnMode::train);
    Tensor loss = mse_loss(out, target);
    loss.backward();
    adam_step(params, lr);
    zero_grads(params);
    return loss.item();
  };
  hooks.validation_loss = [&] { return mse_rows(enc, csi_val, code_val, in_shape); };
  hooks.on_best = [&](int, double) { best = enc.clone(); };

  EncoderResult res;
  res.report = run_epoch_loop(csi_train.size(), cfg, max_epochs, fixed_lr, hooks);
  res.model = res.report.best_epoch > 0 ? std::move(best) : enc.clone();
  res.meta = {static_cast<std::uint64_t>(res.report.best_epoch), res.report.best_val_loss,
              cfg.seed};
  return res;
}

}  // namespace detail

inline EncoderResult train_encoder_on_pairs(Model student_encoder,
                                            const CodewordPairDataset& pairs,
                                            const TrainConfig& cfg, std::size_t n_val);

// Codeword-matching distillation: the frozen teacher encoder labels the
// training and validation CSI once, then the student regresses the labels.
// Runs on the same path as pair training, so the two are bit-identical
// when the pair dataset enumerates the same samples.
inline EncoderResult distill_encoder(Model& teacher_encoder, Model student_encoder,
                                     const CsiDataset& ds, const TrainConfig& cfg) {
  if (teacher_encoder.codeword_length() != student_encoder.codeword_length())
    throw std::invalid_argument("distill_encoder: codeword lengths differ");
  const CodewordPairDataset pairs =
      generate_codeword_pairs(teacher_encoder, ds, PairSubset::train_val);
  return train_encoder_on_pairs(std::move(student_encoder), pairs, cfg, ds.n_val);
}

// Pair-dataset variant: consumes only the received pairs — no teacher
// model is reachable from this call. The trailing n_val pairs are held out
// for early stopping.
inline EncoderResult train_encoder_on_pairs(Model student_encoder,
                                            const CodewordPairDataset& pairs,
                                            const TrainConfig& cfg, std::size_t n_val = 0) {
  pairs.validate();
  if (static_cast<int>(pairs.n_s) != student_encoder.codeword_length())
    throw std::invalid_argument("train_encoder_on_pairs: codeword length mismatch");
  if (n_val == 0) n_val = pairs.size() / 5;
  if (n_val == 0 || n_val >= pairs.size())
    throw std::invalid_argument("train_encoder_on_pairs: bad validation split");
  const std::size_t n_train = pairs.size() - n_val;
  student_encoder.norm_meta() = pairs.norm;
  return detail::train_encoder_regression(
      std::move(student_encoder), as_view(pairs.csi, 0, n_train),
      as_view(pairs.codewords, 0, n_train), as_view(pairs.csi, n_train, n_val),
      as_view(pairs.codewords, n_train, n_val), cfg, cfg.max_epochs, -1.0);
}

// Decoder-side fine-tune against (codeword -> CSI) pairs produced by the
// deployed student encoder; the encoder itself is never touched.
inline EncoderResult fine_tune_decoder_only(Model decoder, const CodewordPairDataset& pairs,
                                            const TrainConfig& cfg, int epochs_budget,
                                            std::size_t n_val = 0) {
  pairs.validate();
  const Shape dec_in = decoder.spec().input_shape;
  if (dec_in.size() != 1 || dec_in[0] != pairs.n_s)
    throw std::invalid_argument("fine_tune_decoder_only: codeword length mismatch");
  if (epochs_budget < 0) throw std::invalid_argument("fine_tune_decoder_only: negative budget");
  if (n_val == 0) n_val = pairs.size() / 5;
  if (n_val == 0 || n_val >= pairs.size())
    throw std::invalid_argument("fine_tune_decoder_only: bad validation split");
  if (epochs_budget == 0) {
    EncoderResult res{decoder.clone(), {}, {}};
    res.report.stop_reason = "zero_budget";
    res.meta = {0, res.report.best_val_loss, cfg.seed};
    return res;
  }
  const std::size_t n_train = pairs.size() - n_val;
  // swap roles: codewords are the inputs, CSI rows the regression targets
  return detail::train_encoder_regression(
      std::move(decoder), as_view(pairs.codewords, 0, n_train), as_view(pairs.csi, 0, n_train),
      as_view(pairs.codewords, n_train, n_val), as_view(pairs.csi, n_train, n_val), cfg,
      epochs_budget, cfg.dropped_lr);
}

// --- Protocol orchestrations --------------------------------------------------

struct VariantKdResult {
  EncoderResult student;
  EncoderResult decoder;
  CodewordPairDataset pairs_teacher;
  CodewordPairDataset pairs_student;
  double total_wall_seconds = 0.0;
};

// Intellectual-property-preserving exchange: only (CSI, codeword) pair
// datasets cross the boundary. The student side sees pairs_teacher and its
// own architecture; the decoder side sees pairs_student and the decoder.
inline VariantKdResult run_variant_encoder_kd(Autoencoder& teacher, Model student_encoder,
                                              const CsiDataset& ds, const TrainConfig& cfg,
                                              int fine_tune_budget) {
  VariantKdResult res;
  res.pairs_teacher = generate_codeword_pairs(teacher.encoder, ds, PairSubset::train_val);
  res.student = train_encoder_on_pairs(std::move(student_encoder), res.pairs_teacher, cfg,
                                       ds.n_val);
  res.pairs_student = reencode_pairs(res.student.model, res.pairs_teacher);
  res.decoder = fine_tune_decoder_only(teacher.decoder.clone(), res.pairs_student, cfg,
                                       fine_tune_budget, ds.n_val);
  res.total_wall_seconds = res.student.report.wall_seconds + res.decoder.report.wall_seconds;
  return res;
}

struct SequentialResult {
  AutoencoderResult bs_autoencoder;
  EncoderResult deploy_encoder;
  CodewordPairDataset pairs;
  bool bs_pretrained = false;
};

// BS-first sequential training: the BS trains its full autoencoder, emits
// one pair dataset from its encoder, and the deploy-side encoder regresses
// the pairs. No decoder fine-tune follows.
inline SequentialResult run_sequential_training(Autoencoder bs_autoencoder,
                                                Model deploy_encoder, const CsiDataset& ds,
                                                const TrainConfig& cfg,
                                                bool bs_is_pretrained = false) {
  SequentialResult res;
  res.bs_pretrained = bs_is_pretrained;
  if (bs_is_pretrained) {
    res.bs_autoencoder = {std::move(bs_autoencoder), {}, {}};
    res.bs_autoencoder.report.stop_reason = "pretrained";
  } else {
    res.bs_autoencoder = train_vanilla(std::move(bs_autoencoder), ds, cfg);
  }
  res.pairs = generate_codeword_pairs(res.bs_autoencoder.model.encoder, ds,
                                      PairSubset::train_val);
  res.deploy_encoder = train_encoder_on_pairs(std::move(deploy_encoder), res.pairs, cfg,
                                              ds.n_val);
  return res;
}

// --- Pair-dataset file format --------------------------------------------------
// "CSIP" (little-endian): magic | version u32 | n_s u32 | producer tag u8
// (0 teacher, 1 student) | pair count u64 | n_t u32 | n_c u32 |
// norm min f64 | norm max f64 | payload per pair: CSI plane block
// (2*n_t*n_c f64) then codeword block (n_s f64).

inline constexpr std::uint32_t kPairFormatVersion = 1;

inline void save_pairs(const CodewordPairDataset& pairs, const std::string& path) {
  pairs.validate();
  BinaryWriter w(path);
  w.write_magic("CSIP");
  w.write_u32(kPairFormatVersion);
  w.write_u32(static_cast<std::uint32_t>(pairs.n_s));
  w.write_u8(pairs.producer == "student_encoder" ? 1 : 0);
  w.write_u64(pairs.size());
  w.write_u32(static_cast<std::uint32_t>(pairs.n_t));
  w.write_u32(static_cast<std::uint32_t>(pairs.n_c));
  w.write_f64(pairs.norm.global_min);
  w.write_f64(pairs.norm.global_max);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    w.write_f64_array(pairs.csi[i]);
    w.write_f64_array(pairs.codewords[i]);
  }
}

inline CodewordPairDataset load_pairs(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("CSIP", "pair dataset");
  const std::uint32_t version = r.read_u32();
  if (version != kPairFormatVersion)
    throw std::runtime_error("pair dataset version mismatch: " + std::to_string(version));
  CodewordPairDataset pairs;
  pairs.n_s = static_cast<int>(r.read_u32());
  pairs.producer = r.read_u8() == 1 ? "student_encoder" : "teacher_encoder";
  const std::uint64_t count = r.read_u64();
  pairs.n_t = static_cast<int>(r.read_u32());
  pairs.n_c = static_cast<int>(r.read_u32());
  pairs.norm.global_min = r.read_f64();
  pairs.norm.global_max = r.read_f64();
  pairs.norm.computed_over = "train";
  const std::size_t csi_len = 2 * static_cast<std::size_t>(pairs.n_t) * pairs.n_c;
  pairs.csi.reserve(count);
  pairs.codewords.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    pairs.csi.push_back(r.read_f64_array(csi_len));
    pairs.codewords.push_back(r.read_f64_array(static_cast<std::size_t>(pairs.n_s)));
  }
  return pairs;
}

}  // namespace csikd
