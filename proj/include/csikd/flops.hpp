#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "csikd/model.hpp"

namespace csikd {

// 2 * H_out * W_out * (C_in * K_H * K_W + 1) * C_out, exact.
inline std::int64_t flops_conv2d(std::int64_t h_out, std::int64_t w_out, std::int64_t c_in,
                                 std::int64_t c_out, std::int64_t k_h, std::int64_t k_w) {
  if (h_out < 1 || w_out < 1 || c_in < 1 || c_out < 1 || k_h < 1 || k_w < 1)
    throw std::invalid_argument("flops_conv2d: all dimensions must be >= 1");
  return 2 * h_out * w_out * (c_in * k_h * k_w + 1) * c_out;
}

// (2 * L_in - 1) * L_out, exact.
inline std::int64_t flops_dense(std::int64_t l_in, std::int64_t l_out) {
  if (l_in < 1 || l_out < 1)
    throw std::invalid_argument("flops_dense: all dimensions must be >= 1");
  return (2 * l_in - 1) * l_out;
}

struct FlopsReport {
  std::string model_name;
  std::vector<std::pair<std::string, std::int64_t>> per_layer;
  std::int64_t total = 0;
};

// Sums conv and dense layer costs; batch norm, activations, and structural
// layers count zero by convention.
inline FlopsReport model_flops(const ModelSpec& spec) {
  const std::vector<Shape> shapes = spec.propagate_shapes();
  FlopsReport report;
  report.model_name = spec.name;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    std::int64_t f = 0;
    if (l.kind == LayerKind::conv2d) {
      const Shape& out = shapes[i + 1];
      f = flops_conv2d(out[1], out[2], l.in_ch, l.out_ch, l.kh, l.kw);
    } else if (l.kind == LayerKind::dense) {
      f = flops_dense(l.in_len, l.out_len);
    }
    report.per_layer.emplace_back(l.name, f);
    report.total += f;
  }
  return report;
}

// Predicted training-cost ratio: epochs * student-autoencoder cost for
// autoencoder distillation over (distill epochs * student encoder cost +
// fine-tune epochs * combined cost) for encoder distillation.
struct TrainingTimeModel {
  std::int64_t n_autoencoder_epochs = 0;
  std::int64_t n_encoder_distill_epochs = 0;
  std::int64_t n_fine_tune_epochs = 0;
  std::int64_t student_encoder_flops = 0;
  std::int64_t student_decoder_flops = 0;
  std::int64_t teacher_decoder_flops = 0;
};

inline double training_time_ratio(const TrainingTimeModel& m) {
  if (m.n_autoencoder_epochs < 1 || m.student_encoder_flops < 1 ||
      m.student_decoder_flops < 1 || m.teacher_decoder_flops < 1)
    throw std::invalid_argument("training_time_ratio: counts must be positive");
  const double t_au = static_cast<double>(m.n_autoencoder_epochs) *
                      static_cast<double>(m.student_encoder_flops + m.student_decoder_flops);
  const double t_en =
      static_cast<double>(m.n_encoder_distill_epochs) * static_cast<double>(m.student_encoder_flops) +
      static_cast<double>(m.n_fine_tune_epochs) *
          static_cast<double>(m.student_encoder_flops + m.teacher_decoder_flops);
  if (t_en <= 0.0) throw std::invalid_argument("training_time_ratio: zero denominator");
  return t_au / t_en;
}

}  // namespace csikd
