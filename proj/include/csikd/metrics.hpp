#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csikd/dataset.hpp"

namespace csikd {

struct NmseResult {
  double linear = 0.0;
  double db = 0.0;  // -inf when linear == 0
  std::size_t sample_count = 0;
  std::size_t excluded_count = 0;  // samples with negligible reference energy
  std::string domain = "angular-delay (de-normalized)";

  bool perfect() const { return linear == 0.0; }

  std::string db_string(int decimals = 2) const {
    if (perfect()) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, db);
    return buf;
  }
};

// Mean over samples of |H - Hhat|^2 / |H|^2 on de-normalized values.
// Rows are flattened samples; reference and reconstruction align row-wise.
inline NmseResult nmse_denormalized(const std::vector<std::vector<double>>& reference,
                                    const std::vector<std::vector<double>>& reconstruction) {
  if (reference.size() != reconstruction.size())
    throw std::invalid_argument("nmse: batch size mismatch");
  if (reference.empty()) throw std::invalid_argument("nmse: empty batch");
  NmseResult res;
  double acc = 0.0;
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const auto& h = reference[s];
    const auto& hh = reconstruction[s];
    if (h.size() != hh.size()) throw std::invalid_argument("nmse: sample shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double d = h[i] - hh[i];
      num += d * d;
      den += h[i] * h[i];
    }
    if (den < 1e-30) {
      ++res.excluded_count;
      continue;
    }
    acc += num / den;
    ++res.sample_count;
  }
  if (res.sample_count == 0) throw std::invalid_argument("nmse: every sample degenerate");
  res.linear = acc / static_cast<double>(res.sample_count);
  res.db = res.linear > 0.0 ? 10.0 * std::log10(res.linear)
                            : -std::numeric_limits<double>::infinity();
  return res;
}

// De-normalizes both batches with the meta, then evaluates.
inline NmseResult nmse(const std::vector<std::vector<double>>& reference_normalized,
                       const std::vector<std::vector<double>>& reconstruction_normalized,
                       const NormalizationMeta& meta) {
  meta.validate();
  std::vector<std::vector<double>> ref = reference_normalized;
  std::vector<std::vector<double>> rec = reconstruction_normalized;
  for (auto& row : ref)
    for (double& v : row) v = meta.denormalize(v);
  for (auto& row : rec)
    for (double& v : row) v = meta.denormalize(v);
  return nmse_denormalized(ref, rec);
}

}  // namespace csikd
