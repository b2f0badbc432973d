#include <gtest/gtest.h>

#include "csikd/channel.hpp"
#include "csikd/dft.hpp"
#include "csikd/flops.hpp"
#include "csikd/metrics.hpp"
#include "csikd/model.hpp"

using namespace csikd;

namespace {

// Counts (multiply, add) op pairs by iterating the output tile; the bias is
// one pair per output element, matching the conv convention. Dense layers
// count L_in multiplies and L_in - 1 adds per output, bias excluded.
std::int64_t conv_flops_oracle(int h, int w, int c_in, int c_out, int kh, int kw) {
  std::int64_t ops = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int co = 0; co < c_out; ++co) {
        for (int ci = 0; ci < c_in; ++ci)
          for (int u = 0; u < kh; ++u)
            for (int v = 0; v < kw; ++v) ops += 2;
        ops += 2;  // bias pair
      }
  return ops;
}

std::int64_t dense_flops_oracle(int l_in, int l_out) {
  std::int64_t ops = 0;
  for (int o = 0; o < l_out; ++o) {
    for (int i = 0; i < l_in; ++i) ops += 1;  // multiplies
    ops += l_in - 1;                          // accumulation adds
  }
  return ops;
}

}  // namespace

TEST(Flops, Conv2dFormulaAndOracle) {
  EXPECT_EQ(flops_conv2d(32, 32, 2, 2, 3, 3), 77824);
  EXPECT_EQ(flops_conv2d(1, 1, 1, 1, 1, 1), 4);
  EXPECT_EQ(flops_conv2d(32, 32, 2, 2, 3, 3), conv_flops_oracle(32, 32, 2, 2, 3, 3));
  EXPECT_EQ(flops_conv2d(7, 5, 3, 4, 1, 9), conv_flops_oracle(7, 5, 3, 4, 1, 9));
  EXPECT_THROW(flops_conv2d(0, 1, 1, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(flops_conv2d(1, 1, -2, 1, 1, 1), std::invalid_argument);
}

TEST(Flops, DenseFormulaAndOracle) {
  EXPECT_EQ(flops_dense(2048, 128), 524160);
  EXPECT_EQ(flops_dense(1, 1), 1);
  EXPECT_EQ(flops_dense(2048, 64), 262080);
  EXPECT_EQ(flops_dense(2048, 128), dense_flops_oracle(2048, 128));
  EXPECT_EQ(flops_dense(37, 11), dense_flops_oracle(37, 11));
  EXPECT_THROW(flops_dense(0, 1), std::invalid_argument);
}

TEST(Flops, StudentEncoderMatchesPublishedTotals) {
  // gamma = 1/16
  const FlopsReport r16 = model_flops(build_student_encoder(32, 32, 128));
  EXPECT_EQ(r16.total, 601984);
  // conv contributes 77,824 and the dense layer 524,160
  std::int64_t conv = 0, fc = 0;
  for (const auto& [name, f] : r16.per_layer) {
    if (name == "conv") conv = f;
    if (name == "fc") fc = f;
  }
  EXPECT_EQ(conv, 77824);
  EXPECT_EQ(fc, 524160);
  EXPECT_EQ(conv + fc, r16.total);

  // gamma = 1/32
  EXPECT_EQ(model_flops(build_student_encoder(32, 32, 64)).total, 339904);
}

TEST(Flops, StructuralLayersCountZero) {
  const ModelSpec spec = build_decoder(32, 32, 128, 8);
  const FlopsReport r = model_flops(spec);
  ASSERT_EQ(r.per_layer.size(), spec.layers.size());
  std::int64_t manual = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const bool costed = r.per_layer[i].second > 0;
    const bool is_conv_or_dense = spec.layers[i].kind == LayerKind::conv2d ||
                                  spec.layers[i].kind == LayerKind::dense;
    EXPECT_EQ(costed, is_conv_or_dense) << spec.layers[i].name;
    manual += r.per_layer[i].second;
  }
  EXPECT_EQ(manual, r.total);
}

TEST(Flops, TrainingTimeModel) {
  // fine-tune epochs zero and a dominant decoder: ratio approaches
  // n_au * c_de / (n_en * c_en)
  TrainingTimeModel m;
  m.n_autoencoder_epochs = 100;
  m.n_encoder_distill_epochs = 100;
  m.n_fine_tune_epochs = 0;
  m.student_encoder_flops = 1;
  m.student_decoder_flops = 1000000;
  m.teacher_decoder_flops = 1000000;
  EXPECT_NEAR(training_time_ratio(m), 1000001.0, 1e-6);

  // equal epochs and equal decoders: speedup > 1 whenever fine-tuning is
  // shorter than the autoencoder run
  m.n_fine_tune_epochs = 10;
  m.student_encoder_flops = 600000;
  EXPECT_GT(training_time_ratio(m), 1.0);

  m.n_autoencoder_epochs = 0;
  EXPECT_THROW(training_time_ratio(m), std::invalid_argument);
}

TEST(Nmse, PerfectReconstructionGivesMinusInfSentinel) {
  std::vector<std::vector<double>> h{{1.0, 2.0, 3.0}};
  const NmseResult r = nmse_denormalized(h, h);
  EXPECT_DOUBLE_EQ(r.linear, 0.0);
  EXPECT_TRUE(std::isinf(r.db));
  EXPECT_LT(r.db, 0.0);
  EXPECT_EQ(r.db_string(), "-inf");
}

TEST(Nmse, ZeroReconstructionGivesZeroDb) {
  NormalizationMeta meta{-2.0, 3.0, "train"};
  std::vector<std::vector<double>> ref{{0.1, 0.9, 0.4, 0.7}, {0.25, 0.5, 0.6, 0.3}};
  std::vector<std::vector<double>> rec(2, std::vector<double>(4, meta.normalize(0.0)));
  const NmseResult r = nmse(ref, rec, meta);
  // de-norm(normalize(0)) round trip leaves ~1 ulp of residue
  EXPECT_NEAR(r.linear, 1.0, 1e-12);
  EXPECT_NEAR(r.db, 0.0, 1e-12);
  EXPECT_EQ(r.sample_count, 2u);

  // exact zero reconstruction on the de-normalized path
  std::vector<std::vector<double>> raw{{0.5, -1.25, 2.0}};
  std::vector<std::vector<double>> zero{{0.0, 0.0, 0.0}};
  const NmseResult rz = nmse_denormalized(raw, zero);
  EXPECT_DOUBLE_EQ(rz.linear, 1.0);
  EXPECT_DOUBLE_EQ(rz.db, 0.0);
}

TEST(Nmse, HalfAmplitudeGivesMinusSixDb) {
  NormalizationMeta meta{-1.0, 1.0, "train"};
  Rng rng(31);
  std::vector<std::vector<double>> ref(5, std::vector<double>(16));
  std::vector<std::vector<double>> rec = ref;
  for (std::size_t s = 0; s < ref.size(); ++s)
    for (std::size_t i = 0; i < 16; ++i) {
      ref[s][i] = rng.uniform(0.0, 1.0);
      rec[s][i] = meta.normalize(0.5 * meta.denormalize(ref[s][i]));
    }
  const NmseResult r = nmse(ref, rec, meta);
  EXPECT_NEAR(r.linear, 0.25, 1e-12);
  EXPECT_NEAR(r.db, -6.0206, 1e-3);
}

TEST(Nmse, InvariantUnderGlobalScaling) {
  Rng rng(37);
  std::vector<std::vector<double>> h(4, std::vector<double>(32));
  std::vector<std::vector<double>> hh = h;
  for (auto& row : h)
    for (double& v : row) v = rng.uniform(-2.0, 2.0);
  for (std::size_t s = 0; s < h.size(); ++s)
    for (std::size_t i = 0; i < 32; ++i) hh[s][i] = h[s][i] + rng.uniform(-0.3, 0.3);
  const double base = nmse_denormalized(h, hh).linear;
  for (double c : {3.0, -0.5, 1e-3, 1e4}) {
    auto hs = h, hhs = hh;
    for (auto& row : hs)
      for (double& v : row) v *= c;
    for (auto& row : hhs)
      for (double& v : row) v *= c;
    EXPECT_NEAR(nmse_denormalized(hs, hhs).linear, base, 1e-9 * base);
  }
}

TEST(Nmse, DomainInvarianceUnderUnitaryTransform) {
  ScenarioConfig sc;
  sc.n_tx_antennas = 16;
  sc.n_subcarriers = 16;
  sc.seed = 77;
  std::vector<std::vector<double>> ad_ref, ad_rec, sf_ref, sf_rec;
  Rng noise(41);
  for (int i = 0; i < 6; ++i) {
    Rng rng = Rng::stream(sc.seed, i);
    const PathSet ps = sample_path_set(sc, rng);
    const CsiSample sf = generate_csi(ps, sc);
    const CsiSample ad = to_angular_delay(sf);
    CsiSample ad_noisy = ad;
    for (double& v : ad_noisy.values) v += noise.uniform(-0.05, 0.05);
    const CsiSample sf_noisy = inverse_transform(ad_noisy);
    ad_ref.push_back(ad.values);
    ad_rec.push_back(ad_noisy.values);
    sf_ref.push_back(sf.values);
    sf_rec.push_back(sf_noisy.values);
  }
  const double a = nmse_denormalized(ad_ref, ad_rec).linear;
  const double b = nmse_denormalized(sf_ref, sf_rec).linear;
  EXPECT_NEAR(a, b, 1e-9 * std::max(a, b));
}

TEST(Nmse, DegenerateSamplesExcludedAndCounted) {
  std::vector<std::vector<double>> ref{{1.0, 1.0}, {0.0, 0.0}, {2.0, 0.0}};
  std::vector<std::vector<double>> rec{{1.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
  const NmseResult r = nmse_denormalized(ref, rec);
  EXPECT_EQ(r.sample_count, 2u);
  EXPECT_EQ(r.excluded_count, 1u);
  // all-degenerate batch rejected
  std::vector<std::vector<double>> zed{{0.0}, {0.0}};
  EXPECT_THROW(nmse_denormalized(zed, zed), std::invalid_argument);
  EXPECT_THROW(nmse_denormalized({}, {}), std::invalid_argument);
}
