#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csikd/channel.hpp"
#include "csikd/dft.hpp"
#include "csikd/io.hpp"

namespace csikd {

// Min-max extrema of the training split; normalization maps the training
// minimum to 0 and maximum to 1.
struct NormalizationMeta {
  double global_min = 0.0;
  double global_max = 1.0;
  std::string computed_over = "train";

  void validate() const {
    if (!(global_max > global_min))
      throw std::invalid_argument("normalization meta: max must exceed min");
  }

  double normalize(double x) const { return (x - global_min) / (global_max - global_min); }
  double denormalize(double x) const { return x * (global_max - global_min) + global_min; }

  bool operator==(const NormalizationMeta&) const = default;
};

// Normalized angular-delay CSI samples plus the provenance needed to
// regenerate or reinterpret them. Samples are stored train, then val,
// then test.
struct CsiDataset {
  std::vector<CsiSample> samples;
  NormalizationMeta meta;
  ScenarioConfig scenario;
  std::uint64_t n_train = 0;
  std::uint64_t n_val = 0;
  std::uint64_t n_test = 0;
  std::uint64_t clamped_val = 0;   // entries clipped to [0,1] in the val split
  std::uint64_t clamped_test = 0;  // entries clipped to [0,1] in the test split

  std::size_t size() const { return samples.size(); }

  const CsiSample& train(std::size_t i) const { return samples[i]; }
  const CsiSample& val(std::size_t i) const { return samples[n_train + i]; }
  const CsiSample& test(std::size_t i) const { return samples[n_train + n_val + i]; }

  bool operator==(const CsiDataset& o) const {
    if (!(meta == o.meta && scenario == o.scenario && n_train == o.n_train &&
          n_val == o.n_val && n_test == o.n_test && samples.size() == o.samples.size()))
      return false;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].values != o.samples[i].values) return false;
    return true;
  }
};

// Generates counts.train + counts.val + counts.test samples, each from its
// own (seed, index) stream, transforms them to the angular-delay domain,
// and min-max normalizes with training-split extrema. Val/test entries
// falling outside [0,1] are clamped and counted.
struct SplitCounts {
  std::uint64_t train = 0;
  std::uint64_t val = 0;
  std::uint64_t test = 0;
};

inline CsiSample generate_angular_delay_sample(const ScenarioConfig& sc, std::uint64_t index) {
  Rng rng = Rng::stream(sc.seed, index);
  const PathSet ps = sample_path_set(sc, rng);
  return to_angular_delay(generate_csi(ps, sc));
}

inline CsiDataset build_dataset(const ScenarioConfig& sc, const SplitCounts& counts) {
  sc.validate();
  if (counts.train < 1 || counts.val < 1 || counts.test < 1)
    throw std::invalid_argument("build_dataset: each split needs at least one sample");
  CsiDataset ds;
  ds.scenario = sc;
  ds.n_train = counts.train;
  ds.n_val = counts.val;
  ds.n_test = counts.test;
  const std::uint64_t total = counts.train + counts.val + counts.test;
  ds.samples.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i)
    ds.samples.push_back(generate_angular_delay_sample(sc, i));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < counts.train; ++i)
    for (double v : ds.samples[i].values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  ds.meta = {lo, hi, "train"};
  ds.meta.validate();

  for (std::uint64_t i = 0; i < total; ++i) {
    const bool is_val = i >= counts.train && i < counts.train + counts.val;
    const bool is_test = i >= counts.train + counts.val;
    for (double& v : ds.samples[i].values) {
      double x = ds.meta.normalize(v);
      if (x < 0.0 || x > 1.0) {
        if (is_val) ++ds.clamped_val;
        if (is_test) ++ds.clamped_test;
        x = std::clamp(x, 0.0, 1.0);
      }
      v = x;
    }
    ds.samples[i].normalized = true;
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Binary format "CSID" (little-endian):
//   magic "CSID" | version u32 | n_t u32 | n_c u32 | split sizes 3xu64 |
//   norm min f64 | norm max f64 | scenario block (fields in declaration
//   order) | clamp counts 2xu64 | payload: samples as f64 planes in
//   (sample, plane, antenna, subcarrier) order.
// A JSON sidecar at <path>.json duplicates the header for inspection.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

namespace detail {

inline void write_scenario(BinaryWriter& w, const ScenarioConfig& sc) {
  w.write_u32(static_cast<std::uint32_t>(sc.n_tx_antennas));
  w.write_u32(static_cast<std::uint32_t>(sc.n_subcarriers));
  w.write_u32(static_cast<std::uint32_t>(sc.n_clusters));
  w.write_u32(static_cast<std::uint32_t>(sc.n_subpaths_per_cluster));
  w.write_f64(sc.center_frequency);
  w.write_f64(sc.bandwidth);
  w.write_f64(sc.antenna_spacing_over_wavelength);
  w.write_u8(sc.los ? 1 : 0);
  w.write_f64(sc.rician_k_factor_db);
  w.write_f64(sc.angle_spread);
  w.write_f64(sc.max_delay);
  w.write_u64(sc.seed);
}

inline ScenarioConfig read_scenario(BinaryReader& r) {
  ScenarioConfig sc;
  sc.n_tx_antennas = static_cast<int>(r.read_u32());
  sc.n_subcarriers = static_cast<int>(r.read_u32());
  sc.n_clusters = static_cast<int>(r.read_u32());
  sc.n_subpaths_per_cluster = static_cast<int>(r.read_u32());
  sc.center_frequency = r.read_f64();
  sc.bandwidth = r.read_f64();
  sc.antenna_spacing_over_wavelength = r.read_f64();
  sc.los = r.read_u8() != 0;
  sc.rician_k_factor_db = r.read_f64();
  sc.angle_spread = r.read_f64();
  sc.max_delay = r.read_f64();
  sc.seed = r.read_u64();
  return sc;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const ScenarioConfig& sc) {
  return {{"n_tx_antennas", sc.n_tx_antennas},
          {"n_subcarriers", sc.n_subcarriers},
          {"n_clusters", sc.n_clusters},
          {"n_subpaths_per_cluster", sc.n_subpaths_per_cluster},
          {"center_frequency", sc.center_frequency},
          {"bandwidth", sc.bandwidth},
          {"antenna_spacing_over_wavelength", sc.antenna_spacing_over_wavelength},
          {"los", sc.los},
          {"rician_k_factor_db", sc.rician_k_factor_db},
          {"angle_spread", sc.angle_spread},
          {"max_delay", sc.max_delay},
          {"seed", sc.seed}};
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig sc;
  sc.n_tx_antennas = j.at("n_tx_antennas").get<int>();
  sc.n_subcarriers = j.at("n_subcarriers").get<int>();
  sc.n_clusters = j.at("n_clusters").get<int>();
  sc.n_subpaths_per_cluster = j.at("n_subpaths_per_cluster").get<int>();
  sc.center_frequency = j.at("center_frequency").get<double>();
  sc.bandwidth = j.at("bandwidth").get<double>();
  sc.antenna_spacing_over_wavelength = j.at("antenna_spacing_over_wavelength").get<double>();
  sc.los = j.at("los").get<bool>();
  sc.rician_k_factor_db = j.at("rician_k_factor_db").get<double>();
  sc.angle_spread = j.at("angle_spread").get<double>();
  sc.max_delay = j.at("max_delay").get<double>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  return sc;
}

inline void save_dataset(const CsiDataset& ds, const std::string& path) {
  BinaryWriter w(path);
  w.write_magic("CSID");
  w.write_u32(kDatasetFormatVersion);
  w.write_u32(static_cast<std::uint32_t>(ds.scenario.n_tx_antennas));
  w.write_u32(static_cast<std::uint32_t>(ds.scenario.n_subcarriers));
  w.write_u64(ds.n_train);
  w.write_u64(ds.n_val);
  w.write_u64(ds.n_test);
  w.write_f64(ds.meta.global_min);
  w.write_f64(ds.meta.global_max);
  detail::write_scenario(w, ds.scenario);
  w.write_u64(ds.clamped_val);
  w.write_u64(ds.clamped_test);
  for (const CsiSample& s : ds.samples) w.write_f64_array(s.values);
  w.close();

  nlohmann::json j{{"magic", "CSID"},
                   {"format_version", kDatasetFormatVersion},
                   {"n_t", ds.scenario.n_tx_antennas},
                   {"n_c", ds.scenario.n_subcarriers},
                   {"split_sizes", {ds.n_train, ds.n_val, ds.n_test}},
                   {"normalization", {{"min", ds.meta.global_min},
                                      {"max", ds.meta.global_max},
                                      {"computed_over", ds.meta.computed_over}}},
                   {"clamped_entries", {{"val", ds.clamped_val}, {"test", ds.clamped_test}}},
                   {"scenario", scenario_to_json(ds.scenario)},
                   {"domain", "angular-delay"},
                   {"payload_order", "(sample, plane, antenna, subcarrier)"}};
  std::ofstream sidecar(path + ".json");
  sidecar << j.dump(2) << "\n";
}

inline CsiDataset load_dataset(const std::string& path) {
  BinaryReader r(path);
  r.expect_magic("CSID", "dataset");
  const std::uint32_t version = r.read_u32();
  if (version != kDatasetFormatVersion)
    throw std::runtime_error("dataset format version mismatch: got " + std::to_string(version));
  const int nt = static_cast<int>(r.read_u32());
  const int nc = static_cast<int>(r.read_u32());
  CsiDataset ds;
  ds.n_train = r.read_u64();
  ds.n_val = r.read_u64();
  ds.n_test = r.read_u64();
  ds.meta.global_min = r.read_f64();
  ds.meta.global_max = r.read_f64();
  ds.meta.computed_over = "train";
  ds.scenario = detail::read_scenario(r);
  ds.clamped_val = r.read_u64();
  ds.clamped_test = r.read_u64();
  const std::uint64_t total = ds.n_train + ds.n_val + ds.n_test;
  ds.samples.reserve(total);
  const std::size_t n = 2 * static_cast<std::size_t>(nt) * nc;
  for (std::uint64_t i = 0; i < total; ++i) {
    CsiSample s;
    s.n_t = nt;
    s.n_c = nc;
    s.domain = CsiDomain::angular_delay;
    s.normalized = true;
    s.values = r.read_f64_array(n);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace csikd
