#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "csikd/rng.hpp"

namespace csikd {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Geometry and sampling parameters of the synthetic cluster channel.
struct ScenarioConfig {
  int n_tx_antennas = 32;
  int n_subcarriers = 32;
  int n_clusters = 6;
  int n_subpaths_per_cluster = 8;
  double center_frequency = 2.655e9;
  double bandwidth = 70e6;
  double antenna_spacing_over_wavelength = 0.5;
  bool los = true;
  double rician_k_factor_db = 9.0;  // used only when los
  double angle_spread = 0.05;       // radians, Laplacian scale of subpath offsets
  double max_delay = 100e-9;        // seconds
  std::uint64_t seed = 1;

  void validate() const {
    if (n_tx_antennas < 1 || n_subcarriers < 1 || n_clusters < 1 || n_subpaths_per_cluster < 1)
      throw std::invalid_argument("scenario: counts must be >= 1");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("scenario: bandwidth must be > 0");
    if (max_delay < 0.0) throw std::invalid_argument("scenario: max_delay must be >= 0");
    if (!(antenna_spacing_over_wavelength > 0.0))
      throw std::invalid_argument("scenario: antenna spacing must be > 0");
  }

  bool operator==(const ScenarioConfig&) const = default;
};

// One propagation path: complex gain, angle of departure, delay.
struct Path {
  std::complex<double> gain;
  double departure_angle = 0.0;  // radians, |angle| <= pi/2
  double delay = 0.0;            // seconds
};

struct PathSet {
  std::vector<Path> paths;
};

// ULA phase ramp; element k is exp(j 2 pi k (d/lambda) sin(theta)).
inline std::vector<std::complex<double>> steering_vector(double theta, int n_antennas,
                                                         double d_over_lambda) {
  if (n_antennas < 1) throw std::invalid_argument("steering_vector: n_antennas must be >= 1");
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n_antennas));
  const double step = 2.0 * kPi * d_over_lambda * std::sin(theta);
  for (int k = 0; k < n_antennas; ++k)
    a[static_cast<std::size_t>(k)] = std::polar(1.0, step * static_cast<double>(k));
  return a;
}

// Draws the cluster/subpath geometry. Cluster centers are uniform on
// [-pi/3, pi/3], subpath angles add a Laplacian offset (clamped to
// [-pi/2, pi/2]), delays are uniform on [0, max_delay], and gains are
// circularly-symmetric Gaussian rescaled so each cluster carries exactly
// 1/n_clusters of unit total power. A LOS scenario appends one zero-delay
// path whose power is the linear Rician K-factor, so LOS/NLOS power is
// exactly K. Draw order is fixed; callers pass an isolated stream.
inline PathSet sample_path_set(const ScenarioConfig& sc, Rng& rng) {
  sc.validate();
  PathSet ps;
  ps.paths.reserve(static_cast<std::size_t>(sc.n_clusters) * sc.n_subpaths_per_cluster +
                   (sc.los ? 1 : 0));
  for (int c = 0; c < sc.n_clusters; ++c) {
    const double center = rng.uniform(-kPi / 3.0, kPi / 3.0);
    const std::size_t first = ps.paths.size();
    double cluster_power = 0.0;
    for (int s = 0; s < sc.n_subpaths_per_cluster; ++s) {
      Path p;
      const double offset = rng.laplace(sc.angle_spread);
      p.departure_angle = std::clamp(center + offset, -kPi / 2.0, kPi / 2.0);
      p.delay = rng.uniform(0.0, sc.max_delay);
      const double re = rng.normal() / std::sqrt(2.0);
      const double im = rng.normal() / std::sqrt(2.0);
      p.gain = {re, im};
      cluster_power += std::norm(p.gain);
      ps.paths.push_back(p);
    }
    const double target = 1.0 / static_cast<double>(sc.n_clusters);
    const double scale = std::sqrt(target / cluster_power);
    for (std::size_t i = first; i < ps.paths.size(); ++i) ps.paths[i].gain *= scale;
  }
  if (sc.los) {
    Path p;
    p.departure_angle = rng.uniform(-kPi / 3.0, kPi / 3.0);
    p.delay = 0.0;
    const double k_lin = std::pow(10.0, sc.rician_k_factor_db / 10.0);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    p.gain = std::polar(std::sqrt(k_lin), phase);
    ps.paths.push_back(p);
  }
  return ps;
}

enum class CsiDomain : std::uint8_t { spatial_frequency = 0, angular_delay = 1 };

// Real/imaginary planes of one CSI matrix: values laid out as
// (plane, antenna, subcarrier), plane 0 real and plane 1 imaginary.
struct CsiSample {
  int n_t = 0;
  int n_c = 0;
  CsiDomain domain = CsiDomain::spatial_frequency;
  bool normalized = false;
  std::vector<double> values;

  std::size_t plane_size() const { return static_cast<std::size_t>(n_t) * n_c; }

  double& at(int plane, int a, int n) {
    return values[(static_cast<std::size_t>(plane) * n_t + a) * n_c + n];
  }
  double at(int plane, int a, int n) const {
    return values[(static_cast<std::size_t>(plane) * n_t + a) * n_c + n];
  }
  std::complex<double> entry(int a, int n) const { return {at(0, a, n), at(1, a, n)}; }
};

// Spatial-frequency CSI: column n is the sum over paths of
// gain * exp(-j 2 pi f_n delay) * a(theta), with f_n = n * bandwidth / N_c.
inline CsiSample generate_csi(const PathSet& ps, const ScenarioConfig& sc) {
  sc.validate();
  const int nt = sc.n_tx_antennas, nc = sc.n_subcarriers;
  CsiSample out;
  out.n_t = nt;
  out.n_c = nc;
  out.domain = CsiDomain::spatial_frequency;
  out.normalized = false;
  out.values.assign(2 * static_cast<std::size_t>(nt) * nc, 0.0);
  const double df = sc.bandwidth / static_cast<double>(nc);
  for (const Path& p : ps.paths) {
    const auto a = steering_vector(p.departure_angle, nt, sc.antenna_spacing_over_wavelength);
    for (int n = 0; n < nc; ++n) {
      const double f_n = df * static_cast<double>(n);
      const std::complex<double> g = p.gain * std::polar(1.0, -2.0 * kPi * f_n * p.delay);
      for (int k = 0; k < nt; ++k) {
        const std::complex<double> v = g * a[static_cast<std::size_t>(k)];
        out.at(0, k, n) += v.real();
        out.at(1, k, n) += v.imag();
      }
    }
  }
  return out;
}

}  // namespace csikd
