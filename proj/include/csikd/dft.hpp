#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "csikd/channel.hpp"

namespace csikd {

namespace detail {

// Unitary DFT matrix, kernel exp(-j 2 pi k m / N) / sqrt(N).
inline std::vector<std::complex<double>> dft_matrix(int n) {
  std::vector<std::complex<double>> f(static_cast<std::size_t>(n) * n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) {
      // phase index mod n keeps large k*m products exact
      const long long idx = (1LL * k * m) % n;
      const double ang = -2.0 * kPi * static_cast<double>(idx) / static_cast<double>(n);
      f[static_cast<std::size_t>(k) * n + m] = std::polar(scale, ang);
    }
  return f;
}

enum class DftDir { forward, inverse };

// Applies F_a * H * F_d (forward) or its exact inverse via conjugate
// transposes. Both matrices are unitary, so the Frobenius norm is
// preserved either way.
inline CsiSample apply_2d_dft(const CsiSample& in, DftDir dir) {
  const int nt = in.n_t, nc = in.n_c;
  const auto fa = dft_matrix(nt);
  const auto fd = dft_matrix(nc);
  std::vector<std::complex<double>> h(static_cast<std::size_t>(nt) * nc);
  for (int a = 0; a < nt; ++a)
    for (int n = 0; n < nc; ++n) h[static_cast<std::size_t>(a) * nc + n] = in.entry(a, n);

  auto fa_at = [&](int r, int c) {
    const auto v = fa[static_cast<std::size_t>(r) * nt + c];
    return dir == DftDir::forward ? v : std::conj(fa[static_cast<std::size_t>(c) * nt + r]);
  };
  auto fd_at = [&](int r, int c) {
    const auto v = fd[static_cast<std::size_t>(r) * nc + c];
    return dir == DftDir::forward ? v : std::conj(fd[static_cast<std::size_t>(c) * nc + r]);
  };

  // left multiply
  std::vector<std::complex<double>> tmp(static_cast<std::size_t>(nt) * nc, {0.0, 0.0});
  for (int k = 0; k < nt; ++k)
    for (int m = 0; m < nt; ++m) {
      const auto w = fa_at(k, m);
      for (int n = 0; n < nc; ++n)
        tmp[static_cast<std::size_t>(k) * nc + n] += w * h[static_cast<std::size_t>(m) * nc + n];
    }
  // right multiply
  CsiSample out;
  out.n_t = nt;
  out.n_c = nc;
  out.normalized = in.normalized;
  out.values.assign(2 * static_cast<std::size_t>(nt) * nc, 0.0);
  for (int k = 0; k < nt; ++k)
    for (int l = 0; l < nc; ++l) {
      std::complex<double> acc{0.0, 0.0};
      for (int n = 0; n < nc; ++n)
        acc += tmp[static_cast<std::size_t>(k) * nc + n] * fd_at(n, l);
      out.at(0, k, l) = acc.real();
      out.at(1, k, l) = acc.imag();
    }
  return out;
}

}  // namespace detail

inline CsiSample to_angular_delay(const CsiSample& in) {
  if (in.domain != CsiDomain::spatial_frequency)
    throw std::invalid_argument("to_angular_delay: sample is not in the spatial-frequency domain");
  CsiSample out = detail::apply_2d_dft(in, detail::DftDir::forward);
  out.domain = CsiDomain::angular_delay;
  return out;
}

inline CsiSample inverse_transform(const CsiSample& in) {
  if (in.domain != CsiDomain::angular_delay)
    throw std::invalid_argument("inverse_transform: sample is not in the angular-delay domain");
  CsiSample out = detail::apply_2d_dft(in, detail::DftDir::inverse);
  out.domain = CsiDomain::spatial_frequency;
  return out;
}

}  // namespace csikd
