#pragma once

// Spectral differentiation of periodic grid functions on [0, L).

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace rtclosure {

/// d/dx of a periodic function sampled at N equispaced points on a domain of
/// length `length`. The Nyquist mode (even N) is dropped, as usual for odd
/// derivatives.
inline std::vector<double> spectral_derivative(std::span<const double> u,
                                               double length = 1.0) {
  const std::size_t n = u.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  Eigen::FFT<double> fft;
  std::vector<double> in(u.begin(), u.end());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const double base = 2.0 * std::numbers::pi / length;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    const auto nn = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t wave = kk <= nn / 2 ? kk : kk - nn;
    if (n % 2 == 0 && kk == nn / 2) wave = 0;
    spec[k] *= std::complex<double>(0.0, base * static_cast<double>(wave));
  }
  fft.inv(out, spec);
  return out;
}

/// Derivative of a function on [0, L] that extends across both walls with
/// the given parity (+1 even, -1 odd). The mirror extension is periodic
/// with period 2L and is differentiated spectrally.
inline std::vector<double> spectral_derivative_mirrored(std::span<const double> u,
                                                        double parity,
                                                        double length = 1.0) {
  const std::size_t n = u.size();
  std::vector<double> ext(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    ext[j] = u[j];
    ext[2 * n - 1 - j] = parity * u[j];
  }
  const auto d = spectral_derivative(ext, 2.0 * length);
  return {d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace rtclosure
