#pragma once

// Fifth-order WENO finite-difference kernels (Jiang-Shu smoothness
// indicators) on a uniform cell-centred grid with three ghost cells per
// side. Shared by the discrete-ordinates solver and the moment solver.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtclosure {

enum class Boundary { periodic, reflective };

inline const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "reflective";
}

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "reflective") return Boundary::reflective;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

/// Upwind direction: `positive` reconstructs from the left (information
/// travelling towards +x), `negative` from the right.
enum class Wind { positive, negative };

inline constexpr int kGhost = 3;
inline constexpr double kWenoEpsilon = 1e-6;

/// Nonlinear weight family. `js` is the classical Jiang-Shu choice, `z` the
/// Borges et al. weights (closer to optimal on smooth data), `linear` the
/// optimal weights themselves (fifth-order upwind, no limiting).
enum class WenoWeights { js, z, linear };

inline const char* to_string(WenoWeights w) {
  switch (w) {
    case WenoWeights::js: return "js";
    case WenoWeights::z: return "z";
    case WenoWeights::linear: return "linear";
  }
  return "?";
}

inline WenoWeights weno_weights_from_string(const std::string& s) {
  if (s == "js") return WenoWeights::js;
  if (s == "z") return WenoWeights::z;
  if (s == "linear") return WenoWeights::linear;
  throw std::invalid_argument("unknown WENO weights '" + s + "'");
}

/// Left-biased WENO5 value at i+1/2 from u_{i-2}, ..., u_{i+2}.
template <WenoWeights W = WenoWeights::js>
inline double weno5_reconstruct(double um2, double um1, double u0, double up1,
                                double up2) noexcept {
  const double q0 = (2.0 * um2 - 7.0 * um1 + 11.0 * u0) / 6.0;
  const double q1 = (-um1 + 5.0 * u0 + 2.0 * up1) / 6.0;
  const double q2 = (2.0 * u0 + 5.0 * up1 - up2) / 6.0;
  if constexpr (W == WenoWeights::linear) {
    return 0.1 * q0 + 0.6 * q1 + 0.3 * q2;
  } else {
    const double a0 = um2 - 2.0 * um1 + u0;
    const double b0 = um2 - 4.0 * um1 + 3.0 * u0;
    const double a1 = um1 - 2.0 * u0 + up1;
    const double b1 = um1 - up1;
    const double a2 = u0 - 2.0 * up1 + up2;
    const double b2 = 3.0 * u0 - 4.0 * up1 + up2;
    const double beta0 = 13.0 / 12.0 * a0 * a0 + 0.25 * b0 * b0;
    const double beta1 = 13.0 / 12.0 * a1 * a1 + 0.25 * b1 * b1;
    const double beta2 = 13.0 / 12.0 * a2 * a2 + 0.25 * b2 * b2;

    double w0, w1, w2;
    if constexpr (W == WenoWeights::js) {
      const double e0 = kWenoEpsilon + beta0;
      const double e1 = kWenoEpsilon + beta1;
      const double e2 = kWenoEpsilon + beta2;
      w0 = 0.1 / (e0 * e0);
      w1 = 0.6 / (e1 * e1);
      w2 = 0.3 / (e2 * e2);
    } else {
      constexpr double tiny = 1e-40;
      const double tau = std::abs(beta0 - beta2);
      const double r0 = tau / (beta0 + tiny);
      const double r1 = tau / (beta1 + tiny);
      const double r2 = tau / (beta2 + tiny);
      w0 = 0.1 * (1.0 + r0 * r0);
      w1 = 0.6 * (1.0 + r1 * r1);
      w2 = 0.3 * (1.0 + r2 * r2);
    }
    return (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2);
  }
}

/// Flux difference u^_{j+1/2} - u^_{j-1/2} at node j given the seven values
/// u_{j-3}, ..., u_{j+3}. Divide by dx to obtain the derivative.
inline double weno5_local_difference(const double* u, Wind wind) noexcept {
  if (wind == Wind::positive) {
    const double right = weno5_reconstruct(u[1], u[2], u[3], u[4], u[5]);
    const double left = weno5_reconstruct(u[0], u[1], u[2], u[3], u[4]);
    return right - left;
  }
  const double right = weno5_reconstruct(u[6], u[5], u[4], u[3], u[2]);
  const double left = weno5_reconstruct(u[5], u[4], u[3], u[2], u[1]);
  return right - left;
}

namespace detail {

template <WenoWeights W>
void weno5_derivative_impl(const double* u, std::size_t nx, double inv_dx, Wind wind,
                           double* out) {
  // Interface i + 1/2 for i = -1 .. nx-1.
  const auto iface = [&](std::ptrdiff_t i) {
    if (wind == Wind::positive) {
      return weno5_reconstruct<W>(u[i - 2], u[i - 1], u[i], u[i + 1], u[i + 2]);
    }
    return weno5_reconstruct<W>(u[i + 3], u[i + 2], u[i + 1], u[i], u[i - 1]);
  };
  double prev = iface(-1);
  for (std::size_t j = 0; j < nx; ++j) {
    const double next = iface(static_cast<std::ptrdiff_t>(j));
    out[j] = (next - prev) * inv_dx;
    prev = next;
  }
}

}  // namespace detail

/// Upwind-biased derivative of a ghosted grid function (size Nx + 6) into
/// `out` (size Nx). Interface values are reconstructed once and differenced.
inline void weno5_derivative(std::span<const double> ghosted, double dx, Wind wind,
                             std::span<double> out, WenoWeights weights = WenoWeights::js) {
  const std::size_t nx = out.size();
  if (ghosted.size() != nx + 2 * kGhost) {
    throw std::invalid_argument("weno5_derivative: ghosted size must be Nx + 6");
  }
  const double* u = ghosted.data() + kGhost;
  switch (weights) {
    case WenoWeights::js:
      detail::weno5_derivative_impl<WenoWeights::js>(u, nx, 1.0 / dx, wind, out.data());
      break;
    case WenoWeights::z:
      detail::weno5_derivative_impl<WenoWeights::z>(u, nx, 1.0 / dx, wind, out.data());
      break;
    case WenoWeights::linear:
      detail::weno5_derivative_impl<WenoWeights::linear>(u, nx, 1.0 / dx, wind, out.data());
      break;
  }
}

inline std::vector<double> weno5_derivative(std::span<const double> ghosted, double dx,
                                            Wind wind, WenoWeights weights = WenoWeights::js) {
  if (ghosted.size() <= 2 * kGhost) {
    throw std::invalid_argument("weno5_derivative: need at least one interior cell");
  }
  std::vector<double> out(ghosted.size() - 2 * kGhost);
  weno5_derivative(ghosted, dx, wind, out, weights);
  return out;
}

/// Fill the three ghost cells per side of a ghosted array in place.
/// Reflective walls use u(x_{-j-1}) = parity * u(x_j); parity is (-1)^k for
/// the k-th Legendre moment.
inline void fill_ghosts(std::span<double> ghosted, Boundary boundary,
                        double parity = 1.0) {
  if (ghosted.size() < 3 * kGhost) {
    throw std::invalid_argument("fill_ghosts: need at least 3 interior cells");
  }
  const std::size_t nx = ghosted.size() - 2 * kGhost;
  double* u = ghosted.data() + kGhost;
  const auto n = static_cast<std::ptrdiff_t>(nx);
  for (std::ptrdiff_t g = 1; g <= kGhost; ++g) {
    if (boundary == Boundary::periodic) {
      u[-g] = u[n - g];
      u[n - 1 + g] = u[g - 1];
    } else {
      u[-g] = parity * u[g - 1];
      u[n - 1 + g] = parity * u[n - g];
    }
  }
}

}  // namespace rtclosure
