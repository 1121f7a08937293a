#pragma once
// Gaussian noise channels on states and on scalar peak variances: additive
// Gaussian noise (random displacement), pure loss, and the three ways of
// undoing loss with a phase-insensitive amplifier.

#include <stdexcept>
#include <vector>

#include "cvgkp/gaussian.hpp"
#include "cvgkp/rng.hpp"

namespace cvgkp {

namespace detail {

inline std::vector<int> all_modes(const GaussianState& s) {
  std::vector<int> m(s.n_modes());
  for (int i = 0; i < int(m.size()); ++i) m[i] = i;
  return m;
}

}  // namespace detail

// Deterministic second-moment map of additive Gaussian noise: each targeted
// quadrature variance grows by xi2.
inline GaussianState agn_channel(const GaussianState& s, double xi2,
                                 const std::vector<int>& modes) {
  if (xi2 < 0.0) throw std::invalid_argument("agn_channel: negative noise variance");
  GaussianState out = s;
  for (int m : modes) {
    if (m < 0 || m >= s.n_modes()) throw std::invalid_argument("agn_channel: bad mode");
    out.cov(2 * m, 2 * m) += xi2;
    out.cov(2 * m + 1, 2 * m + 1) += xi2;
  }
  return out;
}

inline GaussianState agn_channel(const GaussianState& s, double xi2) {
  return agn_channel(s, xi2, detail::all_modes(s));
}

// Trajectory form of the same channel: one random displacement per
// quadrature, N(0, xi2). Ensemble-averaging trajectories reproduces the
// deterministic map.
inline GaussianState agn_sample(const GaussianState& s, double xi2, CounterRng& rng,
                                const std::vector<int>& modes) {
  if (xi2 < 0.0) throw std::invalid_argument("agn_sample: negative noise variance");
  GaussianState out = s;
  const double sd = std::sqrt(xi2);
  for (int m : modes) {
    if (m < 0 || m >= s.n_modes()) throw std::invalid_argument("agn_sample: bad mode");
    out.mean(2 * m) += sd * rng.gauss();
    out.mean(2 * m + 1) += sd * rng.gauss();
  }
  return out;
}

inline GaussianState agn_sample(const GaussianState& s, double xi2, CounterRng& rng) {
  return agn_sample(s, xi2, rng, detail::all_modes(s));
}

// Beam-splitter coupling to an environmental vacuum with transmissivity eta:
// mean -> sqrt(eta) mean, cov -> eta cov + (1-eta)/2 I on the targeted modes.
inline GaussianState loss_channel(const GaussianState& s, double eta,
                                  const std::vector<int>& modes) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss_channel: eta outside [0,1]");
  GaussianState out = s;
  const double se = std::sqrt(eta);
  for (int m : modes) {
    if (m < 0 || m >= s.n_modes()) throw std::invalid_argument("loss_channel: bad mode");
    for (int i : {2 * m, 2 * m + 1}) {
      out.mean(i) *= se;
      out.cov.row(i) *= se;
      out.cov.col(i) *= se;
      out.cov(i, i) += (1.0 - eta) / 2.0;
    }
  }
  return out;
}

inline GaussianState loss_channel(const GaussianState& s, double eta) {
  return loss_channel(s, eta, detail::all_modes(s));
}

// Quantum-limited phase-insensitive amplifier of gain G >= 1:
// mean -> sqrt(G) mean, cov -> G cov + (G-1)/2 I.
inline GaussianState amplify_channel(const GaussianState& s, double gain,
                                     const std::vector<int>& modes) {
  if (gain < 1.0) throw std::invalid_argument("amplify_channel: gain below 1");
  GaussianState out = s;
  const double sg = std::sqrt(gain);
  for (int m : modes) {
    if (m < 0 || m >= s.n_modes()) throw std::invalid_argument("amplify_channel: bad mode");
    for (int i : {2 * m, 2 * m + 1}) {
      out.mean(i) *= sg;
      out.cov.row(i) *= sg;
      out.cov.col(i) *= sg;
      out.cov(i, i) += (gain - 1.0) / 2.0;
    }
  }
  return out;
}

inline GaussianState amplify_channel(const GaussianState& s, double gain) {
  return amplify_channel(s, gain, detail::all_modes(s));
}

// Peak-variance maps for loss of transmissivity eta compensated by a
// gain-1/eta amplifier placed after the loss (post), before it (pre), or
// replaced by classical rescaling of the measured outcome by 1/sqrt(eta).
// All three leave the mean in place and act as additive Gaussian noise on the
// variance; pre is the gentlest of the amplifier pair for eta < 1/2 and the
// rescale map crosses it at eta = 1/2.
enum class AmplifyMode { post, pre, rescale };

inline double amplify(double sigma2, double eta, AmplifyMode mode) {
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("amplify: eta outside (0,1]");
  switch (mode) {
    case AmplifyMode::post:
      return sigma2 + (1.0 - eta) / eta;
    case AmplifyMode::pre:
      return sigma2 + (1.0 - eta);
    case AmplifyMode::rescale:
      return sigma2 + (1.0 - eta) / (2.0 * eta);
  }
  throw std::logic_error("amplify: unreachable");
}

// Scalar form of the loss map, for peak-variance bookkeeping.
inline double loss_variance(double sigma2, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss_variance: eta outside [0,1]");
  return eta * sigma2 + (1.0 - eta) / 2.0;
}

}  // namespace cvgkp
