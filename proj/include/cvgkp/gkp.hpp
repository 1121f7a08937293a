#pragma once
// GKP qubit error model at peak-variance resolution: bit misidentification
// probability, outcome binning on the sqrt(pi) lattice, single-qubit-level
// (Steane-type) error correction, post-selected highly-reliable measurement,
// and the Gaussian likelihood pair used by analog decoding.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "cvgkp/gaussian.hpp"
#include "cvgkp/rng.hpp"

namespace cvgkp {

inline const double kGkpSpacing = std::sqrt(M_PI);
inline const double kQunaughtSpacing = std::sqrt(2.0 * M_PI);

// Gaussian-peak description of an approximate GKP state: per-peak variances
// in q and p, and the lattice period of the measured quadrature.
struct GkpPeakModel {
  double var_q;
  double var_p;
  double spacing = kGkpSpacing;
};

inline GkpPeakModel gkp_model(double sigma2) { return {sigma2, sigma2, kGkpSpacing}; }
inline GkpPeakModel qunaught_model(double sigma2) { return {sigma2, sigma2, kQunaughtSpacing}; }

// Probability that a peak deviation of variance sigma2 leaves the central
// bin (-sqrt(pi)/2, sqrt(pi)/2]; the nearest-bin approximation of the full
// lattice error.
inline double p_fail(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("p_fail: variance must be positive");
  return std::erfc(0.5 * kGkpSpacing / std::sqrt(2.0 * sigma2));
}

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Probability mass of N(0, sigma2) in the bin of half-width w around
// k*spacing.
inline double bin_mass(double sigma, double spacing, int k, double w) {
  const double c = k * spacing;
  return normal_cdf((c + w) / sigma) - normal_cdf((c - w) / sigma);
}

}  // namespace detail

// Exact lattice-sum error probability: mass of the deviation landing in any
// odd-index bin. Terms below 1e-18 are dropped.
inline double lattice_error_exact(double sigma2, double spacing = kGkpSpacing) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("lattice_error_exact: variance must be positive");
  const double sigma = std::sqrt(sigma2);
  const double w = spacing / 2.0;
  double err = 0.0;
  for (int k = 1;; k += 2) {
    const double term = detail::bin_mass(sigma, spacing, k, w);
    if (term < 1e-18) break;
    err += 2.0 * term;  // bins at +k and -k
  }
  return err;
}

// Measured value decomposed as nearest lattice multiple plus deviation.
// Ties at half-spacing go to the upper lattice point, so the deviation lies
// in [-spacing/2, spacing/2).
struct BinnedOutcome {
  int bit;           // lattice index parity
  double deviation;  // raw - index*spacing
  double raw;
  std::int64_t index;
};

inline BinnedOutcome bin_outcome(double raw, double spacing = kGkpSpacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("bin_outcome: spacing must be positive");
  const auto k = std::int64_t(std::floor(raw / spacing + 0.5));
  const double lattice = double(k) * spacing;
  return {int(((k % 2) + 2) % 2), raw - lattice, raw, k};
}

// One homodyne measurement of a GKP qubit prepared in `true_bit`: the raw
// value is the bit's canonical lattice point plus a Gaussian peak deviation.
inline BinnedOutcome sample_gkp_measurement(const GkpPeakModel& model, int true_bit,
                                            CounterRng& rng) {
  if (true_bit != 0 && true_bit != 1)
    throw std::invalid_argument("sample_gkp_measurement: bit must be 0 or 1");
  if (!(model.var_q > 0.0) || !(model.var_p > 0.0) || !(model.spacing > 0.0))
    throw std::invalid_argument("sample_gkp_measurement: invalid peak model");
  const double raw = true_bit * model.spacing + std::sqrt(model.var_q) * rng.gauss();
  return bin_outcome(raw, model.spacing);
}

enum class Quadrature { q, p };

// Steane-type single-qubit error correction step: the corrected quadrature's
// variance is replaced by the ancilla's, the conjugate quadrature picks the
// ancilla's variance up, and a logical flip happens when the summed
// deviations leave the central bin.
inline std::pair<GkpPeakModel, double> sqec_step(const GkpPeakModel& data,
                                                 const GkpPeakModel& ancilla,
                                                 Quadrature quad) {
  if (data.spacing != ancilla.spacing)
    throw std::invalid_argument("sqec_step: mismatched lattice spacings");
  GkpPeakModel out = data;
  double flip;
  if (quad == Quadrature::q) {
    out.var_q = ancilla.var_q;
    out.var_p = data.var_p + ancilla.var_p;
    flip = p_fail(data.var_q + ancilla.var_q);
  } else {
    out.var_p = ancilla.var_p;
    out.var_q = data.var_q + ancilla.var_q;
    flip = p_fail(data.var_p + ancilla.var_p);
  }
  return {out, flip};
}

struct SqecTrajectoryResult {
  double dev_q;
  double dev_p;
  bool flip;
};

// Trajectory form of sqec_step for Monte Carlo: data and freshly sampled
// ancilla deviations ride as the mean vector of a two-mode Gaussian state
// through the controlled-shift gate; the ancilla quadrature is read out,
// binned, and the data is displaced by the measured deviation.
inline SqecTrajectoryResult sqec_trajectory_step(double dev_q, double dev_p,
                                                 const GkpPeakModel& ancilla,
                                                 Quadrature quad, CounterRng& rng) {
  GaussianState s = vacuum_state(2);
  s.mean << dev_q, dev_p, std::sqrt(ancilla.var_q) * rng.gauss(),
      std::sqrt(ancilla.var_p) * rng.gauss();
  const std::vector<int> wires =
      quad == Quadrature::q ? std::vector<int>{0, 1} : std::vector<int>{1, 0};
  s = apply_gate(s, make_gate(2, GateKind::cx, {}, wires));

  const int meas = quad == Quadrature::q ? 2 : 3;  // ancilla q, or ancilla p
  const BinnedOutcome syndrome = bin_outcome(s.mean(meas), ancilla.spacing);

  double q_out = s.mean(0), p_out = s.mean(1);
  if (quad == Quadrature::q)
    q_out -= syndrome.deviation;
  else
    p_out += syndrome.deviation;

  const BinnedOutcome folded =
      bin_outcome(quad == Quadrature::q ? q_out : p_out, ancilla.spacing);
  if (quad == Quadrature::q)
    q_out = folded.deviation;
  else
    p_out = folded.deviation;
  return {q_out, p_out, folded.bit == 1};
}

struct HrmStats {
  double p_accept;
  double p_err_given_accept;
};

// Post-selected measurement: outcomes farther than (spacing/2 - zeta) from
// every lattice point are discarded. Acceptance and conditional error mass
// are lattice sums truncated when terms fall below 1e-18.
inline HrmStats hrm_stats(double sigma2, double zeta) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("hrm_stats: variance must be positive");
  if (zeta < 0.0 || zeta >= kGkpSpacing / 2.0)
    throw std::invalid_argument("hrm_stats: zeta outside [0, sqrt(pi)/2)");
  const double sigma = std::sqrt(sigma2);
  const double w = kGkpSpacing / 2.0 - zeta;
  double accept = detail::bin_mass(sigma, kGkpSpacing, 0, w);
  double err = 0.0;
  for (int k = 1;; ++k) {
    const double term = 2.0 * detail::bin_mass(sigma, kGkpSpacing, k, w);
    if (term < 1e-18) break;
    accept += term;
    if (k % 2 == 1) err += term;
  }
  return {accept, err / accept};
}

// Likelihoods of the two hypotheses behind an in-bin deviation: the peak was
// the nearest lattice point (no flip) or the next one over (flip).
inline std::pair<double, double> analog_likelihoods(double dev, double sigma2) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("analog_likelihoods: variance must be positive");
  if (std::abs(dev) > kGkpSpacing / 2.0 + 1e-12)
    throw std::invalid_argument("analog_likelihoods: deviation outside the central bin");
  const auto density = [sigma2](double x) {
    return std::exp(-x * x / (2.0 * sigma2)) / std::sqrt(2.0 * M_PI * sigma2);
  };
  return {density(dev), density(kGkpSpacing - std::abs(dev))};
}

}  // namespace cvgkp
