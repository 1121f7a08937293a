#pragma once
// Position-grid wavefunctions for the non-Gaussian protocols: state
// constructors, momentum representation through an explicit unitary
// transform, the measurement-induced cubic phase gate, iterative breeding of
// grid states from squeezed cats, and overlaps with approximate GKP combs.
//
// Grids are uniform and symmetric about zero with an odd point count, which
// makes the balanced-beam-splitter coordinate change land exactly on grid
// nodes when the output spacing is sqrt(2) times the input spacing.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvgkp/fock.hpp"
#include "cvgkp/rng.hpp"

namespace cvgkp {

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One or two bosonic modes sampled on a shared uniform grid; a single mode
// is a column, a two-mode state a full matrix (row index = mode 1).
struct GridWavefunction {
  double x0 = 0.0;
  double dx = 0.0;
  Eigen::MatrixXcd amps;

  int points() const { return int(amps.rows()); }
  int modes() const { return amps.cols() > 1 ? 2 : 1; }
  double x(int i) const { return x0 + i * dx; }
  double x_max() const { return x(points() - 1); }

  double norm() const {
    const double cell = modes() == 1 ? dx : dx * dx;
    return std::sqrt(amps.squaredNorm() * cell);
  }
  void normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw std::runtime_error("GridWavefunction: zero norm");
    amps /= n;
  }
};

namespace detail {

inline void check_grid(int n, double dx) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("grid: point count must be odd and >= 3");
  if (!(dx > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
}

inline GridWavefunction empty_grid(int n, double dx) {
  check_grid(n, dx);
  GridWavefunction w;
  w.dx = dx;
  w.x0 = -0.5 * (n - 1) * dx;
  w.amps = Eigen::MatrixXcd::Zero(n, 1);
  return w;
}

}  // namespace detail

// Gaussian wavepacket with position variance var_q, centered at q_mean and
// carrying momentum p_mean.
inline GridWavefunction gaussian_packet(int n, double dx, double q_mean, double p_mean,
                                        double var_q) {
  if (!(var_q > 0.0)) throw std::invalid_argument("gaussian_packet: variance must be positive");
  GridWavefunction w = detail::empty_grid(n, dx);
  for (int i = 0; i < n; ++i) {
    const double u = w.x(i) - q_mean;
    w.amps(i, 0) = std::polar(std::exp(-u * u / (4.0 * var_q)), p_mean * w.x(i));
  }
  w.normalize();
  return w;
}

// Even superposition of two q-squeezed packets at +-sqrt(2) alpha e^{-r},
// each with position variance e^{-2r}/2.
inline GridWavefunction squeezed_cat(int n, double dx, double alpha, double r) {
  if (!(alpha > 0.0)) throw std::invalid_argument("squeezed_cat: amplitude must be positive");
  GridWavefunction w = detail::empty_grid(n, dx);
  const double s = std::exp(r);
  for (int i = 0; i < n; ++i) {
    const double up = s * w.x(i) - std::sqrt(2.0) * alpha;
    const double dn = s * w.x(i) + std::sqrt(2.0) * alpha;
    w.amps(i, 0) = std::exp(-up * up / 2.0) + std::exp(-dn * dn / 2.0);
  }
  w.normalize();
  return w;
}

// Number-basis coefficients evaluated as a position wavefunction.
inline GridWavefunction fock_to_grid(const Eigen::VectorXcd& coeffs, int n, double dx) {
  if (coeffs.size() < 1) throw std::invalid_argument("fock_to_grid: empty coefficients");
  GridWavefunction w = detail::empty_grid(n, dx);
  for (int i = 0; i < n; ++i) w.amps(i, 0) = hermite_point(coeffs, w.x(i));
  w.normalize();
  return w;
}

// Unitary position-to-momentum matrix for an n-point centered grid of
// spacing dx. The momentum grid has spacing 2 pi / (n dx) and is centered
// like the position grid; with that pairing the matrix is exactly unitary.
inline Eigen::MatrixXcd dft_matrix(int n, double dx) {
  detail::check_grid(n, dx);
  const double dp = 2.0 * M_PI / (n * dx);
  const double scale = std::sqrt(dx * dp / (2.0 * M_PI));
  const double c = 0.5 * (n - 1);
  Eigen::MatrixXcd f(n, n);
  for (int j = 0; j < n; ++j) {
    const double p = (j - c) * dp;
    for (int k = 0; k < n; ++k) f(j, k) = std::polar(scale, -p * (k - c) * dx);
  }
  return f;
}

inline GridWavefunction momentum_representation(const GridWavefunction& w) {
  if (w.modes() != 1)
    throw std::invalid_argument("momentum_representation: single mode only");
  GridWavefunction out;
  const int n = w.points();
  out.dx = 2.0 * M_PI / (n * w.dx);
  out.x0 = -0.5 * (n - 1) * out.dx;
  // sqrt(dx/dp) converts between amplitude densities on the two grids so
  // the physical norm carries over through the unitary kernel.
  out.amps = std::sqrt(w.dx / out.dx) * (dft_matrix(n, w.dx) * w.amps);
  // The kernel assumes the centered grid; a shifted grid adds the
  // corresponding plane-wave phase per momentum row.
  const double shift = w.x0 + 0.5 * (n - 1) * w.dx;
  if (shift != 0.0)
    for (int j = 0; j < n; ++j)
      out.amps.row(j) *= std::polar(1.0, -(out.x0 + j * out.dx) * shift);
  return out;
}

struct GridMoments {
  double mean_q;
  double var_q;
  double mean_p;
  double var_p;
};

inline double grid_moment(const GridWavefunction& w, int order) {
  if (w.modes() != 1) throw std::invalid_argument("grid_moment: single mode only");
  double acc = 0.0;
  for (int i = 0; i < w.points(); ++i)
    acc += std::pow(w.x(i), order) * std::norm(w.amps(i, 0)) * w.dx;
  return acc;
}

inline GridMoments grid_moments(const GridWavefunction& w) {
  GridMoments m;
  m.mean_q = grid_moment(w, 1);
  m.var_q = grid_moment(w, 2) - m.mean_q * m.mean_q;
  const GridWavefunction mom = momentum_representation(w);
  m.mean_p = grid_moment(mom, 1);
  m.var_p = grid_moment(mom, 2) - m.mean_p * m.mean_p;
  return m;
}

// Largest |p| carrying relative amplitude above the threshold.
inline double p_support(const GridWavefunction& w, double rel_threshold = 1e-9) {
  const GridWavefunction mom = momentum_representation(w);
  const double cut = rel_threshold * mom.amps.cwiseAbs().maxCoeff();
  double support = 0.0;
  for (int i = 0; i < mom.points(); ++i)
    if (std::abs(mom.amps(i, 0)) > cut) support = std::max(support, std::abs(mom.x(i)));
  return support;
}

// Positions of local maxima of |psi|^2 at or above rel_height of the global
// maximum.
inline std::vector<double> find_peaks(const GridWavefunction& w, double rel_height = 0.1) {
  if (w.modes() != 1) throw std::invalid_argument("find_peaks: single mode only");
  const int n = w.points();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::norm(w.amps(i, 0));
  const double cut = rel_height * d.maxCoeff();
  std::vector<double> peaks;
  for (int i = 1; i + 1 < n; ++i)
    if (d(i) >= cut && d(i) > d(i - 1) && d(i) >= d(i + 1)) peaks.push_back(w.x(i));
  return peaks;
}

// Plain-text fixture format. Header: "x0 <v> dx <v> n <count>", then one
// "re im" line per point, full precision.
inline void write_wavefunction(std::ostream& os, const GridWavefunction& w) {
  if (w.modes() != 1)
    throw std::invalid_argument("write_wavefunction: single mode only");
  os.precision(17);
  os << "x0 " << w.x0 << " dx " << w.dx << " n " << w.points() << "\n";
  for (int i = 0; i < w.points(); ++i)
    os << w.amps(i, 0).real() << " " << w.amps(i, 0).imag() << "\n";
}

inline GridWavefunction read_wavefunction(std::istream& is) {
  std::string t0, t1, t2;
  GridWavefunction w;
  int n = 0;
  is >> t0 >> w.x0 >> t1 >> w.dx >> t2 >> n;
  if (!is || t0 != "x0" || t1 != "dx" || t2 != "n" || n < 1)
    throw std::runtime_error("read_wavefunction: bad header");
  w.amps.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    double re = 0.0, im = 0.0;
    is >> re >> im;
    w.amps(i, 0) = {re, im};
  }
  if (!is) throw std::runtime_error("read_wavefunction: truncated input");
  return w;
}

// |<a|b>|^2 on a shared grid.
inline double grid_fidelity(const GridWavefunction& a, const GridWavefunction& b) {
  if (a.x0 != b.x0 || a.dx != b.dx || a.points() != b.points() || a.modes() != 1 ||
      b.modes() != 1)
    throw std::invalid_argument("grid_fidelity: incompatible grids");
  const std::complex<double> ip = (a.amps.col(0).conjugate().array() * b.amps.col(0).array()).sum() * a.dx;
  return std::norm(ip);
}

struct CubicTeleportResult {
  GridWavefunction state;
  double fidelity;  // against the ideal cubic phase applied to the input
  double outcome;   // ancilla position reading
};

namespace detail {

// Comb of Gaussian peaks exp(-u^2 / (2 delta^2)) on the lattice
// {offset + k*spacing} with amplitude envelope exp(-kappa^2 mu^2 / 2),
// normalized on the grid; the measured peak variance is delta^2 / 2. Peaks
// enter until their envelope mass drops below 1e-15 of the central one.
inline GridWavefunction gkp_comb(int n, double x0, double dx, double kappa2, double delta2,
                                 double spacing, double offset) {
  GridWavefunction w;
  w.x0 = x0;
  w.dx = dx;
  w.amps = Eigen::MatrixXcd::Zero(n, 1);
  const int k_max = int(std::ceil(std::sqrt(-std::log(1e-15) / kappa2) / spacing)) + 1;
  for (int k = -k_max; k <= k_max; ++k) {
    const double mu = offset + k * spacing;
    if (std::exp(-kappa2 * mu * mu) < 1e-15) continue;
    const double weight = std::exp(-kappa2 * mu * mu / 2.0);
    for (int i = 0; i < n; ++i) {
      const double u = x0 + i * dx - mu;
      w.amps(i, 0) += weight * std::exp(-u * u / (2.0 * delta2));
    }
  }
  w.normalize();
  return w;
}

}  // namespace detail

// Measurement-induced cubic phase gate. The resource mode carries
// e^{i gamma y^3/3} on a p-squeezed envelope (resource_db of squeezing); the
// inverse-sum coupling shifts the resource by the input position, the
// resource position is read out (outcome m), and the shear and displacement
// feedforwards cancel the outcome-dependent phases. What remains is the
// ideal cubic phase times an envelope centered at -m.
inline CubicTeleportResult cubic_phase_teleport(const GridWavefunction& input, double gamma,
                                                double resource_db, CounterRng& rng,
                                                std::optional<double> fixed_outcome = {}) {
  if (input.modes() != 1)
    throw std::invalid_argument("cubic_phase_teleport: single-mode input only");
  const int n = input.points();
  const double sigma_q2 = 0.5 * std::pow(10.0, resource_db / 10.0);

  // The feedforwards cancel the outcome-dependent wavenumber exactly, so
  // the added phase content is gamma x^2 at most.
  const double x_extent = std::max(std::abs(input.x0), std::abs(input.x_max()));
  const double k_needed = p_support(input) + std::abs(gamma) * x_extent * x_extent;
  if (k_needed > 0.9 * M_PI / input.dx)
    throw ResolutionError("cubic_phase_teleport: grid too coarse for the phase content");

  double m = 0.0;
  if (fixed_outcome) {
    m = *fixed_outcome;
  } else {
    // Outcome density: integral of |psi(x)|^2 |envelope(m + x)|^2 over x.
    const double m_max = x_extent + 5.0 * std::sqrt(sigma_q2);
    const int nm = 2001;
    const double dm = 2.0 * m_max / (nm - 1);
    std::vector<double> cdf(nm, 0.0);
    double total = 0.0;
    for (int j = 0; j < nm; ++j) {
      const double mj = -m_max + j * dm;
      double density = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = mj + input.x(i);
        density += std::norm(input.amps(i, 0)) * std::exp(-u * u / (2.0 * sigma_q2));
      }
      total += density;
      cdf[j] = total;
    }
    const double u = rng.uniform01() * total;
    int j = int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (j >= nm) j = nm - 1;
    const double prev = j > 0 ? cdf[j - 1] : 0.0;
    const double frac = cdf[j] > prev ? (u - prev) / (cdf[j] - prev) : 0.5;
    m = -m_max + (j - 0.5 + frac) * dm;
  }

  CubicTeleportResult res;
  res.outcome = m;
  res.state = input;
  for (int i = 0; i < n; ++i) {
    const double xv = input.x(i);
    const double y = m + xv;
    const double phase =
        gamma * y * y * y / 3.0 - m * gamma * xv * xv - m * m * gamma * xv;
    res.state.amps(i, 0) *= std::polar(std::exp(-y * y / (4.0 * sigma_q2)), phase);
  }
  res.state.normalize();

  GridWavefunction target = input;
  for (int i = 0; i < n; ++i)
    target.amps(i, 0) *= std::polar(1.0, gamma * std::pow(input.x(i), 3) / 3.0);
  res.fidelity = grid_fidelity(target, res.state);
  return res;
}

// Balanced beam splitter on two copies of a single-mode state, evaluated
// exactly on the sqrt(2)-rescaled output grid: the rotated coordinates
// (y1 -+ y2)/sqrt(2) land on input nodes. The map is unitary, so the norm
// carries over up to clipped tail mass; no renormalization here.
inline GridWavefunction bs_pair_grid(const GridWavefunction& w) {
  if (w.modes() != 1) throw std::invalid_argument("bs_pair_grid: single mode only");
  const int n = w.points();
  const int c = (n - 1) / 2;
  GridWavefunction out;
  out.dx = w.dx * std::sqrt(2.0);
  out.x0 = -0.5 * (n - 1) * out.dx;
  out.amps = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int a = i - j + c;
      const int b = i + j - c;
      if (a < 0 || a >= n || b < 0 || b >= n) continue;
      out.amps(i, j) = w.amps(a, 0) * w.amps(b, 0);
    }
  return out;
}

struct BreedingRound {
  double acceptance;
  double fidelity;
  double fitted_kappa2;
  double fitted_delta2;
};

struct BreedingResult {
  GridWavefunction state;
  std::vector<BreedingRound> trace;
};

namespace detail {

// Fit the comb parameters of a symmetric peaked state and return its
// overlap with the matching approximate GKP |0>. The state is rescaled so
// its detected peak spacing becomes 2 sqrt(pi); the peak variance delta^2
// comes from the lattice Fourier coefficient of |psi|^2 (envelope-free on
// the lattice frequency) and the envelope kappa^2 from matching <q^2>.
inline BreedingRound fit_and_overlap(const GridWavefunction& state) {
  BreedingRound round{};
  const std::vector<double> peaks = find_peaks(state);
  double spacing = 0.0;
  if (peaks.size() >= 2) {
    for (std::size_t i = 1; i < peaks.size(); ++i) spacing += peaks[i] - peaks[i - 1];
    spacing /= double(peaks.size() - 1);
  } else {
    // Single detected peak: treat its width against the standard cell.
    spacing = 2.0 * std::sqrt(M_PI);
  }

  const double lambda = 2.0 * std::sqrt(M_PI) / spacing;
  GridWavefunction scaled = state;
  scaled.x0 *= lambda;
  scaled.dx *= lambda;
  scaled.normalize();

  // Peak width from the second moment of deviations to the nearest lattice
  // point: the measured peak variance is delta^2 / 2.
  const double cell = 2.0 * std::sqrt(M_PI);
  double dev2 = 0.0;
  for (int i = 0; i < scaled.points(); ++i) {
    const double x = scaled.x(i);
    const double dev = x - cell * std::floor(x / cell + 0.5);
    dev2 += dev * dev * std::norm(scaled.amps(i, 0)) * scaled.dx;
  }
  const double delta2 = std::max(2.0 * dev2, 1e-6);
  round.fitted_delta2 = delta2;

  const double q2 = grid_moment(scaled, 2);
  const auto comb_q2 = [&](double kappa2) {
    const int k_max = int(std::ceil(std::sqrt(-std::log(1e-15) / kappa2) / cell)) + 1;
    double wsum = 0.0, msum = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
      const double mu = k * cell;
      const double wgt = std::exp(-kappa2 * mu * mu);
      wsum += wgt;
      msum += wgt * mu * mu;
    }
    return delta2 / 2.0 + msum / wsum;
  };
  double lo = 1e-4, hi = 50.0;
  if (q2 >= comb_q2(lo)) {
    round.fitted_kappa2 = lo;
  } else if (q2 <= comb_q2(hi)) {
    round.fitted_kappa2 = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (comb_q2(mid) > q2 ? lo : hi) = mid;
    }
    round.fitted_kappa2 = 0.5 * (lo + hi);
  }

  const GridWavefunction comb =
      gkp_comb(scaled.points(), scaled.x0, scaled.dx, round.fitted_kappa2, delta2,
               2.0 * std::sqrt(M_PI), 0.0);
  round.fidelity = grid_fidelity(comb, scaled);
  return round;
}

}  // namespace detail

// Iterative breeding: per round, interfere two copies of the current state
// on a balanced beam splitter, read p on the second output, and keep the
// |outcome| <= window branch (taken at its center, outcome 0). The
// acceptance probability integrates the exact p marginal over the window.
inline BreedingResult breed_gkp(double alpha, double r, int rounds, double window = 0.05,
                                int n = 481, double dx = 0.05) {
  if (rounds < 0) throw std::invalid_argument("breed_gkp: negative round count");
  if (!(window > 0.0)) throw std::invalid_argument("breed_gkp: acceptance window must be positive");
  BreedingResult res;
  res.state = squeezed_cat(n, dx, alpha, r);
  for (int round = 0; round < rounds; ++round) {
    const GridWavefunction pair = bs_pair_grid(res.state);
    const int np = pair.points();
    const double dy = pair.dx;
    const double dp = 2.0 * M_PI / (np * dy);
    const double scale = dy / std::sqrt(2.0 * M_PI);

    // p values whose grid cells intersect the acceptance window.
    GridWavefunction branch;
    branch.x0 = pair.x0;
    branch.dx = dy;
    branch.amps = Eigen::MatrixXcd::Zero(np, 1);
    double acceptance = 0.0;
    const int j_reach = int(std::floor((window + dp / 2.0) / dp)) + 1;
    for (int pj = -j_reach; pj <= j_reach; ++pj) {
      const double p = pj * dp;
      const double cell_lo = std::max(p - dp / 2.0, -window);
      const double cell_hi = std::min(p + dp / 2.0, window);
      const double support = cell_hi - cell_lo;
      Eigen::VectorXcd phases(np);
      for (int j = 0; j < np; ++j)
        phases(j) = std::polar(scale, -p * (pair.x0 + j * dy));
      const Eigen::VectorXcd slice = pair.amps * phases;
      if (support > 0.0) acceptance += slice.squaredNorm() * dy * support;
      if (pj == 0) branch.amps.col(0) = slice;
    }

    branch.normalize();
    res.state = branch;
    BreedingRound entry = detail::fit_and_overlap(res.state);
    entry.acceptance = acceptance;
    res.trace.push_back(entry);
  }
  return res;
}

// Overlap with the approximate GKP logical state whose peak and envelope
// variances are tied, kappa^2 = delta^2 = 2 sigma2_gkp.
inline double gkp_overlap(const GridWavefunction& state, double sigma2_gkp, int logical) {
  if (!(sigma2_gkp > 0.0)) throw std::invalid_argument("gkp_overlap: variance must be positive");
  if (logical != 0 && logical != 1) throw std::invalid_argument("gkp_overlap: logical must be 0 or 1");
  if (state.modes() != 1) throw std::invalid_argument("gkp_overlap: single mode only");
  const double kappa2 = 2.0 * sigma2_gkp;
  const double reach = 5.0 / std::sqrt(kappa2);
  if (state.x0 > -reach || state.x_max() < reach)
    throw ResolutionError("gkp_overlap: grid does not cover the envelope support");
  const GridWavefunction comb =
      detail::gkp_comb(state.points(), state.x0, state.dx, kappa2, kappa2,
                       2.0 * std::sqrt(M_PI), logical * std::sqrt(M_PI));
  return grid_fidelity(comb, state);
}

inline GridWavefunction approx_gkp_state(int n, double dx, double sigma2_gkp, int logical) {
  detail::check_grid(n, dx);
  if (!(sigma2_gkp > 0.0))
    throw std::invalid_argument("approx_gkp_state: variance must be positive");
  const double kappa2 = 2.0 * sigma2_gkp;
  const double x0 = -0.5 * (n - 1) * dx;
  return detail::gkp_comb(n, x0, dx, kappa2, kappa2, 2.0 * std::sqrt(M_PI),
                          logical * std::sqrt(M_PI));
}

}  // namespace cvgkp
