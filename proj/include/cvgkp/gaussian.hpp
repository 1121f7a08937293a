#pragma once
// Exact multimode Gaussian-state simulation: symplectic gates, homodyne
// measurement with the conditional (Schur-complement) update, and Gaussian
// noise channels.
//
// Conventions: hbar = 1, [q, p] = i, quadratures interleaved as
// (q1, p1, ..., qn, pn), vacuum covariance I/2. Mode indices are 0-based.

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvgkp/rng.hpp"

namespace cvgkp {

struct GaussianState {
  Eigen::VectorXd mean;  // length 2n
  Eigen::MatrixXd cov;   // 2n x 2n, symmetric

  int n_modes() const { return int(mean.size()) / 2; }
};

inline GaussianState vacuum_state(int n) {
  if (n < 1) throw std::invalid_argument("vacuum_state: need at least one mode");
  GaussianState s;
  s.mean = Eigen::VectorXd::Zero(2 * n);
  s.cov = 0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  return s;
}

// Symplectic form: Omega(2k, 2k+1) = 1, Omega(2k+1, 2k) = -1.
inline Eigen::MatrixXd omega(int n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    w(2 * k, 2 * k + 1) = 1.0;
    w(2 * k + 1, 2 * k) = -1.0;
  }
  return w;
}

// Affine quadrature map x -> S x + d.
struct SymplecticGate {
  Eigen::MatrixXd S;
  Eigen::VectorXd d;
};

enum class GateKind {
  displace_q,  // q -> q + v
  displace_p,  // p -> p + u
  displace,    // alpha = (v + iu)/sqrt(2); params (Re alpha, Im alpha)
  squeeze,     // q -> e^{-r} q, p -> e^{r} p
  phase,       // p -> p + eta q
  rotate,      // q -> q cos - p sin, p -> q sin + p cos
  bs,          // transmissivity T = cos^2(theta/2)
  cz,          // p1 -> p1 + q2, p2 -> p2 + q1
  cx,          // q2 -> q2 + q1, p1 -> p1 - p2
};

namespace detail {

inline void check_targets(int n, const std::vector<int>& t, std::size_t want) {
  if (t.size() != want) throw std::invalid_argument("make_gate: wrong target count");
  for (int m : t)
    if (m < 0 || m >= n) throw std::invalid_argument("make_gate: mode index out of range");
  if (want == 2 && t[0] == t[1])
    throw std::invalid_argument("make_gate: duplicate target indices");
}

inline void check_params(const std::vector<double>& p, std::size_t want) {
  if (p.size() != want) throw std::invalid_argument("make_gate: wrong parameter count");
}

}  // namespace detail

inline SymplecticGate make_gate(int n_modes, GateKind kind,
                                const std::vector<double>& params,
                                const std::vector<int>& targets) {
  if (n_modes < 1) throw std::invalid_argument("make_gate: no modes");
  SymplecticGate g;
  g.S = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);
  g.d = Eigen::VectorXd::Zero(2 * n_modes);

  auto q = [](int m) { return 2 * m; };
  auto p = [](int m) { return 2 * m + 1; };

  switch (kind) {
    case GateKind::displace_q: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 1);
      g.d(q(targets[0])) = params[0];
      break;
    }
    case GateKind::displace_p: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 1);
      g.d(p(targets[0])) = params[0];
      break;
    }
    case GateKind::displace: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 2);
      g.d(q(targets[0])) = std::sqrt(2.0) * params[0];
      g.d(p(targets[0])) = std::sqrt(2.0) * params[1];
      break;
    }
    case GateKind::squeeze: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 1);
      g.S(q(targets[0]), q(targets[0])) = std::exp(-params[0]);
      g.S(p(targets[0]), p(targets[0])) = std::exp(params[0]);
      break;
    }
    case GateKind::phase: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 1);
      g.S(p(targets[0]), q(targets[0])) = params[0];
      break;
    }
    case GateKind::rotate: {
      detail::check_targets(n_modes, targets, 1);
      detail::check_params(params, 1);
      const double c = std::cos(params[0]), s = std::sin(params[0]);
      const int a = targets[0];
      g.S(q(a), q(a)) = c;
      g.S(q(a), p(a)) = -s;
      g.S(p(a), q(a)) = s;
      g.S(p(a), p(a)) = c;
      break;
    }
    case GateKind::bs: {
      detail::check_targets(n_modes, targets, 2);
      detail::check_params(params, 1);
      const double c = std::cos(params[0] / 2.0);  // sqrt(T)
      const double s = std::sin(params[0] / 2.0);  // sqrt(R)
      const int a = targets[0], b = targets[1];
      for (int off : {0, 1}) {
        const int ia = 2 * a + off, ib = 2 * b + off;
        g.S(ia, ia) = c;
        g.S(ia, ib) = s;
        g.S(ib, ia) = -s;
        g.S(ib, ib) = c;
      }
      break;
    }
    case GateKind::cz: {
      detail::check_targets(n_modes, targets, 2);
      detail::check_params(params, 0);
      g.S(p(targets[0]), q(targets[1])) = 1.0;
      g.S(p(targets[1]), q(targets[0])) = 1.0;
      break;
    }
    case GateKind::cx: {
      detail::check_targets(n_modes, targets, 2);
      detail::check_params(params, 0);
      g.S(q(targets[1]), q(targets[0])) = 1.0;
      g.S(p(targets[0]), p(targets[1])) = -1.0;
      break;
    }
  }
  return g;
}

// compose(g2, g1): the gate equal to applying g1 first, then g2.
inline SymplecticGate compose(const SymplecticGate& g2, const SymplecticGate& g1) {
  return {g2.S * g1.S, g2.S * g1.d + g2.d};
}

inline GaussianState apply_gate(const GaussianState& s, const SymplecticGate& g) {
  if (g.S.rows() != s.mean.size())
    throw std::invalid_argument("apply_gate: dimension mismatch");
  GaussianState out;
  out.mean = g.S * s.mean + g.d;
  out.cov = g.S * s.cov * g.S.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose().eval());  // keep exactly symmetric
  return out;
}

inline GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const auto na = a.mean.size(), nb = b.mean.size();
  GaussianState out;
  out.mean.resize(na + nb);
  out.mean << a.mean, b.mean;
  out.cov = Eigen::MatrixXd::Zero(na + nb, na + nb);
  out.cov.topLeftCorner(na, na) = a.cov;
  out.cov.bottomRightCorner(nb, nb) = b.cov;
  return out;
}

struct PhysicalityReport {
  bool ok;
  double min_uncertainty_eig;  // min eigenvalue of cov + (i/2) Omega
  double max_asymmetry;
};

// Uncertainty relation: cov + (i/2) Omega must be positive semidefinite.
inline PhysicalityReport physicality_check(const GaussianState& s) {
  const int n = s.n_modes();
  PhysicalityReport r;
  r.max_asymmetry = (s.cov - s.cov.transpose()).cwiseAbs().maxCoeff();
  Eigen::MatrixXcd m = s.cov.cast<std::complex<double>>() +
                       std::complex<double>(0.0, 0.5) * omega(n).cast<std::complex<double>>();
  m = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  r.min_uncertainty_eig = es.eigenvalues().minCoeff();
  r.ok = r.max_asymmetry <= 1e-12 && r.min_uncertainty_eig >= -1e-10;
  return r;
}

struct HomodyneOutcome {
  double value;
  GaussianState conditioned;  // one fewer mode
};

namespace detail {

// Condition on q of `mode` taking value `outcome`; drops the measured mode.
inline GaussianState condition_on_q(const GaussianState& s, int mode, double outcome) {
  const int n = s.n_modes();
  const int iq = 2 * mode;
  const double var = s.cov(iq, iq);
  if (!(var > 0.0))
    throw std::runtime_error("homodyne: singular marginal variance");

  std::vector<int> rest;
  rest.reserve(2 * n - 2);
  for (int i = 0; i < 2 * n; ++i)
    if (i != iq && i != iq + 1) rest.push_back(i);

  Eigen::VectorXd c(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) c(i) = s.cov(rest[i], iq);

  GaussianState out;
  out.mean.resize(rest.size());
  out.cov.resize(rest.size(), rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    out.mean(i) = s.mean(rest[i]) + c(i) * (outcome - s.mean(iq)) / var;
    for (std::size_t j = 0; j < rest.size(); ++j)
      out.cov(i, j) = s.cov(rest[i], rest[j]) - c(i) * c(j) / var;
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
  return out;
}

// Rotate `mode` so that x_phi = q cos(phi) + p sin(phi) becomes its q.
inline GaussianState rotate_measured_quadrature(const GaussianState& s, int mode, double phi) {
  if (mode < 0 || mode >= s.n_modes())
    throw std::invalid_argument("homodyne: mode index out of range");
  if (phi == 0.0) return s;
  return apply_gate(s, make_gate(s.n_modes(), GateKind::rotate, {-phi}, {mode}));
}

}  // namespace detail

// Measure x_phi on `mode` with a fixed outcome (post-selection / feedforward
// bookkeeping); returns the conditioned state with the mode removed.
inline GaussianState homodyne_condition(const GaussianState& s, int mode, double phi,
                                        double outcome) {
  return detail::condition_on_q(detail::rotate_measured_quadrature(s, mode, phi), mode, outcome);
}

// Measure x_phi on `mode`, drawing the outcome from the exact marginal.
inline HomodyneOutcome homodyne(const GaussianState& s, int mode, double phi, CounterRng& rng) {
  const GaussianState rot = detail::rotate_measured_quadrature(s, mode, phi);
  const int iq = 2 * mode;
  const double var = rot.cov(iq, iq);
  if (!(var > 0.0))
    throw std::runtime_error("homodyne: singular marginal variance");
  const double value = rot.mean(iq) + std::sqrt(var) * rng.gauss();
  return {value, detail::condition_on_q(rot, mode, value)};
}

// Plain-text fixture format: header with n_modes, mean on one line, then the
// covariance row-major, one row per line.
inline void write_state(std::ostream& os, const GaussianState& s) {
  const int n = s.n_modes();
  os.precision(17);
  os << "n_modes " << n << "\nmean";
  for (int i = 0; i < 2 * n; ++i) os << ' ' << s.mean(i);
  os << "\ncov\n";
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) os << s.cov(i, j) << (j + 1 < 2 * n ? " " : "");
    os << '\n';
  }
}

inline GaussianState read_state(std::istream& is) {
  std::string tag;
  int n = 0;
  is >> tag >> n;
  if (tag != "n_modes" || n < 1 || !is)
    throw std::runtime_error("read_state: bad header");
  GaussianState s;
  s.mean.resize(2 * n);
  s.cov.resize(2 * n, 2 * n);
  is >> tag;
  if (tag != "mean") throw std::runtime_error("read_state: expected mean");
  for (int i = 0; i < 2 * n; ++i) is >> s.mean(i);
  is >> tag;
  if (tag != "cov") throw std::runtime_error("read_state: expected cov");
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) is >> s.cov(i, j);
  if (!is) throw std::runtime_error("read_state: truncated input");
  return s;
}

}  // namespace cvgkp
