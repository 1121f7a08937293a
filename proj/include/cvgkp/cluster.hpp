#pragma once
// Gaussian cluster states: graph description with text serialization,
// canonical construction from squeezed vacua and controlled-phase edges,
// nullifier diagnostics, the temporally multiplexed 1-D chain, and the
// measurement-based single-mode gate along a chain.

#include <Eigen/Dense>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvgkp/gaussian.hpp"
#include "cvgkp/rng.hpp"

namespace cvgkp {

// Undirected simple graph on nodes 0..n-1. Edges are stored normalized
// (i < j), sorted, and unique.
struct ClusterGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  void add_edge(int i, int j) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("ClusterGraph: node index out of range");
    if (i == j) throw std::invalid_argument("ClusterGraph: self-loop");
    if (i > j) std::swap(i, j);
    const auto e = std::make_pair(i, j);
    const auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it != edges.end() && *it == e)
      throw std::invalid_argument("ClusterGraph: duplicate edge");
    edges.insert(it, e);
  }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : edges) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    return adj;
  }
};

// Text form: a header line "n=<count>", then one "i j" line per edge.
inline void write_graph(std::ostream& os, const ClusterGraph& g) {
  os << "n=" << g.n << "\n";
  for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
}

inline ClusterGraph read_graph(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && line.empty()) {
  }
  if (line.rfind("n=", 0) != 0) throw std::runtime_error("read_graph: expected n=<count> header");
  ClusterGraph g;
  try {
    std::size_t used = 0;
    g.n = std::stoi(line.substr(2), &used);
    if (used != line.size() - 2) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::runtime_error("read_graph: bad node count");
  }
  if (g.n < 1) throw std::runtime_error("read_graph: bad node count");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i = 0, j = 0;
    std::string extra;
    if (!(ls >> i >> j) || (ls >> extra))
      throw std::runtime_error("read_graph: malformed edge line");
    try {
      g.add_edge(i, j);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("read_graph: ") + e.what());
    }
  }
  return g;
}

// Row i holds the coefficients of the nullifier p_i - sum_{j ~ i} q_j over
// the interleaved (q1, p1, ..., qn, pn) coordinates.
inline Eigen::MatrixXd nullifier_matrix(const ClusterGraph& g) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(g.n, 2 * g.n);
  for (int i = 0; i < g.n; ++i) rows(i, 2 * i + 1) = 1.0;
  for (const auto& [i, j] : g.edges) {
    rows(i, 2 * j) = -1.0;
    rows(j, 2 * i) = -1.0;
  }
  return rows;
}

// p-squeezed vacua on every node, one controlled-phase gate per edge.
inline GaussianState build_canonical_cluster(const ClusterGraph& g, double r) {
  if (g.n < 1) throw std::invalid_argument("build_canonical_cluster: empty graph");
  GaussianState s = vacuum_state(g.n);
  for (int i = 0; i < g.n; ++i)
    s = apply_gate(s, make_gate(g.n, GateKind::squeeze, {-r}, {i}));
  for (const auto& [i, j] : g.edges)
    s = apply_gate(s, make_gate(g.n, GateKind::cz, {}, {i, j}));
  return s;
}

// Second moments of a set of linear observables: rows * cov * rows^T. For
// nullifier rows the diagonal holds the nullifier variances and the
// off-diagonal their covariances.
inline Eigen::MatrixXd observable_second_moments(const GaussianState& s,
                                                 const Eigen::MatrixXd& rows) {
  if (rows.cols() != s.cov.rows())
    throw std::invalid_argument("observable_second_moments: dimension mismatch");
  Eigen::MatrixXd m = rows * s.cov * rows.transpose();
  return 0.5 * (m + m.transpose().eval());
}

namespace detail {

// Left-multiply the rows of S belonging to `modes` by the dense block
// `small` (a gate acting on those modes), leaving the rest untouched.
inline void premultiply_rows(Eigen::MatrixXd& S, const Eigen::MatrixXd& small,
                             const std::vector<int>& modes) {
  std::vector<int> idx;
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  Eigen::MatrixXd gathered(idx.size(), S.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) gathered.row(i) = S.row(idx[i]);
  gathered = small * gathered;
  for (std::size_t i = 0; i < idx.size(); ++i) S.row(idx[i]) = gathered.row(i);
}

}  // namespace detail

struct TimeMuxChain {
  GaussianState state;
  // Unit-norm rows spanning the combinations whose variance is squeezed;
  // every row's variance is exactly exp(-2r)/2.
  Eigen::MatrixXd nullifiers;
};

// Temporally multiplexed 1-D chain from n_pairs two-mode time bins. Each bin
// holds a q-squeezed mode A_k and a p-squeezed mode B_k mixed on a balanced
// beam splitter; a second balanced beam splitter couples A_k to the previous
// bin's B_{k-1}, the delayed rail.
inline TimeMuxChain timemux_1d_chain(int n_pairs, double r) {
  if (n_pairs < 1) throw std::invalid_argument("timemux_1d_chain: need at least one pair");
  const int n = 2 * n_pairs;
  const Eigen::MatrixXd bs = make_gate(2, GateKind::bs, {M_PI / 2.0}, {0, 1}).S;

  Eigen::MatrixXd net = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  for (int k = 0; k < n_pairs; ++k) detail::premultiply_rows(net, bs, {2 * k, 2 * k + 1});
  for (int k = 1; k < n_pairs; ++k) detail::premultiply_rows(net, bs, {2 * k, 2 * k - 1});

  // Input variances: mode 2k is q-squeezed, mode 2k+1 p-squeezed.
  Eigen::VectorXd d(2 * n);
  for (int k = 0; k < n_pairs; ++k) {
    d(4 * k + 0) = 0.5 * std::exp(-2.0 * r);  // q of A_k
    d(4 * k + 1) = 0.5 * std::exp(2.0 * r);
    d(4 * k + 2) = 0.5 * std::exp(2.0 * r);  // q of B_k
    d(4 * k + 3) = 0.5 * std::exp(-2.0 * r);
  }

  TimeMuxChain out;
  out.state.mean = Eigen::VectorXd::Zero(2 * n);
  out.state.cov = net * d.asDiagonal() * net.transpose();
  out.state.cov = 0.5 * (out.state.cov + out.state.cov.transpose().eval());

  // A combination c q + ... has variance sum_i d_i (S^T c)_i^2, so the
  // squeezed subspace is the kernel of the anti-squeezed rows of S^T.
  Eigen::MatrixXd anti(n, 2 * n);
  const Eigen::MatrixXd net_t = net.transpose();
  for (int k = 0; k < n_pairs; ++k) {
    anti.row(2 * k) = net_t.row(4 * k + 1);
    anti.row(2 * k + 1) = net_t.row(4 * k + 2);
  }
  const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(anti).kernel();
  out.nullifiers = kernel.transpose();
  for (int i = 0; i < out.nullifiers.rows(); ++i) out.nullifiers.row(i).normalize();
  return out;
}

// Target single-mode map of a chain of measurements in the p + m q bases:
// each step contributes a shear P(m) followed by the quarter rotation that
// teleportation applies, rightmost factor first.
inline Eigen::Matrix2d oneway_target_map(const std::vector<double>& ms) {
  Eigen::Matrix2d f;
  f << 0.0, -1.0, 1.0, 0.0;
  Eigen::Matrix2d total = Eigen::Matrix2d::Identity();
  for (double m : ms) {
    Eigen::Matrix2d shear;
    shear << 1.0, 0.0, m, 1.0;
    total = f * shear * total;
  }
  return total;
}

struct OneWayResult {
  GaussianState state;  // single mode
  Eigen::Matrix2d target;
  std::vector<double> outcomes;
};

// Push a single-mode Gaussian state through a linear cluster: for each basis
// slope m, link a fresh p-squeezed node, measure the current head in
// p + m q, and cancel the outcome dependence by displacing with the
// conditional-mean response (the measurement feedforward).
inline OneWayResult oneway_gate(const GaussianState& input, const std::vector<double>& ms,
                                double r, CounterRng& rng) {
  if (input.n_modes() != 1) throw std::invalid_argument("oneway_gate: input must be one mode");
  GaussianState anc = apply_gate(vacuum_state(1), make_gate(1, GateKind::squeeze, {-r}, {0}));

  OneWayResult out;
  out.state = input;
  out.target = oneway_target_map(ms);
  for (double m : ms) {
    GaussianState pair = tensor(out.state, anc);
    pair = apply_gate(pair, make_gate(2, GateKind::cz, {}, {0, 1}));
    const double phi = std::atan2(1.0, m);

    const Eigen::VectorXd base = homodyne_condition(pair, 0, phi, 0.0).mean;
    const Eigen::VectorXd response = homodyne_condition(pair, 0, phi, 1.0).mean - base;

    HomodyneOutcome meas = homodyne(pair, 0, phi, rng);
    meas.conditioned.mean -= response * meas.value;
    out.state = std::move(meas.conditioned);
    out.outcomes.push_back(meas.value);
  }
  return out;
}

}  // namespace cvgkp
