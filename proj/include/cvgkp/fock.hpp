#pragma once
// Truncated number-basis numerics: quadrature matrices, product-formula
// error scaling, exact operator-decomposition identities, and the cubic
// phase state approximation. Operator checks are evaluated on the interior
// three quarters of the indices, where truncation artifacts do not reach.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>
#include <vector>

namespace cvgkp {

struct FockOperator {
  int dim = 0;
  Eigen::MatrixXcd matrix;
};

inline Eigen::MatrixXcd annihilation(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 1; i < dim; ++i) a(i - 1, i) = std::sqrt(double(i));
  return a;
}

// q = (a + a^dag)/sqrt(2), p = -i (a - a^dag)/sqrt(2).
inline std::pair<FockOperator, FockOperator> quadrature_matrices(int dim) {
  if (dim < 4) throw std::invalid_argument("quadrature_matrices: need dim >= 4");
  const Eigen::MatrixXcd a = annihilation(dim);
  const Eigen::MatrixXcd ad = a.adjoint();
  FockOperator q{dim, (a + ad) / std::sqrt(2.0)};
  FockOperator p{dim, std::complex<double>(0.0, -1.0) * (a - ad) / std::sqrt(2.0)};
  return {std::move(q), std::move(p)};
}

namespace detail {

inline Eigen::MatrixXcd matrix_power(Eigen::MatrixXcd base, long exponent) {
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(base.rows(), base.cols());
  for (; exponent > 0; exponent >>= 1) {
    if (exponent & 1) result = result * base;
    base = base * base;
  }
  return result;
}

}  // namespace detail

// Largest singular value of the top-left block that excludes the top
// quarter of the indices.
inline double interior_norm(const Eigen::MatrixXcd& m) {
  const int keep = int(m.rows()) * 3 / 4;
  return m.topLeftCorner(keep, keep).jacobiSvd().singularValues()(0);
}

struct TrotterErrors {
  double symmetric;   // (e^{iAt/2N} e^{iBt/N} e^{iAt/2N})^N vs e^{i(A+B)t}
  double commutator;  // (e^{iBt/N} e^{iAt/N} e^{-iBt/N} e^{-iAt/N})^{N^2} vs e^{t^2 [A,B]}
};

// Interior-norm distances between the two product formulas and their exact
// targets, for Hermitian A and B.
inline TrotterErrors trotter_product_error(const Eigen::MatrixXcd& a,
                                           const Eigen::MatrixXcd& b, double t,
                                           int n_steps) {
  if (a.rows() != b.rows() || a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("trotter_product_error: dimension mismatch");
  if (n_steps < 1) throw std::invalid_argument("trotter_product_error: need n_steps >= 1");
  const std::complex<double> im(0.0, 1.0);
  const double h = t / n_steps;

  const Eigen::MatrixXcd half_a = (im * (h / 2.0) * a).exp();
  const Eigen::MatrixXcd full_b = (im * h * b).exp();
  const Eigen::MatrixXcd sym =
      detail::matrix_power(half_a * full_b * half_a, n_steps);
  const Eigen::MatrixXcd exact = (im * t * (a + b)).exp();

  const Eigen::MatrixXcd ea = (im * h * a).exp();
  const Eigen::MatrixXcd eb = (im * h * b).exp();
  const Eigen::MatrixXcd loop = eb * ea * eb.adjoint() * ea.adjoint();
  const Eigen::MatrixXcd comm_product =
      detail::matrix_power(loop, long(n_steps) * long(n_steps));
  const Eigen::MatrixXcd comm_exact = (t * t * (a * b - b * a)).exp();

  return {interior_norm(sym - exact), interior_norm(comm_product - comm_exact)};
}

struct IdentityResiduals {
  double power;       // q^{m+1} against the nested-commutator form
  double symmetric;   // q^m p^n + p^n q^m against the commutator expansion
};

// Exact decomposition identities under [q, p] = i:
//   q^{m+1} = -(1/(6m)) [q^m, [q^3, p^2]]
//   q^m p^n + p^n q^m = -(2i/((n+1)(m+1))) [q^{m+1}, p^{n+1}]
//                       - (1/(n+1)) sum_{k=1}^{n-1} [p^{n-k}, [q^m, p^k]]
// Residuals are interior norms; they grow near the truncation edge, which
// the interior restriction excludes.
inline IdentityResiduals commutator_identity_check(int m, int n, int dim) {
  if (m < 1 || n < 1) throw std::invalid_argument("commutator_identity_check: need m, n >= 1");
  if (dim < 4 * (m + n + 4))
    throw std::invalid_argument("commutator_identity_check: truncation too small");
  const auto [qo, po] = quadrature_matrices(dim);
  const Eigen::MatrixXcd& q = qo.matrix;
  const Eigen::MatrixXcd& p = po.matrix;
  const auto power = [](const Eigen::MatrixXcd& x, int k) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(x.rows(), x.cols());
    for (int i = 0; i < k; ++i) r = r * x;
    return r;
  };
  const auto comm = [](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
    return Eigen::MatrixXcd(x * y - y * x);
  };

  const Eigen::MatrixXcd qm = power(q, m);
  const Eigen::MatrixXcd inner = comm(power(q, 3), power(p, 2));
  const Eigen::MatrixXcd lhs_power = power(q, m + 1);
  const Eigen::MatrixXcd rhs_power = -comm(qm, inner) / (6.0 * m);

  const Eigen::MatrixXcd pn = power(p, n);
  const Eigen::MatrixXcd lhs_sym = qm * pn + pn * qm;
  Eigen::MatrixXcd rhs_sym = std::complex<double>(0.0, -2.0 / ((n + 1.0) * (m + 1.0))) *
                             comm(power(q, m + 1), power(p, n + 1));
  for (int k = 1; k <= n - 1; ++k)
    rhs_sym -= comm(power(p, n - k), comm(qm, power(p, k))) / (n + 1.0);

  return {interior_norm(lhs_power - rhs_power), interior_norm(lhs_sym - rhs_sym)};
}

// Normalized |0> + c |3> with c = i gamma sqrt(3)/2, the leading-order
// approximation of the cubic phase state.
inline Eigen::VectorXcd cps_approx_state(double gamma, int dim) {
  if (!(std::abs(gamma) < 1.0))
    throw std::invalid_argument("cps_approx_state: |gamma| must be < 1");
  if (dim < 4) throw std::invalid_argument("cps_approx_state: need dim >= 4");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  const std::complex<double> c(0.0, gamma * std::sqrt(3.0) / 2.0);
  v(0) = 1.0;
  v(3) = c;
  return v / std::sqrt(1.0 + std::norm(c));
}

// Position wavefunction of a number-basis coefficient vector via the
// normalized Hermite-function recurrence.
inline std::complex<double> hermite_point(const Eigen::VectorXcd& coeffs, double x) {
  double prev = 0.0;
  double cur = std::pow(M_PI, -0.25) * std::exp(-x * x / 2.0);
  std::complex<double> acc = coeffs(0) * cur;
  for (int n = 1; n < coeffs.size(); ++n) {
    const double next = x * std::sqrt(2.0 / n) * cur - std::sqrt((n - 1.0) / n) * prev;
    prev = cur;
    cur = next;
    acc += coeffs(n) * cur;
  }
  return acc;
}

}  // namespace cvgkp
