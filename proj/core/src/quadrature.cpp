#include "charfem/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace charfem {

namespace {

constexpr double exactness_tol = 1e-12;
constexpr double root_tol = 1e-13;

// P_k(x) and P_k'(x) on [-1,1] by the three-term recurrence.
std::pair<double, double> legendre(int k, double x) {
  if (k == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    const double d2 = d0 + (2.0 * n + 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double monomial_sum(std::span<const double> knots, std::span<const double> weights,
                    int k) {
  double q = 0.0;
  for (std::size_t j = 0; j < knots.size(); ++j) q += weights[j] * std::pow(knots[j], k);
  return q;
}

// Eigenvalues of the Legendre Jacobi matrix whose last diagonal entry is
// shifted by -delta; these are the roots of pi_p + delta * pi_{p-1}.
std::vector<double> jacobi_eigenvalues(int p, double last_diagonal) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p, p);
  for (int k = 1; k < p; ++k) {
    const double kk = static_cast<double>(k);
    const double off = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jac(k - 1, k) = off;
    jac(k, k - 1) = off;
  }
  jac(p - 1, p - 1) = last_diagonal;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac, Eigen::EigenvaluesOnly);
  std::vector<double> x(eig.eigenvalues().data(), eig.eigenvalues().data() + p);
  std::sort(x.begin(), x.end());
  return x;
}

void check_degree(int p) {
  if (p < 1 || p > max_rule_degree) {
    throw std::invalid_argument("rule degree must lie in [1, " +
                                std::to_string(max_rule_degree) + "], got " +
                                std::to_string(p));
  }
}

} // namespace

ReferenceRule::ReferenceRule(std::vector<double> knots, std::vector<double> weights,
                             double family_parameter)
    : knots_(std::move(knots)), weights_(std::move(weights)),
      family_parameter_(family_parameter) {
  if (knots_.empty() || knots_.size() != weights_.size()) {
    throw std::invalid_argument("rule needs matching, non-empty knots and weights");
  }
  if (!(knots_.front() > 0.0) || knots_.back() > 1.0) {
    throw std::invalid_argument("rule knots must lie in (0,1]");
  }
  for (std::size_t j = 1; j < knots_.size(); ++j) {
    if (!(knots_[j] > knots_[j - 1])) {
      throw std::invalid_argument("rule knots must be strictly increasing");
    }
  }
  for (double w : weights_) {
    if (!(w > 0.0)) throw std::invalid_argument("rule weights must be positive");
  }
  error_constant_ = compute_cp(*this);
}

double compute_cp(const ReferenceRule& rule) {
  const int p = rule.degree();
  for (int k = 0; k <= 2 * p - 2; ++k) {
    const double err = monomial_sum(rule.knots(), rule.weights(), k) - 1.0 / (k + 1.0);
    if (std::abs(err) > exactness_tol) {
      throw std::invalid_argument("rule is not exact for t^" + std::to_string(k) +
                                  " (defect " + std::to_string(err) + ")");
    }
  }
  const double defect =
      monomial_sum(rule.knots(), rule.weights(), 2 * p - 1) - 1.0 / (2.0 * p);
  if (std::abs(defect) <= exactness_tol) return 0.0;
  if (defect < 0.0) {
    throw std::invalid_argument("rule has a negative error constant");
  }
  return defect / factorial(2 * p - 1);
}

ReferenceRule theta_rule(int p, double s) {
  check_degree(p);
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("theta_rule parameter must lie in [0,1]");
  }
  const double gamma = s * radau_family_parameter;
  const double delta = gamma * p / (2.0 * p - 1.0);
  std::vector<double> x = jacobi_eigenvalues(p, -delta);

  auto residual = [&](double xi) {
    const auto [pp, dp] = legendre(p, xi);
    const auto [pm, dm] = legendre(p - 1, xi);
    return std::pair{pp + gamma * pm, dp + gamma * dm};
  };
  for (double& xi : x) {
    for (int it = 0; it < 20; ++it) {
      const auto [q, dq] = residual(xi);
      if (dq == 0.0) break;
      const double step = q / dq;
      xi -= step;
      if (std::abs(step) < 1e-17) break;
    }
    if (std::abs(residual(xi).first) > root_tol) {
      throw std::runtime_error("theta_rule: knot polishing did not converge");
    }
  }

  std::vector<double> knots(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) knots[static_cast<std::size_t>(j)] = 0.5 * (x[static_cast<std::size_t>(j)] + 1.0);
  if (s == 1.0 || std::abs(knots.back() - 1.0) < 1e-14) {
    if (knots.back() > 1.0 - 1e-14) knots.back() = 1.0;
  }
  if (!(knots.front() > 0.0) || knots.back() > 1.0) {
    throw std::invalid_argument("theta_rule: knots leave (0,1] for this parameter");
  }

  // Interpolatory weights from the Legendre moment system
  //   sum_j w_j P_k(2 t_j - 1) = delta_{k0},  k = 0..p-1.
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  MatL vander(p, p);
  VecL moments = VecL::Zero(p);
  moments(0) = 1.0L;
  for (int k = 0; k < p; ++k) {
    for (int j = 0; j < p; ++j) {
      const long double xj = 2.0L * knots[static_cast<std::size_t>(j)] - 1.0L;
      long double q0 = 1.0L, q1 = xj;
      long double val = 1.0L;
      if (k == 1) val = xj;
      for (int n = 1; n < k; ++n) {
        const long double q2 = ((2.0L * n + 1.0L) * xj * q1 - n * q0) / (n + 1.0L);
        q0 = q1;
        q1 = q2;
        val = q2;
      }
      vander(k, j) = val;
    }
  }
  const VecL w = vander.fullPivLu().solve(moments);
  std::vector<double> weights(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    weights[static_cast<std::size_t>(j)] = static_cast<double>(w(j));
    if (!(weights[static_cast<std::size_t>(j)] > 0.0)) {
      throw std::invalid_argument("theta_rule: non-positive weight for this parameter");
    }
  }
  return ReferenceRule(std::move(knots), std::move(weights), gamma);
}

ReferenceRule gauss_rule(int p) { return theta_rule(p, 0.0); }

ReferenceRule radau_rule(int p) { return theta_rule(p, 1.0); }

double apply(const ReferenceRule& rule, std::span<const double> samples) {
  if (static_cast<int>(samples.size()) != rule.degree()) {
    throw std::invalid_argument("apply: expected " + std::to_string(rule.degree()) +
                                " samples, got " + std::to_string(samples.size()));
  }
  double q = 0.0;
  for (int j = 0; j < rule.degree(); ++j) q += rule.weight(j) * samples[static_cast<std::size_t>(j)];
  return q;
}

void print_rule(std::ostream& os, const ReferenceRule& rule) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "# p = " << rule.degree() << ", gamma = " << rule.family_parameter()
     << ", c_p = " << std::setprecision(17) << rule.error_constant() << '\n';
  os << "j knot weight\n";
  for (int j = 0; j < rule.degree(); ++j) {
    os << j + 1 << ' ' << rule.knot(j) << ' ' << rule.weight(j) << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

GaussPoints gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n must lie in [1,64]");
  std::vector<double> x = jacobi_eigenvalues(n, 0.0);
  GaussPoints g;
  g.points.resize(static_cast<std::size_t>(n));
  g.weights.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double xi = x[static_cast<std::size_t>(j)];
    for (int it = 0; it < 10; ++it) {
      const auto [q, dq] = legendre(n, xi);
      const double step = q / dq;
      xi -= step;
      if (std::abs(step) < 1e-17) break;
    }
    const double dq = legendre(n, xi).second;
    g.points[static_cast<std::size_t>(j)] = 0.5 * (xi + 1.0);
    g.weights[static_cast<std::size_t>(j)] = 1.0 / ((1.0 - xi * xi) * dq * dq);
  }
  return g;
}

std::vector<double> gauss_lobatto_nodes(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto_nodes: n must be >= 2");
  const int N = n - 1;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i <= N; ++i) x[static_cast<std::size_t>(i)] = std::cos(std::numbers::pi * i / N);
  for (double& xi : x) {
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_N, p0 = P_{N-1}
      const double step = (xi * p1 - p0) / ((N + 1.0) * p1);
      xi -= step;
      if (std::abs(step) < 1e-17) break;
    }
  }
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = 0.5 * (x[i] + 1.0);
  std::sort(t.begin(), t.end());
  t.front() = 0.0;
  t.back() = 1.0;
  return t;
}

double shifted_legendre(int k, double t) { return legendre(k, 2.0 * t - 1.0).first; }

} // namespace charfem
