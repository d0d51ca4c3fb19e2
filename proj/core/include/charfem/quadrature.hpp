// Interpolatory time quadrature on the reference interval [0,1].
//
// The rules used for collocation in time form a one-parameter family that
// interpolates between p-point Gauss-Legendre (order 2p) and p-point right
// Gauss-Radau (order 2p-1). Every member integrates polynomials of degree
// 2p-2 exactly and satisfies
//
//     int_0^1 v = Q(v) - c_p * v^(2p-1)          for deg v <= 2p-1
//
// with c_p >= 0.

#ifndef CHARFEM_QUADRATURE_HPP
#define CHARFEM_QUADRATURE_HPP

#include <iosfwd>
#include <span>
#include <vector>

namespace charfem {

/// Largest number of collocation points supported by the time rules.
inline constexpr int max_rule_degree = 8;

class ReferenceRule {
public:
  /// Validates ordering (0 < t_1 < ... < t_p <= 1), positive weights and
  /// exactness to degree 2p-2, then computes the error constant.
  ReferenceRule(std::vector<double> knots, std::vector<double> weights,
                double family_parameter = 0.0);

  int degree() const { return static_cast<int>(knots_.size()); }
  std::span<const double> knots() const { return knots_; }
  std::span<const double> weights() const { return weights_; }
  double knot(int j) const { return knots_.at(static_cast<std::size_t>(j)); }
  double weight(int j) const { return weights_.at(static_cast<std::size_t>(j)); }

  /// c_p in the quadrature error identity above.
  double error_constant() const { return error_constant_; }

  /// gamma in P_p + gamma P_{p-1}; 0 is Gauss, gamma_radau = -1 is Radau.
  double family_parameter() const { return family_parameter_; }

private:
  std::vector<double> knots_;
  std::vector<double> weights_;
  double error_constant_ = 0.0;
  double family_parameter_ = 0.0;
};

/// gamma that puts the last root of P_p + gamma P_{p-1} at t = 1.
inline constexpr double radau_family_parameter = -1.0;

ReferenceRule gauss_rule(int p);
ReferenceRule radau_rule(int p);

/// Roots of P_p + s * gamma_radau * P_{p-1} (shifted Legendre) with
/// interpolatory weights. s = 0 gives gauss_rule(p), s = 1 radau_rule(p).
ReferenceRule theta_rule(int p, double s);

/// (Q(t^(2p-1)) - 1/(2p)) / (2p-1)!, clamped to 0 when the defect is within
/// 1e-12 of zero. Throws if the rule is not exact to degree 2p-2.
double compute_cp(const ReferenceRule& rule);

/// Sum_j w_j * samples[j]: the mean over the reference interval.
double apply(const ReferenceRule& rule, std::span<const double> samples);

/// Plain-text table (j, knot, weight) plus p and c_p.
void print_rule(std::ostream& os, const ReferenceRule& rule);

/// n-point Gauss-Legendre on [0,1] without the time-rule degree cap; used for
/// spatial integration. Weights sum to 1.
struct GaussPoints {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussPoints gauss_legendre(int n);

/// n-point Gauss-Lobatto nodes on [0,1] (n >= 2), endpoints included.
std::vector<double> gauss_lobatto_nodes(int n);

/// Shifted Legendre polynomial P_k(2t - 1).
double shifted_legendre(int k, double t);

} // namespace charfem

#endif // CHARFEM_QUADRATURE_HPP
