// Lagrange time basis on the reference interval and the collocation
// derivative matrix B[j][k] = beta_k'(t_j), j,k = 1..p.

#ifndef CHARFEM_TIME_BASIS_HPP
#define CHARFEM_TIME_BASIS_HPP

#include "charfem/lagrange.hpp"
#include "charfem/quadrature.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace charfem {

/// Degree-p Lagrange basis beta_0..beta_p on nodes 0 = z_0 < z_1 < ... < z_p <= 1.
class TimeBasis {
public:
  explicit TimeBasis(std::vector<double> nodes);

  int degree() const { return lagrange_.degree(); }
  std::span<const double> nodes() const { return lagrange_.nodes(); }
  double node(int k) const { return nodes()[static_cast<std::size_t>(k)]; }

  double eval(int k, double t) const;
  double eval_deriv(int k, double t) const;

  /// All p+1 basis values (resp. derivatives) at t.
  std::vector<double> eval_all(double t) const;
  std::vector<double> eval_deriv_all(double t) const;

private:
  void check_index(int k) const;

  LagrangeBasis lagrange_;
};

TimeBasis make_basis(std::vector<double> nodes);

enum class BasisNodePolicy {
  coincident, ///< {0} followed by the collocation knots
  equispaced, ///< {0, 1/p, ..., 1}
};

TimeBasis default_basis(const ReferenceRule& rule,
                        BasisNodePolicy policy = BasisNodePolicy::coincident);

struct DerivativeMatrix {
  Eigen::MatrixXd entries;
  double condition_estimate = 0.0; ///< 2-norm condition number
};

/// Throws std::runtime_error when B is numerically singular.
DerivativeMatrix derivative_matrix(const TimeBasis& basis, const ReferenceRule& rule);

} // namespace charfem

#endif // CHARFEM_TIME_BASIS_HPP
