// Lagrange polynomials on a strictly increasing node set.

#ifndef CHARFEM_LAGRANGE_HPP
#define CHARFEM_LAGRANGE_HPP

#include <span>
#include <vector>

namespace charfem {

class LagrangeBasis {
public:
  explicit LagrangeBasis(std::vector<double> nodes);

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }
  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }

  /// Values of all basis polynomials at x (barycentric form).
  std::vector<double> values(double x) const;
  /// Derivatives of all basis polynomials at x.
  std::vector<double> derivatives(double x) const;
  double derivative(int k, double x) const;

private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
};

} // namespace charfem

#endif // CHARFEM_LAGRANGE_HPP
