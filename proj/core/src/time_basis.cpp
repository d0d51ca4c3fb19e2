#include "charfem/time_basis.hpp"

#include <Eigen/SVD>

#include <stdexcept>
#include <string>
#include <utility>

namespace charfem {

namespace {

std::vector<double> checked_time_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("time basis needs at least two nodes");
  if (nodes.front() != 0.0) throw std::invalid_argument("first time basis node must be 0");
  if (nodes.back() > 1.0) throw std::invalid_argument("time basis nodes must not exceed 1");
  return nodes;
}

} // namespace

TimeBasis::TimeBasis(std::vector<double> nodes)
    : lagrange_(checked_time_nodes(std::move(nodes))) {}

void TimeBasis::check_index(int k) const {
  if (k < 0 || k > degree()) {
    throw std::out_of_range("time basis index " + std::to_string(k) + " out of range");
  }
}

double TimeBasis::eval(int k, double t) const {
  check_index(k);
  return lagrange_.values(t)[static_cast<std::size_t>(k)];
}

double TimeBasis::eval_deriv(int k, double t) const {
  check_index(k);
  return lagrange_.derivative(k, t);
}

std::vector<double> TimeBasis::eval_all(double t) const { return lagrange_.values(t); }

std::vector<double> TimeBasis::eval_deriv_all(double t) const {
  return lagrange_.derivatives(t);
}

TimeBasis make_basis(std::vector<double> nodes) { return TimeBasis(std::move(nodes)); }

TimeBasis default_basis(const ReferenceRule& rule, BasisNodePolicy policy) {
  const int p = rule.degree();
  std::vector<double> nodes(static_cast<std::size_t>(p + 1), 0.0);
  for (int k = 1; k <= p; ++k) {
    nodes[static_cast<std::size_t>(k)] =
        policy == BasisNodePolicy::coincident ? rule.knot(k - 1) : static_cast<double>(k) / p;
  }
  if (policy == BasisNodePolicy::equispaced) nodes.back() = 1.0;
  return TimeBasis(std::move(nodes));
}

DerivativeMatrix derivative_matrix(const TimeBasis& basis, const ReferenceRule& rule) {
  const int p = rule.degree();
  if (basis.degree() != p) {
    throw std::invalid_argument("derivative_matrix: basis degree " +
                                std::to_string(basis.degree()) + " != rule degree " +
                                std::to_string(p));
  }
  DerivativeMatrix dm;
  dm.entries.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 1; k <= p; ++k) dm.entries(j, k - 1) = basis.eval_deriv(k, rule.knot(j));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dm.entries);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e14) {
    throw std::runtime_error("derivative matrix is numerically singular");
  }
  dm.condition_estimate = sv(0) / smin;
  return dm;
}

} // namespace charfem
