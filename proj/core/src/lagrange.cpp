#include "charfem/lagrange.hpp"

#include <stdexcept>
#include <utility>

namespace charfem {

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("Lagrange basis needs at least one node");
  for (std::size_t k = 1; k < nodes_.size(); ++k) {
    if (!(nodes_[k] > nodes_[k - 1])) {
      throw std::invalid_argument("Lagrange nodes must be strictly increasing");
    }
  }
  bary_.assign(nodes_.size(), 1.0);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
      if (m != k) bary_[k] /= (nodes_[k] - nodes_[m]);
    }
  }
}

std::vector<double> LagrangeBasis::values(double x) const {
  const std::size_t n = nodes_.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (x == nodes_[k]) {
      out[k] = 1.0;
      return out;
    }
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = bary_[k] / (x - nodes_[k]);
    denom += out[k];
  }
  for (double& v : out) v /= denom;
  return out;
}

double LagrangeBasis::derivative(int k, double x) const {
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t n = nodes_.size();
  // l_k'(x) = sum_{m != k} 1/(x_k - x_m) prod_{l != k,m} (x - x_l)/(x_k - x_l)
  double sum = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (m == kk) continue;
    double term = 1.0 / (nodes_[kk] - nodes_[m]);
    for (std::size_t l = 0; l < n; ++l) {
      if (l == kk || l == m) continue;
      term *= (x - nodes_[l]) / (nodes_[kk] - nodes_[l]);
    }
    sum += term;
  }
  return sum;
}

std::vector<double> LagrangeBasis::derivatives(double x) const {
  std::vector<double> out(nodes_.size());
  for (int k = 0; k < size(); ++k) out[static_cast<std::size_t>(k)] = derivative(k, x);
  return out;
}

} // namespace charfem
