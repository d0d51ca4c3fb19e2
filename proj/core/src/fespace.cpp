#include "charfem/fespace.hpp"

#include "charfem/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace charfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

template <class LocalFn>
SparseMatrix assemble_matrix(const SliceSpace& space, LocalFn&& local) {
  const int nl = space.degree() + 1;
  const int n = space.dof_count();
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(space.element_count() * nl * nl));
  Eigen::MatrixXd ke(nl, nl);
  for (int e = 0; e < space.element_count(); ++e) {
    ke.setZero();
    local(e, ke);
    for (int i = 0; i < nl; ++i) {
      for (int j = 0; j < nl; ++j) trips.emplace_back(space.dof(e, i), space.dof(e, j), ke(i, j));
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::VectorXd solve_mass(const SliceSpace& space, const Eigen::VectorXd& rhs) {
  Eigen::SimplicialLLT<SparseMatrix> llt(mass_matrix(space));
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("mass matrix factorization failed (corrupt slice?)");
  }
  return llt.solve(rhs);
}

// Value (or x-derivative) of `field` restricted to element e at x.
double eval_in_element(const Field& field, int e, double x, bool derivative) {
  const SliceSpace& space = *field.space;
  const double xl = space.mesh().node(e);
  const double h = space.mesh().element_size(e);
  const double xh = (x - xl) / h;
  const auto& local = space.local_basis();
  double v = 0.0;
  if (derivative) {
    const auto d = local.derivatives(xh);
    for (int i = 0; i <= space.degree(); ++i) v += field.coefficients(space.dof(e, i)) * d[static_cast<std::size_t>(i)];
    return v / h;
  }
  const auto phi = local.values(xh);
  for (int i = 0; i <= space.degree(); ++i) v += field.coefficients(space.dof(e, i)) * phi[static_cast<std::size_t>(i)];
  return v;
}

int locate_checked(const SliceSpace& space, double x) {
  const MeshSlice& m = space.mesh();
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(m.x_min()), std::abs(m.x_max())));
  if (x < m.x_min() - tol || x > m.x_max() + tol) {
    throw std::out_of_range("evaluation point " + std::to_string(x) + " outside the domain");
  }
  return m.locate(x);
}

} // namespace

SliceSpace::SliceSpace(MeshSlice mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree),
      local_(gauss_lobatto_nodes(std::max(degree, 1) + 1)) {
  if (degree_ < 1) throw std::invalid_argument("slice space degree must be >= 1");
  dof_coords_.resize(static_cast<std::size_t>(dof_count()));
  for (int e = 0; e < element_count(); ++e) {
    const double xl = mesh_.node(e);
    const double h = mesh_.element_size(e);
    for (int i = 0; i <= degree_; ++i) {
      dof_coords_[static_cast<std::size_t>(dof(e, i))] = xl + local_.nodes()[static_cast<std::size_t>(i)] * h;
    }
  }
  for (int e = 0; e <= element_count(); ++e) {
    dof_coords_[static_cast<std::size_t>(e * degree_)] = mesh_.node(e);
  }
  assembly_quad_ = make_quadrature(degree_ + 2);
}

SliceSpace::ElementQuadrature SliceSpace::make_quadrature(int points) const {
  const GaussPoints g = gauss_legendre(points);
  ElementQuadrature q;
  q.x_hat = g.points;
  q.weights = g.weights;
  for (double xh : g.points) {
    q.values.push_back(local_.values(xh));
    q.derivatives.push_back(local_.derivatives(xh));
  }
  return q;
}

SpaceHandle make_space(MeshSlice mesh, int degree) {
  return std::make_shared<const SliceSpace>(std::move(mesh), degree);
}

Field::Field(SpaceHandle s, Eigen::VectorXd c) : space(std::move(s)), coefficients(std::move(c)) {
  if (!space) throw std::invalid_argument("field requires a space");
  if (coefficients.size() != space->dof_count()) {
    throw std::invalid_argument("field has " + std::to_string(coefficients.size()) +
                                " coefficients for a space with " +
                                std::to_string(space->dof_count()) + " dofs");
  }
}

Field::Field(SpaceHandle s)
    : Field(s, Eigen::VectorXd::Zero(s ? s->dof_count() : 0)) {}

void validate_problem(ProblemSpec& problem, const DomainSpec& domain, int samples) {
  domain.validate();
  if (!problem.a || !problem.b || !problem.c || !problem.f || !problem.g_min ||
      !problem.g_max || !problem.u0) {
    throw std::invalid_argument("problem is missing a coefficient or data function");
  }
  samples = std::max(samples, 2);
  double amin = std::numeric_limits<double>::infinity();
  double cmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double x = domain.x_min + domain.length() * i / (samples - 1);
    for (int k = 0; k < samples; ++k) {
      const double t = domain.t_final * k / (samples - 1);
      amin = std::min(amin, problem.a(x, t));
      cmin = std::min(cmin, problem.c(x, t));
    }
  }
  if (!(amin > 0.0)) throw std::invalid_argument("diffusion coefficient must be positive");
  if (!(cmin >= 0.0)) throw std::invalid_argument("reaction coefficient must be nonnegative");
  problem.a_lower = amin;
  problem.c_lower = cmin;
}

SparseMatrix mass_matrix(const SliceSpace& space) {
  const auto& q = space.quadrature();
  return assemble_matrix(space, [&](int e, Eigen::MatrixXd& ke) {
    const double h = space.mesh().element_size(e);
    for (std::size_t k = 0; k < q.x_hat.size(); ++k) {
      const auto& phi = q.values[k];
      for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t j = 0; j < phi.size(); ++j) {
          ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += q.weights[k] * h * phi[i] * phi[j];
        }
      }
    }
  });
}

SparseMatrix stiffness_matrix(const SliceSpace& space) {
  const auto& q = space.quadrature();
  return assemble_matrix(space, [&](int e, Eigen::MatrixXd& ke) {
    const double h = space.mesh().element_size(e);
    for (std::size_t k = 0; k < q.x_hat.size(); ++k) {
      const auto& dphi = q.derivatives[k];
      for (std::size_t i = 0; i < dphi.size(); ++i) {
        for (std::size_t j = 0; j < dphi.size(); ++j) {
          ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += q.weights[k] / h * dphi[i] * dphi[j];
        }
      }
    }
  });
}

SparseMatrix h1_gram(const SliceSpace& space) {
  SparseMatrix g = mass_matrix(space);
  g += stiffness_matrix(space);
  return g;
}

SparseMatrix bilinear_matrix(const SliceSpace& space, double t, const ProblemSpec& problem,
                             std::span<const double> node_velocity) {
  if (!node_velocity.empty() &&
      static_cast<int>(node_velocity.size()) != space.mesh().node_count()) {
    throw std::invalid_argument("node velocity size does not match the mesh");
  }
  const auto& q = space.quadrature();
  return assemble_matrix(space, [&](int e, Eigen::MatrixXd& ke) {
    const double xl = space.mesh().node(e);
    const double h = space.mesh().element_size(e);
    const auto ue = static_cast<std::size_t>(e);
    for (std::size_t k = 0; k < q.x_hat.size(); ++k) {
      const double xh = q.x_hat[k];
      const double x = xl + xh * h;
      const double xt = node_velocity.empty()
                            ? 0.0
                            : (1.0 - xh) * node_velocity[ue] + xh * node_velocity[ue + 1];
      const double a = problem.a(x, t);
      const double conv = problem.b(x, t) - xt;
      const double c = problem.c(x, t);
      const double w = q.weights[k] * h;
      const auto& phi = q.values[k];
      const auto& dphi = q.derivatives[k];
      for (std::size_t i = 0; i < phi.size(); ++i) {
        for (std::size_t j = 0; j < phi.size(); ++j) {
          const double dj = dphi[j] / h;
          ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
              w * (a * dj * dphi[i] / h + conv * dj * phi[i] + c * phi[j] * phi[i]);
        }
      }
    }
  });
}

Eigen::VectorXd load_vector(const SliceSpace& space, double t, const ProblemSpec& problem) {
  Eigen::VectorXd f = moments(space, [&](double x) { return problem.f(x, t); },
                              space.degree() + 2);
  f(0) += problem.g_min(t);
  f(space.dof_count() - 1) += problem.g_max(t);
  return f;
}

Eigen::VectorXd moments(const SliceSpace& space, const SpatialFunction& v, int points) {
  const auto q = points == space.degree() + 2 ? space.quadrature() : space.make_quadrature(points);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.dof_count());
  for (int e = 0; e < space.element_count(); ++e) {
    const double xl = space.mesh().node(e);
    const double h = space.mesh().element_size(e);
    for (std::size_t k = 0; k < q.x_hat.size(); ++k) {
      const double val = v(xl + q.x_hat[k] * h) * q.weights[k] * h;
      for (int i = 0; i <= space.degree(); ++i) r(space.dof(e, i)) += val * q.values[k][static_cast<std::size_t>(i)];
    }
  }
  return r;
}

Eigen::VectorXd cross_moments(const Field& source, const SliceSpace& target) {
  const SliceSpace& src = *source.space;
  const int points = std::max(src.degree(), target.degree()) + 1;
  const GaussPoints g = gauss_legendre(points);
  const auto src_nodes = src.mesh().nodes();
  const auto& local = target.local_basis();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(target.dof_count());
  std::vector<double> cuts;
  for (int e = 0; e < target.element_count(); ++e) {
    const double a = target.mesh().node(e);
    const double b = target.mesh().node(e + 1);
    const double h = b - a;
    cuts.assign({a});
    auto it = std::upper_bound(src_nodes.begin(), src_nodes.end(), a);
    for (; it != src_nodes.end() && *it < b; ++it) cuts.push_back(*it);
    cuts.push_back(b);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double s0 = cuts[s];
      const double s1 = cuts[s + 1];
      if (!(s1 > s0)) continue;
      const int se = src.mesh().locate(0.5 * (s0 + s1));
      for (std::size_t k = 0; k < g.points.size(); ++k) {
        const double x = s0 + g.points[k] * (s1 - s0);
        const double val = eval_in_element(source, se, x, false) * g.weights[k] * (s1 - s0);
        const auto phi = local.values((x - a) / h);
        for (int i = 0; i <= target.degree(); ++i) r(target.dof(e, i)) += val * phi[static_cast<std::size_t>(i)];
      }
    }
  }
  return r;
}

Field l2_project(const SpatialFunction& source, SpaceHandle target) {
  const Eigen::VectorXd rhs = moments(*target, source, target->degree() + 3);
  Eigen::VectorXd c = solve_mass(*target, rhs);
  return Field(std::move(target), std::move(c));
}

Field l2_project(const Field& source, SpaceHandle target) {
  const Eigen::VectorXd rhs = cross_moments(source, *target);
  Eigen::VectorXd c = solve_mass(*target, rhs);
  return Field(std::move(target), std::move(c));
}

Field shift(const Field& field, SpaceHandle target) {
  if (target->dof_count() != field.space->dof_count() ||
      target->degree() != field.space->degree()) {
    throw std::invalid_argument("shift requires identical topology (same dof count)");
  }
  return Field(std::move(target), field.coefficients);
}

Field interpolate(const SpatialFunction& v, SpaceHandle target) {
  Eigen::VectorXd c(target->dof_count());
  const auto x = target->dof_coordinates();
  for (int i = 0; i < target->dof_count(); ++i) c(i) = v(x[static_cast<std::size_t>(i)]);
  return Field(std::move(target), std::move(c));
}

double evaluate(const Field& field, double x) {
  return eval_in_element(field, locate_checked(*field.space, x), x, false);
}

double evaluate_deriv(const Field& field, double x) {
  return eval_in_element(field, locate_checked(*field.space, x), x, true);
}

std::vector<std::pair<double, double>> sample(const Field& field, int per_element) {
  per_element = std::max(per_element, 1);
  const MeshSlice& m = field.space->mesh();
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(m.element_count() * per_element + 1));
  for (int e = 0; e < m.element_count(); ++e) {
    for (int s = 0; s < per_element; ++s) {
      const double x = m.node(e) + m.element_size(e) * s / per_element;
      out.emplace_back(x, eval_in_element(field, e, x, false));
    }
  }
  const int last = m.element_count() - 1;
  out.emplace_back(m.x_max(), eval_in_element(field, last, m.x_max(), false));
  return out;
}

} // namespace charfem
