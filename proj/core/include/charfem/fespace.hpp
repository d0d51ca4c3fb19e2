// Slice finite element spaces V_h^p(t): continuous piecewise P_p on a frozen
// mesh slice, with Gauss-Lobatto element nodes shared at interfaces.
//
// Assembly follows the characteristic weak form
//
//   <u_tau, chi> + A_tau(t; u, chi) = <f, chi> + <<g, chi>>,
//   A_tau(t; u, chi) = int a u' chi' + (b - x_t) u' chi + c u chi,
//
// with Neumann data g = a u_x n on the two boundary points.

#ifndef CHARFEM_FESPACE_HPP
#define CHARFEM_FESPACE_HPP

#include "charfem/lagrange.hpp"
#include "charfem/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace charfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SpaceTimeFunction = std::function<double(double x, double t)>;
using SpatialFunction = std::function<double(double x)>;
using BoundaryData = std::function<double(double t)>;

class SliceSpace {
public:
  SliceSpace(MeshSlice mesh, int degree);

  const MeshSlice& mesh() const { return mesh_; }
  double time() const { return mesh_.time(); }
  int degree() const { return degree_; }
  int element_count() const { return mesh_.element_count(); }
  int dof_count() const { return element_count() * degree_ + 1; }
  int dof(int element, int local) const { return element * degree_ + local; }
  std::span<const double> dof_coordinates() const { return dof_coords_; }

  /// Reference element basis on Gauss-Lobatto nodes in [0,1].
  const LagrangeBasis& local_basis() const { return local_; }

  /// Element-local Gauss rule with `points` points (p+2 for assembly).
  struct ElementQuadrature {
    std::vector<double> x_hat;
    std::vector<double> weights; ///< on [0,1]; multiply by element size
    std::vector<std::vector<double>> values;      ///< [q][local]
    std::vector<std::vector<double>> derivatives; ///< d/dx_hat, [q][local]
  };
  const ElementQuadrature& quadrature() const { return assembly_quad_; }
  ElementQuadrature make_quadrature(int points) const;

private:
  MeshSlice mesh_;
  int degree_;
  LagrangeBasis local_;
  std::vector<double> dof_coords_;
  ElementQuadrature assembly_quad_;
};

using SpaceHandle = std::shared_ptr<const SliceSpace>;

SpaceHandle make_space(MeshSlice mesh, int degree);

/// A slice function: coefficients in the nodal basis of one SliceSpace.
struct Field {
  Field(SpaceHandle space, Eigen::VectorXd coefficients);
  Field(SpaceHandle space); ///< zero field

  SpaceHandle space;
  Eigen::VectorXd coefficients;
};

/// Closed-form exact solution used for error studies.
struct ExactSolution {
  SpaceTimeFunction u;
  SpaceTimeFunction u_t;
  SpaceTimeFunction u_x;
};

struct ProblemSpec {
  SpaceTimeFunction a;
  SpaceTimeFunction b;
  SpaceTimeFunction c;
  SpaceTimeFunction f;
  BoundaryData g_min; ///< a u_x n at x_min (n = -1)
  BoundaryData g_max; ///< a u_x n at x_max (n = +1)
  SpatialFunction u0;
  std::optional<ExactSolution> exact;
  double a_lower = 0.0; ///< sampled lower bound of a
  double c_lower = 0.0; ///< sampled lower bound of c
};

/// Samples a and c on a grid over the domain, stores the lower bounds and
/// throws std::invalid_argument unless a_lower > 0 and c_lower >= 0.
void validate_problem(ProblemSpec& problem, const DomainSpec& domain, int samples = 33);

SparseMatrix mass_matrix(const SliceSpace& space);
SparseMatrix stiffness_matrix(const SliceSpace& space);
/// <phi_i, phi_j> + <phi_i', phi_j'>
SparseMatrix h1_gram(const SliceSpace& space);

/// A_tau(t; phi_j, phi_i). `node_velocity` holds x_t at the mesh nodes (the
/// velocity is affine inside each element); empty means a static mesh.
SparseMatrix bilinear_matrix(const SliceSpace& space, double t, const ProblemSpec& problem,
                             std::span<const double> node_velocity = {});

/// F_i = <f(., t), phi_i> + g_max(t) phi_i(x_max) + g_min(t) phi_i(x_min)
Eigen::VectorXd load_vector(const SliceSpace& space, double t, const ProblemSpec& problem);

/// <v, phi_i> for a pointwise function, by `points`-point Gauss per element.
Eigen::VectorXd moments(const SliceSpace& space, const SpatialFunction& v, int points);

/// <source, phi_i> for a field on another mesh, integrated exactly on the
/// union of both breakpoint sets.
Eigen::VectorXd cross_moments(const Field& source, const SliceSpace& target);

Field l2_project(const SpatialFunction& source, SpaceHandle target);
Field l2_project(const Field& source, SpaceHandle target);

/// Coefficient-preserving transfer to another slice of the same partition.
Field shift(const Field& field, SpaceHandle target);

Field interpolate(const SpatialFunction& v, SpaceHandle target);

double evaluate(const Field& field, double x);
double evaluate_deriv(const Field& field, double x);

/// (x, value) pairs, `per_element` evenly spaced samples per element plus x_max.
std::vector<std::pair<double, double>> sample(const Field& field, int per_element);

} // namespace charfem

#endif // CHARFEM_FESPACE_HPP
