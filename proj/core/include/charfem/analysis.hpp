// Norms on slice spaces, the mesh-dependent energy norm and error reports.
//
// For a space-time function e the energy norm is
//
//   |||e|||^2 = max_{(i,j)} ||e(t_ij)||_0^2
//             + sum_i dt_i sum_j w_j ( ||e_tau(t_ij)||_{-1,h}^2 + ||e(t_ij)||_1^2 ),
//
// where the max also includes t = 0 and ||.||_{-1,h} is the dual norm over the
// slice space at t_ij.

#ifndef CHARFEM_ANALYSIS_HPP
#define CHARFEM_ANALYSIS_HPP

#include "charfem/fespace.hpp"
#include "charfem/solver.hpp"

#include <Eigen/Core>

#include <iosfwd>

namespace charfem {

double l2_norm(const Field& field);
/// Full H1 norm, sqrt(||v||_0^2 + ||v'||_0^2).
double h1_norm(const Field& field);

/// sup_chi |<v, chi>| / ||chi||_1 over the slice space, given
/// moments[i] = <v, phi_i>. Equals sqrt(r^T G^{-1} r).
double negative_norm(const SliceSpace& space, const Eigen::VectorXd& moments);
/// G^{-1} r, the coefficients of a maximizing chi.
Eigen::VectorXd supremizer(const SliceSpace& space, const Eigen::VectorXd& moments);

/// Slice coefficients (1/dt) sum_k beta_k'(t_hat) c_k of the discrete
/// characteristic derivative on partition `i` (1-based) at t_hat.
Field characteristic_derivative_at(const PartitionSolution& partition, double t_hat);
/// Same at the collocation knot j (0-based).
Field discrete_characteristic_derivative(const SpaceTimeSolution& solution, int i, int j);

/// u_t + x_t u_x at (x, t), x_t interpolated from the partition's node velocities.
double exact_characteristic_derivative(const ProblemSpec& problem,
                                       const TimePartition& partition, double x, double t);

/// Mesh velocity at a physical point of the slice at t.
double velocity_at(const TimePartition& partition, double x, double t);

/// Components are stored squared except max_l2 and energy:
/// energy^2 = max_l2^2 + h1_term + neg_term.
struct EnergyNorm {
  double energy = 0.0;
  double max_l2 = 0.0;
  double h1_term = 0.0;
  double neg_term = 0.0;
};

/// |||target - v||| for a discrete space-time function v. With no target,
/// |||v||| itself. Slice integrals use p+3 Gauss points per element.
EnergyNorm energy_norm(const SpaceTimeSolution& v, const ExactSolution* target = nullptr);

/// I_h u: nodal interpolation of u at every time basis node, on the same
/// trajectories as `solution`.
SpaceTimeSolution space_time_interpolant(const SpaceTimeSolution& solution,
                                         const SpaceTimeFunction& u);

struct ErrorReport {
  double energy_error = 0.0;
  double max_l2 = 0.0;
  double h1_term = 0.0;
  double neg_term = 0.0;
  double interpolant_energy_error = 0.0;
  /// energy_error / interpolant_energy_error; NaN when both are below
  /// exact_tolerance.
  double ratio = 0.0;
  bool exact = false;
};

inline constexpr double exact_tolerance = 1e-9;

ErrorReport error_report(const SpaceTimeSolution& solution, const ProblemSpec& problem);

void write_error_report_header(std::ostream& os);
void write_error_report_row(std::ostream& os, const ErrorReport& report);

/// Sharp constants of |N(phi) - N(phi~)| <= C dt N(phi~) over a slice space,
/// where phi~ is phi shifted from `from` to `to` and N is ||.||_0^2 or ||.||_1^2.
struct ShiftConstants {
  double l2 = 0.0;
  double h1 = 0.0;
};

ShiftConstants shift_constants(const SliceSpace& from, const SliceSpace& to, double dt);

} // namespace charfem

#endif // CHARFEM_ANALYSIS_HPP
