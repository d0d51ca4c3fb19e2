// Per-partition collocation system and the multi-partition time march.
//
// On partition i the unknowns are the slice coefficients c_1..c_p at the time
// basis nodes; c_0 (at t_{i-1}+) is known. At every collocation time t_{i,j}
// the equations read
//
//   sum_k [ beta_k'(t_j)/dt_i M_j + beta_k(t_j) K_j ] c_k = F_j,
//
// where M_j, K_j and F_j are the mass matrix, A_tau and the load vector
// assembled on the slice at t_{i,j}. Because shifting between slices of one
// partition preserves coefficients, the matrices act on the raw coefficient
// vectors. The k = 0 column moves to the right-hand side.

#ifndef CHARFEM_SOLVER_HPP
#define CHARFEM_SOLVER_HPP

#include "charfem/fespace.hpp"
#include "charfem/mesh.hpp"
#include "charfem/quadrature.hpp"
#include "charfem/time_basis.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace charfem {

/// A partition could not be advanced; carries the 1-based partition index.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(int partition, const std::string& cause);
  int partition() const { return partition_; }

private:
  int partition_;
};

struct PartitionSystem {
  SparseMatrix matrix; ///< (N p) x (N p), block (j,k) as above
  Eigen::VectorXd rhs;
  int dofs = 0;
  int stages = 0;
};

struct PartitionSolve {
  std::vector<Eigen::VectorXd> stages; ///< c_1..c_p
  double residual = 0.0;               ///< ||A c - r|| / ||r||
  double condition_estimate = 0.0;     ///< 1-norm estimate
};

/// L2 projection of u0 onto `space`.
Field initial_field(const ProblemSpec& problem, SpaceHandle space);

PartitionSystem assemble_partition(const TimePartition& partition, const ProblemSpec& problem,
                                   const ReferenceRule& rule, const Field& initial);

/// Sparse LU solve. Throws std::runtime_error when the system is singular,
/// badly conditioned, or the relative residual exceeds 1e-9.
PartitionSolve solve_partition(const PartitionSystem& system);

struct PartitionSolution {
  TimePartition partition;
  int spatial_degree = 1;
  std::vector<Eigen::VectorXd> coefficients; ///< c_0..c_p at the time basis nodes

  SpaceHandle space_at(double t) const;
  /// u_h(t) = sum_k beta_k(t_hat) c_k on the slice at t.
  Field field_at(double t) const;
  /// u_h(t_i-) on the end slice.
  Field end_field() const;
};

struct SpaceTimeSolution {
  ReferenceRule rule;
  std::vector<PartitionSolution> partitions;

  double t_final() const { return partitions.back().partition.t_end(); }
};

struct StepReport {
  int partition = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  int elements = 0;
  double residual = 0.0;
  double condition_estimate = 0.0;
  double jump_residual = 0.0; ///< max_i |<[u_h](t_{i-1}), phi_i>|
  RegularityReport regularity;
};

/// Decides the initial slice of partition `next` from the previous end slice.
using ReconfigurationPolicy =
    std::function<Reconfiguration(int next, const MeshSlice& previous_end)>;

ReconfigurationPolicy keep_policy();
/// Uniform remesh with `elements` elements before every `period`-th partition.
ReconfigurationPolicy uniform_policy(int elements, int period = 1);

struct RunOptions {
  ReconfigurationPolicy reconfiguration = keep_policy();
  double dt_ceiling = std::numeric_limits<double>::infinity();
  /// Spatial degree; 0 uses the rule degree p.
  int spatial_degree = 0;
};

struct RunResult {
  SpaceTimeSolution solution;
  std::vector<StepReport> reports;
};

/// Marches i = 1..m: build trajectories, project the previous end field
/// onto the new initial slice, assemble, solve. Failures surface as
/// SolverFailure with the partition index.
RunResult run(const DomainSpec& domain, const TimeGrid& grid, const ProblemSpec& problem,
              const VelocityField& motion, const ReferenceRule& rule, const TimeBasis& basis,
              const MeshSlice& initial_mesh, const RunOptions& options = {});

void write_step_reports_csv(std::ostream& os, const std::vector<StepReport>& reports);

/// Rows t,x,u: the initial field, each collocation slice and each partition end.
void write_solution_csv(std::ostream& os, const SpaceTimeSolution& solution,
                        int samples_per_element = 4);

} // namespace charfem

#endif // CHARFEM_SOLVER_HPP
