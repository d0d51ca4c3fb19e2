// Moving one-dimensional meshes.
//
// Within a time partition (t_{i-1}, t_i] every node follows a polynomial
// trajectory of degree p, stored by its values at the time basis nodes.
// Topology is fixed inside a partition; reconfigure() is the only place the
// node count or positions may change discontinuously.

#ifndef CHARFEM_MESH_HPP
#define CHARFEM_MESH_HPP

#include "charfem/time_basis.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace charfem {

/// Raised when an element collapses or nodes cross.
class DegenerateMeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Velocity w(x, t); used for mesh motion and for convection fields.
using VelocityField = std::function<double(double x, double t)>;

struct DomainSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  double t_final = 1.0;

  double length() const { return x_max - x_min; }
  void validate() const;
};

class TimeGrid {
public:
  explicit TimeGrid(std::vector<double> breakpoints);
  static TimeGrid uniform(double t_final, int partitions);

  int partitions() const { return static_cast<int>(breakpoints_.size()) - 1; }
  std::span<const double> breakpoints() const { return breakpoints_; }
  /// 1-based partition index i: interval (t_{i-1}, t_i].
  double start(int i) const { return breakpoints_.at(static_cast<std::size_t>(i - 1)); }
  double end(int i) const { return breakpoints_.at(static_cast<std::size_t>(i)); }
  double step(int i) const { return end(i) - start(i); }
  double max_step() const;

private:
  std::vector<double> breakpoints_;
};

/// Node positions at the p+1 time basis nodes of its partition.
struct NodeTrajectory {
  std::vector<double> values;
};

class MeshSlice {
public:
  MeshSlice(double t, std::vector<double> nodes);

  double time() const { return t_; }
  std::span<const double> nodes() const { return nodes_; }
  double node(int k) const { return nodes_.at(static_cast<std::size_t>(k)); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return node_count() - 1; }
  double element_size(int e) const { return node(e + 1) - node(e); }
  double min_element() const;
  double x_min() const { return nodes_.front(); }
  double x_max() const { return nodes_.back(); }
  /// Element containing x (lower element on shared nodes, clamped at the ends).
  int locate(double x) const;

  static MeshSlice uniform(double x_min, double x_max, int elements, double t = 0.0);

private:
  double t_;
  std::vector<double> nodes_;
};

class TimePartition {
public:
  /// Validates non-degeneracy at the basis nodes, at extra_check_times and at
  /// dense_per_degree * p evenly spaced times, plus fixed boundary nodes.
  TimePartition(int index, double t_start, double t_end,
                std::vector<NodeTrajectory> trajectories, TimeBasis basis,
                std::span<const double> extra_check_times = {},
                int dense_per_degree = 10);

  int index() const { return index_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double step() const { return t_end_ - t_start_; }
  const TimeBasis& basis() const { return basis_; }
  const std::vector<NodeTrajectory>& trajectories() const { return trajectories_; }
  int node_count() const { return static_cast<int>(trajectories_.size()); }
  int element_count() const { return node_count() - 1; }

  /// (t - t_{i-1}) / dt_i
  double reference_time(double t) const { return (t - t_start_) / step(); }
  double time_at(double that) const { return t_start_ + that * step(); }
  bool contains(double t) const;

  double position(int k, double t) const;
  double velocity(int k, double t) const;
  std::vector<double> positions(double t) const;
  std::vector<double> velocities(double t) const;

  /// Times used by the non-degeneracy check (sorted, deduplicated).
  std::vector<double> check_times(std::span<const double> extra, int dense_per_degree) const;

private:
  int index_;
  double t_start_;
  double t_end_;
  std::vector<NodeTrajectory> trajectories_;
  TimeBasis basis_;
};

MeshSlice slice(const TimePartition& partition, double t);

/// (x_hat, t_hat) in [0,1]^2 -> (x, t) on element e = [x_e(t), x_{e+1}(t)].
std::pair<double, double> isoparametric(const TimePartition& partition, int element,
                                        double x_hat, double t_hat);
std::pair<double, double> inverse_isoparametric(const TimePartition& partition,
                                                int element, double x, double t);

/// x_t = (1 - x_hat) x_e'(t) + x_hat x_{e+1}'(t)
double mesh_velocity(const TimePartition& partition, int element, double x_hat, double t);

struct RegularityReport {
  double mu_estimate = 0.0;    ///< max |H_e(t)|
  double kappa_estimate = 0.0; ///< max |b - x_t|
  double min_element = 0.0;
  double det_ratio_min = 1.0;  ///< min dx_e(t) / dx_e(t_{i-1}+)
  double det_ratio_max = 1.0;
};

/// In 1D the evolution matrix is the scalar
///   H_e(t) = (dx_e(t) / dx_e(t_{i-1}+) - 1) / dt_i.
RegularityReport regularity(const TimePartition& partition,
                            std::span<const double> check_times, const VelocityField& b);

/// Integrates dx/dt = w(x,t) from each interior node of `initial` with RK4
/// (`substeps` per basis-node gap) and interpolates the result at the time
/// basis nodes. Boundary nodes stay fixed.
TimePartition build_trajectories(const MeshSlice& initial, int index, double t_start,
                                 double t_end, const VelocityField& w,
                                 const TimeBasis& basis,
                                 std::span<const double> extra_check_times = {},
                                 int substeps = 8);

/// Partition whose trajectories are all constant.
TimePartition static_partition(const MeshSlice& initial, int index, double t_start,
                               double t_end, const TimeBasis& basis);

struct Reconfiguration {
  enum class Kind { keep, uniform, user };
  Kind kind = Kind::keep;
  int elements = 0;
  std::vector<double> positions;

  static Reconfiguration keep() { return {}; }
  static Reconfiguration uniform(int n) { return {Kind::uniform, n, {}}; }
  static Reconfiguration user(std::vector<double> x) { return {Kind::user, 0, std::move(x)}; }
};

/// Initial slice of the next partition.
MeshSlice reconfigure(const MeshSlice& previous_end, const Reconfiguration& strategy);

/// One CSV row: t,x_0,...,x_n (17 significant digits).
void write_mesh_row(std::ostream& os, const MeshSlice& mesh);

} // namespace charfem

#endif // CHARFEM_MESH_HPP
