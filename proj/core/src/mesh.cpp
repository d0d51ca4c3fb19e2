#include "charfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace charfem {

namespace {

std::string describe_crossing(int element, double t) {
  std::ostringstream os;
  os << std::setprecision(17) << "element " << element << " degenerates at t = " << t;
  return os.str();
}

void check_increasing(std::span<const double> x, double t) {
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw DegenerateMeshError(describe_crossing(static_cast<int>(k) - 1, t));
  }
}

} // namespace

void DomainSpec::validate() const {
  if (!(x_min < x_max)) throw std::invalid_argument("domain requires x_min < x_max");
  if (!(t_final > 0.0)) throw std::invalid_argument("domain requires t_final > 0");
}

TimeGrid::TimeGrid(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) throw std::invalid_argument("time grid needs at least one partition");
  if (breakpoints_.front() != 0.0) throw std::invalid_argument("time grid must start at t = 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw std::invalid_argument("time grid breakpoints must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::uniform(double t_final, int partitions) {
  if (partitions < 1 || !(t_final > 0.0)) {
    throw std::invalid_argument("uniform time grid needs t_final > 0 and m >= 1");
  }
  std::vector<double> t(static_cast<std::size_t>(partitions) + 1);
  for (int i = 0; i <= partitions; ++i) t[static_cast<std::size_t>(i)] = t_final * i / partitions;
  t.back() = t_final;
  return TimeGrid(std::move(t));
}

double TimeGrid::max_step() const {
  double m = 0.0;
  for (int i = 1; i <= partitions(); ++i) m = std::max(m, step(i));
  return m;
}

MeshSlice::MeshSlice(double t, std::vector<double> nodes) : t_(t), nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw std::invalid_argument("mesh slice needs at least one element");
  check_increasing(nodes_, t_);
}

double MeshSlice::min_element() const {
  double h = std::numeric_limits<double>::infinity();
  for (int e = 0; e < element_count(); ++e) h = std::min(h, element_size(e));
  return h;
}

int MeshSlice::locate(double x) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  int e = static_cast<int>(it - nodes_.begin()) - 1;
  return std::clamp(e, 0, element_count() - 1);
}

MeshSlice MeshSlice::uniform(double x_min, double x_max, int elements, double t) {
  if (elements < 1) throw std::invalid_argument("uniform mesh needs at least one element");
  std::vector<double> x(static_cast<std::size_t>(elements) + 1);
  for (int k = 0; k <= elements; ++k) {
    x[static_cast<std::size_t>(k)] = x_min + (x_max - x_min) * k / elements;
  }
  x.back() = x_max;
  return MeshSlice(t, std::move(x));
}

TimePartition::TimePartition(int index, double t_start, double t_end,
                             std::vector<NodeTrajectory> trajectories, TimeBasis basis,
                             std::span<const double> extra_check_times, int dense_per_degree)
    : index_(index), t_start_(t_start), t_end_(t_end),
      trajectories_(std::move(trajectories)), basis_(std::move(basis)) {
  if (!(t_end_ > t_start_)) throw std::invalid_argument("partition requires t_start < t_end");
  if (trajectories_.size() < 2) throw std::invalid_argument("partition needs at least one element");
  const std::size_t nb = static_cast<std::size_t>(basis_.degree()) + 1;
  for (const auto& tr : trajectories_) {
    if (tr.values.size() != nb) {
      throw std::invalid_argument("trajectory size does not match the time basis");
    }
  }
  for (const auto* tr : {&trajectories_.front(), &trajectories_.back()}) {
    for (double v : tr->values) {
      if (v != tr->values.front()) throw std::invalid_argument("boundary nodes must not move");
    }
  }
  for (double t : check_times(extra_check_times, dense_per_degree)) {
    check_increasing(positions(t), t);
  }
}

bool TimePartition::contains(double t) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end_));
  return t >= t_start_ - tol && t <= t_end_ + tol;
}

double TimePartition::position(int k, double t) const {
  const auto beta = basis_.eval_all(reference_time(t));
  const auto& v = trajectories_.at(static_cast<std::size_t>(k)).values;
  double x = 0.0;
  for (std::size_t m = 0; m < v.size(); ++m) x += v[m] * beta[m];
  return x;
}

double TimePartition::velocity(int k, double t) const {
  const auto dbeta = basis_.eval_deriv_all(reference_time(t));
  const auto& v = trajectories_.at(static_cast<std::size_t>(k)).values;
  double xt = 0.0;
  for (std::size_t m = 0; m < v.size(); ++m) xt += v[m] * dbeta[m];
  return xt / step();
}

std::vector<double> TimePartition::positions(double t) const {
  const auto beta = basis_.eval_all(reference_time(t));
  std::vector<double> x(trajectories_.size(), 0.0);
  for (std::size_t k = 0; k < trajectories_.size(); ++k) {
    const auto& v = trajectories_[k].values;
    for (std::size_t m = 0; m < v.size(); ++m) x[k] += v[m] * beta[m];
  }
  // Boundary trajectories are constant; avoid rounding drift.
  x.front() = trajectories_.front().values.front();
  x.back() = trajectories_.back().values.front();
  return x;
}

std::vector<double> TimePartition::velocities(double t) const {
  const auto dbeta = basis_.eval_deriv_all(reference_time(t));
  std::vector<double> xt(trajectories_.size(), 0.0);
  for (std::size_t k = 0; k < trajectories_.size(); ++k) {
    const auto& v = trajectories_[k].values;
    for (std::size_t m = 0; m < v.size(); ++m) xt[k] += v[m] * dbeta[m];
    xt[k] /= step();
  }
  xt.front() = 0.0;
  xt.back() = 0.0;
  return xt;
}

std::vector<double> TimePartition::check_times(std::span<const double> extra,
                                               int dense_per_degree) const {
  std::vector<double> t;
  for (double z : basis_.nodes()) t.push_back(time_at(z));
  t.push_back(t_start_);
  t.push_back(t_end_);
  for (double s : extra) t.push_back(s);
  const int dense = std::max(1, dense_per_degree * basis_.degree());
  for (int k = 0; k <= dense; ++k) t.push_back(time_at(static_cast<double>(k) / dense));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

MeshSlice slice(const TimePartition& partition, double t) {
  if (!partition.contains(t)) {
    std::ostringstream os;
    os << std::setprecision(17) << "slice time " << t << " outside partition ("
       << partition.t_start() << ", " << partition.t_end() << "]";
    throw std::out_of_range(os.str());
  }
  return MeshSlice(t, partition.positions(t));
}

namespace {

void check_element(const TimePartition& partition, int element) {
  if (element < 0 || element >= partition.element_count()) {
    throw std::out_of_range("element index " + std::to_string(element) + " out of range");
  }
}

} // namespace

std::pair<double, double> isoparametric(const TimePartition& partition, int element,
                                        double x_hat, double t_hat) {
  check_element(partition, element);
  const double t = partition.time_at(t_hat);
  const double xl = partition.position(element, t);
  const double dx = partition.position(element + 1, t) - xl;
  if (!(dx > 0.0)) throw DegenerateMeshError(describe_crossing(element, t));
  return {xl + x_hat * dx, t};
}

std::pair<double, double> inverse_isoparametric(const TimePartition& partition,
                                                int element, double x, double t) {
  check_element(partition, element);
  const double xl = partition.position(element, t);
  const double dx = partition.position(element + 1, t) - xl;
  if (!(dx > 0.0)) throw DegenerateMeshError(describe_crossing(element, t));
  return {(x - xl) / dx, partition.reference_time(t)};
}

double mesh_velocity(const TimePartition& partition, int element, double x_hat, double t) {
  check_element(partition, element);
  const double dx = partition.position(element + 1, t) - partition.position(element, t);
  if (!(dx > 0.0)) throw DegenerateMeshError(describe_crossing(element, t));
  const auto xt = partition.velocities(t);
  const auto e = static_cast<std::size_t>(element);
  return (1.0 - x_hat) * xt[e] + x_hat * xt[e + 1];
}

RegularityReport regularity(const TimePartition& partition,
                            std::span<const double> check_times, const VelocityField& b) {
  static constexpr double sample_xhat[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  RegularityReport rep;
  rep.min_element = std::numeric_limits<double>::infinity();
  rep.det_ratio_min = std::numeric_limits<double>::infinity();
  rep.det_ratio_max = 0.0;
  const auto x0 = partition.positions(partition.t_start());
  const double dt = partition.step();
  for (double t : check_times) {
    const auto x = partition.positions(t);
    const auto xt = partition.velocities(t);
    for (std::size_t e = 0; e + 1 < x.size(); ++e) {
      const double dx = x[e + 1] - x[e];
      if (!(dx > 0.0)) throw DegenerateMeshError(describe_crossing(static_cast<int>(e), t));
      const double ratio = dx / (x0[e + 1] - x0[e]);
      rep.min_element = std::min(rep.min_element, dx);
      rep.det_ratio_min = std::min(rep.det_ratio_min, ratio);
      rep.det_ratio_max = std::max(rep.det_ratio_max, ratio);
      rep.mu_estimate = std::max(rep.mu_estimate, std::abs(ratio - 1.0) / dt);
      if (b) {
        for (double xh : sample_xhat) {
          const double xp = x[e] + xh * dx;
          const double vel = (1.0 - xh) * xt[e] + xh * xt[e + 1];
          rep.kappa_estimate = std::max(rep.kappa_estimate, std::abs(b(xp, t) - vel));
        }
      }
    }
  }
  return rep;
}

TimePartition build_trajectories(const MeshSlice& initial, int index, double t_start,
                                 double t_end, const VelocityField& w,
                                 const TimeBasis& basis,
                                 std::span<const double> extra_check_times, int substeps) {
  if (substeps < 1) throw std::invalid_argument("build_trajectories: substeps must be >= 1");
  const int n = initial.node_count();
  const int p = basis.degree();
  const double dt = t_end - t_start;
  std::vector<NodeTrajectory> traj(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto& vals = traj[static_cast<std::size_t>(k)].values;
    vals.assign(static_cast<std::size_t>(p) + 1, initial.node(k));
    if (k == 0 || k == n - 1 || !w) continue;
    double x = initial.node(k);
    double t = t_start;
    for (int m = 1; m <= p; ++m) {
      const double t_next = t_start + basis.node(m) * dt;
      const double h = (t_next - t) / substeps;
      for (int s = 0; s < substeps; ++s) {
        const double k1 = w(x, t);
        const double k2 = w(x + 0.5 * h * k1, t + 0.5 * h);
        const double k3 = w(x + 0.5 * h * k2, t + 0.5 * h);
        const double k4 = w(x + h * k3, t + h);
        x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        t += h;
      }
      t = t_next;
      vals[static_cast<std::size_t>(m)] = x;
    }
  }
  for (int m = 0; m <= p; ++m) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = traj[static_cast<std::size_t>(k)].values[static_cast<std::size_t>(m)];
    check_increasing(x, t_start + basis.node(m) * dt);
  }
  return TimePartition(index, t_start, t_end, std::move(traj), basis, extra_check_times);
}

TimePartition static_partition(const MeshSlice& initial, int index, double t_start,
                               double t_end, const TimeBasis& basis) {
  return build_trajectories(initial, index, t_start, t_end, VelocityField{}, basis);
}

MeshSlice reconfigure(const MeshSlice& previous_end, const Reconfiguration& strategy) {
  const double t = previous_end.time();
  switch (strategy.kind) {
  case Reconfiguration::Kind::keep:
    return MeshSlice(t, std::vector<double>(previous_end.nodes().begin(), previous_end.nodes().end()));
  case Reconfiguration::Kind::uniform:
    return MeshSlice::uniform(previous_end.x_min(), previous_end.x_max(), strategy.elements, t);
  case Reconfiguration::Kind::user: {
    const auto& x = strategy.positions;
    if (x.size() < 2 || x.front() != previous_end.x_min() || x.back() != previous_end.x_max()) {
      throw std::invalid_argument("user reconfiguration must span the same domain");
    }
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (!(x[k] > x[k - 1])) {
        throw std::invalid_argument("user reconfiguration positions must be strictly increasing");
      }
    }
    return MeshSlice(t, x);
  }
  }
  throw std::invalid_argument("unknown reconfiguration kind");
}

void write_mesh_row(std::ostream& os, const MeshSlice& mesh) {
  const auto prec = os.precision(17);
  os << mesh.time();
  for (double x : mesh.nodes()) os << ',' << x;
  os << '\n';
  os.precision(prec);
}

} // namespace charfem
