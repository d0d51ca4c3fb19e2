#include "charfem/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace charfem {

namespace {

constexpr double residual_tol = 1e-9;
constexpr double condition_ceiling = 1e15;

double one_norm(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    m = std::max(m, col);
  }
  return m;
}

// Hager's estimate of ||A^{-1}||_1 from a few solves with A and A^T.
template <class Lu>
double inverse_one_norm(Lu& lu, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  for (int it = 0; it < 5; ++it) {
    const Eigen::VectorXd y = lu.solve(x);
    est = y.lpNorm<1>();
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x(j) = 1.0;
  }
  return est;
}

} // namespace

SolverFailure::SolverFailure(int partition, const std::string& cause)
    : std::runtime_error("partition " + std::to_string(partition) + ": " + cause),
      partition_(partition) {}

Field initial_field(const ProblemSpec& problem, SpaceHandle space) {
  return l2_project(problem.u0, std::move(space));
}

PartitionSystem assemble_partition(const TimePartition& partition, const ProblemSpec& problem,
                                   const ReferenceRule& rule, const Field& initial) {
  const TimeBasis& basis = partition.basis();
  const int p = rule.degree();
  if (basis.degree() != p) {
    throw std::invalid_argument("assemble_partition: time basis and rule degrees differ");
  }
  const int degree = initial.space->degree();
  if (initial.space->mesh().node_count() != partition.node_count()) {
    throw std::invalid_argument("assemble_partition: initial field topology does not match");
  }
  const int n = initial.space->dof_count();
  const double dt = partition.step();

  PartitionSystem sys;
  sys.dofs = n;
  sys.stages = p;
  sys.rhs.resize(static_cast<Eigen::Index>(n) * p);
  std::vector<Eigen::Triplet<double>> trips;

  for (int j = 0; j < p; ++j) {
    const double tj = partition.time_at(rule.knot(j));
    const SliceSpace space(slice(partition, tj), degree);
    const auto xt = partition.velocities(tj);
    const SparseMatrix mass = mass_matrix(space);
    const SparseMatrix op = bilinear_matrix(space, tj, problem, xt);
    const auto beta = basis.eval_all(rule.knot(j));
    const auto dbeta = basis.eval_deriv_all(rule.knot(j));

    Eigen::VectorXd rhs = load_vector(space, tj, problem);
    rhs -= (dbeta[0] / dt) * (mass * initial.coefficients) + beta[0] * (op * initial.coefficients);
    sys.rhs.segment(static_cast<Eigen::Index>(j) * n, n) = rhs;

    for (int k = 1; k <= p; ++k) {
      const double cm = dbeta[static_cast<std::size_t>(k)] / dt;
      const double ck = beta[static_cast<std::size_t>(k)];
      const int row0 = j * n;
      const int col0 = (k - 1) * n;
      for (int col = 0; col < mass.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(mass, col); it; ++it) {
          trips.emplace_back(row0 + static_cast<int>(it.row()), col0 + col, cm * it.value());
        }
        for (SparseMatrix::InnerIterator it(op, col); it; ++it) {
          trips.emplace_back(row0 + static_cast<int>(it.row()), col0 + col, ck * it.value());
        }
      }
    }
  }
  sys.matrix.resize(static_cast<Eigen::Index>(n) * p, static_cast<Eigen::Index>(n) * p);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

PartitionSolve solve_partition(const PartitionSystem& system) {
  SparseMatrix a = system.matrix;
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("partition system is singular: " + lu.lastErrorMessage());
  }
  const Eigen::VectorXd c = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success || !c.allFinite()) {
    throw std::runtime_error("partition solve failed");
  }

  PartitionSolve out;
  out.condition_estimate = one_norm(a) * inverse_one_norm(lu, a.rows());
  if (!(out.condition_estimate < condition_ceiling)) {
    std::ostringstream os;
    os << "partition system is ill-conditioned (estimate " << out.condition_estimate
       << "); reduce the time step";
    throw std::runtime_error(os.str());
  }
  const double rnorm = system.rhs.norm();
  const double res = (a * c - system.rhs).norm();
  out.residual = rnorm > 0.0 ? res / rnorm : res;
  if (out.residual > residual_tol) {
    std::ostringstream os;
    os << "relative residual " << out.residual << " exceeds " << residual_tol;
    throw std::runtime_error(os.str());
  }
  for (int j = 0; j < system.stages; ++j) {
    out.stages.emplace_back(c.segment(static_cast<Eigen::Index>(j) * system.dofs, system.dofs));
  }
  return out;
}

SpaceHandle PartitionSolution::space_at(double t) const {
  return make_space(slice(partition, t), spatial_degree);
}

Field PartitionSolution::field_at(double t) const {
  const auto beta = partition.basis().eval_all(partition.reference_time(t));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(coefficients.front().size());
  for (std::size_t k = 0; k < coefficients.size(); ++k) c += beta[k] * coefficients[k];
  return Field(space_at(t), std::move(c));
}

Field PartitionSolution::end_field() const { return field_at(partition.t_end()); }

ReconfigurationPolicy keep_policy() {
  return [](int, const MeshSlice&) { return Reconfiguration::keep(); };
}

ReconfigurationPolicy uniform_policy(int elements, int period) {
  period = std::max(period, 1);
  return [elements, period](int next, const MeshSlice&) {
    return (next - 1) % period == 0 ? Reconfiguration::uniform(elements)
                                    : Reconfiguration::keep();
  };
}

RunResult run(const DomainSpec& domain, const TimeGrid& grid, const ProblemSpec& problem,
              const VelocityField& motion, const ReferenceRule& rule, const TimeBasis& basis,
              const MeshSlice& initial_mesh, const RunOptions& options) {
  domain.validate();
  if (basis.degree() != rule.degree()) {
    throw std::invalid_argument("run: time basis and rule degrees differ");
  }
  if (initial_mesh.x_min() != domain.x_min || initial_mesh.x_max() != domain.x_max) {
    throw std::invalid_argument("run: initial mesh does not span the domain");
  }
  const int degree = options.spatial_degree > 0 ? options.spatial_degree : rule.degree();
  const ReconfigurationPolicy policy = options.reconfiguration ? options.reconfiguration : keep_policy();

  RunResult result{SpaceTimeSolution{rule, {}}, {}};
  auto& parts = result.solution.partitions;

  for (int i = 1; i <= grid.partitions(); ++i) {
    const double t0 = grid.start(i);
    const double t1 = grid.end(i);
    StepReport rep;
    rep.partition = i;
    rep.t_start = t0;
    rep.t_end = t1;
    try {
      if (grid.step(i) > options.dt_ceiling) {
        std::ostringstream os;
        os << "time step " << grid.step(i) << " exceeds the ceiling " << options.dt_ceiling;
        throw std::runtime_error(os.str());
      }
      std::optional<Field> previous_end;
      Reconfiguration strategy = Reconfiguration::keep();
      MeshSlice start = initial_mesh;
      if (i > 1) {
        previous_end = parts.back().end_field();
        strategy = policy(i, previous_end->space->mesh());
        start = reconfigure(previous_end->space->mesh(), strategy);
      }

      std::vector<double> knot_times;
      for (double tk : rule.knots()) knot_times.push_back(t0 + tk * (t1 - t0));
      TimePartition partition = build_trajectories(start, i, t0, t1, motion, basis, knot_times);

      const auto check = partition.check_times(knot_times, 10);
      rep.regularity = regularity(partition, check, problem.b);
      rep.elements = partition.element_count();

      SpaceHandle space0 = make_space(slice(partition, t0), degree);
      Field c0 = [&] {
        if (!previous_end) return initial_field(problem, space0);
        if (strategy.kind == Reconfiguration::Kind::keep) return shift(*previous_end, space0);
        Field projected = l2_project(*previous_end, space0);
        const Eigen::VectorXd jump =
            mass_matrix(*space0) * projected.coefficients - cross_moments(*previous_end, *space0);
        rep.jump_residual = jump.cwiseAbs().maxCoeff();
        return projected;
      }();

      const PartitionSystem sys = assemble_partition(partition, problem, rule, c0);
      PartitionSolve solve = solve_partition(sys);
      rep.residual = solve.residual;
      rep.condition_estimate = solve.condition_estimate;

      PartitionSolution ps{std::move(partition), degree, {}};
      ps.coefficients.push_back(std::move(c0.coefficients));
      for (auto& s : solve.stages) ps.coefficients.push_back(std::move(s));
      parts.push_back(std::move(ps));
    } catch (const SolverFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverFailure(i, e.what());
    }
    result.reports.push_back(rep);
  }
  return result;
}

void write_step_reports_csv(std::ostream& os, const std::vector<StepReport>& reports) {
  const auto prec = os.precision(17);
  os << "partition,t_start,t_end,elements,residual,condition_estimate,jump_residual,"
        "mu_estimate,kappa_estimate,min_element,det_ratio_min,det_ratio_max\n";
  for (const auto& r : reports) {
    os << r.partition << ',' << r.t_start << ',' << r.t_end << ',' << r.elements << ','
       << r.residual << ',' << r.condition_estimate << ',' << r.jump_residual << ','
       << r.regularity.mu_estimate << ',' << r.regularity.kappa_estimate << ','
       << r.regularity.min_element << ',' << r.regularity.det_ratio_min << ','
       << r.regularity.det_ratio_max << '\n';
  }
  os.precision(prec);
}

void write_solution_csv(std::ostream& os, const SpaceTimeSolution& solution,
                        int samples_per_element) {
  const auto prec = os.precision(17);
  os << "t,x,u\n";
  auto emit = [&](const Field& f) {
    for (const auto& [x, u] : sample(f, samples_per_element)) {
      os << f.space->time() << ',' << x << ',' << u << '\n';
    }
  };
  const auto& first = solution.partitions.front();
  emit(first.field_at(first.partition.t_start()));
  for (const auto& ps : solution.partitions) {
    for (double tk : solution.rule.knots()) emit(ps.field_at(ps.partition.time_at(tk)));
    if (solution.rule.knots().back() < 1.0) emit(ps.end_field());
  }
  os.precision(prec);
}

} // namespace charfem
