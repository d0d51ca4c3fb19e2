#include "charfem/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace charfem {

namespace {

Eigen::VectorXd gram_solve(const SliceSpace& space, const Eigen::VectorXd& r) {
  Eigen::SimplicialLLT<SparseMatrix> llt(h1_gram(space));
  if (llt.info() != Eigen::Success) throw std::runtime_error("H1 Gram matrix is singular");
  return llt.solve(r);
}

struct SliceTerms {
  double l2sq = 0.0;
  double h1sq = 0.0;
  double negsq = 0.0;
};

const ExactSolution& zero_target() {
  static const ExactSolution z{[](double, double) { return 0.0; },
                               [](double, double) { return 0.0; },
                               [](double, double) { return 0.0; }};
  return z;
}

// Norms of target - v on the slice at t_hat of one partition.
SliceTerms slice_terms(const PartitionSolution& ps, double t_hat, const ExactSolution& target,
                       bool with_derivative) {
  const double t = ps.partition.time_at(t_hat);
  const Field v = ps.field_at(t);
  const SliceSpace& space = *v.space;
  const int p = space.degree();
  const auto q = space.make_quadrature(p + 3);
  const auto node_velocity = ps.partition.velocities(t);

  SliceTerms out;
  Eigen::VectorXd r;
  Eigen::VectorXd d;
  if (with_derivative) {
    r = Eigen::VectorXd::Zero(space.dof_count());
    d = characteristic_derivative_at(ps, t_hat).coefficients;
  }
  for (int e = 0; e < space.element_count(); ++e) {
    const double xl = space.mesh().node(e);
    const double h = space.mesh().element_size(e);
    const double wl = node_velocity[static_cast<std::size_t>(e)];
    const double wr = node_velocity[static_cast<std::size_t>(e + 1)];
    for (std::size_t k = 0; k < q.x_hat.size(); ++k) {
      const double xh = q.x_hat[k];
      const double x = xl + xh * h;
      const double jw = q.weights[k] * h;
      double vh = 0.0;
      double dvh = 0.0;
      for (int i = 0; i <= p; ++i) {
        const double c = v.coefficients(space.dof(e, i));
        vh += c * q.values[k][static_cast<std::size_t>(i)];
        dvh += c * q.derivatives[k][static_cast<std::size_t>(i)];
      }
      dvh /= h;
      const double ux = target.u_x(x, t);
      const double ev = target.u(x, t) - vh;
      const double ed = ux - dvh;
      out.l2sq += jw * ev * ev;
      out.h1sq += jw * (ev * ev + ed * ed);
      if (with_derivative) {
        const double utau = target.u_t(x, t) + ((1.0 - xh) * wl + xh * wr) * ux;
        for (int i = 0; i <= p; ++i) {
          r(space.dof(e, i)) += jw * utau * q.values[k][static_cast<std::size_t>(i)];
        }
      }
    }
  }
  if (with_derivative) {
    r -= mass_matrix(space) * d;
    const double nn = negative_norm(space, r);
    out.negsq = nn * nn;
  }
  return out;
}

} // namespace

double l2_norm(const Field& field) {
  const double s = field.coefficients.dot(mass_matrix(*field.space) * field.coefficients);
  return std::sqrt(std::max(s, 0.0));
}

double h1_norm(const Field& field) {
  const double s = field.coefficients.dot(h1_gram(*field.space) * field.coefficients);
  return std::sqrt(std::max(s, 0.0));
}

Eigen::VectorXd supremizer(const SliceSpace& space, const Eigen::VectorXd& moments) {
  if (moments.size() != space.dof_count()) {
    throw std::invalid_argument("moment vector length does not match the slice space");
  }
  return gram_solve(space, moments);
}

double negative_norm(const SliceSpace& space, const Eigen::VectorXd& moments) {
  const Eigen::VectorXd z = supremizer(space, moments);
  return std::sqrt(std::max(moments.dot(z), 0.0));
}

Field characteristic_derivative_at(const PartitionSolution& ps, double t_hat) {
  const auto dbeta = ps.partition.basis().eval_deriv_all(t_hat);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(ps.coefficients.front().size());
  for (std::size_t k = 0; k < ps.coefficients.size(); ++k) d += dbeta[k] * ps.coefficients[k];
  d /= ps.partition.step();
  return Field(ps.space_at(ps.partition.time_at(t_hat)), std::move(d));
}

Field discrete_characteristic_derivative(const SpaceTimeSolution& solution, int i, int j) {
  if (i < 1 || i > static_cast<int>(solution.partitions.size())) {
    throw std::out_of_range("partition index " + std::to_string(i) + " out of range");
  }
  if (j < 0 || j >= solution.rule.degree()) {
    throw std::out_of_range("collocation index " + std::to_string(j) + " out of range");
  }
  return characteristic_derivative_at(solution.partitions[static_cast<std::size_t>(i - 1)],
                                      solution.rule.knot(j));
}

double velocity_at(const TimePartition& partition, double x, double t) {
  const MeshSlice s = slice(partition, t);
  const int e = s.locate(x);
  const double xh = (x - s.node(e)) / s.element_size(e);
  return mesh_velocity(partition, e, xh, t);
}

double exact_characteristic_derivative(const ProblemSpec& problem,
                                       const TimePartition& partition, double x, double t) {
  if (!problem.exact) throw std::invalid_argument("problem has no exact solution");
  return problem.exact->u_t(x, t) + velocity_at(partition, x, t) * problem.exact->u_x(x, t);
}

EnergyNorm energy_norm(const SpaceTimeSolution& v, const ExactSolution* target) {
  if (v.partitions.empty()) return {};
  const ExactSolution& tg = target ? *target : zero_target();
  const ReferenceRule& rule = v.rule;

  double max_sq = slice_terms(v.partitions.front(), 0.0, tg, false).l2sq;
  EnergyNorm out;
  for (const auto& ps : v.partitions) {
    const double dt = ps.partition.step();
    for (int j = 0; j < rule.degree(); ++j) {
      const SliceTerms s = slice_terms(ps, rule.knot(j), tg, true);
      max_sq = std::max(max_sq, s.l2sq);
      out.h1_term += dt * rule.weight(j) * s.h1sq;
      out.neg_term += dt * rule.weight(j) * s.negsq;
    }
  }
  out.max_l2 = std::sqrt(max_sq);
  out.energy = std::sqrt(max_sq + out.h1_term + out.neg_term);
  return out;
}

SpaceTimeSolution space_time_interpolant(const SpaceTimeSolution& solution,
                                         const SpaceTimeFunction& u) {
  SpaceTimeSolution out{solution.rule, {}};
  for (const auto& ps : solution.partitions) {
    PartitionSolution ip{ps.partition, ps.spatial_degree, {}};
    for (double zeta : ps.partition.basis().nodes()) {
      const double t = ps.partition.time_at(zeta);
      ip.coefficients.push_back(
          interpolate([&u, t](double x) { return u(x, t); }, ps.space_at(t)).coefficients);
    }
    out.partitions.push_back(std::move(ip));
  }
  return out;
}

ErrorReport error_report(const SpaceTimeSolution& solution, const ProblemSpec& problem) {
  if (!problem.exact) throw std::invalid_argument("error report needs an exact solution");
  const ExactSolution& ex = *problem.exact;
  const EnergyNorm e = energy_norm(solution, &ex);
  const EnergyNorm ie = energy_norm(space_time_interpolant(solution, ex.u), &ex);

  ErrorReport r;
  r.energy_error = e.energy;
  r.max_l2 = e.max_l2;
  r.h1_term = e.h1_term;
  r.neg_term = e.neg_term;
  r.interpolant_energy_error = ie.energy;
  if (e.energy <= exact_tolerance && ie.energy <= exact_tolerance) {
    r.exact = true;
    r.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.ratio = ie.energy > 0.0 ? e.energy / ie.energy : std::numeric_limits<double>::infinity();
  }
  return r;
}

void write_error_report_header(std::ostream& os) {
  os << "energy_err,max_l2,h1_term,neg_term,interp_energy_err,ratio,exact\n";
}

void write_error_report_row(std::ostream& os, const ErrorReport& r) {
  const auto prec = os.precision(17);
  os << r.energy_error << ',' << r.max_l2 << ',' << r.h1_term << ',' << r.neg_term << ','
     << r.interpolant_energy_error << ',';
  if (!r.exact) os << r.ratio;
  os << ',' << (r.exact ? 1 : 0) << '\n';
  os.precision(prec);
}

ShiftConstants shift_constants(const SliceSpace& from, const SliceSpace& to, double dt) {
  if (from.dof_count() != to.dof_count() || from.degree() != to.degree()) {
    throw std::invalid_argument("shift_constants: slices differ in topology");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("shift_constants: dt must be positive");
  auto sharp = [dt](const SparseMatrix& a, const SparseMatrix& b) {
    const Eigen::MatrixXd bd = Eigen::MatrixXd(b) * dt;
    const Eigen::MatrixXd diff = Eigen::MatrixXd(a) - Eigen::MatrixXd(b);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, bd,
                                                                 Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("shift_constants: eigensolve failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
  };
  return {sharp(mass_matrix(from), mass_matrix(to)), sharp(h1_gram(from), h1_gram(to))};
}

} // namespace charfem
