// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include "charfem/analysis.hpp"
#include "charfem/problems.hpp"
#include "charfem/solver.hpp"

#include "support/reference.hpp"
#include "support/runs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace charfem;
using testing_support::solve_benchmark;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures without stopping, keeps the worst measured value.
class Tally {
public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void worst(double v) { worst_ = std::max(worst_, v); }
  double worst() const { return worst_; }

  Outcome done(const std::string& summary) const {
    Outcome o;
    o.pass = failed_ == 0;
    std::ostringstream os;
    os << summary;
    for (const auto& f : failures_) os << "; " << f;
    if (failed_ > static_cast<int>(failures_.size())) os << "; ...";
    o.detail = os.str();
    return o;
  }

private:
  std::vector<std::string> failures_;
  int failed_ = 0;
  double worst_ = 0.0;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double moment(const ReferenceRule& rule, int k) {
  std::vector<double> s;
  for (double t : rule.knots()) s.push_back(std::pow(t, k));
  return charfem::apply(rule, s);
}

ProblemSpec constant_problem(double a, double b, double c) {
  ProblemSpec pr;
  pr.a = [a](double, double) { return a; };
  pr.b = [b](double, double) { return b; };
  pr.c = [c](double, double) { return c; };
  pr.f = [](double, double) { return 0.0; };
  pr.g_min = [](double) { return 0.0; };
  pr.g_max = [](double) { return 0.0; };
  pr.u0 = [](double) { return 0.0; };
  return pr;
}

double mass_of(const Field& f) {
  return (mass_matrix(*f.space) * f.coefficients).sum();
}

double l2_of(const Field& f) {
  return std::sqrt(f.coefficients.dot(mass_matrix(*f.space) * f.coefficients));
}

// ---------------------------------------------------------------------------

Outcome quadrature_exactness() {
  Tally t;
  for (int p = 1; p <= 5; ++p) {
    const auto g = gauss_rule(p);
    const auto r = radau_rule(p);
    for (int k = 0; k <= 2 * p - 1; ++k) {
      const double e = std::abs(moment(g, k) - 1.0 / (k + 1));
      t.worst(e);
      t.require(e <= 1e-12, "gauss p=" + std::to_string(p) + " t^" + std::to_string(k));
    }
    for (int k = 0; k <= 2 * p - 2; ++k) {
      const double e = std::abs(moment(r, k) - 1.0 / (k + 1));
      t.worst(e);
      t.require(e <= 1e-12, "radau p=" + std::to_string(p) + " t^" + std::to_string(k));
    }
  }
  const double c1 = std::abs(radau_rule(1).error_constant() - 0.5);
  const double c2 = std::abs(radau_rule(2).error_constant() - 1.0 / 216.0);
  t.require(c1 <= 1e-12, "radau c_1 = " + sci(radau_rule(1).error_constant()));
  t.require(c2 <= 1e-12, "radau c_2 = " + sci(radau_rule(2).error_constant()));
  return t.done("max moment error " + sci(t.worst()) + ", |c_1 - 1/2| " + sci(c1) +
                ", |c_2 - 1/216| " + sci(c2));
}

Outcome quadrature_identity() {
  Tally t;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const std::vector<std::pair<std::string, std::function<ReferenceRule(int)>>> families{
      {"gauss", [](int p) { return gauss_rule(p); }},
      {"radau", [](int p) { return radau_rule(p); }},
      {"theta(0.5)", [](int p) { return theta_rule(p, 0.5); }}};
  for (const auto& [name, make] : families) {
    for (int p = 1; p <= 5; ++p) {
      const auto rule = make(p);
      const int d = 2 * p - 1;
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(static_cast<std::size_t>(d + 1));
        for (double& v : a) v = coef(rng);
        double integral = 0.0;
        for (int k = 0; k <= d; ++k) integral += a[static_cast<std::size_t>(k)] / (k + 1);
        std::vector<double> samples;
        for (double x : rule.knots()) {
          double v = 0.0;
          for (int k = d; k >= 0; --k) v = v * x + a[static_cast<std::size_t>(k)];
          samples.push_back(v);
        }
        const double top = a.back() * reference::factorial(d);
        const double e = std::abs(integral - charfem::apply(rule, samples) + rule.error_constant() * top);
        t.worst(e);
        t.require(e <= 1e-11, name + " p=" + std::to_string(p));
      }
    }
  }
  return t.done("3 families x p=1..5 x 50 polynomials, max defect " + sci(t.worst()));
}

Outcome b_invertibility() {
  Tally t;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int cases = 0;
  for (int p = 1; p <= 4; ++p) {
    int made = 0;
    while (made < 100) {
      std::vector<double> cuts;
      for (int k = 0; k < p; ++k) cuts.push_back(u(rng));
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> nodes{0.0};
      bool ok = true;
      for (double c : cuts) {
        if (c - nodes.back() < 1e-3) ok = false;
        nodes.push_back(c);
      }
      if (u(rng) < 0.5) nodes.back() = 1.0;
      if (!ok || nodes[nodes.size() - 2] >= nodes.back()) continue;
      const DerivativeMatrix dm = derivative_matrix(make_basis(nodes), theta_rule(p, u(rng)));
      Eigen::VectorXd w(p);
      for (int k = 0; k < p; ++k) w(k) = 2.0 * u(rng) - 1.0;
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(dm.entries);
      t.require(lu.isInvertible(), "singular B at p=" + std::to_string(p));
      const Eigen::VectorXd v = lu.solve(w);
      const double e = (dm.entries * v - w).norm() / w.norm();
      t.worst(e);
      t.require(e <= 1e-10, "round trip p=" + std::to_string(p) + " " + sci(e));
      ++made;
      ++cases;
    }
  }
  return t.done(std::to_string(cases) + " configurations, max round trip " + sci(t.worst()));
}

Outcome scheme_equivalence() {
  Tally t;
  const std::size_t n = 64;
  const double h = 1.0 / n;
  const double dt = 0.01;
  const int steps = 20;
  const double a = 1.0;
  const double b = 0.3;
  const double c = 0.1;
  ProblemSpec pr = constant_problem(a, b, c);
  pr.f = [](double, double time) { return std::sin(time); };
  pr.g_max = [](double time) { return std::cos(time); };
  pr.u0 = [](double x) { return std::cos(std::numbers::pi * x) + x * x; };
  const reference::ScalarSource src{[](double time) { return std::sin(time); },
                                    [](double) { return 0.0; },
                                    [](double time) { return std::cos(time); }};
  const auto m = reference::p1_mass(n, h);
  const auto k = reference::p1_operator(n, h, a, b, c);
  const DomainSpec domain{0.0, 1.0, dt * steps};
  validate_problem(pr, domain);
  const MeshSlice mesh = MeshSlice::uniform(0.0, 1.0, static_cast<int>(n));
  const VelocityField still = [](double, double) { return 0.0; };

  struct Case {
    std::string name;
    ReferenceRule rule;
    BasisNodePolicy policy;
    bool midpoint;
  };
  const std::vector<Case> cases{
      {"gauss/endpoint basis", gauss_rule(1), BasisNodePolicy::equispaced, true},
      {"gauss/knot basis", gauss_rule(1), BasisNodePolicy::coincident, true},
      {"radau", radau_rule(1), BasisNodePolicy::coincident, false}};
  for (const auto& cs : cases) {
    RunOptions opt;
    opt.spatial_degree = 1;
    const RunResult r = run(domain, TimeGrid::uniform(domain.t_final, steps), pr, still, cs.rule,
                            default_basis(cs.rule, cs.policy), mesh, opt);
    const Eigen::VectorXd& c0 = r.solution.partitions.front().coefficients.front();
    std::vector<double> u(c0.data(), c0.data() + c0.size());
    for (int s = 0; s < steps; ++s) {
      const double t0 = s * dt;
      u = cs.midpoint ? reference::midpoint_step(m, k, u, t0, dt, h, src)
                      : reference::backward_euler_step(m, k, u, t0, dt, h, src);
      const Field end = r.solution.partitions[static_cast<std::size_t>(s)].end_field();
      double e = 0.0;
      for (std::size_t i = 0; i <= n; ++i) e = std::max(e, std::abs(end.coefficients(static_cast<Eigen::Index>(i)) - u[i]));
      t.worst(e);
      t.require(e <= 1e-12, cs.name + " step " + std::to_string(s + 1) + " " + sci(e));
    }
  }
  return t.done("64 elements, 20 steps, max coefficient difference " + sci(t.worst()));
}

Outcome exactness() {
  Tally t;
  int checked = 0;
  std::string excluded;
  for (int p = 1; p <= 2; ++p) {
    for (const std::string motion : {"static", "prescribed:dilate"}) {
      for (const std::string name : {"poly_sum", "poly_product"}) {
        for (const bool gauss : {true, false}) {
          const Benchmark bm = polynomial_benchmark(name);
          const ReferenceRule rule = gauss ? gauss_rule(p) : radau_rule(p);
          const RunResult r = solve_benchmark(bm, rule, motion, bm.elements, bm.partitions);
          const ErrorReport rep = error_report(r.solution, bm.problem);
          const std::string label = name + " p=" + std::to_string(p) + " " + motion + " " +
                                    (gauss ? "gauss" : "radau");
          // along the linear trajectories x t is quadratic in time, so it is
          // not in the p = 1 space; the interpolant itself carries an error
          if (p == 1 && motion != "static" && name == "poly_product") {
            t.require(rep.interpolant_energy_error > 1e-6, label + ": interpolant unexpectedly exact");
            t.require(rep.ratio <= 10.0, label + ": ratio " + sci(rep.ratio));
            excluded += (excluded.empty() ? "" : ", ") + std::string(gauss ? "gauss" : "radau") +
                        " err " + sci(rep.energy_error) + " vs interpolant " +
                        sci(rep.interpolant_energy_error);
            continue;
          }
          t.worst(rep.energy_error);
          t.require(rep.energy_error <= 1e-9, label + " err " + sci(rep.energy_error));
          ++checked;
        }
      }
    }
  }
  return t.done(std::to_string(checked) + " cases, max energy error " + sci(t.worst()) +
                "; not representable (x t, p=1, dilating): " + excluded);
}

Outcome invariants() {
  Tally t;
  double const_err = 0.0;
  double mass_err = 0.0;
  double jump = 0.0;
  double growth = -std::numeric_limits<double>::infinity();

  // constant preservation under moving meshes
  const Benchmark one = polynomial_benchmark("poly_one");
  for (const std::string motion : {"prescribed:wave", "prescribed:dilate", "characteristics"}) {
    for (int p = 1; p <= 3; ++p) {
      for (const bool gauss : {true, false}) {
        for (const bool remesh : {false, true}) {
          RunOptions opt;
          if (remesh) opt.reconfiguration = uniform_policy(7, 2);
          const RunResult r = solve_benchmark(one, gauss ? gauss_rule(p) : radau_rule(p), motion,
                                              8, 6, opt);
          for (const auto& ps : r.solution.partitions) {
            for (const auto& c : ps.coefficients) {
              const double e = (c.array() - 1.0).abs().maxCoeff();
              const_err = std::max(const_err, e);
              t.require(e <= 1e-11, "constant lost on " + motion + " " + sci(e));
            }
          }
        }
      }
    }
  }

  // static-mesh mass conservation with homogeneous Neumann data
  ProblemSpec diff = constant_problem(0.05, 0.0, 0.0);
  diff.u0 = [](double x) { return std::exp(-40.0 * (x - 0.3) * (x - 0.3)) + 0.5 * x; };
  const DomainSpec unit{0.0, 1.0, 1.0};
  validate_problem(diff, unit);
  const VelocityField still = [](double, double) { return 0.0; };
  for (int p = 1; p <= 3; ++p) {
    for (const bool gauss : {true, false}) {
      const ReferenceRule rule = gauss ? gauss_rule(p) : radau_rule(p);
      const RunResult r = run(unit, TimeGrid::uniform(1.0, 10), diff, still, rule,
                              default_basis(rule), MeshSlice::uniform(0.0, 1.0, 20));
      const double m0 = mass_of(r.solution.partitions.front().field_at(0.0));
      for (const auto& ps : r.solution.partitions) {
        for (int k = 0; k <= p; ++k) {
          const Field f = ps.field_at(ps.partition.time_at(ps.partition.basis().node(k)));
          const double e = std::abs(mass_of(f) - m0);
          mass_err = std::max(mass_err, e);
          t.require(e <= 1e-11, "mass drift " + sci(e));
        }
      }

      // pure diffusion: L2 norm at partition ends is nonincreasing
      double prev = l2_of(r.solution.partitions.front().field_at(0.0));
      for (const auto& ps : r.solution.partitions) {
        const double now = l2_of(ps.end_field());
        growth = std::max(growth, now - prev);
        t.require(now <= prev * (1.0 + 1e-12), "L2 norm grew by " + sci(now - prev));
        prev = now;
      }
    }
  }

  // jump orthogonality after forced reconfigurations, recomputed independently
  const Benchmark tg = find_benchmark("traveling_gaussian");
  RunOptions forced;
  forced.reconfiguration = [](int next, const MeshSlice& m) {
    if (next % 2 == 0) return Reconfiguration::uniform(11 + next % 3);
    std::vector<double> x{m.x_min()};
    for (int k = 1; k < 9; ++k) x.push_back(m.x_min() + (m.x_max() - m.x_min()) * std::pow(k / 9.0, 1.3));
    x.push_back(m.x_max());
    return Reconfiguration::user(x);
  };
  for (int p = 1; p <= 3; ++p) {
    const RunResult r = solve_benchmark(tg, radau_rule(p), "characteristics", 16, 8, forced);
    for (std::size_t i = 1; i < r.solution.partitions.size(); ++i) {
      const Field prev_end = r.solution.partitions[i - 1].end_field();
      const auto& next = r.solution.partitions[i];
      const SpaceHandle s = next.space_at(next.partition.t_start());
      const Eigen::VectorXd res = mass_matrix(*s) * next.coefficients.front() - cross_moments(prev_end, *s);
      const double e = std::max(res.lpNorm<Eigen::Infinity>(), r.reports[i].jump_residual);
      jump = std::max(jump, e);
      t.require(e <= 1e-10, "jump residual " + sci(e));
    }
  }

  return t.done("constants " + sci(const_err) + ", mass " + sci(mass_err) + ", jump " +
                sci(jump) + ", max L2 increment " + sci(growth));
}

struct SweepRow {
  int n = 0;
  double error = 0.0;
  double ratio = 0.0;
};

std::vector<SweepRow> sweep(int p, bool gauss) {
  Benchmark bm = traveling_gaussian(1.0, 0.1, 1e-2);
  validate_problem(bm.problem, bm.domain);
  std::vector<SweepRow> rows;
  for (int n = 16; n <= 128; n *= 2) {
    // dt = t_final / (n / 2) = h on the unit interval
    const RunResult r = solve_benchmark(bm, gauss ? gauss_rule(p) : radau_rule(p),
                                        "characteristics", n, n / 2, {uniform_policy(n)});
    const ErrorReport rep = error_report(r.solution, bm.problem);
    rows.push_back({n, rep.energy_error, rep.ratio});
  }
  return rows;
}

std::vector<std::pair<std::string, std::vector<SweepRow>>> sweeps;

void run_sweeps() {
  for (int p = 1; p <= 2; ++p) {
    for (const bool gauss : {false, true}) {
      sweeps.emplace_back((gauss ? "gauss p=" : "radau p=") + std::to_string(p), sweep(p, gauss));
    }
  }
}

Outcome convergence_order() {
  Tally t;
  std::ostringstream os;
  for (const auto& [name, rows] : sweeps) {
    const int p = name.back() - '0';
    const auto& a = rows[rows.size() - 2];
    const auto& b = rows.back();
    const double order = std::log2(a.error / b.error);
    const double need = p == 1 ? 0.8 : 1.6;
    t.require(order >= need, name + " order " + sci(order));
    os << (os.tellp() > 0 ? ", " : "") << name << " order " << sci(order);
  }
  return t.done(os.str());
}

Outcome quasi_optimality() {
  Tally t;
  std::ostringstream os;
  for (const auto& [name, rows] : sweeps) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& r : rows) {
      t.require(std::isfinite(r.ratio) && r.ratio <= 10.0,
                name + " n=" + std::to_string(r.n) + " ratio " + sci(r.ratio));
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    t.require(hi / lo < 2.0, name + " ratio spread " + sci(hi / lo));
    os << (os.tellp() > 0 ? ", " : "") << name << " ratio " << sci(lo) << ".." << sci(hi);
  }
  return t.done(os.str());
}

Outcome shift_bounds() {
  Tally t;
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> len(0.5, 1.5);
  const double dt = 0.1;
  double worst_bound = 0.0;
  double worst_growth = 0.0;
  double worst_mu = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int base = 6;
    std::vector<double> h(base);
    std::vector<double> mu(base);
    double total = 0.0;
    double weighted = 0.0;
    for (int e = 0; e < base; ++e) {
      h[static_cast<std::size_t>(e)] = len(rng);
      mu[static_cast<std::size_t>(e)] = u(rng);
      total += h[static_cast<std::size_t>(e)];
      weighted += h[static_cast<std::size_t>(e)] * mu[static_cast<std::size_t>(e)];
    }
    // unit interval; zero net growth keeps both endpoints fixed
    for (double& len_e : h) len_e /= total;
    for (double& m : mu) m -= weighted / total;
    // elementwise, ||.||_0^2 scales by 1 + mu dt and |.|_1^2 by 1 / (1 + mu dt)
    double bound = 0.0;
    for (double m : mu) bound = std::max(bound, std::abs(m) * std::max(1.0, 1.0 / (1.0 + m * dt)));
    for (int deg = 1; deg <= 2; ++deg) {
      std::vector<ShiftConstants> levels;
      for (int level = 0; level < 3; ++level) {
        const int split = 1 << level;
        std::vector<NodeTrajectory> traj;
        double x0 = 0.0;
        double x1 = 0.0;
        traj.push_back({{x0, x1}});
        for (int e = 0; e < base; ++e) {
          for (int s = 0; s < split; ++s) {
            const double child = h[static_cast<std::size_t>(e)] / split;
            x0 += child;
            x1 += child * (1.0 + mu[static_cast<std::size_t>(e)] * dt);
            traj.push_back({{x0, x1}});
          }
        }
        traj.back().values[1] = traj.back().values[0];
        const TimePartition part(1, 0.0, dt, traj, make_basis({0.0, 1.0}));
        const RegularityReport reg = regularity(part, part.check_times({}, 4), {});
        worst_mu = std::max(worst_mu, reg.mu_estimate);
        t.require(reg.mu_estimate <= 2.0, "measured mu " + sci(reg.mu_estimate));
        const SliceSpace from(slice(part, 0.0), deg);
        const SliceSpace to(slice(part, dt), deg);
        const ShiftConstants sc = shift_constants(from, to, dt);
        worst_bound = std::max(worst_bound, std::max(sc.l2, sc.h1) / bound);
        t.require(sc.l2 <= bound * (1.0 + 1e-10) && sc.h1 <= bound * (1.0 + 1e-10),
                  "constant above the elementwise bound");
        levels.push_back(sc);
      }
      for (const bool l2 : {true, false}) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& c : levels) {
          const double v = l2 ? c.l2 : c.h1;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        const double g = hi / lo;
        worst_growth = std::max(worst_growth, g);
        t.require(std::isfinite(g) && g < 1.5, std::string(l2 ? "L2" : "H1") + " growth " + sci(g));
      }
    }
  }
  return t.done("5 random partitions x degree 1,2 x 3 levels, max mu " + sci(worst_mu) +
                ", max growth " + sci(worst_growth) +
                ", max constant / elementwise bound " + sci(worst_bound));
}

Outcome negative_norm_duality() {
  Tally t;
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> len(0.05, 1.0);
  std::uniform_int_distribution<int> elems(1, 12);
  double worst_eq = 0.0;
  double worst_dom = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x{u(rng)};
    const int n = elems(rng);
    for (int e = 0; e < n; ++e) x.push_back(x.back() + len(rng));
    const SliceSpace s(MeshSlice(0.0, x), 1 + trial % 3);
    Eigen::VectorXd r(s.dof_count());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = u(rng);
    const SparseMatrix g = h1_gram(s);
    const double nrm = negative_norm(s, r);
    const Eigen::VectorXd chi = supremizer(s, r);
    const double attained = std::abs(r.dot(chi)) / std::sqrt(chi.dot(g * chi));
    const double eq = std::abs(attained - nrm) / nrm;
    worst_eq = std::max(worst_eq, eq);
    t.require(eq <= 1e-10, "supremizer gap " + sci(eq));
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd v(s.dof_count());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
      const double q = std::abs(r.dot(v)) / std::sqrt(v.dot(g * v));
      worst_dom = std::max(worst_dom, q / nrm - 1.0);
      t.require(q <= nrm * (1.0 + 1e-12), "trial function exceeds the norm");
    }
  }
  return t.done("100 slices, max equality gap " + sci(worst_eq) + ", max trial excess " +
                sci(worst_dom));
}

} // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "quadrature exactness", 1.0, quadrature_exactness},
      {2, "quadrature error identity", 1.0, quadrature_identity},
      {3, "derivative matrix invertibility", 5.0, b_invertibility},
      {4, "midpoint and backward Euler equivalence", 10.0, scheme_equivalence},
      {5, "polynomial exactness", 10.0, exactness},
      {6, "structural invariants", 30.0, invariants},
      {7, "convergence order", 300.0, [] {
         run_sweeps();
         return convergence_order();
       }},
      {8, "quasi-optimality ratio", 300.0, quasi_optimality},
      {9, "shift bounds", 30.0, shift_bounds},
      {10, "negative norm duality", 30.0, negative_norm_duality}};

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = o.pass && secs < c.budget;
    if (!ok) ++failed;
    std::printf("criterion %2d %s  %s (%.2f s of %.0f s): %s\n", c.id, ok ? "PASS" : "FAIL",
                c.name.c_str(), secs, c.budget, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
