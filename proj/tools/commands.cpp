#include "commands.hpp"

#include "charfem/analysis.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <system_error>
#include <thread>
#include <vector>

namespace charfem::tools {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const RunConfig& config) {
  fs::path dir = config.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

struct LevelResult {
  RunResult run;
  ErrorReport report;
  double h = 0.0;
  double dt = 0.0;
};

LevelResult solve_level(const RunConfig& config, int level) {
  ResolvedRun r = resolve(config, level);
  const RunOptions opt = run_options(config, r);
  const MeshSlice mesh =
      MeshSlice::uniform(r.benchmark.domain.x_min, r.benchmark.domain.x_max, r.elements);
  LevelResult out{run(r.benchmark.domain, TimeGrid::uniform(r.t_final, r.partitions),
                      r.benchmark.problem, r.motion, r.rule, r.basis, mesh, opt),
                  {}, r.benchmark.domain.length() / r.elements, r.t_final / r.partitions};
  out.report = error_report(out.run.solution, r.benchmark.problem);
  return out;
}

int report_failure(const RunConfig& config, const SolverFailure& e, std::ostream& log) {
  log << "solver failure: " << e.what() << '\n';
  std::ostringstream os;
  os << "partition,cause\n" << e.partition() << ",\"";
  for (char ch : std::string(e.what())) os << (ch == '"' ? '\'' : ch);
  os << "\"\n";
  write_atomically(output_dir(config) / "failure_report.csv", os.str());
  return exit_solver_failure;
}

} // namespace

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

int run_single(const RunConfig& config, std::ostream& log) {
  try {
    const LevelResult res = solve_level(config, 0);
    std::ostringstream sol;
    write_solution_csv(sol, res.run.solution);
    std::ostringstream steps;
    write_step_reports_csv(steps, res.run.reports);
    std::ostringstream err;
    write_error_report_header(err);
    write_error_report_row(err, res.report);

    const fs::path dir = output_dir(config);
    write_atomically(dir / "solution.csv", sol.str());
    write_atomically(dir / "step_reports.csv", steps.str());
    write_atomically(dir / "error_report.csv", err.str());
    log << "energy error " << res.report.energy_error << " over "
        << res.run.reports.size() << " partitions\n";
    return exit_ok;
  } catch (const SolverFailure& e) {
    return report_failure(config, e, log);
  }
}

int run_convergence(const RunConfig& config, std::ostream& log) {
  const int levels = config.levels;
  resolve(config, 0); // surface configuration errors before any work
  std::vector<std::optional<LevelResult>> results(static_cast<std::size_t>(levels));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(levels));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int l = next++; l < levels; l = next++) {
      try {
        results[static_cast<std::size_t>(l)] = solve_level(config, l);
      } catch (...) {
        errors[static_cast<std::size_t>(l)] = std::current_exception();
      }
    }
  };
  const int nthreads = std::min(config.threads, levels);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int l = 0; l < levels; ++l) {
    if (!errors[static_cast<std::size_t>(l)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(l)]);
    } catch (const SolverFailure& e) {
      log << "level " << l << ": ";
      return report_failure(config, e, log);
    }
  }

  std::ostringstream table;
  table.precision(17);
  table << "level,h,dt,energy_err,max_l2,h1_term,neg_term,interp_energy_err,ratio,observed_order\n";
  std::vector<std::string> step_files;
  for (int l = 0; l < levels; ++l) {
    const LevelResult& r = *results[static_cast<std::size_t>(l)];
    const ErrorReport& e = r.report;
    table << l << ',' << r.h << ',' << r.dt << ',' << e.energy_error << ',' << e.max_l2 << ','
          << e.h1_term << ',' << e.neg_term << ',' << e.interpolant_energy_error << ',';
    if (!e.exact) table << e.ratio;
    table << ',';
    if (e.exact) {
      table << "exact";
    } else if (l > 0) {
      const double prev = results[static_cast<std::size_t>(l - 1)]->report.energy_error;
      table << std::log2(prev / e.energy_error);
    }
    table << '\n';
    std::ostringstream steps;
    write_step_reports_csv(steps, r.run.reports);
    step_files.push_back(steps.str());
    log << "level " << l << ": h=" << r.h << " energy error " << e.energy_error << '\n';
  }
  const fs::path dir = output_dir(config);
  for (int l = 0; l < levels; ++l) {
    write_atomically(dir / ("level_" + std::to_string(l) + "_step_reports.csv"),
                     step_files[static_cast<std::size_t>(l)]);
  }
  write_atomically(dir / "convergence.csv", table.str());
  return exit_ok;
}

int inspect_mesh(const RunConfig& config, std::ostream& log) {
  constexpr int samples = 20;
  const ResolvedRun r = resolve(config, 0);
  const RunOptions opt = run_options(config, r);
  const TimeGrid grid = TimeGrid::uniform(r.t_final, r.partitions);
  std::ostringstream os;
  os.precision(17);
  os << "partition,node,t,x\n";
  MeshSlice start =
      MeshSlice::uniform(r.benchmark.domain.x_min, r.benchmark.domain.x_max, r.elements);
  for (int i = 1; i <= grid.partitions(); ++i) {
    try {
      if (i > 1) start = reconfigure(start, opt.reconfiguration(i, start));
      std::vector<double> knots;
      for (double tk : r.rule.knots()) knots.push_back(grid.start(i) + tk * grid.step(i));
      const TimePartition part =
          build_trajectories(start, i, grid.start(i), grid.end(i), r.motion, r.basis, knots);
      for (int k = 0; k < part.node_count(); ++k) {
        for (int s = 0; s < samples; ++s) {
          const double t = part.time_at(static_cast<double>(s) / (samples - 1));
          os << i << ',' << k << ',' << t << ',' << part.position(k, t) << '\n';
        }
      }
      start = slice(part, part.t_end());
    } catch (const std::exception& e) {
      return report_failure(config, SolverFailure(i, e.what()), log);
    }
  }
  write_atomically(output_dir(config) / "mesh_trajectories.csv", os.str());
  log << "wrote trajectories for " << grid.partitions() << " partitions\n";
  return exit_ok;
}

int run_checks(const RunConfig& config, std::ostream& log) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int cases = 20;
  auto random_vector = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = 2.0 * unit(rng) - 1.0;
    return v;
  };
  bool all = true;
  auto verdict = [&](const std::string& name, double worst, double tol) {
    const bool ok = worst <= tol;
    all = all && ok;
    log << (ok ? "ok   " : "FAIL ") << name << "  worst " << worst << " (tol " << tol << ")\n";
  };

  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const int p = 1 + static_cast<int>(unit(rng) * 5) % 5;
    const ReferenceRule rule = theta_rule(p, unit(rng));
    const int d = 2 * p - 1;
    std::vector<double> a(static_cast<std::size_t>(d + 1));
    for (double& v : a) v = 2.0 * unit(rng) - 1.0;
    double exact = 0.0;
    for (int k = 0; k <= d; ++k) exact += a[static_cast<std::size_t>(k)] / (k + 1);
    std::vector<double> samples;
    for (double t : rule.knots()) {
      double s = 0.0;
      for (int k = d; k >= 0; --k) s = s * t + a[static_cast<std::size_t>(k)];
      samples.push_back(s);
    }
    const double q = charfem::apply(rule, samples);
    worst = std::max(worst, std::abs(exact - q + rule.error_constant() * a.back() * std::tgamma(d + 1)));
  }
  verdict("quadrature error identity", worst, 1e-11);

  worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const int p = 1 + c % 4;
    const ReferenceRule rule = theta_rule(p, unit(rng));
    std::vector<double> nodes{0.0};
    for (int k = 1; k <= p; ++k) nodes.push_back((k - 0.5 + 0.45 * (2.0 * unit(rng) - 1.0)) / p);
    const DerivativeMatrix dm = derivative_matrix(make_basis(nodes), rule);
    const Eigen::VectorXd y = random_vector(p);
    const Eigen::VectorXd x = dm.entries.fullPivLu().solve(y);
    worst = std::max(worst, (dm.entries * x - y).norm() / y.norm());
  }
  verdict("derivative matrix round trip", worst, 1e-10);

  worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const int n = 1 + static_cast<int>(unit(rng) * 10);
    std::vector<double> x{0.0};
    for (int e = 0; e < n; ++e) x.push_back(x.back() + 0.2 + unit(rng));
    const SliceSpace space(MeshSlice(0.0, x), 1 + c % 3);
    const Eigen::VectorXd r = random_vector(space.dof_count());
    const double nn = negative_norm(space, r);
    const Eigen::VectorXd z = supremizer(space, r);
    const double achieved = std::abs(r.dot(z)) / std::sqrt(z.dot(h1_gram(space) * z));
    worst = std::max(worst, std::abs(achieved - nn) / std::max(nn, 1e-300));
  }
  verdict("negative norm supremizer", worst, 1e-10);

  worst = 0.0;
  for (int c = 0; c < cases / 4; ++c) {
    const double amp = 0.2 * unit(rng);
    const double K = 4.0 * unit(rng) - 2.0;
    const double bconv = 2.0 * unit(rng) - 1.0;
    ProblemSpec pr;
    pr.a = [](double, double) { return 1.0; };
    pr.b = [bconv](double, double) { return bconv; };
    pr.c = [](double, double) { return 0.0; };
    pr.f = [](double, double) { return 0.0; };
    pr.g_min = pr.g_max = [](double) { return 0.0; };
    pr.u0 = [K](double) { return K; };
    const VelocityField w = [amp](double x, double t) {
      return amp * std::sin(std::numbers::pi * x) * std::cos(2.0 * std::numbers::pi * t);
    };
    const ReferenceRule rule = radau_rule(1 + c % 2);
    const RunResult res = run({0.0, 1.0, 0.5}, TimeGrid::uniform(0.5, 5), pr, w, rule,
                              default_basis(rule, BasisNodePolicy::coincident),
                              MeshSlice::uniform(0.0, 1.0, 10));
    for (const auto& ps : res.solution.partitions) {
      for (const auto& cvec : ps.coefficients) {
        worst = std::max(worst, (cvec.array() - K).abs().maxCoeff());
      }
    }
  }
  verdict("constant preservation on moving meshes", worst, 1e-11);

  log << (all ? "all checks passed" : "some checks failed") << " (seed " << config.seed << ")\n";
  return all ? exit_ok : exit_check_failed;
}

} // namespace charfem::tools
