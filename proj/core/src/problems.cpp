#include "charfem/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace charfem {

namespace {

SpaceTimeFunction constant(double v) {
  return [v](double, double) { return v; };
}

// Fills f, g and u0 from the exact bundle and constant coefficients.
void derive_data(Benchmark& bm, double a, double b, double c) {
  ProblemSpec& pr = bm.problem;
  const ExactSolution ex = *pr.exact;
  const SpaceTimeFunction uxx = bm.u_xx;
  pr.a = constant(a);
  pr.b = constant(b);
  pr.c = constant(c);
  bm.a_x = constant(0.0);
  pr.f = [ex, uxx, a, b, c](double x, double t) {
    return ex.u_t(x, t) - a * uxx(x, t) + b * ex.u_x(x, t) + c * ex.u(x, t);
  };
  const double xl = bm.domain.x_min;
  const double xr = bm.domain.x_max;
  pr.g_min = [ex, a, xl](double t) { return -a * ex.u_x(xl, t); };
  pr.g_max = [ex, a, xr](double t) { return a * ex.u_x(xr, t); };
  pr.u0 = [ex](double x) { return ex.u(x, 0.0); };
  pr.a_lower = a;
  pr.c_lower = c;
}

double smoothstep(double z) {
  z = std::clamp(z, 0.0, 1.0);
  return z * z * (3.0 - 2.0 * z);
}

} // namespace

Benchmark traveling_gaussian(double v, double sigma, double a0, double x0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("traveling_gaussian: sigma must be positive");
  if (!(a0 > 0.0)) throw std::invalid_argument("traveling_gaussian: a0 must be positive");
  Benchmark bm;
  bm.name = "traveling_gaussian";
  bm.domain = {0.0, 1.0, 0.5};
  bm.elements = 16;
  bm.partitions = 8;
  bm.motion = "characteristics";
  const double s2 = sigma * sigma;
  auto u = [=](double x, double t) {
    const double z = x - x0 - v * t;
    return std::exp(-z * z / s2);
  };
  ExactSolution ex;
  ex.u = u;
  ex.u_x = [=](double x, double t) { return -2.0 * (x - x0 - v * t) / s2 * u(x, t); };
  ex.u_t = [=](double x, double t) { return 2.0 * v * (x - x0 - v * t) / s2 * u(x, t); };
  bm.u_xx = [=](double x, double t) {
    const double z = x - x0 - v * t;
    return (4.0 * z * z / (s2 * s2) - 2.0 / s2) * u(x, t);
  };
  bm.problem.exact = ex;
  derive_data(bm, a0, v, 0.0);
  return bm;
}

Benchmark polynomial_exactness(int degree) {
  if (degree == 1) return polynomial_benchmark("poly_sum");
  if (degree == 2) return polynomial_benchmark("poly_quadratic");
  throw std::invalid_argument("polynomial_exactness: degree must be 1 or 2");
}

Benchmark polynomial_benchmark(const std::string& name) {
  Benchmark bm;
  bm.name = name;
  bm.domain = {0.0, 1.0, 1.0};
  bm.elements = 8;
  bm.partitions = 4;
  bm.motion = "static";
  ExactSolution ex;
  double b = 0.0;
  double c = 0.0;
  if (name == "poly_one") {
    ex = {constant(1.0), constant(0.0), constant(0.0)};
    bm.u_xx = constant(0.0);
    b = 0.5;
    c = 0.25;
    bm.polynomial_degree = 0;
  } else if (name == "poly_sum") {
    ex = {[](double x, double t) { return x + t; }, constant(1.0), constant(1.0)};
    bm.u_xx = constant(0.0);
    bm.polynomial_degree = 1;
  } else if (name == "poly_product") {
    ex = {[](double x, double t) { return x * t; }, [](double x, double) { return x; },
          [](double, double t) { return t; }};
    bm.u_xx = constant(0.0);
    b = 0.5;
    bm.polynomial_degree = 1;
  } else if (name == "poly_quadratic") {
    ex = {[](double x, double t) { return x * x + t * t; },
          [](double, double t) { return 2.0 * t; }, [](double x, double) { return 2.0 * x; }};
    bm.u_xx = constant(2.0);
    bm.polynomial_degree = 2;
  } else {
    throw std::invalid_argument("unknown polynomial benchmark '" + name + "'");
  }
  bm.problem.exact = ex;
  derive_data(bm, 1.0, b, c);
  return bm;
}

double consistency_residual(const Benchmark& bm, int samples, std::uint64_t seed) {
  const ProblemSpec& pr = bm.problem;
  if (!pr.exact) throw std::invalid_argument("consistency_residual: no exact solution");
  const ExactSolution& ex = *pr.exact;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xs(bm.domain.x_min, bm.domain.x_max);
  std::uniform_real_distribution<double> ts(0.0, bm.domain.t_final);
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
  };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = xs(rng);
    const double t = ts(rng);
    const double a = pr.a(x, t);
    const double strong = ex.u_t(x, t) - (bm.a_x(x, t) * ex.u_x(x, t) + a * bm.u_xx(x, t)) +
                          pr.b(x, t) * ex.u_x(x, t) + pr.c(x, t) * ex.u(x, t);
    worst = std::max(worst, rel(pr.f(x, t), strong));
    const double xl = bm.domain.x_min;
    const double xr = bm.domain.x_max;
    worst = std::max(worst, rel(pr.g_min(t), -pr.a(xl, t) * ex.u_x(xl, t)));
    worst = std::max(worst, rel(pr.g_max(t), pr.a(xr, t) * ex.u_x(xr, t)));
  }
  return worst;
}

std::vector<std::string> benchmark_names() {
  return {"traveling_gaussian", "diffusion_bump", "poly_one", "poly_sum", "poly_product",
          "poly_quadratic"};
}

Benchmark find_benchmark(const std::string& name) {
  Benchmark bm;
  if (name == "traveling_gaussian") {
    bm = traveling_gaussian(1.0, 0.1, 1e-2);
  } else if (name == "diffusion_bump") {
    bm = traveling_gaussian(0.0, 0.1, 1e-2, 0.5);
    bm.name = name;
    bm.motion = "static";
  } else if (name.rfind("poly_", 0) == 0) {
    bm = polynomial_benchmark(name);
  } else {
    throw std::invalid_argument("unknown benchmark '" + name + "'");
  }
  const double r = consistency_residual(bm);
  if (!(r <= 1e-9)) {
    throw std::invalid_argument("benchmark '" + name + "' fails its consistency check");
  }
  validate_problem(bm.problem, bm.domain);
  return bm;
}

double boundary_taper(const DomainSpec& domain, double margin, double x) {
  if (!(margin > 0.0)) return 1.0;
  const double d = std::min(x - domain.x_min, domain.x_max - x);
  return smoothstep(d / (margin * domain.length()));
}

VelocityField motion_strategy(const MotionSpec& spec, const ProblemSpec& problem,
                              const DomainSpec& domain) {
  switch (spec.kind) {
  case MotionKind::static_mesh:
    return [](double, double) { return 0.0; };
  case MotionKind::characteristics: {
    const auto b = problem.b;
    const double margin = spec.taper_margin;
    return [b, domain, margin](double x, double t) {
      return b(x, t) * boundary_taper(domain, margin, x);
    };
  }
  case MotionKind::prescribed:
    if (!spec.prescribed) throw std::invalid_argument("prescribed motion without a velocity");
    return spec.prescribed;
  }
  throw std::invalid_argument("unknown motion kind");
}

VelocityField prescribed_motion(const std::string& name, const ProblemSpec& problem,
                                const DomainSpec& domain) {
  const double xc = 0.5 * (domain.x_min + domain.x_max);
  const double len = domain.length();
  if (name == "dilate") {
    constexpr double alpha = -0.4;
    if (1.0 + alpha * domain.t_final <= 0.0) {
      throw std::invalid_argument("dilate motion collapses before t_final");
    }
    return [xc](double x, double t) { return alpha * (x - xc) / (1.0 + alpha * t); };
  }
  if (name == "reverse") {
    const auto b = problem.b;
    return [b, domain](double x, double t) { return -b(x, t) * boundary_taper(domain, 0.1, x); };
  }
  if (name == "wave") {
    const double period = domain.t_final;
    return [domain, len, period](double x, double t) {
      const double s = (x - domain.x_min) / len;
      return 0.25 * len * std::sin(std::numbers::pi * s) *
             std::cos(2.0 * std::numbers::pi * t / period);
    };
  }
  if (name == "collide") {
    return [xc, len](double x, double) {
      return x < xc ? 3.0 * len : (x > xc ? -3.0 * len : 0.0);
    };
  }
  throw std::invalid_argument("unknown prescribed motion '" + name + "'");
}

std::vector<std::string> prescribed_motion_names() {
  return {"dilate", "reverse", "wave", "collide"};
}

MotionSpec parse_motion(const std::string& text, const ProblemSpec& problem,
                        const DomainSpec& domain) {
  MotionSpec spec;
  if (text == "static") return spec;
  if (text == "characteristics") {
    spec.kind = MotionKind::characteristics;
    return spec;
  }
  const std::string prefix = "prescribed:";
  if (text.rfind(prefix, 0) == 0) {
    spec.kind = MotionKind::prescribed;
    spec.prescribed = prescribed_motion(text.substr(prefix.size()), problem, domain);
    return spec;
  }
  throw std::invalid_argument("unknown motion '" + text + "'");
}

} // namespace charfem
