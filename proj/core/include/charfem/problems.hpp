// Manufactured benchmarks and mesh-motion strategies.

#ifndef CHARFEM_PROBLEMS_HPP
#define CHARFEM_PROBLEMS_HPP

#include "charfem/fespace.hpp"
#include "charfem/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace charfem {

struct Benchmark {
  std::string name;
  ProblemSpec problem; ///< always carries an exact solution
  /// Closed-form second derivative of u and x-derivative of a, used only by
  /// the consistency check.
  SpaceTimeFunction u_xx;
  SpaceTimeFunction a_x;
  DomainSpec domain;
  int elements = 16;
  int partitions = 16;
  std::string motion = "static";
  /// Largest polynomial degree (space and time) of u; 0 when u is not a polynomial.
  int polynomial_degree = 0;
};

/// u = exp(-(x - x0 - v t)^2 / sigma^2), a = a0, b = v, c = 0 on [0,1] x [0,0.5].
Benchmark traveling_gaussian(double v, double sigma, double a0, double x0 = 0.25);

/// u = x + t for degree 1, u = x^2 + t^2 for degree 2 (a = 1, b = c = 0).
Benchmark polynomial_exactness(int degree);

/// Named polynomial benchmarks:
///   poly_one       u = 1              (a = 1, b = 0.5, c = 0.25)
///   poly_sum       u = x + t          (a = 1, b = 0,   c = 0)
///   poly_product   u = x t            (a = 1, b = 0.5, c = 0)
///   poly_quadratic u = x^2 + t^2      (a = 1, b = 0,   c = 0)
Benchmark polynomial_benchmark(const std::string& name);

/// max over samples of |f - (u_t - (a u_x)_x + b u_x + c u)| and of the two
/// boundary fluxes, relative to max(1, |f|).
double consistency_residual(const Benchmark& benchmark, int samples = 100,
                            std::uint64_t seed = 20240611);

/// Registered names, in registration order.
std::vector<std::string> benchmark_names();
/// Throws std::invalid_argument for an unknown name or a benchmark whose
/// consistency residual exceeds 1e-9.
Benchmark find_benchmark(const std::string& name);

enum class MotionKind { static_mesh, characteristics, prescribed };

struct MotionSpec {
  MotionKind kind = MotionKind::static_mesh;
  /// Width of the boundary taper as a fraction of |Omega| (characteristics).
  double taper_margin = 0.1;
  /// Used when kind == prescribed.
  VelocityField prescribed;
};

/// Smooth cutoff: 0 on the boundary, 1 at distance >= margin * |Omega| from it.
double boundary_taper(const DomainSpec& domain, double margin, double x);

VelocityField motion_strategy(const MotionSpec& spec, const ProblemSpec& problem,
                              const DomainSpec& domain);

/// Named prescribed motions:
///   dilate   w = alpha (x - x_c) / (1 + alpha t), alpha = -0.4 (linear trajectories)
///   reverse  w = -b tapered
///   wave     w = 0.25 |Omega| sin(pi s) cos(2 pi t / T), s = (x - x_min) / |Omega|
///   collide  w = 3 |Omega| sign(x_c - x); nodes cross near the center
VelocityField prescribed_motion(const std::string& name, const ProblemSpec& problem,
                                const DomainSpec& domain);
std::vector<std::string> prescribed_motion_names();

/// "static", "characteristics" or "prescribed:NAME".
MotionSpec parse_motion(const std::string& text, const ProblemSpec& problem,
                        const DomainSpec& domain);

} // namespace charfem

#endif // CHARFEM_PROBLEMS_HPP
