#include "charfem/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace charfem;

namespace {

TimePartition linear_partition(std::vector<double> x0, std::vector<double> x1, double t0,
                               double t1) {
  std::vector<NodeTrajectory> tr;
  for (std::size_t k = 0; k < x0.size(); ++k) tr.push_back({{x0[k], x1[k]}});
  return TimePartition(1, t0, t1, std::move(tr), make_basis({0.0, 1.0}));
}

} // namespace

TEST_CASE("domain and time grid validation") {
  CHECK_THROWS(DomainSpec{1.0, 0.0, 1.0}.validate());
  CHECK_THROWS(DomainSpec{0.0, 1.0, 0.0}.validate());
  CHECK_NOTHROW(DomainSpec{0.0, 1.0, 1.0}.validate());
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  CHECK(g.partitions() == 4);
  CHECK(g.step(2) == doctest::Approx(0.25));
  CHECK(g.end(4) == 1.0);
  CHECK_THROWS(TimeGrid({0.0, 0.5, 0.5}));
  CHECK_THROWS(TimeGrid({0.1, 0.5}));
}

TEST_CASE("slices of a static partition") {
  const TimePartition p = static_partition(MeshSlice::uniform(0.0, 1.0, 4), 1, 0.0, 0.5,
                                           make_basis({0.0, 0.5, 1.0}));
  for (double t : {0.0, 0.2, 0.5}) {
    const MeshSlice s = slice(p, t);
    for (int k = 0; k <= 4; ++k) CHECK(s.node(k) == doctest::Approx(0.25 * k).epsilon(1e-15));
  }
  CHECK_THROWS_AS(slice(p, 0.7), std::out_of_range);
  const auto r = regularity(p, p.check_times({}, 10), [](double, double) { return 0.0; });
  CHECK(r.mu_estimate <= 1e-13);
  CHECK(r.kappa_estimate <= 1e-13);
}

TEST_CASE("direct trajectory evaluation") {
  const TimePartition p = linear_partition({0.0, 0.0 + 1e-9, 2.0}, {0.0, 1.0, 2.0}, 0.0, 1.0);
  CHECK(slice(p, 0.5).node(1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK_THROWS_AS(linear_partition({0.0, 1.5, 2.0}, {0.0, 2.5, 2.0}, 0.0, 1.0), DegenerateMeshError);
  CHECK_THROWS_AS(linear_partition({0.0, 1.0, 2.0}, {0.5, 1.0, 2.0}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("isoparametric maps round trip") {
  const TimePartition p = linear_partition({0.0, 0.3, 0.6, 1.0}, {0.0, 0.4, 0.55, 1.0}, 0.0, 0.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    const int e = s % 3;
    const double xh = u(rng);
    const double th = u(rng);
    const auto [x, t] = isoparametric(p, e, xh, th);
    const auto [xh2, th2] = inverse_isoparametric(p, e, x, t);
    CHECK(std::abs(xh2 - xh) <= 1e-12);
    CHECK(std::abs(th2 - th) <= 1e-12);
  }
  const auto [x0, t0] = isoparametric(p, 1, 0.0, 0.5);
  CHECK(x0 == doctest::Approx(p.position(1, t0)));
  const auto [x1, t1] = isoparametric(p, 1, 1.0, 1.0);
  CHECK(x1 == doctest::Approx(0.55));
  CHECK(t1 == doctest::Approx(0.2));
}

TEST_CASE("mesh velocity") {
  const TimePartition p = linear_partition({0.0, 0.3, 1.0}, {0.0, 0.5, 1.0}, 1.0, 1.5);
  // (b - a)/dt at the moving node, affine in between
  CHECK(mesh_velocity(p, 0, 1.0, 1.2) == doctest::Approx(0.4));
  CHECK(mesh_velocity(p, 0, 0.5, 1.2) == doctest::Approx(0.2));
  CHECK(mesh_velocity(p, 1, 1.0, 1.2) == doctest::Approx(0.0));
  const TimePartition s = static_partition(MeshSlice::uniform(0.0, 1.0, 3), 1, 0.0, 1.0, make_basis({0.0, 1.0}));
  CHECK(mesh_velocity(s, 2, 0.3, 0.6) == 0.0);
}

TEST_CASE("uniform dilation regularity") {
  // interior nodes follow x(0)(1+t); the far boundary at 10 stays fixed
  const std::vector<double> x0{0.0, 0.5, 1.0, 2.0, 10.0};
  std::vector<double> x1 = x0;
  for (std::size_t k = 1; k + 1 < x0.size(); ++k) x1[k] = 2.0 * x0[k];
  const TimePartition p = linear_partition(x0, x1, 0.0, 1.0);
  CHECK(p.velocity(2, 0.5) == doctest::Approx(x0[2]));
  const auto r = regularity(p, p.check_times({}, 10), [](double, double) { return 0.0; });
  CHECK(r.mu_estimate == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.det_ratio_max == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.det_ratio_min > 0.0);
  CHECK(r.kappa_estimate == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("determinant ratios stay within the regularity bound") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x0{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> x1 = x0;
    for (std::size_t k = 1; k + 1 < x0.size(); ++k) x1[k] += 0.03 * u(rng);
    const TimePartition p = linear_partition(x0, x1, 0.0, 0.1);
    const auto r = regularity(p, p.check_times({}, 10), {});
    const double mu = r.mu_estimate;
    if (mu > 0.0 && 0.1 <= 1.0 / (2.0 * mu)) {
      CHECK(r.det_ratio_min >= 1.0 - 2.0 * mu * 0.1);
      CHECK(r.det_ratio_max <= 1.0 + 2.0 * mu * 0.1);
    }
  }
}

TEST_CASE("trajectory construction") {
  const TimeBasis lin = make_basis({0.0, 1.0});
  const auto one = [](double, double) { return 1.0; };
  const TimePartition p = build_trajectories(MeshSlice::uniform(0.0, 4.0, 4), 1, 0.0, 0.1, one, lin);
  for (int k = 1; k < 4; ++k) {
    CHECK(p.position(k, 0.1) == doctest::Approx(k + 0.1).epsilon(1e-14));
    CHECK(p.position(k, 0.05) == doctest::Approx(k + 0.05).epsilon(1e-14));
  }
  CHECK(p.position(0, 0.1) == 0.0);
  CHECK(p.position(4, 0.1) == 4.0);

  // w = x on [1,2]: x0 e^t, interpolation error O(dt^(p+1)) at midpoints
  const auto grow = [](double x, double) { return x; };
  for (int deg = 1; deg <= 2; ++deg) {
    std::vector<double> nodes{0.0};
    for (int k = 1; k <= deg; ++k) nodes.push_back(static_cast<double>(k) / deg);
    const TimeBasis b = make_basis(nodes);
    double prev = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
      const TimePartition g = build_trajectories(MeshSlice(0.0, {1.0, 1.5, 20.0}), 1, 0.0, dt, grow, b);
      const double tm = dt * (0.5 / deg);
      const double err = std::abs(g.position(1, tm) - 1.5 * std::exp(tm));
      if (prev > 0.0) CHECK(std::log2(prev / err) > deg + 0.8);
      prev = err;
    }
  }
}

TEST_CASE("crossing motion is rejected") {
  const auto collide = [](double x, double) { return x < 0.5 ? 5.0 : -5.0; };
  CHECK_THROWS_AS(build_trajectories(MeshSlice::uniform(0.0, 1.0, 4), 1, 0.0, 0.2, collide,
                                     make_basis({0.0, 1.0})),
                  DegenerateMeshError);
}

TEST_CASE("reconfiguration") {
  const MeshSlice prev(0.3, {0.0, 0.1, 0.7, 1.0});
  const MeshSlice kept = reconfigure(prev, Reconfiguration::keep());
  CHECK(kept.node(2) == 0.7);
  CHECK(kept.time() == 0.3);
  const MeshSlice u = reconfigure(prev, Reconfiguration::uniform(4));
  for (int k = 0; k <= 4; ++k) CHECK(u.node(k) == doctest::Approx(0.25 * k));
  CHECK_THROWS(reconfigure(prev, Reconfiguration::user({0.0, 0.1, 0.05, 1.0})));
  CHECK_THROWS(reconfigure(prev, Reconfiguration::user({0.0, 0.5, 0.9})));
  CHECK(reconfigure(prev, Reconfiguration::user({0.0, 0.5, 1.0})).element_count() == 2);
}

TEST_CASE("mesh rows") {
  std::ostringstream os;
  write_mesh_row(os, MeshSlice(0.5, {0.0, 0.25, 1.0}));
  CHECK(os.str() == "0.5,0,0.25,1\n");
}
