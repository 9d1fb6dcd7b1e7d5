#include <doctest.h>

#include <set>

#include "cubes.hpp"

using namespace czflow;

namespace {

CubeSystemParams abelian_params(double window = 64.0, int gmin = -30, int gmax = 30) {
  CubeSystemParams p;
  p.window_radius = window;
  p.gen_min = gmin;
  p.gen_max = gmax;
  return p;
}

const NetCubeSystem& shared_net() {
  static FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::heisenberg()));
  static CubeSystemParams p = [] {
    CubeSystemParams q;
    q.window_radius = 8.0;
    q.gen_min = -3;
    q.gen_max = 0;
    q.seed = 5;
    q.net_candidates = 60000;
    q.measure_samples = 300000;
    return q;
  }();
  static NetCubeSystem sys(mu, p);
  return sys;
}

}  // namespace

TEST_CASE("dyadic intervals: lookup, centers, parents, children") {
  FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::abelian(1)));
  AbelianDyadicSystem sys(mu, abelian_params());

  // generation k cells have side delta^k; 0.3 sits in [1/4, 1/2) two levels down
  CubeRef q2 = sys.cube_at(Vec{0.3}, 2);
  CHECK(sys.center(q2)[0] == doctest::Approx(0.375));
  CHECK(sys.contains(q2, Vec{0.25}));
  CHECK(sys.contains(q2, Vec{0.4999}));
  CHECK(!sys.contains(q2, Vec{0.5}));  // half-open

  CubeRef q1 = sys.cube_at(Vec{0.3}, 1);
  CHECK(sys.center(q1)[0] == doctest::Approx(0.25));
  CHECK(sys.parent(q2) == q1);

  // cube_at at a cube's own center returns that cube
  for (int k : {-3, 0, 4}) {
    CubeRef q = sys.cube_at(Vec{-7.7}, k);
    CHECK(sys.cube_at(sys.center(q), k) == q);
  }

  CubeRef root = sys.cube_at(Vec{0.3}, 0);
  auto kids = sys.children(root);
  REQUIRE(kids.size() == 2);
  CHECK(sys.center(kids[0])[0] == doctest::Approx(0.25));
  CHECK(sys.center(kids[1])[0] == doctest::Approx(0.75));

  CHECK(sys.mu_base(sys.parent(root)) / sys.mu_base(root) == doctest::Approx(2.0));
  CHECK(sys.inner_c() == 0.5);
  CHECK(sys.C1() == 3.0);
}

TEST_CASE("dyadic squares: counts and measure ratios") {
  FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::abelian(2)));
  AbelianDyadicSystem sys(mu, abelian_params());
  CHECK(sys.C1() == 4.0);  // max(3, 2^m, sqrt m)

  std::mt19937_64 rng = make_rng(9, 0);
  std::uniform_real_distribution<double> c(-50, 50);
  for (int i = 0; i < 200; ++i) {
    Vec n{c(rng), c(rng)};
    int k = static_cast<int>(i % 9) - 4;
    CubeRef q = sys.cube_at(n, k);
    CHECK(sys.contains(q, n));
    CHECK(sys.children(q).size() == 4);
    CHECK(sys.mu_base(sys.parent(q)) == doctest::Approx(4.0 * sys.mu_base(q)).epsilon(1e-12));
    // sibling lower bound mu(Q) >= (1 + 1/C1) mu(Q')
    for (const CubeRef& kid : sys.children(q))
      CHECK(sys.mu_base(q) >= (1.0 + 1.0 / sys.C1()) * sys.mu_base(kid) - 1e-15);
    // nesting
    CHECK(sys.relation(sys.cube_at(n, k), sys.cube_at(n, k + 1)) ==
          CubeSystem::Relation::first_contains_second);
  }
}

TEST_CASE("dyadic cubes satisfy the eccentricity sandwich") {
  FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::abelian(2)));
  AbelianDyadicSystem sys(mu, abelian_params());
  std::mt19937_64 rng = make_rng(9, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k : {-2, 0, 3}) {
    double dk = sys.scale(k);
    CubeRef q = sys.cube_at(Vec{3.3, -1.2}, k);
    Vec nq = sys.center(q);
    for (int i = 0; i < 2000; ++i) {
      Vec p = sys.sample_point(q, rng);
      CHECK(dist_base(sys.spec(), nq, p) <= sys.C1() * dk);
      // inner ball B(n_Q, c delta^k) stays inside the cube
      Vec b(2);
      double ang = 2 * M_PI * u(rng), rad = sys.inner_c() * dk * u(rng);
      b[0] = nq[0] + rad * std::cos(ang);
      b[1] = nq[1] + rad * std::sin(ang);
      CHECK(sys.contains(q, b));
    }
  }
}

TEST_CASE("power-weight system certifies a finite C1") {
  FlowMeasure mu = FlowMeasure::power(VerticalField::vertical(GroupSpec::abelian(1)), 1.0);
  CubeSystemParams p = abelian_params(8.0, -4, 5);
  AbelianDyadicSystem sys(mu, p);
  CHECK(sys.C1() >= 3.0);
  CHECK(sys.C1() < 16.0);
  for (int k = -3; k <= 5; ++k) {
    for (const CubeRef& q : sys.cubes_meeting_window(k))
      CHECK(sys.mu_base(sys.parent(q)) <= sys.C1() * sys.mu_base(q) * (1 + 1e-12));
  }
}

TEST_CASE("window policy fails loudly") {
  FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::abelian(1)));
  AbelianDyadicSystem sys(mu, abelian_params(16.0, -10, 10));
  CHECK_THROWS_AS(sys.cube_at(Vec{17.0}, 0), Error);
  CHECK_THROWS_AS(sys.cube_at(Vec{1.0}, 11), Error);
  try {
    sys.cube_at(Vec{17.0}, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resource);
  }
}

TEST_CASE("nearest-dyadic-center assignment reproduces the exact cubes") {
  // the net construction rule (nearest center) applied to the dyadic lattice
  // agrees with half-open interval arithmetic away from the null boundaries
  FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(GroupSpec::abelian(1)));
  AbelianDyadicSystem sys(mu, abelian_params(16.0, -4, 6));
  std::mt19937_64 rng = make_rng(9, 2);
  std::uniform_real_distribution<double> c(-15.9, 15.9);
  for (int i = 0; i < 3000; ++i) {
    double x = c(rng);
    int k = static_cast<int>(i % 8) - 3;
    double side = sys.scale(k);
    double nearest = (std::floor(x / side) + 0.5) * side;  // nearest lattice center
    CubeRef q = sys.cube_at(Vec{x}, k);
    CHECK(sys.center(q)[0] == doctest::Approx(nearest).epsilon(1e-12));
  }
}

TEST_CASE("net cells on H^1: partition, nesting, eccentricity") {
  const NetCubeSystem& sys = shared_net();
  CHECK(sys.inner_c() > 0.0);
  CHECK(sys.C1() >= 3.0);

  std::mt19937_64 rng = make_rng(9, 3);
  std::uniform_real_distribution<double> u(-1, 1);
  const GroupSpec spec = GroupSpec::heisenberg();
  int inside = 0;
  for (int i = 0; i < 20000; ++i) {
    Vec p{16.0 * u(rng), 16.0 * u(rng), 256.0 * u(rng)};
    if (base_norm(spec, p) > sys.window_radius()) continue;
    ++inside;
    CubeRef prev{};
    for (int k = sys.gen_min(); k <= sys.gen_max(); ++k) {
      CubeRef q = sys.cube_at(p, k);
      CHECK(sys.contains(q, p));  // deterministic assignment: exactly one cell
      if (k > sys.gen_min()) CHECK(sys.parent(q) == prev);
      prev = q;
      CHECK(dist_base(spec, p, sys.center(q)) <= sys.empirical_outer() * sys.scale(k) + 1e-12);
    }
  }
  CHECK(inside > 2000);

  // cell volumes add up to the window ball volume within Monte Carlo error
  for (int k = sys.gen_min(); k <= sys.gen_max(); ++k) {
    double total = 0;
    for (const CubeRef& q : sys.cubes_meeting_window(k)) total += sys.mu_base(q);
    double want = koranyi_unit_ball_volume() * std::pow(sys.window_radius(), 4);
    CHECK(total == doctest::Approx(want).epsilon(0.02));
  }

  // parent/children measure control on well-sampled interior cells
  int checked = 0;
  for (int k = sys.gen_min() + 1; k <= sys.gen_max(); ++k) {
    for (const CubeRef& q : sys.cubes_meeting_window(k)) {
      if (sys.partial(q) || sys.partial(sys.parent(q))) continue;
      double mq = sys.mu_base(q);
      if (mq < 1e-3) continue;
      CHECK(sys.mu_base(sys.parent(q)) <= sys.C1() * mq * 1.05);
      ++checked;
    }
  }
  CHECK(checked > 50);
}
