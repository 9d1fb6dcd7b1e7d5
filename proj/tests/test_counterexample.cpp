#include <doctest.h>

#include <memory>

#include "counterexample.hpp"
#include "family.hpp"

using namespace czflow;

namespace {

const GroupSpec kH = GroupSpec::heisenberg();

const NetCubeSystem& small_net() {
  static FlowMeasure mu = FlowMeasure::haar(VerticalField::vertical(kH));
  static CubeSystemParams p = [] {
    CubeSystemParams q;
    q.window_radius = 4.0;
    q.gen_min = -2;
    q.gen_max = 0;
    q.seed = 7;
    q.net_candidates = 30000;
    q.measure_samples = 150000;
    return q;
  }();
  static NetCubeSystem sys(mu, p);
  return sys;
}

Vec h1_ball_sample(double R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  while (true) {
    Vec p{2.0 * R * u(rng), 2.0 * R * u(rng), 4.0 * R * R * u(rng)};
    if (base_norm(kH, p) < R) return p;
  }
}

}  // namespace

TEST_CASE("box images under the flow conjugation") {
  HeisenbergBox Q1 = HeisenbergBox::square(1.0);
  HeisenbergBox id = psi_box_image(0.0, Q1);
  CHECK(id.L == doctest::Approx(1.0));
  CHECK(id.M == doctest::Approx(1.0));

  HeisenbergBox img = psi_box_image(std::log(2.0), Q1);
  CHECK(img.L == doctest::Approx(2.0));
  CHECK(img.M == doctest::Approx(6.0));  // e^{2t} L^2 + e^t |1-e^t| L = 4 + 2

  // exactness on corners and interior points against the pointwise map
  VerticalField Z = VerticalField::make(kH, Vec{1, 0});
  std::mt19937_64 rng = make_rng(41, 0);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double t : {-1.3, -0.2, 0.4, 2.0}) {
    HeisenbergBox out = psi_box_image(t, Q1);
    for (int i = 0; i < 200; ++i) {
      Vec corner{u(rng) < 0 ? -1.0 : 1.0, u(rng) < 0 ? -1.0 : 1.0, u(rng) < 0 ? -1.0 : 1.0};
      Vec inner{u(rng), u(rng), u(rng)};
      for (const Vec& m : {corner, inner}) {
        Vec w = psi_t(Z, t, m);
        CHECK(std::abs(w[0]) <= out.L * (1 + 1e-12));
        CHECK(std::abs(w[1]) <= out.L * (1 + 1e-12));
        CHECK(std::abs(w[2]) <= out.M * (1 + 1e-12));
      }
    }
    // containment psi_t(Q(L)) contains Q(e^t L)
    CHECK(out.M >= std::exp(2 * t) * 1.0 - 1e-12);
  }
}

TEST_CASE("box sandwich around Koranyi balls, c~^4 = 1/20") {
  double ctil = box_inner_c();
  CHECK(ctil * ctil * ctil * ctil == doctest::Approx(1.0 / 20.0));
  std::mt19937_64 rng = make_rng(41, 1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double L : {0.25, 1.0, 3.0}) {
    HeisenbergBox inner{2 * ctil * L, std::pow(2 * ctil * L, 2)};
    HeisenbergBox outer{2 * L, 4 * L * L};
    for (int i = 0; i < 20000; ++i) {
      // Q(2 c~ L) c B(1, L)
      Vec p{inner.L * u(rng), inner.L * u(rng), inner.M * u(rng)};
      CHECK(base_norm(kH, p) <= L * (1 + 1e-12));
      // B(1, L) c Q(2L)
      Vec b = h1_ball_sample(L, rng);
      CHECK(outer.contains(b));
    }
  }
}

TEST_CASE("flow conjugation maps a certified core ball into the image ball") {
  // B(1, S(t,R)) c psi_t(B(1, R)) with the shear-corrected radius: pull back
  // and check the norm
  VerticalField Z = VerticalField::make(kH, Vec{1, 0});
  std::mt19937_64 rng = make_rng(41, 2);
  double ctil = box_inner_c();
  for (double t : {-3.0, -1.0, 0.3, 1.7}) {
    for (double R : {0.5, 2.0, 20.0}) {
      double S = psi_ball_core_radius(t, R);
      REQUIRE(S > 0);
      CHECK(S <= ctil * std::exp(t) * R * (1 + 1e-12));
      for (int i = 0; i < 4000; ++i) {
        Vec w = h1_ball_sample(S, rng);
        CHECK(base_norm(kH, psi_t(Z, -t, w)) <= R * (1 + 1e-12));
      }
      // once e^t R dominates the shear, the linear-scale radius is recovered
      if (std::exp(t) * R > 8.0 * std::abs(std::expm1(t)))
        CHECK(S >= 0.4 * ctil * std::exp(t) * R);
    }
  }

  // the uncorrected linear radius genuinely fails at strongly negative t:
  // the slab shear pushes part of that ball outside the image
  bool escaped = false;
  for (int i = 0; i < 20000 && !escaped; ++i) {
    Vec w = h1_ball_sample(ctil * std::exp(-1.0) * 0.5, rng);
    if (base_norm(kH, psi_t(Z, 1.0, w)) > 0.5) escaped = true;
  }
  CHECK(escaped);
}

TEST_CASE("small-ball cylinder sits inside the metric ball") {
  VerticalField Z = VerticalField::make(kH, Vec{1, 0});
  CHECK(Z.norm() == doctest::Approx(std::sqrt(2.0)));
  for (double R : {0.1, 0.7, 2.5}) {
    SampleReport rep = verify_small_ball_in_cylinder(Z, R, 10000, 41);
    CHECK(rep.ok);
    CHECK(rep.worst < 1.0);
    CHECK(rep.worst > 0.05);  // the sample actually probes the cylinder
  }
  // and for an abelian flow field as well
  VerticalField Za = VerticalField::make(GroupSpec::abelian(2), Vec{1, 1});
  SampleReport repa = verify_small_ball_in_cylinder(Za, 0.8, 5000, 41);
  CHECK(repa.ok);
}

TEST_CASE("thickened cylinder stays within R of the cylinder") {
  const NetCubeSystem& sys = small_net();
  VerticalField Z = VerticalField::make(kH, Vec{1, 0});
  std::mt19937_64 rng = make_rng(41, 3);
  CubeRef q = sys.cube_at(Vec{0.3, -0.2, 0.1}, -1);
  for (double R : {0.4, 1.2}) {
    for (double r : {1.8, 3.0}) {
      for (double a : {0.7, 1.0, 1.6}) {
        Cylinder P{r, a, BaseSet::make_cube(&sys, q)};
        SampleReport rep = verify_thickened_cylinder(P, Z, R, 3000, 41);
        CHECK(rep.ok);
        CHECK(rep.worst < 1.0);
      }
    }
  }
  (void)rng;

  // R -> 0+: the thickening degenerates onto the cylinder itself
  Cylinder P{2.0, 1.0, BaseSet::make_cube(&sys, q)};
  SampleReport tiny = verify_thickened_cylinder(P, Z, 1e-4, 500, 41);
  CHECK(tiny.ok);
}

TEST_CASE("divergence table: bookkeeping in log space") {
  CounterexampleParams prm;  // r0 = e^2, K = 1, c = 1/2, C1 = 3
  auto rows = counterexample_table(prm, 5);
  REQUIRE(rows.size() == 6);
  double lr0 = 2.0;

  CHECK(rows[0].strip_exponent == doctest::Approx(4.0));            // 4 * 6^0
  CHECK(rows[1].strip_exponent == doctest::Approx(24.0));
  for (const CounterexampleRow& r : rows) {
    CHECK(r.log_r0_r >= 1.0 - 1e-12);
    CHECK(r.log_r0_r <= 2.0 + 1e-12);
    // anchor interval inside the relaxed exponent window
    CHECK(r.log_a_low >= -(r.strip_exponent + 2.0) * lr0 - 1e-9);
    CHECK(r.log_a_high <= -(r.strip_exponent - 2.0) * lr0 + 1e-9);
    // scale bounds mirror the admissibility inequalities
    CHECK(r.log_delta_low <= r.log_delta_high);
    CHECK(r.log_delta_low >= r.log_a_low + 2.0 * lr0 - 1e-9);
    // diameter chain links are ordered, coarsest bound last
    CHECK(r.link_full >= r.link_tau - 1e-9);
    CHECK(r.link_tau >= r.link_vertical - 1e-9);
    CHECK(r.link_vertical >= r.link_final - 1e-9);
    // diameter lower bound at the documented slack
    CHECK(r.log_diam_lb >= 4.0 * std::pow(6.0, r.l) * lr0 - 5.0);
  }
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].log_ratio_lb > rows[i - 1].log_ratio_lb);  // strictly increasing
    double incr = rows[i].log_ratio_lb - rows[i - 1].log_ratio_lb;
    double eps = 0.05;
    CHECK(incr >= 5.0 * std::log(6.0) * std::pow(6.0, rows[i - 1].l) * (1 - eps));
  }

  // CSV round trip of the fixed column layout
  std::string csv = counterexample_csv(rows);
  CHECK(csv.rfind("l,log_r0_r,a_low,a_high,log_diam_lb,log_ratio_lb_at_K1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  CHECK_THROWS_AS(counterexample_table(prm, 9), Error);
  CounterexampleParams bad = prm;
  bad.r0 = 2.0;  // below e
  CHECK_THROWS_AS(counterexample_table(bad, 2), Error);
}

TEST_CASE("abelian two-sided cosh comparison") {
  GroupSpec spec = GroupSpec::abelian(1);

  // beta = 0: the two metrics coincide
  VerticalField Z0 = VerticalField::vertical(spec);
  EquivalenceReport r0 = abelian_equivalence_certificate(Z0, 3000, 5);
  CHECK(r0.ok);
  CHECK(r0.D == doctest::Approx(2.0));
  CHECK(r0.ratio_sup == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r0.ratio_inf == doctest::Approx(1.0).epsilon(1e-12));

  for (double b : {0.5, 1.0, 2.0}) {
    VerticalField Z = VerticalField::make(spec, Vec{b});
    EquivalenceReport rep = abelian_equivalence_certificate(Z, 10000, 5);
    CHECK(rep.ok);
    CHECK(rep.D == doctest::Approx(std::max(2 * b * b + 1, 2.0)));
    CHECK(rep.phi_min <= 1.0 / (1.0 + b * b) + 1e-12);  // Phi at v = 0
    CHECK(rep.phi_max >= 1.0);
    CHECK(rep.phi_min > 0.0);
  }

  // m = 2 as well
  VerticalField Z2 = VerticalField::make(GroupSpec::abelian(2), Vec{1.0, -1.0});
  EquivalenceReport rep2 = abelian_equivalence_certificate(Z2, 8000, 5);
  CHECK(rep2.ok);
  CHECK(rep2.D == doctest::Approx(5.0));
}
