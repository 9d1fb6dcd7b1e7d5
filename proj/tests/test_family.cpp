#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include "family.hpp"
#include "maximal.hpp"

using namespace czflow;

namespace {

struct FamFixture {
  GroupSpec spec;
  VerticalField Z;
  FlowMeasure mu;
  std::unique_ptr<AbelianDyadicSystem> sys;
  AdmissibilityParams adm;

  explicit FamFixture(int m, Vec beta, double window = 600.0)
      : spec(GroupSpec::abelian(m)),
        Z(VerticalField::make(spec, beta)),
        mu(FlowMeasure::haar(Z)) {
    CubeSystemParams p;
    p.window_radius = window;
    p.gen_min = -60;
    p.gen_max = 40;
    sys = std::make_unique<AbelianDyadicSystem>(mu, p);
  }

  DyadicFamily fam(int neg, int pos, FamilyWindow w) const {
    Cylinder root = default_root(sys.get(), adm, std::exp(2.0));
    return DyadicFamily(Z, mu, sys.get(), adm, root, neg, pos, w);
  }
};

std::string file_contents(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("default root: coarsest admissible generation anchored at 1") {
  FamFixture F(1, Vec{0.5});
  Cylinder P0 = default_root(F.sys.get(), F.adm, std::exp(2.0));
  CHECK(P0.a == 1.0);
  CHECK(P0.base_gen() == -6);  // first k with delta^k >= r0^2 = e^4
  CHECK(is_admissible(P0, F.adm) == Admissibility::large);
  CHECK(F.sys->contains(P0.base.cube, Vec(1)));
}

TEST_CASE("ascent: lateral while admissible, then alternation from up") {
  FamFixture F(1, Vec{0.5}, 4000.0);
  DyadicFamily fam = F.fam(16, 0, FamilyWindow{60.0, Interval{-1.5, 5.5}});
  const auto& steps = fam.steps();
  REQUIRE(steps.size() == 16);
  // at r0 = e^2, a = 1: the lateral parent stays admissible while
  // delta^j <= delta lambda r0^gamma, i.e. for j = -6 .. -18: 13 lateral steps
  for (int k = 0; k <= 12; ++k) CHECK(steps[k] == AscentStep::lateral);
  CHECK(steps[13] == AscentStep::up);
  const auto& chain = fam.chain();
  CHECK(chain[14].r == doctest::Approx(std::exp(4.0)));
  CHECK(chain[14].a == doctest::Approx(std::exp(2.0)));
  // after the radius doubles, lateral steps resume
  CHECK(steps[14] == AscentStep::lateral);

  // strips appear exactly at the up-step, and their sons populate the levels
  // below it
  bool saw_strip = false, saw_strip_son = false;
  for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
    for (std::int64_t id : fam.level(lv)) {
      if (fam.node(id).role == NodeRole::strip) saw_strip = true;
      if (fam.node(id).role == NodeRole::strip_descendant) saw_strip_son = true;
    }
  }
  CHECK(saw_strip);
  CHECK(saw_strip_son);
}

TEST_CASE("family invariants: admissibility, links, measure control") {
  for (int m : {1, 2}) {
    FamFixture F(m, m == 1 ? Vec{1.0} : Vec{0.5, -0.5});
    FamilyWindow w{40.0, Interval{-1.7, 1.7}};
    DyadicFamily fam = F.fam(3, 4, w);
    double C1 = F.sys->C1();
    for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
      for (std::int64_t id : fam.level(lv)) {
        const FamilyNode& n = fam.node(id);
        CHECK(is_admissible(n.cyl, fam.admissibility()) != Admissibility::not_admissible);
        CHECK(fam.children_of(id).size() <= static_cast<std::size_t>(C1));
        for (std::int64_t kid : fam.children_of(id)) {
          CHECK(fam.node(kid).parent == id);
          // nesting: child cylinder inside the parent cylinder
          const Cylinder& pc = n.cyl;
          const Cylinder& kc = fam.node(kid).cyl;
          CHECK(pc.vertical().lo <= kc.vertical().lo + 1e-12);
          CHECK(kc.vertical().hi <= pc.vertical().hi + 1e-12);
          auto rel = F.sys->relation(pc.base.cube, kc.base.cube);
          CHECK((rel == CubeSystem::Relation::equal ||
                 rel == CubeSystem::Relation::first_contains_second));
          CHECK(fam.node_measure(id) <= C1 * fam.node_measure(kid) * (1 + 1e-12));
          CHECK(fam.node_measure(id) >=
                (1.0 + 1.0 / C1) * fam.node_measure(kid) * (1 - 1e-12));
        }
      }
    }
  }
}

TEST_CASE("levels partition the window: locate is unique and nested") {
  FamFixture F(1, Vec{0.8});
  FamilyWindow w{40.0, Interval{-1.7, 1.7}};
  DyadicFamily fam = F.fam(3, 5, w);
  std::mt19937_64 rng = make_rng(23, 0);

  for (int i = 0; i < 4000; ++i) {
    GroupPoint x = sample_window_point(fam, rng);
    std::int64_t prev = -1;
    for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
      std::int64_t id = fam.locate(x, lv);
      // direct scan: no other cylinder of this level contains x
      int hits = 0;
      for (std::int64_t other : fam.level(lv))
        if (cylinder_contains(fam.node(other).cyl, F.Z, x)) ++hits;
      CHECK(hits == 1);
      if (prev >= 0) {
        CHECK(fam.node(id).parent == prev);
        // measures grow by at least the sibling factor up the chain
        CHECK(fam.node_measure(prev) >=
              (1.0 + 1.0 / F.sys->C1()) * fam.node_measure(id) * (1 - 1e-12));
      }
      prev = id;
    }
  }
}

TEST_CASE("measures blow up along the virtual ascent") {
  FamFixture F(1, Vec{0.3});
  FamilyWindow w{40.0, Interval{-1.5, 1.5}};
  DyadicFamily fam = F.fam(2, 0, w);
  std::int64_t root = fam.level(fam.level_min()).front();
  const Cylinder& rc = fam.node(root).cyl;
  double prev = cylinder_measure(rc, F.mu);
  for (int h = 1; h <= 25; ++h) {
    double m = cylinder_measure(fam.virtual_ancestor(rc, h), F.mu);
    CHECK(m >= (1.0 + 1.0 / F.sys->C1()) * prev * (1 - 1e-12));
    prev = m;
  }
  CHECK(prev > 1e6 * cylinder_measure(rc, F.mu));
}

TEST_CASE("window validation fails loudly") {
  FamFixture F(1, Vec{0.0});
  // the chain at depth 0 covers (-2, 2) vertically; asking for more is a
  // resource error
  CHECK_THROWS_AS(F.fam(0, 1, FamilyWindow{40.0, Interval{-3.0, 3.0}}), Error);
  try {
    F.fam(0, 1, FamilyWindow{40.0, Interval{-3.0, 3.0}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::resource);
  }
}

TEST_CASE("dump is deterministic and carries roles") {
  FamFixture F(1, Vec{0.5});
  FamilyWindow w{30.0, Interval{-1.6, 1.6}};
  auto path1 = std::filesystem::temp_directory_path() / "czflow_fam_a.jsonl";
  auto path2 = std::filesystem::temp_directory_path() / "czflow_fam_b.jsonl";
  F.fam(3, 3, w).dump_jsonl(path1.string());
  F.fam(3, 3, w).dump_jsonl(path2.string());
  std::string a = file_contents(path1.string()), b = file_contents(path2.string());
  CHECK(!a.empty());
  CHECK(a == b);  // bit-for-bit reproducible
  CHECK(a.find("\"role\":\"S\"") != std::string::npos);
  CHECK(a.find("\"admissible\":\"large\"") != std::string::npos);
  std::filesystem::remove(path1);
  std::filesystem::remove(path2);

  DyadicFamily fam = F.fam(3, 3, w);
  std::string summary = fam.summary_json();
  CHECK(summary.find("\"chain\"") != std::string::npos);
  CHECK(summary.find("parent_measure_ratio_histogram") != std::string::npos);
  CHECK(fam.coverage_estimate(2048, 5) > 0.999);  // null boundaries only
}

TEST_CASE("family over a lifted power density") {
  GroupSpec spec = GroupSpec::abelian(1);
  VerticalField Z = VerticalField::make(spec, Vec{0.5});
  FlowMeasure mu = FlowMeasure::power(Z, 1.0);
  CubeSystemParams p;
  p.window_radius = 8.0;
  p.gen_min = -8;
  p.gen_max = 4;
  AbelianDyadicSystem sys(mu, p);
  AdmissibilityParams adm;
  Cylinder root = default_root(&sys, adm, std::exp(2.0));
  DyadicFamily fam(Z, mu, &sys, adm, root, 1, 3, FamilyWindow{6.0, Interval{-1.5, 1.5}});
  double C1 = sys.C1();
  for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv)
    for (std::int64_t id : fam.level(lv)) {
      if (fam.node(id).parent < 0) continue;
      CHECK(fam.node_measure(fam.node(id).parent) <=
            C1 * fam.node_measure(id) * (1 + 1e-9));
    }
  // the exact tree integrals hold for any flow measure
  std::mt19937_64 rng = make_rng(29, 0);
  SimpleFunction f = random_simple_function(fam, 6, rng);
  CHECK(f.norm1() == doctest::Approx(f.norm1_alt()).epsilon(1e-12));
  double cstar = C1 + std::sqrt(2.0);
  double C4 = 2.0 * estimate_doubling(mu, cstar / sys.inner_c(), 6.0, 200, 29).constant;
  DecompositionReport rep = cz_decompose(f, std::max(1e-6, f.sup_abs() / 4.0), C4, 512, 29);
  CHECK(rep.ok_good);
  CHECK(rep.ok_zero_mean);
  CHECK(rep.ok_bad_norm);
  CHECK(rep.ok_stopping);
}

TEST_CASE("deep window: strip descendants cover the upper band") {
  FamFixture F(1, Vec{0.5}, 5000.0);
  // the 13th chain element spans (-2, 6); a window reaching past t = 2 is
  // covered by strip material rather than chain siblings
  FamilyWindow w{30.0, Interval{-1.5, 5.5}};
  DyadicFamily fam = F.fam(14, 1, w);
  std::mt19937_64 rng = make_rng(23, 1);
  int upper = 0;
  for (int i = 0; i < 800; ++i) {
    GroupPoint x = sample_window_point(fam, rng);
    double t = flow_coordinates(F.Z, x).second;
    for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
      std::int64_t id = fam.locate(x, lv);
      CHECK(cylinder_contains(fam.node(id).cyl, F.Z, x));
      if (t > 2.1 && fam.node(id).role != NodeRole::chain_sibling) ++upper;
    }
  }
  CHECK(upper > 0);  // the S~ material is actually used
}
