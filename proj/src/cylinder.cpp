#include "cylinder.hpp"

namespace czflow {

BaseSet BaseSet::make_cube(const CubeSystem* sys, CubeRef q) {
  BaseSet b;
  b.kind = Kind::cube;
  b.system = sys;
  b.cube = q;
  return b;
}

BaseSet BaseSet::make_ball(const Vec& center, double radius) {
  if (radius <= 0) fail(ErrorCode::config, "ball base needs positive radius");
  BaseSet b;
  b.kind = Kind::ball;
  b.center = center;
  b.radius = radius;
  return b;
}

BaseSet BaseSet::make_box(const Vec& lo, const Vec& hi) {
  BaseSet b;
  b.kind = Kind::box;
  b.lo = lo;
  b.hi = hi;
  return b;
}

BaseSet BaseSet::make_image(const BaseSet& inner, double psi_param, const Vec& left) {
  BaseSet b;
  b.kind = Kind::image;
  b.psi_param = psi_param;
  b.left = left;
  b.inner = std::make_shared<BaseSet>(inner);
  return b;
}

bool base_contains(const VerticalField& Z, const BaseSet& base, const Vec& n) {
  const GroupSpec& spec = Z.spec;
  switch (base.kind) {
    case BaseSet::Kind::cube:
      return base.system->contains(base.cube, n);
    case BaseSet::Kind::ball:
      return dist_base(spec, base.center, n) < base.radius;
    case BaseSet::Kind::box:
      for (int d = 0; d < n.size(); ++d)
        if (n[d] < base.lo[d] || n[d] >= base.hi[d]) return false;
      return true;
    case BaseSet::Kind::image: {
      // n in left * psi_s(E)  <=>  psi_{-s}(left^{-1} n) in E
      Vec w = psi_t(Z, -base.psi_param, base_mul(spec, base_inv(spec, base.left), n));
      return base_contains(Z, *base.inner, w);
    }
  }
  return false;
}

double base_measure(const BaseSet& base, const FlowMeasure& mu) {
  switch (base.kind) {
    case BaseSet::Kind::cube:
      return base.system->mu_base(base.cube);
    case BaseSet::Kind::ball:
      return mu_ball(mu, base.center, base.radius);
    case BaseSet::Kind::box:
      return mu_box(mu, base.lo, base.hi);
    case BaseSet::Kind::image: {
      if (!mu.is_uniform())
        fail(ErrorCode::config, "image-base measure is only exact for the uniform density");
      // psi_s = conjugation o D_{e^s}: Jacobian e^{Ms}; left translation preserves Haar
      double M = mu.Z.spec.homogeneous_dim();
      return std::exp(M * base.psi_param) * base_measure(*base.inner, mu);
    }
  }
  fail(ErrorCode::internal, "unreachable");
}

Vec base_sample(const BaseSet& base, const VerticalField& Z, std::mt19937_64& rng) {
  const GroupSpec& spec = Z.spec;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (base.kind) {
    case BaseSet::Kind::cube:
      return base.system->sample_point(base.cube, rng);
    case BaseSet::Kind::ball: {
      for (int tries = 0; tries < 10000; ++tries) {
        Vec p(spec.base_dim());
        if (spec.kind == BaseKind::abelian) {
          for (int d = 0; d < spec.m; ++d) p[d] = base.radius * (2.0 * u01(rng) - 1.0);
        } else {
          p[0] = 2.0 * base.radius * (2.0 * u01(rng) - 1.0);
          p[1] = 2.0 * base.radius * (2.0 * u01(rng) - 1.0);
          p[2] = 4.0 * base.radius * base.radius * (2.0 * u01(rng) - 1.0);
        }
        if (base_norm(spec, p) < base.radius) return base_mul(spec, base.center, p);
      }
      fail(ErrorCode::internal, "ball sampling failed");
    }
    case BaseSet::Kind::box: {
      Vec p(base.lo.size());
      for (int d = 0; d < p.size(); ++d) p[d] = base.lo[d] + u01(rng) * (base.hi[d] - base.lo[d]);
      return p;
    }
    case BaseSet::Kind::image: {
      // psi_s has constant Jacobian, so the pushforward of uniform is uniform
      Vec p = base_sample(*base.inner, Z, rng);
      return base_mul(spec, base.left, psi_t(Z, base.psi_param, p));
    }
  }
  fail(ErrorCode::internal, "unreachable");
}

int Cylinder::base_gen() const {
  if (base.kind != BaseSet::Kind::cube) fail(ErrorCode::config, "cylinder base is not a cube");
  return base.cube.gen;
}

Admissibility is_admissible(const Cylinder& P, const AdmissibilityParams& params) {
  params.validate();
  if (!(P.r > 1.0)) fail(ErrorCode::config, "cylinder radius must exceed 1");
  double dk = std::pow(params.delta, P.base_gen());
  const double e = std::exp(1.0);
  if (P.r > e) {
    double lo = P.a * P.r * P.r;
    double hi = params.lambda * P.a * std::pow(P.r, params.gamma);
    if (lo <= dk && dk <= hi) return Admissibility::large;
    return Admissibility::not_admissible;
  }
  double lo = P.a * e * e * std::log(P.r);
  double hi = params.lambda * lo;
  if (lo <= dk && dk <= hi) return Admissibility::small;
  return Admissibility::not_admissible;
}

bool cylinder_contains(const Cylinder& P, const VerticalField& Z, const GroupPoint& x) {
  auto [n, t] = flow_coordinates(Z, x);
  if (!P.vertical().contains_open(t)) return false;
  return base_contains(Z, P.base, n);
}

Cylinder translate_right(const Cylinder& P, double s) {
  return Cylinder{P.r, P.a * std::exp(s), P.base};
}

Cylinder translate_left_exp(const Cylinder& P, const VerticalField& Z, double s) {
  BaseSet img = BaseSet::make_image(P.base, s, Vec(Z.spec.base_dim()));
  return Cylinder{P.r, P.a * std::exp(s), img};
}

Cylinder translate_left_base(const Cylinder& P, const Vec& m) {
  BaseSet img = BaseSet::make_image(P.base, 0.0, m);
  return Cylinder{P.r, P.a, img};
}

bool intersects(const Cylinder& P1, const Cylinder& P2) {
  if (P1.base.kind != BaseSet::Kind::cube || P2.base.kind != BaseSet::Kind::cube ||
      P1.base.system != P2.base.system)
    fail(ErrorCode::config, "intersects: bases must be cubes of one system");
  if (intersect(P1.vertical(), P2.vertical()).empty()) return false;
  auto rel = P1.base.system->relation(P1.base.cube, P2.base.cube);
  return rel != CubeSystem::Relation::disjoint;
}

double cylinder_measure(const Cylinder& P, const FlowMeasure& mu) {
  return 2.0 * base_measure(P.base, mu) * std::log(P.r);
}

std::vector<Cylinder> sons(const Cylinder& P, const AdmissibilityParams& params) {
  if (is_admissible(P, params) == Admissibility::not_admissible)
    fail(ErrorCode::config, "sons: cylinder is not admissible");
  double sr = std::sqrt(P.r);
  Cylinder below{sr, P.a / sr, P.base};
  Cylinder above{sr, P.a * sr, P.base};
  if (is_admissible(below, params) != Admissibility::not_admissible &&
      is_admissible(above, params) != Admissibility::not_admissible)
    return {below, above};
  std::vector<Cylinder> out;
  for (const CubeRef& q : P.base.system->children(P.base.cube))
    out.push_back(Cylinder{P.r, P.a, BaseSet::make_cube(P.base.system, q)});
  return out;
}

ParentSet parents(const Cylinder& P, const AdmissibilityParams& params) {
  if (is_admissible(P, params) != Admissibility::large)
    fail(ErrorCode::config, "parents: cylinder must be large admissible");
  const CubeSystem* sys = P.base.system;
  CubeRef up_cube = sys->parent(P.base.cube);
  return ParentSet{
      Cylinder{P.r * P.r * P.r, P.a / (P.r * P.r), P.base},
      Cylinder{P.r * P.r, P.a * P.r, P.base},
      Cylinder{P.r, P.a, BaseSet::make_cube(sys, up_cube)},
  };
}

Cylinder down_strip(const Cylinder& P) {
  return Cylinder{P.r * P.r, P.a / (P.r * P.r * P.r), P.base};
}

Cylinder up_strip(const Cylinder& P) { return Cylinder{P.r, P.a * P.r * P.r, P.base}; }

Cylinder envelope(const Cylinder& P, double C) {
  if (C < 1.0) fail(ErrorCode::config, "envelope exponent must be >= 1");
  return Cylinder{std::pow(P.r, C), P.a, P.base};
}

Cylinder enlargement_star(const Cylinder& P) {
  const CubeSystem* sys = P.base.system;
  double dk = sys->scale(P.base_gen());
  double cstar = sys->C1() + std::sqrt(2.0);
  Vec nq = sys->center(P.base.cube);
  return Cylinder{P.r * P.r, P.a, BaseSet::make_ball(nq, cstar * dk)};
}

GroupPoint anchor_point(const Cylinder& P, const VerticalField& Z) {
  Vec nq;
  if (P.base.kind == BaseSet::Kind::cube)
    nq = P.base.system->center(P.base.cube);
  else if (P.base.kind == BaseSet::Kind::ball)
    nq = P.base.center;
  else
    fail(ErrorCode::config, "anchor_point: base has no designated center");
  return group_mul(Z.spec, GroupPoint{nq, 1.0}, exp_tZ(Z, std::log(P.a)));
}

GroupPoint cylinder_sample(const Cylinder& P, const VerticalField& Z, std::mt19937_64& rng) {
  Vec n = base_sample(P.base, Z, rng);
  Interval U = P.vertical();
  std::uniform_real_distribution<double> ut(U.lo, U.hi);
  return group_mul(Z.spec, GroupPoint{n, 1.0}, exp_tZ(Z, ut(rng)));
}

BallCheckReport cylinder_in_ball_check(const Cylinder& P, const VerticalField& Z, double C3,
                                       int samples, std::uint64_t seed) {
  GroupPoint anchor = anchor_point(P, Z);
  double logr = std::log(P.r);
  std::mt19937_64 rng = make_rng(seed, 0xba11);
  BallCheckReport rep;
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    GroupPoint x = cylinder_sample(P, Z, rng);
    rep.max_ratio = std::max(rep.max_ratio, dist_Z(Z, x, anchor) / logr);
  }
  rep.ok = rep.max_ratio <= C3;
  return rep;
}

}  // namespace czflow
