#pragma once

#include <memory>
#include <vector>

#include "cubes.hpp"

namespace czflow {

/// Base set E c N of a cylinder.  Cubes keep set algebra exact; balls and
/// boxes serve enlargements and translate images; `image` wraps another base
/// through n -> left * psi_s(n), with exact membership via the inverse map.
struct BaseSet {
  enum class Kind { cube, ball, box, image };

  Kind kind = Kind::cube;
  const CubeSystem* system = nullptr;
  CubeRef cube;
  Vec center;
  double radius = 0;
  Vec lo, hi;
  double psi_param = 0;
  Vec left;
  std::shared_ptr<const BaseSet> inner;

  static BaseSet make_cube(const CubeSystem* sys, CubeRef q);
  static BaseSet make_ball(const Vec& center, double radius);
  static BaseSet make_box(const Vec& lo, const Vec& hi);
  static BaseSet make_image(const BaseSet& inner, double psi_param, const Vec& left);
};

bool base_contains(const VerticalField& Z, const BaseSet& base, const Vec& n);
double base_measure(const BaseSet& base, const FlowMeasure& mu);
Vec base_sample(const BaseSet& base, const VerticalField& Z, std::mt19937_64& rng);

/// P_{r,E}(a) = {(n,1) exp(tZ) : n in E, t in U_r(a)}, U_r(a) = (log(a/r), log(ar)).
struct Cylinder {
  double r = std::exp(1.0);
  double a = 1.0;
  BaseSet base;

  Interval vertical() const { return Interval{std::log(a / r), std::log(a * r)}; }
  int base_gen() const;  // generation of the cube base; config error otherwise
};

enum class Admissibility { large, small, not_admissible };

struct AdmissibilityParams {
  double delta = 0.5;
  double gamma = 5.0;
  double lambda = 2.1 * std::exp(3.0);

  void validate() const {
    if (!(gamma >= 5.0)) fail(ErrorCode::config, "admissibility requires gamma >= 5");
    if (!(lambda * delta > std::exp(3.0)))
      fail(ErrorCode::config, "admissibility requires lambda > e^3/delta");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::config, "delta must lie in (0,1)");
  }
};

Admissibility is_admissible(const Cylinder& P, const AdmissibilityParams& params);

bool cylinder_contains(const Cylinder& P, const VerticalField& Z, const GroupPoint& x);

Cylinder translate_right(const Cylinder& P, double s);
Cylinder translate_left_exp(const Cylinder& P, const VerticalField& Z, double s);
Cylinder translate_left_base(const Cylinder& P, const Vec& m);

/// Exact for cube bases from one system: base intersection is decided by the
/// cube tree, the vertical part by interval overlap.
bool intersects(const Cylinder& P1, const Cylinder& P2);

/// mu(P_{r,E}(a)) = 2 mu_N(E) log r.
double cylinder_measure(const Cylinder& P, const FlowMeasure& mu);

/// Sons: the vertical halves {P_{sqrt r,Q}(a/sqrt r), P_{sqrt r,Q}(a sqrt r)}
/// when both are admissible, the base split over the cube children otherwise.
std::vector<Cylinder> sons(const Cylinder& P, const AdmissibilityParams& params);

struct ParentSet {
  Cylinder down;     // P_{r^3,Q}(a/r^2)
  Cylinder up;       // P_{r^2,Q}(ar)
  Cylinder lateral;  // P_{r,p_N(Q)}(a)
};

/// Parents are defined only along the large ascent; small-admissible input
/// is a config error.
ParentSet parents(const Cylinder& P, const AdmissibilityParams& params);

/// p_down(P) \ P and p_up(P) \ P, both cylinders again.
Cylinder down_strip(const Cylinder& P);  // P_{r^2,Q}(a/r^3)
Cylinder up_strip(const Cylinder& P);    // P_{r,Q}(a r^2)

Cylinder envelope(const Cylinder& P, double C);

/// Enclosing cylinder for the d_Z-enlargement {x : d_Z(x,P) < log r}:
/// P_{r^2, B(n_Q, (C1+sqrt 2) delta^k)}(a).
Cylinder enlargement_star(const Cylinder& P);

GroupPoint anchor_point(const Cylinder& P, const VerticalField& Z);
GroupPoint cylinder_sample(const Cylinder& P, const VerticalField& Z, std::mt19937_64& rng);

struct BallCheckReport {
  bool ok = false;
  double max_ratio = 0;  // sup of d_Z(x, anchor) / log r over the samples
  int samples = 0;
};

/// Checks d_Z(x, (n_Q,1) exp(log a Z)) <= C3 log r on sampled x in P; the
/// returned max ratio is the empirical certificate.
BallCheckReport cylinder_in_ball_check(const Cylinder& P, const VerticalField& Z, double C3,
                                       int samples, std::uint64_t seed = 1);

}  // namespace czflow
