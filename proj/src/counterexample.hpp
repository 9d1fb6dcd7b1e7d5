#pragma once

#include "cylinder.hpp"

namespace czflow {

/// Q(L,M) = [-L,L]^2 x [-M,M] in H^1 coordinates; Q(L) = Q(L, L^2).
struct HeisenbergBox {
  double L = 1.0;
  double M = 1.0;

  static HeisenbergBox square(double L) { return HeisenbergBox{L, L * L}; }
  bool contains(const Vec& n) const {
    return std::abs(n[0]) <= L && std::abs(n[1]) <= L && std::abs(n[2]) <= M;
  }
};

/// The inner box constant: Q(2 c~ L) c B(1, L) c Q(2L) with c~^4 = 1/20.
inline double box_inner_c() { return std::pow(1.0 / 20.0, 0.25); }

/// Bounding box of the image of a box under psi_t for the flow with
/// beta = (1, 0): psi_t(Q(L,M)) fills Q(e^t L, e^{2t} M + e^t |1 - e^t| L) in
/// the q, p, tau extents.  The image itself is the sheared slab
/// {|q|,|p| <= e^t L, |tau - (e^t - 1) q| <= e^{2t} M}.
HeisenbergBox psi_box_image(double t, const HeisenbergBox& box);

/// Largest certified S with B(1, S) c psi_t(B(1, R)).  At scale c~ e^t R the
/// shear term |e^t - 1| of the slab eats into the radius, so
/// S = min(c~ e^t R, sqrt(sh^2 + (2 c~ e^t R)^2) - sh), sh = |e^t - 1|;
/// for moderate e^t R this reduces to the linear radius c~ e^t R.
double psi_ball_core_radius(double t, double R);

struct SampleReport {
  bool ok = false;
  double worst = 0.0;  // max observed distance / allowance
  int samples = 0;
};

/// Samples P_{e^{R/(2||Z||)}, B_N(1_N, R/2)}(1) and checks d_G(x, 1_G) < R.
SampleReport verify_small_ball_in_cylinder(const VerticalField& Z, double R, int samples,
                                           std::uint64_t seed = 1);

/// Samples the thickened cylinder P_{r e^{R/(2||Z||)}, n_Q B(1_N, rho)}(a),
/// rho = (c~/2)(a/r) R (the certified core of Psi_{r,a}(B(1, R/2))), and
/// checks d_G(x, P) < R through the constructive factorization x = x1 x2 with
/// x1 in P and x2 in the small-ball cylinder; worst is max d_G(x, x1)/R.
SampleReport verify_thickened_cylinder(const Cylinder& P, const VerticalField& Z, double R,
                                       int samples, std::uint64_t seed = 1);

/// One step of the diverging sequence: every scale-indexed quantity is carried
/// in natural-log space (direct doubles overflow past l = 2).
struct CounterexampleRow {
  int l = 0;
  double strip_exponent = 0;  // log_{r0} of the strip radius = 4 * 6^l
  double log_r0_r = 0;        // log_{r0} r(P^l), normalized into [1, 2]
  double log_a_low = 0, log_a_high = 0;          // ln bounds for the anchor a_l
  double log_delta_low = 0, log_delta_high = 0;  // ln bounds for delta^{k(l)}
  double log_diam_lb = 0;     // lower bound for diam P^l (itself a log-scale quantity)
  double log_ratio_lb = 0;    // ln of the measure-ratio lower bound at radius K
  // the individual links of the diameter chain, coarsest bound last
  double link_full = 0, link_tau = 0, link_vertical = 0, link_final = 0;
};

struct CounterexampleParams {
  double r0 = std::exp(2.0);
  double K = 1.0;
  double gamma = 5.0;
  double lambda = 2.1 * std::exp(3.0);
  double cube_c = 0.5;   // inner eccentricity constant of the cube system
  double cube_C1 = 3.0;  // outer eccentricity constant
};

std::vector<CounterexampleRow> counterexample_table(const CounterexampleParams& prm, int l_max);

std::string counterexample_csv(const std::vector<CounterexampleRow>& rows);

struct EquivalenceReport {
  double D = 2.0;  // max{2|beta|^2 + 1, 2}
  bool ok = false;
  double worst_zd_over_dg = 0;  // max cosh d_Z / (D cosh d_G), must stay <= 1
  double worst_dg_over_zd = 0;
  double ratio_sup = 0, ratio_inf = 0;  // d_G/d_Z over sampled annuli
  double phi_min = 0, phi_max = 0;      // range of (1+|v|^2)/(1+|v+beta|^2)
};

/// Two-sided cosh-level comparison of d_Z and d_G on the abelian group.
EquivalenceReport abelian_equivalence_certificate(const VerticalField& Z, int samples,
                                                  std::uint64_t seed = 1);

}  // namespace czflow
