#pragma once

#include <cstdint>

#include "group.hpp"

namespace czflow {

enum class DensityKind {
  uniform,  // phi == 1, i.e. the right Haar measure
  power,    // lifted from psi(n) = (1+|n|^2)^{s/2} on abelian N
};

/// A flow measure on G: density invariant under right multiplication by
/// exp(tZ), determined by its trace mu_N on N.
struct FlowMeasure {
  VerticalField Z;
  DensityKind kind = DensityKind::uniform;
  double power_s = 0.0;

  bool is_uniform() const { return kind == DensityKind::uniform; }

  static FlowMeasure haar(const VerticalField& Z) { return FlowMeasure{Z, DensityKind::uniform, 0.0}; }
  static FlowMeasure power(const VerticalField& Z, double s);
};

struct DoublingData {
  double ratio = 2.0;      // the C in mu(B(x,Cr)) <= D mu(B(x,r))
  double constant = 1.0;   // D(mu_N, C)
  double window = 0.0;
  bool exact = false;      // true when D is a closed form, not a sampled sup
};

/// Density of the measure at a point of G; exact flow invariance by construction.
double density_at(const FlowMeasure& mu, const GroupPoint& x);

/// psi(n) = density at (n, 1).
double base_density(const FlowMeasure& mu, const Vec& n);

/// mu_N of the d_N-ball B(center, radius).  Closed form for uniform densities
/// (the Koranyi-ball constant is computed once by quadrature); adaptive
/// quadrature with relative tolerance rel_tol otherwise.
double mu_ball(const FlowMeasure& mu, const Vec& center, double radius, double rel_tol = 1e-6);

/// mu_N of an axis box [lo,hi] (abelian only).
double mu_box(const FlowMeasure& mu, const Vec& lo, const Vec& hi, double rel_tol = 1e-8);

/// Haar volume of the unit Koranyi ball, computed once by radial quadrature.
double koranyi_unit_ball_volume();

/// Empirical doubling constant: sup over sampled (x, r) in the window of
/// mu_N(B(x, C r)) / mu_N(B(x, r)).  Exact (C^M) for uniform densities.
DoublingData estimate_doubling(const FlowMeasure& mu, double C, double window, int samples,
                               std::uint64_t seed = 1);

}  // namespace czflow
