#pragma once

#include <utility>

#include "types.hpp"

namespace czflow {

enum class BaseKind { abelian, heisenberg };

/// The ambient group G = N x| R_+ for one of the two concrete base groups:
/// N = R^m (abelian) or N = H^1 in coordinates (q, p, tau).
struct GroupSpec {
  BaseKind kind = BaseKind::abelian;
  int m = 1;  // abelian coordinate count; ignored for H^1

  int base_dim() const { return kind == BaseKind::abelian ? m : 3; }
  int homogeneous_dim() const { return kind == BaseKind::abelian ? m : 4; }

  static GroupSpec abelian(int m) {
    if (m < 1 || m > kMaxBaseDim) fail(ErrorCode::config, "abelian dimension out of range");
    return GroupSpec{BaseKind::abelian, m};
  }
  static GroupSpec heisenberg() { return GroupSpec{BaseKind::heisenberg, 3}; }

  friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
    return a.kind == b.kind && a.base_dim() == b.base_dim();
  }
};

struct GroupPoint {
  Vec n;
  double a = 1.0;
};

/// Left-invariant field Z = X_0 + sum_i beta_i X_{1,i}: vertical coefficient
/// fixed to 1, first-layer coefficients stored.  For H^1 the two entries are
/// the coefficients of X_alpha and X_{alpha+beta}.
struct VerticalField {
  GroupSpec spec;
  Vec beta;

  double norm() const { return std::sqrt(1.0 + norm2(beta)); }
  bool is_vertical() const { return norm2(beta) == 0.0; }

  static VerticalField make(const GroupSpec& spec, const Vec& beta) {
    int want = spec.kind == BaseKind::abelian ? spec.m : 2;
    if (beta.size() != want) fail(ErrorCode::config, "beta length does not match group");
    return VerticalField{spec, beta};
  }
  static VerticalField vertical(const GroupSpec& spec) {
    return VerticalField{spec, Vec(spec.kind == BaseKind::abelian ? spec.m : 2)};
  }
};

// --- base group N ---

Vec base_mul(const GroupSpec& spec, const Vec& x, const Vec& y);
Vec base_inv(const GroupSpec& spec, const Vec& x);
Vec dilate(const GroupSpec& spec, double a, const Vec& n);

/// d_N: Euclidean for R^m, left-invariant Koranyi for H^1.
double base_norm(const GroupSpec& spec, const Vec& n);
double dist_base(const GroupSpec& spec, const Vec& n1, const Vec& n2);

// --- G = N x| A ---

GroupPoint identity(const GroupSpec& spec);
GroupPoint group_mul(const GroupSpec& spec, const GroupPoint& x, const GroupPoint& y);
GroupPoint group_inv(const GroupSpec& spec, const GroupPoint& x);

/// n(t) with exp(tZ) = (n(t), e^t); closed form for both base groups.
Vec flow_n(const VerticalField& Z, double t);
GroupPoint exp_tZ(const VerticalField& Z, double t);

/// Inverts x = (n,1) exp(tZ): returns (n, t) with t = log a.
std::pair<Vec, double> flow_coordinates(const VerticalField& Z, const GroupPoint& x);

/// psi_t(m) = n(t) D_{e^t}(m) n(t)^{-1}, an automorphism of N.
Vec psi_t(const VerticalField& Z, double t, const Vec& m);

double dist_G(const GroupSpec& spec, const GroupPoint& x, const GroupPoint& y);
double dist_Z(const VerticalField& Z, const GroupPoint& x, const GroupPoint& y);

}  // namespace czflow
