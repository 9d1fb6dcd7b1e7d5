#include "group.hpp"

namespace czflow {

namespace {

void check_dim(const GroupSpec& spec, const Vec& v, const char* who) {
  if (v.size() != spec.base_dim()) fail(ErrorCode::config, std::string(who) + ": dimension mismatch");
}

// deterministic total order; distances canonicalize their arguments through
// it so that symmetry holds bit for bit
bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

Vec base_mul(const GroupSpec& spec, const Vec& x, const Vec& y) {
  check_dim(spec, x, "base_mul");
  check_dim(spec, y, "base_mul");
  if (spec.kind == BaseKind::abelian) return x + y;
  // (q,p,tau)(q',p',tau') = (q+q', p+p', tau+tau' - (qp'-pq')/2)
  Vec r(3);
  r[0] = x[0] + y[0];
  r[1] = x[1] + y[1];
  r[2] = x[2] + y[2] - 0.5 * (x[0] * y[1] - x[1] * y[0]);
  return r;
}

Vec base_inv(const GroupSpec& spec, const Vec& x) {
  check_dim(spec, x, "base_inv");
  return -1.0 * x;  // valid for both: H^1 inverse is (-q,-p,-tau)
}

Vec dilate(const GroupSpec& spec, double a, const Vec& n) {
  check_dim(spec, n, "dilate");
  if (a <= 0) fail(ErrorCode::config, "dilate: a must be positive");
  if (spec.kind == BaseKind::abelian) return a * n;
  Vec r(3);
  r[0] = a * n[0];
  r[1] = a * n[1];
  r[2] = a * a * n[2];
  return r;
}

double base_norm(const GroupSpec& spec, const Vec& n) {
  check_dim(spec, n, "base_norm");
  if (spec.kind == BaseKind::abelian) return euclid_norm(n);
  // Koranyi norm: ||(q,p,tau)||^4 = (q^2+p^2)^2/16 + tau^2
  double s = n[0] * n[0] + n[1] * n[1];
  return std::pow(s * s / 16.0 + n[2] * n[2], 0.25);
}

double dist_base(const GroupSpec& spec, const Vec& n1, const Vec& n2) {
  const Vec& lo = lex_less(n2, n1) ? n2 : n1;
  const Vec& hi = lex_less(n2, n1) ? n1 : n2;
  return base_norm(spec, base_mul(spec, base_inv(spec, lo), hi));
}

GroupPoint identity(const GroupSpec& spec) { return GroupPoint{Vec(spec.base_dim()), 1.0}; }

GroupPoint group_mul(const GroupSpec& spec, const GroupPoint& x, const GroupPoint& y) {
  if (x.a <= 0 || y.a <= 0) fail(ErrorCode::config, "group_mul: vertical coordinate must be positive");
  return GroupPoint{base_mul(spec, x.n, dilate(spec, x.a, y.n)), x.a * y.a};
}

GroupPoint group_inv(const GroupSpec& spec, const GroupPoint& x) {
  if (x.a <= 0) fail(ErrorCode::config, "group_inv: vertical coordinate must be positive");
  return GroupPoint{dilate(spec, 1.0 / x.a, base_inv(spec, x.n)), 1.0 / x.a};
}

Vec flow_n(const VerticalField& Z, double t) {
  double u = std::expm1(t);  // e^t - 1
  if (Z.spec.kind == BaseKind::abelian) return u * Z.beta;
  // With Z = X_0 + b0 X_alpha + b1 X_{alpha+beta}: X_alpha is the p-direction
  // and X_{alpha+beta} the q-direction; the central part stays 0 along the flow.
  Vec r(3);
  r[0] = u * Z.beta[1];
  r[1] = u * Z.beta[0];
  r[2] = 0.0;
  return r;
}

GroupPoint exp_tZ(const VerticalField& Z, double t) { return GroupPoint{flow_n(Z, t), std::exp(t)}; }

std::pair<Vec, double> flow_coordinates(const VerticalField& Z, const GroupPoint& x) {
  if (x.a <= 0) fail(ErrorCode::config, "flow_coordinates: vertical coordinate must be positive");
  double t = std::log(x.a);
  Vec n = base_mul(Z.spec, x.n, base_inv(Z.spec, flow_n(Z, t)));
  return {n, t};
}

Vec psi_t(const VerticalField& Z, double t, const Vec& m) {
  const GroupSpec& spec = Z.spec;
  Vec nt = flow_n(Z, t);
  return base_mul(spec, base_mul(spec, nt, dilate(spec, std::exp(t), m)), base_inv(spec, nt));
}

double dist_G(const GroupSpec& spec, const GroupPoint& x, const GroupPoint& y) {
  if (x.a <= 0 || y.a <= 0) fail(ErrorCode::config, "dist_G: vertical coordinate must be positive");
  bool swap = y.a < x.a || (y.a == x.a && lex_less(y.n, x.n));
  const GroupPoint& p = swap ? y : x;
  const GroupPoint& q = swap ? x : y;
  double dn = dist_base(spec, p.n, q.n);
  double u = std::cosh(std::log(p.a / q.a)) + dn * dn / (2.0 * p.a * q.a);
  return acosh_stable(u);
}

double dist_Z(const VerticalField& Z, const GroupPoint& x, const GroupPoint& y) {
  auto [nx, tx] = flow_coordinates(Z, x);
  auto [ny, ty] = flow_coordinates(Z, y);
  return dist_G(Z.spec, GroupPoint{nx, x.a}, GroupPoint{ny, y.a});
}

}  // namespace czflow
