#include "measure.hpp"

#include <functional>

namespace czflow {

namespace {

// adaptive Simpson with absolute/relative stopping
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double scale = std::max(std::abs(whole), 1e-300);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol * scale, 40);
}

double unit_ball_volume(int m) {
  switch (m) {
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    case 4: return M_PI * M_PI / 2.0;
    default: fail(ErrorCode::config, "unsupported dimension");
  }
}

// integral of psi over the sphere of radius rho about c, times surface element
double power_shell(const FlowMeasure& mu, const Vec& c, double rho, int m) {
  auto psi = [&](const Vec& n) { return base_density(mu, n); };
  if (m == 1) {
    Vec a(1), b(1);
    a[0] = c[0] - rho;
    b[0] = c[0] + rho;
    return psi(a) + psi(b);
  }
  if (m == 2) {
    const int K = 64;  // periodic trapezoid; spectrally accurate for smooth psi
    double s = 0;
    for (int i = 0; i < K; ++i) {
      double th = 2.0 * M_PI * i / K;
      Vec p(2);
      p[0] = c[0] + rho * std::cos(th);
      p[1] = c[1] + rho * std::sin(th);
      s += psi(p);
    }
    return rho * 2.0 * M_PI * s / K;
  }
  if (m == 3) {
    const int KU = 24, KP = 48;  // Gauss-Legendre would converge faster; this is plenty here
    double s = 0;
    for (int iu = 0; iu < KU; ++iu) {
      double u = -1.0 + (iu + 0.5) * 2.0 / KU;  // cos(theta) midpoints
      double st = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int ip = 0; ip < KP; ++ip) {
        double ph = 2.0 * M_PI * ip / KP;
        Vec p(3);
        p[0] = c[0] + rho * st * std::cos(ph);
        p[1] = c[1] + rho * st * std::sin(ph);
        p[2] = c[2] + rho * u;
        s += psi(p);
      }
    }
    return rho * rho * 4.0 * M_PI * s / (KU * KP);
  }
  fail(ErrorCode::config, "power-weight quadrature supports m <= 3");
}

double box_quad(const FlowMeasure& mu, const Vec& lo, const Vec& hi, Vec& point, int dim,
                double tol) {
  if (dim < 0) return base_density(mu, point);
  auto f = [&](double x) {
    point[dim] = x;
    return box_quad(mu, lo, hi, point, dim - 1, tol);
  };
  return integrate_1d(f, lo[dim], hi[dim], tol);
}

}  // namespace

FlowMeasure FlowMeasure::power(const VerticalField& Z, double s) {
  if (Z.spec.kind != BaseKind::abelian) fail(ErrorCode::config, "power weights: abelian base only");
  if (s <= -Z.spec.m) fail(ErrorCode::config, "power weight exponent must exceed -m");
  if (Z.spec.m > 3) fail(ErrorCode::config, "power-weight quadrature supports m <= 3");
  return FlowMeasure{Z, DensityKind::power, s};
}

double base_density(const FlowMeasure& mu, const Vec& n) {
  if (mu.is_uniform()) return 1.0;
  return std::pow(1.0 + norm2(n), 0.5 * mu.power_s);
}

double density_at(const FlowMeasure& mu, const GroupPoint& x) {
  if (mu.is_uniform()) return 1.0;
  return base_density(mu, flow_coordinates(mu.Z, x).first);
}

double koranyi_unit_ball_volume() {
  // section volume: 4*pi*int_0^2 s sqrt(1 - s^4/16) ds  (= 2*pi^2)
  static const double kappa = [] {
    auto f = [](double s) { return s * std::sqrt(std::max(0.0, 1.0 - s * s * s * s / 16.0)); };
    return 4.0 * M_PI * integrate_1d(f, 0.0, 2.0, 1e-12);
  }();
  return kappa;
}

double mu_ball(const FlowMeasure& mu, const Vec& center, double radius, double rel_tol) {
  const GroupSpec& spec = mu.Z.spec;
  if (center.size() != spec.base_dim()) fail(ErrorCode::config, "mu_ball: dimension mismatch");
  if (radius <= 0) fail(ErrorCode::config, "mu_ball: radius must be positive");
  if (spec.kind == BaseKind::heisenberg) {
    // uniform only; Haar volume scales with the 4th power of the radius
    return koranyi_unit_ball_volume() * std::pow(radius, 4);
  }
  int m = spec.m;
  if (mu.is_uniform()) return unit_ball_volume(m) * std::pow(radius, m);
  // power_shell carries the full surface element, so only the radial integral remains
  auto f = [&](double rho) { return rho == 0.0 ? 0.0 : power_shell(mu, center, rho, m); };
  return integrate_1d(f, 0.0, radius, rel_tol);
}

double mu_box(const FlowMeasure& mu, const Vec& lo, const Vec& hi, double rel_tol) {
  const GroupSpec& spec = mu.Z.spec;
  if (spec.kind != BaseKind::abelian) fail(ErrorCode::config, "mu_box: abelian base only");
  int m = spec.m;
  if (lo.size() != m || hi.size() != m) fail(ErrorCode::config, "mu_box: dimension mismatch");
  double vol = 1.0;
  for (int i = 0; i < m; ++i) {
    if (hi[i] < lo[i]) return 0.0;
    vol *= hi[i] - lo[i];
  }
  if (mu.is_uniform()) return vol;
  Vec point(m);
  return box_quad(mu, lo, hi, point, m - 1, rel_tol);
}

DoublingData estimate_doubling(const FlowMeasure& mu, double C, double window, int samples,
                               std::uint64_t seed) {
  if (C < 1.0) fail(ErrorCode::config, "doubling ratio must be >= 1");
  if (window <= 0) fail(ErrorCode::config, "degenerate doubling window");
  const GroupSpec& spec = mu.Z.spec;
  if (mu.is_uniform()) {
    // translation-invariant and exactly homogeneous of degree M
    return DoublingData{C, std::pow(C, spec.homogeneous_dim()), window, true};
  }
  if (samples < 1) fail(ErrorCode::config, "doubling estimate needs samples >= 1");
  std::mt19937_64 rng = make_rng(seed, 0xd0b1);
  std::uniform_real_distribution<double> unif(-window, window);
  std::uniform_real_distribution<double> logr(std::log(window * 1e-3), std::log(window));
  double sup = 1.0;
  for (int i = 0; i < samples; ++i) {
    Vec x(spec.m);
    for (int d = 0; d < spec.m; ++d) x[d] = unif(rng);
    double r = std::exp(logr(rng));
    double num = mu_ball(mu, x, C * r);
    double den = mu_ball(mu, x, r);
    if (den > 0) sup = std::max(sup, num / den);
  }
  return DoublingData{C, sup, window, false};
}

}  // namespace czflow
