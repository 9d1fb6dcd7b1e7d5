#include "counterexample.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "io_util.hpp"

namespace czflow {

HeisenbergBox psi_box_image(double t, const HeisenbergBox& box) {
  double et = std::exp(t);
  return HeisenbergBox{et * box.L, et * et * box.M + et * std::abs(1.0 - et) * box.L};
}

double psi_ball_core_radius(double t, double R) {
  double lq = 2.0 * box_inner_c() * std::exp(t) * R;  // q,p half-extent of the slab
  double sh = std::abs(std::expm1(t));
  double s_tau = std::sqrt(sh * sh + lq * lq) - sh;  // solves S^2 + 2 S sh = lq^2
  return std::min(lq / 2.0, s_tau);
}

SampleReport verify_small_ball_in_cylinder(const VerticalField& Z, double R, int samples,
                                           std::uint64_t seed) {
  if (R <= 0) fail(ErrorCode::config, "R must be positive");
  const GroupSpec& spec = Z.spec;
  double r = std::exp(R / (2.0 * Z.norm()));
  Vec origin(spec.base_dim());
  Cylinder P{r, 1.0, BaseSet::make_ball(origin, R / 2.0)};
  GroupPoint one = identity(spec);
  std::mt19937_64 rng = make_rng(seed, 0x5ba11);
  SampleReport rep;
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    GroupPoint x = cylinder_sample(P, Z, rng);
    rep.worst = std::max(rep.worst, dist_G(spec, x, one) / R);
  }
  rep.ok = rep.worst < 1.0;
  return rep;
}

SampleReport verify_thickened_cylinder(const Cylinder& P, const VerticalField& Z, double R,
                                       int samples, std::uint64_t seed) {
  if (R <= 0) fail(ErrorCode::config, "R must be positive");
  const GroupSpec& spec = Z.spec;
  if (P.base.kind != BaseSet::Kind::cube) fail(ErrorCode::config, "cylinder base must be a cube");
  // certified core of Psi_{r,a}(B(1, R/2)): the slab radius is increasing in
  // the q-extent and decreasing in the shear, so the global extremes of the
  // two over U_r(a) bound the infimum from below
  double rho;
  {
    Interval U0 = P.vertical();
    double lq = 2.0 * box_inner_c() * std::exp(U0.lo) * (R / 2.0);
    double sh = std::max(std::abs(std::expm1(U0.lo)), std::abs(std::expm1(U0.hi)));
    rho = std::min(lq / 2.0, std::sqrt(sh * sh + lq * lq) - sh);
  }
  Vec nq = P.base.system->center(P.base.cube);
  Cylinder thick{P.r * std::exp(R / (2.0 * Z.norm())), P.a,
                 BaseSet::make_image(BaseSet::make_ball(Vec(spec.base_dim()), rho), 0.0, nq)};
  Interval U = P.vertical();
  Interval Usmall{-R / (2.0 * Z.norm()), R / (2.0 * Z.norm())};
  std::mt19937_64 rng = make_rng(seed, 0x71c4);
  SampleReport rep;
  rep.samples = samples;
  rep.ok = true;
  for (int i = 0; i < samples; ++i) {
    GroupPoint x = cylinder_sample(thick, Z, rng);
    auto [n, t] = flow_coordinates(Z, x);
    // factor t = s + u with s in U_r(a), u in the small interval
    Interval ts = intersect(U, Interval{t - Usmall.hi, t - Usmall.lo});
    if (ts.empty()) {
      rep.ok = false;
      continue;
    }
    double s = 0.5 * (ts.lo + ts.hi);
    // the witness x1 = (n_Q, 1) exp(sZ) lies in P; x1^{-1} x must sit in the
    // small-ball cylinder, whose points stay within R of the identity
    GroupPoint x1 = group_mul(spec, GroupPoint{nq, 1.0}, exp_tZ(Z, s));
    if (!cylinder_contains(P, Z, x1)) rep.ok = false;
    Vec w = base_mul(spec, base_inv(spec, nq), n);
    if (base_norm(spec, psi_t(Z, -s, w)) > R / 2.0) rep.ok = false;
    rep.worst = std::max(rep.worst, dist_G(spec, x, x1) / R);
  }
  rep.ok = rep.ok && rep.worst < 1.0;
  return rep;
}

namespace {

/// ln(e^x + e^y).
double logsumexp(double x, double y) {
  double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

}  // namespace

std::vector<CounterexampleRow> counterexample_table(const CounterexampleParams& prm, int l_max) {
  if (!(prm.r0 > std::exp(1.0))) fail(ErrorCode::config, "r0 must exceed e");
  if (l_max < 0 || l_max > 6) fail(ErrorCode::config, "l_max must lie in [0, 6]");
  double lr0 = std::log(prm.r0);
  double kappa = koranyi_unit_ball_volume();
  std::vector<CounterexampleRow> rows;
  for (int l = 0; l <= l_max; ++l) {
    CounterexampleRow row;
    row.l = l;
    double six_l = std::pow(6.0, l);
    row.strip_exponent = 4.0 * six_l;
    int halvings = static_cast<int>(std::floor(l * std::log2(3.0))) + l + 2;
    row.log_r0_r = row.strip_exponent / std::pow(2.0, halvings);  // = 3^l / 2^floor(l log2 3)
    double log_r = row.log_r0_r * lr0;                            // ln r(P^l)

    double base = -row.strip_exponent * lr0;  // ln(r0^{-4 * 6^l})
    row.log_a_low = base - log_r;
    row.log_a_high = base + log_r;
    row.log_delta_low = row.log_a_low + 2.0 * log_r;
    row.log_delta_high = std::log(prm.lambda) + row.log_a_high + prm.gamma * log_r;

    // Diameter chain.  Every link is a certified lower bound for cosh(diam),
    // evaluated at the minimizing corner of the admissibility region
    // (a = a_high, delta^k = a r^2); each link drops one factor:
    //   full Koranyi expression
    //   >= (c/2) r^2 (1-a)/a            (tau term alone)
    //   >= (c/2) r0^2 (1-a)/a           (r >= r0)
    //   >= (c/2) (1-a) r0^{4 * 6^l}     (r0^2/a >= r0^{4 * 6^l} by the anchor bound)
    double a_high = std::exp(row.log_a_high);
    if (a_high >= 1.0) fail(ErrorCode::internal, "anchor bound reaches 1");
    double log_1ma = std::log1p(-a_high);
    double lc = std::log(prm.cube_c);
    double ratio = log_1ma - row.log_a_high;  // ln((1-a)/a)
    row.link_tau = -std::log(2.0) + lc + 2.0 * log_r + ratio;
    row.link_full = -std::log(2.0) +
                    0.5 * logsumexp(4.0 * lc + 8.0 * log_r - std::log(16.0),
                                    2.0 * lc + 4.0 * log_r + 2.0 * ratio);
    row.link_vertical = -std::log(2.0) + lc + 2.0 * lr0 + ratio;
    row.link_final = std::log(prm.cube_c / 2.0) + log_1ma + row.strip_exponent * lr0;

    double log_u = row.link_final;  // certified cosh(diam) lower bound
    row.log_diam_lb = log_u < 35.0 ? acosh_stable(std::exp(log_u)) : log_u + std::log(2.0);

    // Measure-ratio lower bound at radius K.  The neighborhood is bounded
    // below through the anchor translate of the small-ball cylinder:
    //   rho({d < R}) >= a_l^4 mu(P_{e^{R/(2||Z||)}, B(1, R/2)}(1))
    //                 = a_l^4 (R / sqrt 2) kappa (R/2)^4,   ||Z|| = sqrt 2,
    // so the anchor powers cancel against rho(P^l) <= 2 log r kappa C1^4
    // (lambda a r^gamma)^4 up to a fixed gap.  The radius is carried in cosh
    // scale, ln R = ln K + diam bound (see the project notes).
    double log_R = std::log(prm.K) + row.log_diam_lb;
    double log_num = 4.0 * row.log_a_low + std::log(kappa) + 5.0 * log_R -
                     0.5 * std::log(2.0) - std::log(16.0);
    double log_den = std::log(2.0) + std::log(log_r) + std::log(kappa) +
                     4.0 * (std::log(prm.cube_C1) + std::log(prm.lambda) + row.log_a_high +
                            prm.gamma * log_r);
    row.log_ratio_lb = log_num - log_den;
    rows.push_back(row);
  }
  return rows;
}

std::string counterexample_csv(const std::vector<CounterexampleRow>& rows) {
  auto sci = [](double ln_value) {
    // text form m.mmmmmme[+-]x from a natural-log value; the exponent range
    // is why these columns are carried in logs
    double l10 = ln_value / std::log(10.0);
    double e = std::floor(l10);
    double mant = std::pow(10.0, l10 - e);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6fe%+d", mant, static_cast<int>(e));
    return std::string(buf);
  };
  std::ostringstream out;
  out << "l,log_r0_r,a_low,a_high,log_diam_lb,log_ratio_lb_at_K1\n";
  for (const CounterexampleRow& r : rows) {
    out << r.l << ',' << fmt_double(r.log_r0_r) << ',' << sci(r.log_a_low) << ','
        << sci(r.log_a_high) << ',' << fmt_double(r.log_diam_lb) << ','
        << fmt_double(r.log_ratio_lb) << '\n';
  }
  return out.str();
}

EquivalenceReport abelian_equivalence_certificate(const VerticalField& Z, int samples,
                                                  std::uint64_t seed) {
  const GroupSpec& spec = Z.spec;
  if (spec.kind != BaseKind::abelian) fail(ErrorCode::config, "certificate targets the abelian base");
  EquivalenceReport rep;
  rep.D = std::max(2.0 * norm2(Z.beta) + 1.0, 2.0);
  GroupPoint one = identity(spec);
  std::mt19937_64 rng = make_rng(seed, 0xe401);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::uniform_real_distribution<double> tdist(-6.0, 6.0);
  rep.ratio_inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    GroupPoint x;
    x.n = Vec(spec.m);
    for (int d = 0; d < spec.m; ++d) x.n[d] = coord(rng);
    x.a = std::exp(tdist(rng));
    double dg = dist_G(spec, x, one);
    double dz = dist_Z(Z, x, one);
    double cg = std::cosh(dg), cz = std::cosh(dz);
    rep.worst_zd_over_dg = std::max(rep.worst_zd_over_dg, cz / (rep.D * cg));
    rep.worst_dg_over_zd = std::max(rep.worst_dg_over_zd, cg / (rep.D * cz));
    if (dg > 0.25 && dz > 0) {
      rep.ratio_sup = std::max(rep.ratio_sup, dg / dz);
      rep.ratio_inf = std::min(rep.ratio_inf, dg / dz);
    }
  }
  rep.phi_min = std::numeric_limits<double>::infinity();
  rep.phi_max = 0;
  std::uniform_real_distribution<double> vgrid(-50.0, 50.0);
  auto phi = [&](const Vec& v) { return (1.0 + norm2(v)) / (1.0 + norm2(v + Z.beta)); };
  auto record = [&](const Vec& v) {
    double p = phi(v);
    rep.phi_min = std::min(rep.phi_min, p);
    rep.phi_max = std::max(rep.phi_max, p);
  };
  for (int i = 0; i < 4096; ++i) {
    Vec v(spec.m);
    for (int d = 0; d < spec.m; ++d) v[d] = vgrid(rng);
    record(v);
  }
  record(Vec(spec.m));
  record(-1.0 * Z.beta);
  rep.ok = rep.worst_zd_over_dg <= 1.0 + 1e-12 && rep.worst_dg_over_zd <= 1.0 + 1e-12;
  return rep;
}

}  // namespace czflow
