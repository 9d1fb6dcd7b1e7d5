#include "maximal.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <map>
#include <tuple>
#include <unordered_map>

namespace czflow {

namespace {

double node_avg(const SimpleFunction& f, const Cylinder& cyl, double mu) {
  return mu > 0 ? f.integral_abs(cyl) / mu : 0.0;
}

struct CylKey {
  int gen;
  std::int64_t id;
  std::uint64_t rbits, abits;
  bool operator<(const CylKey& o) const {
    return std::tie(gen, id, rbits, abits) < std::tie(o.gen, o.id, o.rbits, o.abits);
  }
};

CylKey key_of(const Cylinder& c) {
  CylKey k{c.base.cube.gen, c.base.cube.id, 0, 0};
  std::memcpy(&k.rbits, &c.r, 8);
  std::memcpy(&k.abits, &c.a, 8);
  return k;
}

}  // namespace

double window_measure(const DyadicFamily& fam) {
  const FamilyWindow& w = fam.window();
  Vec origin(fam.field().spec.base_dim());
  return mu_ball(fam.measure(), origin, w.spatial_radius) * w.t.length();
}

GroupPoint sample_window_point(const DyadicFamily& fam, std::mt19937_64& rng) {
  const GroupSpec& spec = fam.field().spec;
  const FamilyWindow& w = fam.window();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vec n(spec.base_dim());
  for (int tries = 0;; ++tries) {
    if (tries > 100000) fail(ErrorCode::internal, "window sampling failed");
    if (spec.kind == BaseKind::abelian) {
      for (int d = 0; d < spec.m; ++d) n[d] = w.spatial_radius * (2.0 * u01(rng) - 1.0);
    } else {
      n[0] = 2.0 * w.spatial_radius * (2.0 * u01(rng) - 1.0);
      n[1] = 2.0 * w.spatial_radius * (2.0 * u01(rng) - 1.0);
      n[2] = 4.0 * w.spatial_radius * w.spatial_radius * (2.0 * u01(rng) - 1.0);
    }
    if (base_norm(spec, n) < w.spatial_radius) break;
  }
  std::uniform_real_distribution<double> ut(w.t.lo, w.t.hi);
  return group_mul(spec, GroupPoint{n, 1.0}, exp_tZ(fam.field(), ut(rng)));
}

double dyadic_maximal(const SimpleFunction& f, const GroupPoint& x) {
  const DyadicFamily& fam = f.family();
  double sup = 0;
  for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
    std::int64_t id;
    try {
      id = fam.locate(x, lv);
    } catch (const Error&) {
      continue;
    }
    sup = std::max(sup, node_avg(f, fam.node(id).cyl, fam.node_measure(id)));
  }
  return sup;
}

DecompositionReport cz_decompose(const SimpleFunction& f, double alpha, double C4,
                                 int outside_samples, std::uint64_t seed) {
  if (!(alpha > 0)) fail(ErrorCode::config, "alpha must be positive");
  const DyadicFamily& fam = f.family();
  const FlowMeasure& mu = fam.measure();
  DecompositionReport rep;
  rep.alpha = alpha;
  rep.norm1 = f.norm1();
  rep.C1 = fam.cubes()->C1();
  rep.C4 = C4;

  std::map<CylKey, StoppingEntry> stops;
  auto add_stop = [&](const Cylinder& cyl, std::int64_t node, const Cylinder& parent_cyl) {
    CylKey key = key_of(cyl);
    if (stops.count(key)) return;
    StoppingEntry e;
    e.cyl = cyl;
    e.node = node;
    e.mu = cylinder_measure(cyl, mu);
    e.avg_abs = node_avg(f, cyl, e.mu);
    e.avg_signed = e.mu > 0 ? f.integral_signed(cyl) / e.mu : 0.0;
    e.parent_mu = cylinder_measure(parent_cyl, mu);
    e.parent_avg_abs = node_avg(f, parent_cyl, e.parent_mu);
    e.star_mu = cylinder_measure(enlargement_star(cyl), mu);
    stops.emplace(key, std::move(e));
  };

  for (std::int64_t root : fam.level(fam.level_min())) {
    const Cylinder& rc = fam.node(root).cyl;
    // scan the virtual chain: the ascent grows measures geometrically, so we
    // may stop once ||f||_1 / mu can no longer exceed alpha
    int best_h = -1;
    double root_avg = node_avg(f, rc, fam.node_measure(root));
    Cylinder best = rc, above = rc;
    for (int h = 1; h <= 500; ++h) {
      Cylinder anc = fam.virtual_ancestor(rc, h);
      double m = cylinder_measure(anc, mu);
      if (node_avg(f, anc, m) > alpha) {
        best_h = h;
        best = anc;
      }
      if (rep.norm1 / m <= alpha) {
        if (best_h >= 0 && best_h == h) above = fam.virtual_ancestor(rc, h + 1);
        break;
      }
      if (h == 500) fail(ErrorCode::resource, "stopping-time ascent did not terminate");
      if (best_h == h) above = fam.virtual_ancestor(rc, h + 1);
    }
    if (best_h >= 0) {
      add_stop(best, -1, above);
      continue;  // the whole root lies inside a virtual stopping cylinder
    }
    if (root_avg > alpha) {
      add_stop(rc, root, fam.virtual_ancestor(rc, 1));
      continue;
    }
    // top-down: descend only through averages <= alpha
    std::vector<std::int64_t> stack{root};
    while (!stack.empty()) {
      std::int64_t cur = stack.back();
      stack.pop_back();
      for (std::int64_t kid : fam.children_of(cur)) {
        double avg = node_avg(f, fam.node(kid).cyl, fam.node_measure(kid));
        if (avg > alpha)
          add_stop(fam.node(kid).cyl, kid, fam.node(cur).cyl);
        else
          stack.push_back(kid);
      }
    }
  }

  double sup_good = 0;
  for (auto& [key, e] : stops) {
    rep.sum_stopping_mu += e.mu;
    rep.sum_star_mu += e.star_mu;
    sup_good = std::max(sup_good, std::abs(e.avg_signed));
    double zero_defect = std::abs(f.integral_signed(e.cyl) - e.avg_signed * e.mu);
    rep.max_zero_mean_defect = std::max(rep.max_zero_mean_defect, zero_defect);
    rep.sum_bad_norm1 += f.integral_abs_offset(e.cyl, e.avg_signed);
    rep.stopping.push_back(e);
  }

  // g = f off the stopping cylinders; sample that part of the window
  std::mt19937_64 rng = make_rng(seed, 0xcdcd);
  for (int i = 0; i < outside_samples; ++i) {
    GroupPoint x = sample_window_point(fam, rng);
    bool inside = false;
    for (const StoppingEntry& e : rep.stopping)
      if (cylinder_contains(e.cyl, fam.field(), x)) {
        inside = true;
        break;
      }
    if (!inside) sup_good = std::max(sup_good, std::abs(f.value_at(x)));
  }
  rep.sup_good = sup_good;

  double n1 = rep.norm1;
  rep.ok_good = rep.sup_good <= rep.C1 * alpha * (1.0 + 1e-12);
  rep.ok_zero_mean = rep.max_zero_mean_defect <= 1e-10 * std::max(1.0, n1);
  rep.ok_bad_norm = rep.sum_bad_norm1 <= 2.0 * rep.C1 * n1 * (1.0 + 1e-12);
  rep.ok_stopping = rep.sum_stopping_mu <= n1 / alpha * (1.0 + 1e-12);
  rep.ok_star = rep.sum_star_mu <= rep.C4 * n1 / alpha * (1.0 + 1e-12);
  return rep;
}

// ---------------------------------------------------------------------------
// catalog maximal function

namespace {

/// Precomputed tables that make catalog averages O(#terms) per cylinder.
struct CatalogEvaluator {
  const SimpleFunction& f;
  const DyadicFamily& fam;
  const CubeSystem* sys;
  const AdmissibilityParams adm;
  HlParams prm;
  int jmin, jmax;

  struct TermInfo {
    double value;    // ancestor-aggregated value of the arrangement node
    double coef;
    int gen;
    double mu_base;  // mu_N of the node's cube
    Interval U;
    std::vector<std::int64_t> anc;  // ancestor cube id per generation jmin..gen
  };
  std::vector<TermInfo> terms;              // per arrangement order = f.terms order
  std::vector<std::vector<int>> term_kids;  // maximal descendants among terms
  double norm1 = 0;

  explicit CatalogEvaluator(const SimpleFunction& fn, const AdmissibilityParams& a, HlParams p)
      : f(fn), fam(fn.family()), sys(fn.family().cubes()), adm(a), prm(p) {
    jmin = sys->gen_min();
    jmax = sys->gen_max();
    norm1 = f.norm1();
    // recover arrangement structure through the public API
    const auto& ts = f.terms();
    terms.resize(ts.size());
    term_kids.assign(ts.size(), {});
    std::vector<std::int64_t> nodes(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) nodes[i] = ts[i].node;
    for (size_t i = 0; i < ts.size(); ++i) {
      const FamilyNode& n = fam.node(ts[i].node);
      TermInfo& ti = terms[i];
      ti.coef = ts[i].coef;
      ti.gen = n.cyl.base_gen();
      ti.mu_base = sys->mu_base(n.cyl.base.cube);
      ti.U = n.cyl.vertical();
      CubeRef cur = n.cyl.base.cube;
      ti.anc.assign(ti.gen - jmin + 1, 0);
      ti.anc[ti.gen - jmin] = cur.id;
      for (int g = ti.gen - 1; g >= jmin; --g) {
        cur = sys->parent(cur);
        ti.anc[g - jmin] = cur.id;
      }
    }
    // values and maximal-descendant links (terms are sorted coarse-to-fine)
    for (size_t i = 0; i < ts.size(); ++i) {
      int best = -1;
      for (size_t j = 0; j < i; ++j) {
        const TermInfo& tj = terms[j];
        const TermInfo& ti = terms[i];
        if (tj.gen > ti.gen) continue;
        bool cube_in = ti.anc[tj.gen - jmin] == tj.anc[tj.gen - jmin];
        bool vert_in = tj.U.lo <= ti.U.lo && ti.U.hi <= tj.U.hi;
        if (cube_in && vert_in && (best < 0 || terms[j].gen >= terms[best].gen))
          if (nested_in(j, i)) best = static_cast<int>(j);
      }
      terms[i].value = terms[i].coef + (best >= 0 ? terms[best].value : 0.0);
      if (best >= 0) term_kids[best].push_back(static_cast<int>(i));
    }
  }

  // true containment check through the family links (vertical inclusion of
  // dyadic cylinders can hold accidentally between unrelated nodes only if
  // they are nested, so the cube+interval test above is already sound; this
  // keeps the relation exact regardless)
  bool nested_in(size_t outer, size_t inner) const {
    std::int64_t cur = f.terms()[inner].node;
    int lo = fam.node(f.terms()[outer].node).level;
    while (fam.node(cur).level > lo) {
      cur = fam.node(cur).parent;
      if (cur < 0) return false;
    }
    return cur == f.terms()[outer].node;
  }

  /// mu(term_i cap P) for P over chain cube of generation jP through x.
  double mu_cap(const TermInfo& ti, int jP, const std::vector<std::int64_t>& chain,
                const std::vector<double>& chain_mu, const Interval& UP) const {
    double dt = overlap_length(ti.U, UP);
    if (dt <= 0) return 0.0;
    if (ti.gen >= jP) {
      if (ti.anc[jP - jmin] != chain[jP - jmin]) return 0.0;
      return ti.mu_base * dt;
    }
    if (chain[ti.gen - jmin] != ti.anc[ti.gen - jmin]) return 0.0;
    return chain_mu[jP - jmin] * dt;
  }

  double average(int jP, const std::vector<std::int64_t>& chain, const std::vector<double>& chain_mu,
                 double r, double a) const {
    Interval UP{std::log(a / r), std::log(a * r)};
    double integral = 0;
    for (size_t i = 0; i < terms.size(); ++i) {
      double m = mu_cap(terms[i], jP, chain, chain_mu, UP);
      for (int k : term_kids[i]) m -= mu_cap(terms[k], jP, chain, chain_mu, UP);
      integral += std::abs(terms[i].value) * std::max(0.0, m);
    }
    double mu_P = chain_mu[jP - jmin] * UP.length();
    return mu_P > 0 ? integral / mu_P : 0.0;
  }

  double eval(const GroupPoint& x, bool* any_cylinder = nullptr) const {
    if (any_cylinder) *any_cylinder = false;
    auto [n, t] = flow_coordinates(fam.field(), x);
    const double ln_delta = std::log(adm.delta);
    // cube generations that can carry an admissible cylinder through x
    int j_hi = std::min(jmax, static_cast<int>(std::floor((t + 1.0) / ln_delta)) + 2);
    int j_lo = std::max(jmin, j_hi - prm.max_generations);
    if (j_hi < j_lo) return 0.0;

    std::vector<std::int64_t> chain(jmax - jmin + 1, -1);
    std::vector<double> chain_mu(jmax - jmin + 1, 0.0);
    CubeRef q;
    try {
      q = sys->cube_at(n, j_hi);
    } catch (const Error&) {
      return 0.0;
    }
    chain[j_hi - jmin] = q.id;
    chain_mu[j_hi - jmin] = sys->mu_base(q);
    for (int j = j_hi - 1; j >= j_lo; --j) {
      q = sys->parent(q);
      chain[j - jmin] = q.id;
      chain_mu[j - jmin] = sys->mu_base(q);
    }

    const double e1 = std::exp(1.0);
    double sup = 0;
    // fine to coarse: the mass sits in tight cylinders, and an early sup lets
    // the ||f||_1 / mu(P) bound prune whole grid rows (mu(P) is a-free)
    for (int j = j_hi; j >= j_lo; --j) {
      double dj = std::pow(adm.delta, j);
      double mu_q = chain_mu[j - jmin];
      // large branch
      {
        double lr_lo = std::log10(e1) * 1.0000001, lr_hi = std::log10(prm.r_cap);
        int nr = std::max(2, static_cast<int>(std::ceil((lr_hi - lr_lo) * prm.r_per_decade)));
        for (int ir = 0; ir <= nr; ++ir) {
          double r = std::pow(10.0, lr_lo + (lr_hi - lr_lo) * ir / nr);
          if (norm1 < sup * mu_q * 2.0 * std::log(r)) break;  // r only grows
          double a_lo = std::max(dj / (adm.lambda * std::pow(r, adm.gamma)), std::exp(t) / r);
          double a_hi = std::min(dj / (r * r), std::exp(t) * r);
          sup = std::max(sup, scan_a(j, chain, chain_mu, r, a_lo, a_hi, any_cylinder));
        }
      }
      // small branch
      {
        double lr_lo = -4.0, lr_hi = std::log10(e1);  // r in (1+1e-4, e]
        int nr = std::max(2, static_cast<int>(std::ceil((lr_hi - lr_lo) * prm.r_per_decade / 4)));
        for (int ir = nr; ir >= 1; --ir) {
          double r = std::pow(10.0, lr_lo + (lr_hi - lr_lo) * ir / nr);
          if (r <= 1.0 || r > e1) continue;
          if (norm1 < sup * mu_q * 2.0 * std::log(r)) continue;
          double base = std::exp(2.0) * std::log(r);
          double a_lo = std::max(dj / (adm.lambda * base), std::exp(t) / r);
          double a_hi = std::min(dj / base, std::exp(t) * r);
          sup = std::max(sup, scan_a(j, chain, chain_mu, r, a_lo, a_hi, any_cylinder));
        }
      }
    }
    return sup;
  }

  double scan_a(int j, const std::vector<std::int64_t>& chain, const std::vector<double>& chain_mu,
                double r, double a_lo, double a_hi, bool* any = nullptr) const {
    if (!(a_lo < a_hi) || chain[j - jmin] < 0) return 0.0;
    if (any) *any = true;
    double la_lo = std::log10(a_lo), la_hi = std::log10(a_hi);
    int na = std::max(1, static_cast<int>(std::ceil((la_hi - la_lo) * prm.a_per_decade)));
    double sup = 0;
    for (int ia = 0; ia <= na; ++ia) {
      double a = std::pow(10.0, la_lo + (la_hi - la_lo) * (ia + 0.5) / (na + 1));
      sup = std::max(sup, average(j, chain, chain_mu, r, a));
    }
    return sup;
  }
};

}  // namespace

double hl_maximal(const SimpleFunction& f, const GroupPoint& x, const AdmissibilityParams& adm,
                  const HlParams& prm) {
  CatalogEvaluator ev(f, adm, prm);
  bool any = false;
  double sup = ev.eval(x, &any);
  if (!any) fail(ErrorCode::resource, "no admissible catalog cylinder through the point");
  return sup;
}

std::vector<std::size_t> greedy_cover(const std::vector<Cylinder>& catalog) {
  std::vector<std::size_t> order(catalog.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Cylinder& A = catalog[a];
    const Cylinder& B = catalog[b];
    auto ka = std::make_tuple(A.base.cube.gen, A.base.cube.id, A.a, A.r);
    auto kb = std::make_tuple(B.base.cube.gen, B.base.cube.id, B.a, B.r);
    return ka < kb;
  });
  std::vector<std::size_t> selected;
  std::vector<bool> taken(catalog.size(), false);
  while (true) {
    std::size_t pick = catalog.size();
    for (std::size_t idx : order) {
      if (taken[idx]) continue;
      bool hits = false;
      for (std::size_t s : selected)
        if (intersects(catalog[idx], catalog[s])) {
          hits = true;
          break;
        }
      if (hits) {
        taken[idx] = true;  // never selectable later either
        continue;
      }
      pick = idx;
      break;
    }
    if (pick == catalog.size()) break;
    taken[pick] = true;
    selected.push_back(pick);
  }
  return selected;
}

std::vector<double> default_alpha_grid(const SimpleFunction& f) {
  double lo = f.norm1() / window_measure(f.family());
  double hi = 2.0 * f.sup_abs();
  std::vector<double> grid;
  if (!(lo > 0)) lo = hi > 0 ? hi / 256.0 : 1.0;
  for (double a = lo; a < hi * 2.0 && grid.size() < 40; a *= 2.0) grid.push_back(a);
  if (grid.empty()) grid.push_back(1.0);
  return grid;
}

std::vector<Weak11Row> weak11_campaign(const std::vector<SimpleFunction>& functions,
                                       const std::vector<double>& alphas_hint, double C2,
                                       const Weak11Params& prm, std::uint64_t seed) {
  std::vector<Weak11Row> rows;
  for (std::size_t fi = 0; fi < functions.size(); ++fi) {
    const SimpleFunction& f = functions[fi];
    const DyadicFamily& fam = f.family();
    CatalogEvaluator ev(f, fam.admissibility(), prm.hl);
    double win_mu = window_measure(fam);
    double leb_win = win_mu;  // uniform density: flow coordinates carry mu_N x dt

    std::mt19937_64 rng = make_rng(seed, 0x11aa + fi);
    std::vector<double> maximal(prm.samples_per_function);
    std::vector<double> weight(prm.samples_per_function, 1.0);
    if (!fam.measure().is_uniform()) {
      Vec origin(fam.field().spec.base_dim());
      FlowMeasure leb = FlowMeasure::haar(fam.field());
      leb_win = mu_ball(leb, origin, fam.window().spatial_radius) * fam.window().t.length();
    }
    for (int s = 0; s < prm.samples_per_function; ++s) {
      GroupPoint x = sample_window_point(fam, rng);
      maximal[s] = ev.eval(x);
      if (!fam.measure().is_uniform())
        weight[s] = base_density(fam.measure(), flow_coordinates(fam.field(), x).first);
    }
    double n1 = f.norm1();
    std::vector<double> alphas = alphas_hint.empty() ? default_alpha_grid(f) : alphas_hint;
    for (double alpha : alphas) {
      double hit = 0;
      for (int s = 0; s < prm.samples_per_function; ++s)
        if (maximal[s] > alpha) hit += weight[s];
      double level = leb_win * hit / prm.samples_per_function;
      Weak11Row row;
      row.function_id = static_cast<int>(fi);
      row.alpha = alpha;
      row.level_measure = level;
      row.bound = C2 * n1 / alpha;
      row.margin = level > 0 ? row.bound / level : std::numeric_limits<double>::infinity();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace czflow
