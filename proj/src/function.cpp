#include "function.hpp"

#include <algorithm>
#include <map>

namespace czflow {

SimpleFunction::SimpleFunction(const DyadicFamily* fam, std::vector<Term> terms) : fam_(fam) {
  std::map<std::int64_t, double> merged;
  for (const Term& t : terms) merged[t.node] += t.coef;
  for (const auto& [node, coef] : merged)
    if (coef != 0.0) terms_.push_back(Term{coef, node});

  // sort coarse-to-fine so ancestors precede descendants
  std::sort(terms_.begin(), terms_.end(), [&](const Term& a, const Term& b) {
    int la = fam_->node(a.node).level, lb = fam_->node(b.node).level;
    return la != lb ? la < lb : a.node < b.node;
  });

  arr_.reserve(terms_.size());
  for (const Term& t : terms_) {
    ArrNode an;
    an.fam_node = t.node;
    an.coef = t.coef;
    arr_.push_back(an);
  }
  for (int i = 0; i < static_cast<int>(arr_.size()); ++i) {
    // arrangement parent: deepest earlier node containing this one
    int best = -1;
    for (int j = 0; j < i; ++j) {
      if (!node_contains(arr_[j].fam_node, arr_[i].fam_node)) continue;
      if (best < 0 || fam_->node(arr_[j].fam_node).level > fam_->node(arr_[best].fam_node).level)
        best = j;
    }
    arr_[i].arr_parent = best;
    arr_[i].value = arr_[i].coef + (best >= 0 ? arr_[best].value : 0.0);
    if (best >= 0)
      arr_[best].kids.push_back(i);
    else
      roots_.push_back(i);
  }
}

bool SimpleFunction::node_contains(std::int64_t outer, std::int64_t inner) const {
  int lo = fam_->node(outer).level;
  std::int64_t cur = inner;
  while (fam_->node(cur).level > lo) {
    cur = fam_->node(cur).parent;
    if (cur < 0) return false;
  }
  return cur == outer;
}

double SimpleFunction::value_at(const GroupPoint& x) const {
  double v = 0;
  for (const Term& t : terms_)
    if (cylinder_contains(fam_->node(t.node).cyl, fam_->field(), x)) v += t.coef;
  return v;
}

double SimpleFunction::sup_abs() const {
  double s = 0;
  for (const ArrNode& an : arr_) s = std::max(s, std::abs(an.value));
  return s;
}

double SimpleFunction::mu_cap(std::int64_t fam_node, const Cylinder& C) const {
  const Cylinder& P = fam_->node(fam_node).cyl;
  double dt = overlap_length(P.vertical(), C.vertical());
  if (dt <= 0) return 0.0;
  const CubeSystem* sys = P.base.system;
  if (C.base.kind != BaseSet::Kind::cube || C.base.system != sys)
    fail(ErrorCode::config, "integral target must have a cube base from the family system");
  auto rel = sys->relation(P.base.cube, C.base.cube);
  if (rel == CubeSystem::Relation::disjoint) return 0.0;
  const CubeRef& small =
      rel == CubeSystem::Relation::first_contains_second ? C.base.cube : P.base.cube;
  return sys->mu_base(small) * dt;
}

double SimpleFunction::integral_signed(const Cylinder& C) const {
  double s = 0;
  for (const ArrNode& an : arr_) s += an.coef * mu_cap(an.fam_node, C);
  return s;
}

double SimpleFunction::integral_abs_offset(const Cylinder& C, double offset) const {
  // |f - offset| is constant on each arrangement region and equal to |offset|
  // off the union of the roots
  double s = 0;
  double outside = cylinder_measure(C, fam_->measure());
  for (int r : roots_) outside -= mu_cap(arr_[r].fam_node, C);
  s += std::abs(offset) * std::max(0.0, outside);
  for (const ArrNode& an : arr_) {
    double m = mu_cap(an.fam_node, C);
    for (int k : an.kids) m -= mu_cap(arr_[k].fam_node, C);
    s += std::abs(an.value - offset) * std::max(0.0, m);
  }
  return s;
}

double SimpleFunction::integral_abs(const Cylinder& C) const { return integral_abs_offset(C, 0.0); }

double SimpleFunction::norm1() const {
  double s = 0;
  for (const ArrNode& an : arr_) {
    double m = fam_->node_measure(an.fam_node);
    for (int k : an.kids) m -= fam_->node_measure(arr_[k].fam_node);
    s += std::abs(an.value) * std::max(0.0, m);
  }
  return s;
}

double SimpleFunction::rec_norm1(int idx, double acc) const {
  const ArrNode& an = arr_[idx];
  double here = acc + an.coef;
  double m = fam_->node_measure(an.fam_node);
  double s = 0;
  for (int k : an.kids) {
    m -= fam_->node_measure(arr_[k].fam_node);
    s += rec_norm1(k, here);
  }
  return s + std::abs(here) * std::max(0.0, m);
}

double SimpleFunction::norm1_alt() const {
  double s = 0;
  for (int r : roots_) s += rec_norm1(r, 0.0);
  return s;
}

SimpleFunction random_simple_function(const DyadicFamily& fam, int nterms, std::mt19937_64& rng) {
  std::vector<std::int64_t> pool;
  for (int lv = fam.level_min(); lv <= fam.level_max(); ++lv) {
    try {
      for (std::int64_t id : fam.level(lv)) pool.push_back(id);
    } catch (const Error&) {
    }
  }
  if (pool.empty()) fail(ErrorCode::config, "family has no nodes to sample");
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_real_distribution<double> mag(0.25, 2.0);
  std::bernoulli_distribution flip(0.5);
  std::vector<SimpleFunction::Term> terms;
  for (int i = 0; i < nterms && i < static_cast<int>(pool.size()); ++i)
    terms.push_back({flip(rng) ? mag(rng) : -mag(rng), pool[i]});
  return SimpleFunction(&fam, std::move(terms));
}

}  // namespace czflow
