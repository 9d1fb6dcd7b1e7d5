#include "family.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <sstream>

#include "io_util.hpp"

namespace czflow {

const char* role_name(NodeRole role) {
  switch (role) {
    case NodeRole::chain_sibling: return "S";
    case NodeRole::strip: return "S~";
    case NodeRole::strip_descendant: return "sons-of-S~";
    case NodeRole::positive: return "positive";
  }
  return "?";
}

namespace {
const char* step_name(AscentStep s) {
  switch (s) {
    case AscentStep::lateral: return "lateral";
    case AscentStep::up: return "up";
    case AscentStep::down: return "down";
  }
  return "?";
}
}  // namespace

Cylinder default_root(const CubeSystem* cubes, const AdmissibilityParams& adm, double r0) {
  if (!(r0 > std::exp(1.0))) fail(ErrorCode::config, "root radius must exceed e");
  int k0 = static_cast<int>(std::ceil(std::log(r0 * r0) / std::log(adm.delta)));
  while (std::pow(adm.delta, k0) < r0 * r0) --k0;
  if (std::pow(adm.delta, k0) > adm.lambda * std::pow(r0, adm.gamma))
    fail(ErrorCode::resource, "no admissible root generation for this radius");
  if (k0 < cubes->gen_min()) fail(ErrorCode::resource, "root generation below the cube range");
  Vec origin(cubes->spec().base_dim());
  return Cylinder{r0, 1.0, BaseSet::make_cube(cubes, cubes->cube_at(origin, k0))};
}

DyadicFamily::DyadicFamily(const VerticalField& Z, const FlowMeasure& mu, const CubeSystem* cubes,
                           const AdmissibilityParams& adm, const Cylinder& P0, int neg_depth,
                           int pos_depth, const FamilyWindow& window)
    : Z_(Z), mu_(mu), cubes_(cubes), adm_(adm), window_(window), neg_depth_(neg_depth),
      pos_depth_(pos_depth) {
  adm_.validate();
  if (adm_.delta != cubes_->delta()) fail(ErrorCode::config, "delta differs from the cube system");
  if (neg_depth < 0 || pos_depth < 0) fail(ErrorCode::config, "family depths must be nonnegative");
  if (is_admissible(P0, adm_) != Admissibility::large)
    fail(ErrorCode::config, "root cylinder must be large admissible");
  if (P0.a != 1.0) fail(ErrorCode::config, "root cylinder must be anchored at a = 1");

  // ascent chain
  chain_.push_back(P0);
  int flips = 0;
  for (int k = 0; k < neg_depth_; ++k) {
    const Cylinder& P = chain_.back();
    ParentSet ps = parents(P, adm_);
    Cylinder next = ps.lateral;
    AscentStep step = AscentStep::lateral;
    if (is_admissible(ps.lateral, adm_) != Admissibility::large) {
      step = (flips % 2 == 0) ? AscentStep::up : AscentStep::down;
      ++flips;
      next = (step == AscentStep::up) ? ps.up : ps.down;
    }
    if (is_admissible(next, adm_) != Admissibility::large)
      fail(ErrorCode::internal, "ascent produced a non-admissible cylinder");
    steps_.push_back(step);
    chain_.push_back(next);
  }

  Interval top = chain_.back().vertical();
  if (!(window_.t.lo > top.lo && window_.t.hi < top.hi))
    fail(ErrorCode::resource, "window exceeds the vertical extent of the ascent chain");

  // materialize levels top-down; sibling_by_cube maps cube id -> S-node for
  // the level built in the previous round
  std::unordered_map<std::int64_t, std::int64_t> sibling_above;
  for (int k = neg_depth_; k >= 0; --k) {
    int lv = -k;
    const Cylinder& Pk = chain_[k];
    int j = Pk.base_gen();
    std::unordered_map<std::int64_t, std::int64_t> sibling_here;

    for (const CubeRef& q : cubes_->cubes_meeting_window(j)) {
      Cylinder sib{Pk.r, Pk.a, BaseSet::make_cube(cubes_, q)};
      if (!meets_window(sib)) continue;
      std::int64_t parent = -1;
      if (k < neg_depth_) {
        std::int64_t key = steps_[k] == AscentStep::lateral ? cubes_->parent(q).id : q.id;
        auto it = sibling_above.find(key);
        if (it == sibling_above.end())
          fail(ErrorCode::internal, "missing sibling parent in the level above");
        parent = it->second;
      }
      std::int64_t id = add_node(sib, lv, parent, NodeRole::chain_sibling);
      sibling_here.emplace(q.id, id);

      if (k < neg_depth_ && steps_[k] != AscentStep::lateral) {
        Cylinder strip = steps_[k] == AscentStep::up ? up_strip(sib) : down_strip(sib);
        if (meets_window(strip)) add_node(strip, lv, parent, NodeRole::strip);
      }
    }

    // strips in the coarser level spawn their sons here
    if (k < neg_depth_) {
      auto it = levels_.find(lv - 1);
      if (it != levels_.end()) {
        for (std::int64_t up_id : it->second) {
          const FamilyNode& up = nodes_[up_id];
          if (up.role != NodeRole::strip && up.role != NodeRole::strip_descendant) continue;
          for (const Cylinder& son : sons(up.cyl, adm_))
            if (meets_window(son)) add_node(son, lv, up_id, NodeRole::strip_descendant);
        }
      }
    }
    sibling_above = std::move(sibling_here);
  }

  for (int lv = 1; lv <= pos_depth_; ++lv) {
    auto it = levels_.find(lv - 1);
    if (it == levels_.end()) break;
    std::vector<std::int64_t> prev = it->second;  // add_node mutates levels_
    for (std::int64_t pid : prev) {
      for (const Cylinder& son : sons(nodes_[pid].cyl, adm_))
        if (meets_window(son)) add_node(son, lv, pid, NodeRole::positive);
    }
  }
  measures_.assign(nodes_.size(), -1.0);
}

bool DyadicFamily::meets_window(const Cylinder& cyl) const {
  if (intersect(cyl.vertical(), window_.t).empty()) return false;
  // spatial: keep every base cube whose outer ball meets the window ball
  Vec origin(Z_.spec.base_dim());
  double reach = cubes_->C1() * cubes_->scale(cyl.base_gen());
  return dist_base(Z_.spec, cubes_->center(cyl.base.cube), origin) <=
         window_.spatial_radius + reach;
}

std::int64_t DyadicFamily::add_node(const Cylinder& cyl, int lv, std::int64_t parent,
                                    NodeRole role) {
  if (is_admissible(cyl, adm_) == Admissibility::not_admissible)
    fail(ErrorCode::internal, "family construction produced a non-admissible cylinder");
  FamilyNode node;
  node.cyl = cyl;
  node.level = lv;
  node.id = static_cast<std::int64_t>(nodes_.size());
  node.parent = parent;
  node.role = role;
  nodes_.push_back(std::move(node));
  levels_[lv].push_back(nodes_.back().id);
  if (parent >= 0) nodes_[parent].children.push_back(nodes_.back().id);
  index_node(nodes_.back().id);
  return nodes_.back().id;
}

void DyadicFamily::index_node(std::int64_t id) {
  const FamilyNode& n = nodes_[id];
  index_[{n.level, n.cyl.base_gen()}][n.cyl.base.cube.id].push_back(id);
}

const std::vector<std::int64_t>& DyadicFamily::level(int lv) const {
  auto it = levels_.find(lv);
  if (it == levels_.end()) fail(ErrorCode::resource, "level outside the stored range");
  return it->second;
}

std::int64_t DyadicFamily::locate(const GroupPoint& x, int lv) const {
  auto [n, t] = flow_coordinates(Z_, x);
  if (!window_.t.contains_open(t)) fail(ErrorCode::resource, "point outside the vertical window");
  auto lo = index_.lower_bound({lv, std::numeric_limits<int>::min()});
  for (auto it = lo; it != index_.end() && it->first.first == lv; ++it) {
    int j = it->first.second;
    CubeRef q;
    try {
      q = cubes_->cube_at(n, j);
    } catch (const Error&) {
      continue;  // outside spatial window at this generation
    }
    auto hit = it->second.find(q.id);
    if (hit == it->second.end()) continue;
    for (std::int64_t cand : hit->second)
      if (nodes_[cand].cyl.vertical().contains_open(t)) return cand;
  }
  fail(ErrorCode::resource, "point not covered at this level");
}

std::int64_t DyadicFamily::parent_of(std::int64_t id) const {
  std::int64_t p = nodes_.at(id).parent;
  if (p < 0) fail(ErrorCode::resource, "node has no stored parent");
  return p;
}

const std::vector<std::int64_t>& DyadicFamily::children_of(std::int64_t id) const {
  return nodes_.at(id).children;
}

double DyadicFamily::node_measure(std::int64_t id) const {
  double& slot = measures_.at(id);
  if (slot < 0) slot = cylinder_measure(nodes_.at(id).cyl, mu_);
  return slot;
}

Cylinder DyadicFamily::virtual_ancestor(const Cylinder& P, int steps_above_top,
                                        AscentStep* last) const {
  Cylinder cur = P;
  int flips = 0;
  for (AscentStep s : steps_)
    if (s != AscentStep::lateral) ++flips;
  for (int i = 0; i < steps_above_top; ++i) {
    ParentSet ps = parents(cur, adm_);
    AscentStep step = AscentStep::lateral;
    Cylinder next = ps.lateral;
    if (is_admissible(ps.lateral, adm_) != Admissibility::large) {
      step = (flips % 2 == 0) ? AscentStep::up : AscentStep::down;
      ++flips;
      next = (step == AscentStep::up) ? ps.up : ps.down;
    }
    if (is_admissible(next, adm_) != Admissibility::large)
      fail(ErrorCode::internal, "virtual ascent produced a non-admissible cylinder");
    if (last) *last = step;
    cur = next;
  }
  return cur;
}

void DyadicFamily::dump_jsonl(const std::string& path) const {
  std::ostringstream out;
  for (const auto& [lv, ids] : levels_) {
    for (std::int64_t id : ids) {
      const FamilyNode& n = nodes_[id];
      nlohmann::ordered_json rec;
      rec["level"] = n.level;
      rec["id"] = n.id;
      rec["parent"] = n.parent;
      rec["role"] = role_name(n.role);
      rec["r"] = n.cyl.r;
      rec["a"] = n.cyl.a;
      rec["base"] = {{"system", cubes_->spec().kind == BaseKind::abelian ? "dyadic" : "net"},
                     {"generation", n.cyl.base_gen()},
                     {"id", n.cyl.base.cube.id}};
      rec["admissible"] = is_admissible(n.cyl, adm_) == Admissibility::large ? "large" : "small";
      out << rec.dump() << '\n';
    }
  }
  write_atomic(path, out.str());
}

double DyadicFamily::coverage_estimate(int samples, std::uint64_t seed) const {
  const GroupSpec& spec = Z_.spec;
  std::mt19937_64 rng = make_rng(seed, 0xc0fe);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int covered = 0;
  for (int i = 0; i < samples; ++i) {
    Vec n(spec.base_dim());
    if (spec.kind == BaseKind::abelian) {
      for (int d = 0; d < spec.m; ++d)
        n[d] = window_.spatial_radius * (2.0 * u01(rng) - 1.0);
      if (euclid_norm(n) > window_.spatial_radius) {
        --i;
        continue;
      }
    } else {
      n[0] = 2.0 * window_.spatial_radius * (2.0 * u01(rng) - 1.0);
      n[1] = 2.0 * window_.spatial_radius * (2.0 * u01(rng) - 1.0);
      n[2] = 4.0 * window_.spatial_radius * window_.spatial_radius * (2.0 * u01(rng) - 1.0);
      if (base_norm(spec, n) > window_.spatial_radius) {
        --i;
        continue;
      }
    }
    double t = window_.t.lo + u01(rng) * window_.t.length();
    GroupPoint x = group_mul(spec, GroupPoint{n, 1.0}, exp_tZ(Z_, t));
    bool ok = true;
    for (auto it = levels_.begin(); it != levels_.end() && ok; ++it) {
      try {
        locate(x, it->first);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) ++covered;
  }
  return static_cast<double>(covered) / samples;
}

std::pair<int, int> DyadicFamily::base_generation_range() const {
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (const FamilyNode& n : nodes_) {
    lo = std::min(lo, n.cyl.base_gen());
    hi = std::max(hi, n.cyl.base_gen());
  }
  if (nodes_.empty()) fail(ErrorCode::internal, "empty family");
  return {lo, hi};
}

std::string DyadicFamily::summary_json() const {
  nlohmann::ordered_json s;
  s["total"] = nodes_.size();
  nlohmann::ordered_json per_level = nlohmann::ordered_json::object();
  for (const auto& [lv, ids] : levels_) per_level[std::to_string(lv)] = ids.size();
  s["levels"] = per_level;
  nlohmann::ordered_json chain = nlohmann::ordered_json::array();
  for (size_t k = 0; k < chain_.size(); ++k) {
    nlohmann::ordered_json e;
    e["r"] = chain_[k].r;
    e["a"] = chain_[k].a;
    e["base_generation"] = chain_[k].base_gen();
    if (k < steps_.size()) e["step"] = step_name(steps_[k]);
    chain.push_back(e);
  }
  s["chain"] = chain;
  // measure-ratio histogram over stored parent links
  std::map<std::string, int> hist;
  for (const FamilyNode& n : nodes_) {
    if (n.parent < 0) continue;
    double ratio = node_measure(n.parent) / node_measure(n.id);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", ratio);
    ++hist[buf];
  }
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& [k, v] : hist) h[k] = v;
  s["parent_measure_ratio_histogram"] = h;
  s["window_coverage"] = coverage_estimate();
  return s.dump(2);
}

}  // namespace czflow
