#include "cubes.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace czflow {

CubeRef CubeSystem::ancestor(const CubeRef& q, int gen) const {
  if (gen > q.gen) fail(ErrorCode::config, "ancestor: target generation is finer");
  CubeRef cur = q;
  while (cur.gen > gen) cur = parent(cur);
  return cur;
}

CubeSystem::Relation CubeSystem::relation(const CubeRef& a, const CubeRef& b) const {
  if (a.gen == b.gen) return a.id == b.id ? Relation::equal : Relation::disjoint;
  if (a.gen < b.gen)
    return ancestor(b, a.gen) == a ? Relation::first_contains_second : Relation::disjoint;
  return ancestor(a, b.gen) == b ? Relation::second_contains_first : Relation::disjoint;
}

// ---------------------------------------------------------------------------
// AbelianDyadicSystem

namespace {
constexpr std::int64_t kPackMargin = 2;        // extra cubes kept addressable past the window
constexpr double kMaxLatticeRatio = 1.0e12;    // guard for id packing
}  // namespace

AbelianDyadicSystem::AbelianDyadicSystem(const FlowMeasure& mu, const CubeSystemParams& params)
    : CubeSystem(mu.Z.spec, mu, params) {
  if (spec_.kind != BaseKind::abelian) fail(ErrorCode::config, "dyadic system needs abelian base");
  if (params_.delta != 0.5) fail(ErrorCode::config, "exact dyadic cubes require delta = 1/2");
  if (params_.window_radius <= 0) fail(ErrorCode::config, "window radius must be positive");
  c_ = 0.5;
  C1_ = std::max({3.0, std::pow(2.0, spec_.m), std::sqrt(double(spec_.m))});
  if (!mu_.is_uniform()) {
    // certify the parent/child measure ratio over every cell in range
    double worst = 0.0;
    std::int64_t total = 0;
    for (int g = params_.gen_min + 1; g <= params_.gen_max; ++g) {
      auto cubes = cubes_meeting_window(g);
      total += static_cast<std::int64_t>(cubes.size());
      if (total > 200000)
        fail(ErrorCode::resource, "power-weight cube certification: window/generation range too large");
      for (const CubeRef& q : cubes) worst = std::max(worst, mu_base(parent(q)) / mu_base(q));
    }
    C1_ = std::max(C1_, worst);
  }
}

std::int64_t AbelianDyadicSystem::lat_min(int gen) const {
  double h = scale(gen);
  double ratio = params_.window_radius / h;
  if (ratio > kMaxLatticeRatio) fail(ErrorCode::resource, "generation too fine for the window");
  return static_cast<std::int64_t>(std::floor(-ratio - 1.0)) + 1 - kPackMargin;
}

std::int64_t AbelianDyadicSystem::lat_count(int gen) const {
  double h = scale(gen);
  std::int64_t hi = static_cast<std::int64_t>(std::floor(params_.window_radius / h)) + kPackMargin;
  return hi - lat_min(gen) + 1;
}

CubeRef AbelianDyadicSystem::pack(int gen, const std::array<std::int64_t, kMaxBaseDim>& lat) const {
  std::int64_t lo = lat_min(gen), cnt = lat_count(gen);
  std::int64_t id = 0;
  for (int d = spec_.m - 1; d >= 0; --d) {
    std::int64_t off = lat[d] - lo;
    if (off < 0 || off >= cnt) fail(ErrorCode::resource, "cube outside window");
    id = id * cnt + off;
  }
  return CubeRef{gen, id};
}

std::array<std::int64_t, kMaxBaseDim> AbelianDyadicSystem::unpack(const CubeRef& q) const {
  std::int64_t lo = lat_min(q.gen), cnt = lat_count(q.gen);
  std::array<std::int64_t, kMaxBaseDim> lat{};
  std::int64_t id = q.id;
  for (int d = 0; d < spec_.m; ++d) {
    lat[d] = lo + id % cnt;
    id /= cnt;
  }
  return lat;
}

CubeRef AbelianDyadicSystem::cube_at(const Vec& n, int gen) const {
  check_gen(gen);
  if (n.size() != spec_.m) fail(ErrorCode::config, "cube_at: dimension mismatch");
  for (int d = 0; d < spec_.m; ++d)
    if (std::abs(n[d]) > params_.window_radius) fail(ErrorCode::resource, "point outside window");
  double h = scale(gen);
  std::array<std::int64_t, kMaxBaseDim> lat{};
  for (int d = 0; d < spec_.m; ++d) lat[d] = static_cast<std::int64_t>(std::floor(n[d] / h));
  return pack(gen, lat);
}

CubeRef AbelianDyadicSystem::parent(const CubeRef& q) const {
  check_gen(q.gen - 1);
  auto lat = unpack(q);
  for (int d = 0; d < spec_.m; ++d)
    lat[d] = lat[d] >= 0 ? lat[d] / 2 : (lat[d] - 1) / 2;  // floor division
  return pack(q.gen - 1, lat);
}

std::vector<CubeRef> AbelianDyadicSystem::children(const CubeRef& q) const {
  check_gen(q.gen + 1);
  auto lat = unpack(q);
  std::vector<CubeRef> out;
  std::int64_t lo = lat_min(q.gen + 1), cnt = lat_count(q.gen + 1);
  int combos = 1 << spec_.m;
  for (int mask = 0; mask < combos; ++mask) {
    std::array<std::int64_t, kMaxBaseDim> kid{};
    bool ok = true;
    for (int d = 0; d < spec_.m; ++d) {
      kid[d] = 2 * lat[d] + ((mask >> d) & 1);
      if (kid[d] - lo < 0 || kid[d] - lo >= cnt) ok = false;
    }
    if (ok) out.push_back(pack(q.gen + 1, kid));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec AbelianDyadicSystem::center(const CubeRef& q) const {
  auto lat = unpack(q);
  double h = scale(q.gen);
  Vec c(spec_.m);
  for (int d = 0; d < spec_.m; ++d) c[d] = (static_cast<double>(lat[d]) + 0.5) * h;
  return c;
}

void AbelianDyadicSystem::box(const CubeRef& q, Vec& lo, Vec& hi) const {
  auto lat = unpack(q);
  double h = scale(q.gen);
  lo = Vec(spec_.m);
  hi = Vec(spec_.m);
  for (int d = 0; d < spec_.m; ++d) {
    lo[d] = static_cast<double>(lat[d]) * h;
    hi[d] = lo[d] + h;
  }
}

bool AbelianDyadicSystem::contains(const CubeRef& q, const Vec& n) const {
  Vec lo, hi;
  box(q, lo, hi);
  for (int d = 0; d < spec_.m; ++d)
    if (n[d] < lo[d] || n[d] >= hi[d]) return false;  // half-open
  return true;
}

double AbelianDyadicSystem::mu_base(const CubeRef& q) const {
  double h = scale(q.gen);
  if (mu_.is_uniform()) return std::pow(h, spec_.m);
  auto it = mu_cache_.find(q);
  if (it != mu_cache_.end()) return it->second;
  Vec lo, hi;
  box(q, lo, hi);
  double v = mu_box(mu_, lo, hi);
  mu_cache_.emplace(q, v);
  return v;
}

std::vector<CubeRef> AbelianDyadicSystem::cubes_meeting_window(int gen) const {
  check_gen(gen);
  double h = scale(gen), W = params_.window_radius;
  std::int64_t lo_w = static_cast<std::int64_t>(std::floor(-W / h - 1.0)) + 1;
  std::int64_t hi_w = static_cast<std::int64_t>(std::floor(W / h));
  std::int64_t per_axis = hi_w - lo_w + 1;
  double count = std::pow(static_cast<double>(per_axis), spec_.m);
  if (count > 4.0e6) fail(ErrorCode::resource, "too many cubes meet the window at this generation");
  std::vector<CubeRef> out;
  out.reserve(static_cast<size_t>(count));
  std::array<std::int64_t, kMaxBaseDim> lat{};
  for (int d = 0; d < spec_.m; ++d) lat[d] = lo_w;
  while (true) {
    out.push_back(pack(gen, lat));
    int d = 0;
    while (d < spec_.m && ++lat[d] > hi_w) lat[d++] = lo_w;
    if (d == spec_.m) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec AbelianDyadicSystem::sample_point(const CubeRef& q, std::mt19937_64& rng) const {
  Vec lo, hi;
  box(q, lo, hi);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec p(spec_.m);
  for (int d = 0; d < spec_.m; ++d) p[d] = lo[d] + u(rng) * (hi[d] - lo[d]);
  return p;
}

// ---------------------------------------------------------------------------
// NetCubeSystem

namespace {

// uniform sample of the bounding box Q(2W) = [-2W,2W]^2 x [-4W^2, 4W^2]
Vec box_sample(double W, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec p(3);
  p[0] = 2.0 * W * u(rng);
  p[1] = 2.0 * W * u(rng);
  p[2] = 4.0 * W * W * u(rng);
  return p;
}

struct SpatialHash {
  double cell;
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> buckets;

  std::int64_t key(double q, double p) const {
    auto iq = static_cast<std::int64_t>(std::floor(q / cell));
    auto ip = static_cast<std::int64_t>(std::floor(p / cell));
    return iq * 0x100000 + ip;  // window extents keep indices far below the mixing stride
  }
  void insert(const Vec& v, std::int64_t idx) { buckets[key(v[0], v[1])].push_back(idx); }
  template <typename F>
  bool any_near(const Vec& v, F&& pred) const {
    auto iq = static_cast<std::int64_t>(std::floor(v[0] / cell));
    auto ip = static_cast<std::int64_t>(std::floor(v[1] / cell));
    for (std::int64_t dq = -1; dq <= 1; ++dq)
      for (std::int64_t dp = -1; dp <= 1; ++dp) {
        auto it = buckets.find((iq + dq) * 0x100000 + (ip + dp));
        if (it == buckets.end()) continue;
        for (std::int64_t idx : it->second)
          if (pred(idx)) return true;
      }
    return false;
  }
};

}  // namespace

NetCubeSystem::NetCubeSystem(const FlowMeasure& mu, const CubeSystemParams& params)
    : CubeSystem(mu.Z.spec, mu, params) {
  if (spec_.kind != BaseKind::heisenberg) fail(ErrorCode::config, "net system targets the H^1 base");
  if (!mu_.is_uniform()) fail(ErrorCode::config, "net system supports the uniform density only");
  int n_gens = params_.gen_max - params_.gen_min + 1;
  if (n_gens < 1 || n_gens > 8) fail(ErrorCode::config, "net system serves at most 8 generations");
  double W = params_.window_radius;
  if (std::pow(W / scale(params_.gen_max), 4) > 80000.0)
    fail(ErrorCode::resource, "finest net generation too fine for the window");

  std::mt19937_64 rng = make_rng(params_.seed, 0xc0de);
  std::vector<Vec> candidates;
  candidates.reserve(params_.net_candidates);
  while (static_cast<int>(candidates.size()) < params_.net_candidates) {
    Vec p = box_sample(W, rng);
    if (base_norm(spec_, p) <= W) candidates.push_back(p);
  }

  levels_.resize(n_gens);
  for (int li = 0; li < n_gens; ++li) {
    int gen = params_.gen_min + li;
    double sep = scale(gen);
    SpatialHash hash{2.0 * sep, {}};
    auto& cells = levels_[li].cells;
    auto try_add = [&](const Vec& p) {
      bool near = hash.any_near(
          p, [&](std::int64_t idx) { return dist_base(spec_, cells[idx].center, p) < sep; });
      if (near) return;
      Cell cell;
      cell.center = p;
      hash.insert(p, static_cast<std::int64_t>(cells.size()));
      cells.push_back(std::move(cell));
    };
    // nested nets: coarser centers survive into every finer generation
    if (li > 0)
      for (const Cell& coarse : levels_[li - 1].cells) try_add(coarse.center);
    Vec origin(3);
    if (li == 0) try_add(origin);  // keep a cell anchored at the group identity
    for (const Vec& p : candidates) try_add(p);
    if (cells.size() > 60000) fail(ErrorCode::resource, "net generation exceeds the cell budget");

    if (li > 0) {
      auto& up = levels_[li - 1].cells;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(cells.size()); ++i) {
        std::int64_t best = 0;
        double bd = dist_base(spec_, cells[i].center, up[0].center);
        for (std::int64_t j = 1; j < static_cast<std::int64_t>(up.size()); ++j) {
          double d = dist_base(spec_, cells[i].center, up[j].center);
          if (d < bd - 1e-15) {
            bd = d;
            best = j;
          }
        }
        cells[i].parent = best;
        up[best].kids.push_back(i);
      }
    }
  }

  // measure pass: cell volumes by batch assignment, fixed seed
  std::mt19937_64 mrng = make_rng(params_.seed, 0x3ea5);
  double box_vol = 128.0 * std::pow(W, 4);
  std::int64_t in_ball = 0;
  std::vector<std::vector<std::int64_t>> hits(n_gens);
  for (int li = 0; li < n_gens; ++li) hits[li].assign(levels_[li].cells.size(), 0);
  outer_ = 0;
  outer_by_level_.assign(n_gens, 0.0);
  for (int s = 0; s < params_.measure_samples; ++s) {
    Vec p = box_sample(W, mrng);
    if (base_norm(spec_, p) > W) continue;
    ++in_ball;
    std::int64_t idx = -1;
    for (int li = 0; li < n_gens; ++li) {
      auto& cells = levels_[li].cells;
      if (li == 0) {
        idx = 0;
        double bd = dist_base(spec_, p, cells[0].center);
        for (std::int64_t j = 1; j < static_cast<std::int64_t>(cells.size()); ++j) {
          double d = dist_base(spec_, p, cells[j].center);
          if (d < bd - 1e-15) {
            bd = d;
            idx = j;
          }
        }
      } else {
        const auto& kids = levels_[li - 1].cells[idx].kids;
        std::int64_t best = -1;
        double bd = 0;
        for (std::int64_t k : kids) {
          double d = dist_base(spec_, p, cells[k].center);
          if (best < 0 || d < bd - 1e-15) {
            bd = d;
            best = k;
          }
        }
        if (best < 0) {  // childless cell: should not happen, nets are nested
          best = 0;
          bd = dist_base(spec_, p, cells[0].center);
        }
        idx = best;
      }
      ++hits[li][idx];
      double drift = dist_base(spec_, p, levels_[li].cells[idx].center) /
                     scale(params_.gen_min + li);
      outer_by_level_[li] = std::max(outer_by_level_[li], drift);
      outer_ = std::max(outer_, drift);
      auto& res = levels_[li].cells[idx].reservoir;
      if (res.size() < 16) res.push_back(p);
    }
  }
  (void)in_ball;
  int max_kids = 2;
  double worst_ratio = 0;
  for (int li = 0; li < n_gens; ++li) {
    auto& cells = levels_[li].cells;
    double sc = scale(params_.gen_min + li);
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(cells.size()); ++j) {
      cells[j].mu = box_vol * static_cast<double>(hits[li][j]) / params_.measure_samples;
      cells[j].partial = base_norm(spec_, cells[j].center) + outer_by_level_[li] * sc > W;
      if (li > 0 && hits[li][j] >= 20) {  // skip slivers whose volume is all noise
        const Cell& up = levels_[li - 1].cells[cells[j].parent];
        if (!up.partial && cells[j].mu > 0) worst_ratio = std::max(worst_ratio, up.mu / cells[j].mu);
      }
    }
    if (li > 0)
      for (const Cell& up : levels_[li - 1].cells)
        max_kids = std::max(max_kids, static_cast<int>(up.kids.size()));
  }

  // conservative inner radius: largest grid value whose ball stays inside the
  // cell for every sampled interior cell
  double best_c = 0.5;
  std::mt19937_64 crng = make_rng(params_.seed, 0x1221);
  for (int li = 0; li < n_gens; ++li) {
    int gen = params_.gen_min + li;
    auto& cells = levels_[li].cells;
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(cells.size());
         j += std::max<std::int64_t>(1, cells.size() / 40)) {
      if (cells[j].partial) continue;
      double ok_c = 0;
      for (double ctry : {0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.02}) {
        double rad = ctry * scale(gen);
        bool inside = true;
        int accepted = 0;
        while (accepted < 48 && inside) {
          Vec q = box_sample(rad, crng);  // box Q(2 rad) covers B(1, rad)
          if (base_norm(spec_, q) > rad) continue;
          ++accepted;
          Vec p = base_mul(spec_, cells[j].center, q);
          if (base_norm(spec_, p) > W || assign(p, gen) != j) inside = false;
        }
        if (inside) {
          ok_c = ctry;
          break;
        }
      }
      if (ok_c > 0) best_c = std::min(best_c, ok_c);
    }
  }
  c_ = best_c;
  C1_ = std::max({3.0, std::ceil(outer_ * 1.05), double(max_kids), std::ceil(worst_ratio)});
}

const NetCubeSystem::Cell& NetCubeSystem::cell(const CubeRef& q) const {
  check_gen(q.gen);
  const auto& cells = levels_[q.gen - params_.gen_min].cells;
  if (q.id < 0 || q.id >= static_cast<std::int64_t>(cells.size()))
    fail(ErrorCode::config, "unknown net cell");
  return cells[q.id];
}

std::int64_t NetCubeSystem::assign(const Vec& n, int gen) const {
  std::int64_t idx = -1;
  for (int li = 0; li <= gen - params_.gen_min; ++li) {
    const auto& cells = levels_[li].cells;
    std::int64_t best = -1;
    double bd = 0;
    if (li == 0) {
      for (std::int64_t j = 0; j < static_cast<std::int64_t>(cells.size()); ++j) {
        double d = dist_base(spec_, n, cells[j].center);
        if (best < 0 || d < bd - 1e-15) {
          bd = d;
          best = j;
        }
      }
    } else {
      for (std::int64_t k : levels_[li - 1].cells[idx].kids) {
        double d = dist_base(spec_, n, cells[k].center);
        if (best < 0 || d < bd - 1e-15) {
          bd = d;
          best = k;
        }
      }
      if (best < 0) best = 0;
    }
    idx = best;
  }
  return idx;
}

CubeRef NetCubeSystem::cube_at(const Vec& n, int gen) const {
  check_gen(gen);
  if (n.size() != 3) fail(ErrorCode::config, "cube_at: dimension mismatch");
  if (base_norm(spec_, n) > params_.window_radius) fail(ErrorCode::resource, "point outside window");
  return CubeRef{gen, assign(n, gen)};
}

CubeRef NetCubeSystem::parent(const CubeRef& q) const {
  check_gen(q.gen - 1);
  return CubeRef{q.gen - 1, cell(q).parent};
}

std::vector<CubeRef> NetCubeSystem::children(const CubeRef& q) const {
  check_gen(q.gen + 1);
  std::vector<CubeRef> out;
  for (std::int64_t k : cell(q).kids) out.push_back(CubeRef{q.gen + 1, k});
  std::sort(out.begin(), out.end());
  return out;
}

Vec NetCubeSystem::center(const CubeRef& q) const { return cell(q).center; }

bool NetCubeSystem::contains(const CubeRef& q, const Vec& n) const {
  if (base_norm(spec_, n) > params_.window_radius) return false;
  return assign(n, q.gen) == q.id;
}

double NetCubeSystem::mu_base(const CubeRef& q) const { return cell(q).mu; }

std::vector<CubeRef> NetCubeSystem::cubes_meeting_window(int gen) const {
  check_gen(gen);
  std::vector<CubeRef> out;
  const auto& cells = levels_[gen - params_.gen_min].cells;
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(cells.size()); ++j)
    out.push_back(CubeRef{gen, j});
  return out;
}

Vec NetCubeSystem::sample_point(const CubeRef& q, std::mt19937_64& rng) const {
  const Cell& cl = cell(q);
  if (!cl.reservoir.empty()) {
    std::uniform_int_distribution<size_t> pick(0, cl.reservoir.size() - 1);
    return cl.reservoir[pick(rng)];
  }
  for (int tries = 0; tries < 400; ++tries) {
    Vec off = box_sample(std::max(outer_, 1.0) * scale(q.gen) / 2.0, rng);
    Vec p = base_mul(spec_, cl.center, off);
    if (base_norm(spec_, p) <= params_.window_radius && assign(p, q.gen) == q.id) return p;
  }
  fail(ErrorCode::internal, "could not sample the net cell");
}

bool NetCubeSystem::partial(const CubeRef& q) const { return cell(q).partial; }

std::unique_ptr<CubeSystem> make_cube_system(const FlowMeasure& mu, const CubeSystemParams& params) {
  if (mu.Z.spec.kind == BaseKind::abelian)
    return std::make_unique<AbelianDyadicSystem>(mu, params);
  return std::make_unique<NetCubeSystem>(mu, params);
}

std::string cube_system_dump(const CubeSystem& sys, int gen_lo, int gen_hi) {
  std::ostringstream out;
  for (int g = gen_lo; g <= gen_hi; ++g) {
    for (const CubeRef& q : sys.cubes_meeting_window(g)) {
      nlohmann::ordered_json rec;
      rec["generation"] = q.gen;
      rec["id"] = q.id;
      Vec c = sys.center(q);
      std::vector<double> cc(c.size());
      for (int d = 0; d < c.size(); ++d) cc[d] = c[d];
      rec["center"] = cc;
      rec["parent_id"] = g > sys.gen_min() ? sys.parent(q).id : -1;
      nlohmann::ordered_json flags = nlohmann::ordered_json::array();
      if (sys.partial(q)) flags.push_back("partial");
      rec["flags"] = flags;
      out << rec.dump() << '\n';
    }
  }
  return out.str();
}

}  // namespace czflow
