#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "measure.hpp"

namespace czflow {

struct CubeRef {
  int gen = 0;
  std::int64_t id = 0;
  friend bool operator==(const CubeRef& a, const CubeRef& b) { return a.gen == b.gen && a.id == b.id; }
  friend bool operator<(const CubeRef& a, const CubeRef& b) {
    return a.gen != b.gen ? a.gen < b.gen : a.id < b.id;
  }
};

struct CubeSystemParams {
  double delta = 0.5;
  double window_radius = 64.0;
  int gen_min = -60;  // coarsest generation served
  int gen_max = 60;   // finest generation served
  std::uint64_t seed = 1;
  // net construction knobs (H^1 only)
  int net_candidates = 200000;
  int measure_samples = 1000000;
};

/// A hierarchy of dyadic cells on (N, d_N, mu_N): disjoint cells per
/// generation, unique parents, eccentricity balls B(n_Q, c d^k) c Q c
/// B(n_Q, C1 d^k) and measure control mu(parent) <= C1 mu(child).
/// Queries outside the configured window or generation range fail loudly.
class CubeSystem {
 public:
  virtual ~CubeSystem() = default;

  const GroupSpec& spec() const { return spec_; }
  const FlowMeasure& measure() const { return mu_; }
  double delta() const { return params_.delta; }
  double inner_c() const { return c_; }
  double C1() const { return C1_; }
  double window_radius() const { return params_.window_radius; }
  int gen_min() const { return params_.gen_min; }
  int gen_max() const { return params_.gen_max; }
  double scale(int gen) const { return std::pow(params_.delta, gen); }

  virtual CubeRef cube_at(const Vec& n, int gen) const = 0;
  virtual CubeRef parent(const CubeRef& q) const = 0;
  virtual std::vector<CubeRef> children(const CubeRef& q) const = 0;
  virtual Vec center(const CubeRef& q) const = 0;
  virtual bool contains(const CubeRef& q, const Vec& n) const = 0;
  virtual double mu_base(const CubeRef& q) const = 0;
  /// Cells of one generation meeting the window, in deterministic id order.
  virtual std::vector<CubeRef> cubes_meeting_window(int gen) const = 0;
  virtual Vec sample_point(const CubeRef& q, std::mt19937_64& rng) const = 0;
  /// True when the cell may extend past the window boundary.
  virtual bool partial(const CubeRef& q) const = 0;

  /// Ancestor of q at coarser generation gen (q itself when generations match).
  CubeRef ancestor(const CubeRef& q, int gen) const;
  enum class Relation { disjoint, equal, first_contains_second, second_contains_first };
  Relation relation(const CubeRef& a, const CubeRef& b) const;

 protected:
  CubeSystem(const GroupSpec& spec, const FlowMeasure& mu, const CubeSystemParams& params)
      : spec_(spec), mu_(mu), params_(params) {}
  void check_gen(int gen) const {
    if (gen < params_.gen_min || gen > params_.gen_max)
      fail(ErrorCode::resource, "cube generation outside configured range");
  }

  GroupSpec spec_;
  FlowMeasure mu_;
  CubeSystemParams params_;
  double c_ = 0.5;
  double C1_ = 3.0;
};

/// Exact half-open dyadic cubes on R^m with delta = 1/2; centers are cube
/// midpoints, c = 1/2, C1 = max(3, 2^m, sqrt(m)) enlarged by the certified
/// parent/child measure ratio when the density is not uniform.
class AbelianDyadicSystem : public CubeSystem {
 public:
  AbelianDyadicSystem(const FlowMeasure& mu, const CubeSystemParams& params);

  CubeRef cube_at(const Vec& n, int gen) const override;
  CubeRef parent(const CubeRef& q) const override;
  std::vector<CubeRef> children(const CubeRef& q) const override;
  Vec center(const CubeRef& q) const override;
  bool contains(const CubeRef& q, const Vec& n) const override;
  double mu_base(const CubeRef& q) const override;
  std::vector<CubeRef> cubes_meeting_window(int gen) const override;
  Vec sample_point(const CubeRef& q, std::mt19937_64& rng) const override;
  bool partial(const CubeRef&) const override { return false; }

  void box(const CubeRef& q, Vec& lo, Vec& hi) const;

 private:
  std::int64_t lat_min(int gen) const;
  std::int64_t lat_count(int gen) const;
  CubeRef pack(int gen, const std::array<std::int64_t, kMaxBaseDim>& lat) const;
  std::array<std::int64_t, kMaxBaseDim> unpack(const CubeRef& q) const;

  mutable std::map<CubeRef, double> mu_cache_;  // only used for non-uniform densities
};

/// Hierarchical maximal-net cells for the Koranyi geometry on H^1 (uniform
/// Haar measure).  Nets are nested across generations; membership descends by
/// nearest net center among the children of the current cell, ties resolved
/// toward the lowest id.  Constants (c, C1) are certified empirically at
/// build time and recorded.
class NetCubeSystem : public CubeSystem {
 public:
  NetCubeSystem(const FlowMeasure& mu, const CubeSystemParams& params);

  CubeRef cube_at(const Vec& n, int gen) const override;
  CubeRef parent(const CubeRef& q) const override;
  std::vector<CubeRef> children(const CubeRef& q) const override;
  Vec center(const CubeRef& q) const override;
  bool contains(const CubeRef& q, const Vec& n) const override;
  double mu_base(const CubeRef& q) const override;
  std::vector<CubeRef> cubes_meeting_window(int gen) const override;
  Vec sample_point(const CubeRef& q, std::mt19937_64& rng) const override;
  bool partial(const CubeRef& q) const override;

  double empirical_c() const { return c_; }
  double empirical_outer() const { return outer_; }

 private:
  struct Cell {
    Vec center;
    std::int64_t parent = -1;
    std::vector<std::int64_t> kids;
    double mu = 0;
    bool partial = false;
    std::vector<Vec> reservoir;  // interior points kept from the measure pass
  };
  struct Level {
    std::vector<Cell> cells;
  };

  const Cell& cell(const CubeRef& q) const;
  std::int64_t assign(const Vec& n, int gen) const;

  std::vector<Level> levels_;  // index 0 == gen_min
  double outer_ = 0;           // certified sup of d(n, n_Q)/scale over samples
  std::vector<double> outer_by_level_;
};

std::unique_ptr<CubeSystem> make_cube_system(const FlowMeasure& mu, const CubeSystemParams& params);

/// JSON-lines dump of the cells meeting the window, one record per cell:
/// {generation, id, center, parent_id, flags}.
std::string cube_system_dump(const CubeSystem& sys, int gen_lo, int gen_hi);

}  // namespace czflow
