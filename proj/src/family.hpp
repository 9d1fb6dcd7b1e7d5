#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "cylinder.hpp"

namespace czflow {

enum class NodeRole { chain_sibling, strip, strip_descendant, positive };

const char* role_name(NodeRole role);

enum class AscentStep { lateral, up, down };

struct FamilyNode {
  Cylinder cyl;
  int level = 0;  // dyadic generation within the family
  std::int64_t id = -1;
  std::int64_t parent = -1;
  NodeRole role = NodeRole::chain_sibling;
  std::vector<std::int64_t> children;
};

struct FamilyWindow {
  double spatial_radius = 64.0;
  Interval t{-1.9, 1.9};
};

/// The dyadic family of admissible cylinders: levels -neg..+pos, each level a
/// partition of the window up to null sets, with unique parents and measure
/// control mu(p(P)) <= C1 mu(P).  Negative levels follow the ascent chain
/// P_{k+1} = p(P_k) (lateral parent whenever admissible, otherwise
/// alternating up/down starting with up); positive levels iterate sons.
class DyadicFamily {
 public:
  DyadicFamily(const VerticalField& Z, const FlowMeasure& mu, const CubeSystem* cubes,
               const AdmissibilityParams& adm, const Cylinder& P0, int neg_depth, int pos_depth,
               const FamilyWindow& window);

  const VerticalField& field() const { return Z_; }
  const FlowMeasure& measure() const { return mu_; }
  const CubeSystem* cubes() const { return cubes_; }
  const AdmissibilityParams& admissibility() const { return adm_; }
  const FamilyWindow& window() const { return window_; }
  int level_min() const { return -neg_depth_; }
  int level_max() const { return pos_depth_; }

  const FamilyNode& node(std::int64_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::int64_t>& level(int lv) const;

  /// The unique level-lv cylinder containing x; resource error off the window
  /// or on a null boundary.
  std::int64_t locate(const GroupPoint& x, int lv) const;

  std::int64_t parent_of(std::int64_t id) const;
  const std::vector<std::int64_t>& children_of(std::int64_t id) const;

  double node_measure(std::int64_t id) const;  // cached 2 mu_N(Q) log r

  /// Chain cylinder P_k and the ascent step that produced P_{k+1}.
  const std::vector<Cylinder>& chain() const { return chain_; }
  const std::vector<AscentStep>& steps() const { return steps_; }

  /// Ascends from a top-level node beyond the stored range, following the
  /// ascent schedule; used by the stopping-time search at small alpha.
  Cylinder virtual_ancestor(const Cylinder& P, int steps_above_top, AscentStep* last = nullptr) const;

  void dump_jsonl(const std::string& path) const;
  std::string summary_json() const;

  /// Coarsest and finest cube generations appearing among the stored bases.
  std::pair<int, int> base_generation_range() const;

  /// Fraction of window samples covered at every stored level (boundary
  /// effects show up here); deterministic for a fixed seed.
  double coverage_estimate(int samples = 4096, std::uint64_t seed = 1) const;

 private:
  std::int64_t add_node(const Cylinder& cyl, int lv, std::int64_t parent, NodeRole role);
  bool meets_window(const Cylinder& cyl) const;
  void index_node(std::int64_t id);

  VerticalField Z_;
  FlowMeasure mu_;
  const CubeSystem* cubes_;
  AdmissibilityParams adm_;
  FamilyWindow window_;
  int neg_depth_, pos_depth_;

  std::vector<FamilyNode> nodes_;
  std::map<int, std::vector<std::int64_t>> levels_;
  // per (level, base generation, cube id): candidate nodes for point location
  std::map<std::pair<int, int>, std::unordered_map<std::int64_t, std::vector<std::int64_t>>> index_;
  std::vector<Cylinder> chain_;
  std::vector<AscentStep> steps_;
  mutable std::vector<double> measures_;
};

/// Default root: anchor a = 1, radius r0, base cube containing 1_N at the
/// coarsest generation k0 with r0^2 <= delta^k0 <= lambda r0^gamma.
Cylinder default_root(const CubeSystem* cubes, const AdmissibilityParams& adm, double r0);

}  // namespace czflow
