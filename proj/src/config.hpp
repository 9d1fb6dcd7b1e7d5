#pragma once

#include <memory>
#include <optional>
#include <string>

#include "family.hpp"

namespace czflow {

/// Experiment configuration; JSON file fields with the same names, CLI flags
/// override.  gamma >= 5 and lambda * delta > e^3 are enforced at parse time.
struct ExperimentConfig {
  std::string group_kind = "abelian";  // "abelian" | "heisenberg"
  int m = 1;
  std::vector<double> beta;            // defaults to zeros
  std::string measure = "haar";        // "haar" | "power:s=<real>"
  double delta = 0.5;
  double gamma = 5.0;
  double lambda = 2.1 * std::exp(3.0);
  double window_radius = 0;            // 0: per-group default (64 abelian, 8 H^1)
  double window_t_lo = -1.9, window_t_hi = 1.9;
  double r0 = std::exp(2.0);
  int gen_min = 0, gen_max = 0;        // 0,0: per-group defaults
  std::uint64_t seed = 1;
  int samples = 100000;
  double doubling_cap = 1.0e6;
  // certificate threshold for the anchored-ball check; sized from the
  // small-branch cosh bound sqrt(1 + C1^2 lambda^2 e^4 r) at the defaults
  double C3 = 4000.0;
  std::string out;

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json() const;
};

/// A fully assembled experiment: group, field, measure, cube system, and the
/// resolved constants every report echoes.
class Workspace {
 public:
  static std::unique_ptr<Workspace> make(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const GroupSpec& spec() const { return Z_.spec; }
  const VerticalField& field() const { return Z_; }
  const FlowMeasure& flow_measure() const { return mu_; }
  const CubeSystem* cubes() const { return cubes_.get(); }
  const AdmissibilityParams& admissibility() const { return adm_; }

  double C1() const { return cubes_->C1(); }
  double C2() const;                        // 3 max{gamma+1+log lambda, lambda e^3}
  double Cstar() const { return cubes_->C1() + std::sqrt(2.0); }
  DoublingData doubling_at_cstar() const;   // D(mu_N, C*/c)
  double C4() const { return 2.0 * doubling_at_cstar().constant; }
  double equivalence_D() const;             // max{2|beta|^2+1, 2} (abelian)

  FamilyWindow family_window() const;
  DyadicFamily build_family(int neg_depth, int pos_depth) const;

  /// Config echo plus resolved constants; embedded in every report.
  std::string resolved_json() const;

 private:
  Workspace() = default;
  ExperimentConfig cfg_;
  VerticalField Z_{GroupSpec::abelian(1), Vec(1)};
  FlowMeasure mu_{Z_, DensityKind::uniform, 0.0};
  std::unique_ptr<CubeSystem> cubes_;
  AdmissibilityParams adm_;
};

}  // namespace czflow
