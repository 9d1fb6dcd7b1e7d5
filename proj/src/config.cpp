#include "config.hpp"

#include <json.hpp>

namespace czflow {

using nlohmann::ordered_json;

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::config, std::string("config parse: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("group")) {
      const auto& g = j["group"];
      cfg.group_kind = g.value("kind", cfg.group_kind);
      cfg.m = g.value("m", cfg.m);
    }
    if (j.contains("beta")) cfg.beta = j["beta"].get<std::vector<double>>();
    cfg.measure = j.value("measure", cfg.measure);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.window_radius = j.value("window_radius", cfg.window_radius);
    if (j.contains("window_t")) {
      cfg.window_t_lo = j["window_t"].at(0).get<double>();
      cfg.window_t_hi = j["window_t"].at(1).get<double>();
    }
    cfg.r0 = j.value("r0", cfg.r0);
    cfg.gen_min = j.value("gen_min", cfg.gen_min);
    cfg.gen_max = j.value("gen_max", cfg.gen_max);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.samples = j.value("samples", cfg.samples);
    cfg.doubling_cap = j.value("doubling_cap", cfg.doubling_cap);
    cfg.C3 = j.value("C3", cfg.C3);
    cfg.out = j.value("out", cfg.out);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::config, std::string("config fields: ") + e.what());
  }
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["group"] = {{"kind", group_kind}, {"m", m}};
  j["beta"] = beta;
  j["measure"] = measure;
  j["delta"] = delta;
  j["gamma"] = gamma;
  j["lambda"] = lambda;
  j["window_radius"] = window_radius;
  j["window_t"] = {window_t_lo, window_t_hi};
  j["r0"] = r0;
  j["gen_min"] = gen_min;
  j["gen_max"] = gen_max;
  j["seed"] = seed;
  j["samples"] = samples;
  j["doubling_cap"] = doubling_cap;
  j["C3"] = C3;
  j["out"] = out;
  return j.dump(2);
}

std::unique_ptr<Workspace> Workspace::make(const ExperimentConfig& cfg_in) {
  auto ws = std::unique_ptr<Workspace>(new Workspace());
  ExperimentConfig cfg = cfg_in;

  GroupSpec spec;
  if (cfg.group_kind == "abelian")
    spec = GroupSpec::abelian(cfg.m);
  else if (cfg.group_kind == "heisenberg")
    spec = GroupSpec::heisenberg();
  else
    fail(ErrorCode::config, "unknown group kind: " + cfg.group_kind);

  int beta_len = spec.kind == BaseKind::abelian ? spec.m : 2;
  if (cfg.beta.empty()) cfg.beta.assign(beta_len, 0.0);
  if (static_cast<int>(cfg.beta.size()) != beta_len)
    fail(ErrorCode::config, "beta length does not match the group");
  Vec beta(beta_len);
  for (int i = 0; i < beta_len; ++i) beta[i] = cfg.beta[i];
  ws->Z_ = VerticalField::make(spec, beta);

  if (cfg.measure == "haar") {
    ws->mu_ = FlowMeasure::haar(ws->Z_);
  } else if (cfg.measure.rfind("power:s=", 0) == 0) {
    double s = 0;
    try {
      s = std::stod(cfg.measure.substr(8));
    } catch (const std::exception&) {
      fail(ErrorCode::config, "bad power-weight exponent in measure preset");
    }
    ws->mu_ = FlowMeasure::power(ws->Z_, s);
  } else {
    fail(ErrorCode::config, "unknown measure preset: " + cfg.measure);
  }

  if (cfg.window_radius <= 0)
    cfg.window_radius = spec.kind == BaseKind::abelian ? 64.0 : 8.0;
  if (cfg.gen_min == 0 && cfg.gen_max == 0) {
    if (spec.kind == BaseKind::abelian) {
      cfg.gen_min = -60;
      cfg.gen_max = 60;
    } else {
      cfg.gen_min = -3;
      cfg.gen_max = 0;
    }
  }
  if (!ws->mu_.is_uniform()) {
    // quadrature-backed cube systems must certify constants by enumeration
    if (cfg.gen_min == -60) cfg.gen_min = -8;
    if (cfg.gen_max == 60) cfg.gen_max = 6;
    if (cfg.window_radius > 64.0) fail(ErrorCode::config, "power-weight window too large");
  }

  ws->adm_ = AdmissibilityParams{cfg.delta, cfg.gamma, cfg.lambda};
  ws->adm_.validate();

  CubeSystemParams cp;
  cp.delta = cfg.delta;
  cp.window_radius = cfg.window_radius;
  cp.gen_min = cfg.gen_min;
  cp.gen_max = cfg.gen_max;
  cp.seed = cfg.seed;
  ws->cubes_ = make_cube_system(ws->mu_, cp);

  if (!ws->mu_.is_uniform()) {
    DoublingData d = estimate_doubling(ws->mu_, 2.0, cfg.window_radius, 400, cfg.seed);
    if (d.constant > cfg.doubling_cap)
      fail(ErrorCode::config, "measure preset exceeds the configured doubling cap");
  }

  ws->cfg_ = cfg;
  return ws;
}

double Workspace::C2() const {
  return 3.0 * std::max(adm_.gamma + 1.0 + std::log(adm_.lambda),
                        adm_.lambda * std::exp(3.0));
}

DoublingData Workspace::doubling_at_cstar() const {
  return estimate_doubling(mu_, Cstar() / cubes_->inner_c(), cfg_.window_radius, 400, cfg_.seed);
}

double Workspace::equivalence_D() const {
  return std::max(2.0 * norm2(Z_.beta) + 1.0, 2.0);
}

FamilyWindow Workspace::family_window() const {
  return FamilyWindow{cfg_.window_radius, Interval{cfg_.window_t_lo, cfg_.window_t_hi}};
}

DyadicFamily Workspace::build_family(int neg_depth, int pos_depth) const {
  Cylinder root = default_root(cubes_.get(), adm_, cfg_.r0);
  return DyadicFamily(Z_, mu_, cubes_.get(), adm_, root, neg_depth, pos_depth, family_window());
}

std::string Workspace::resolved_json() const {
  ordered_json j = ordered_json::parse(cfg_.to_json());
  DoublingData d = doubling_at_cstar();
  ordered_json consts;
  consts["C1"] = C1();
  consts["C2"] = C2();
  consts["C3"] = cfg_.C3;
  consts["C4"] = 2.0 * d.constant;
  consts["Cstar"] = Cstar();
  consts["cube_inner_c"] = cubes_->inner_c();
  consts["doubling_ratio"] = d.ratio;
  consts["doubling_constant"] = d.constant;
  consts["doubling_exact"] = d.exact;
  consts["quadrature_rel_tol"] = 1e-6;
  if (spec().kind == BaseKind::abelian) consts["equivalence_D"] = equivalence_D();
  j["resolved_constants"] = consts;
  return j.dump(2);
}

}  // namespace czflow
