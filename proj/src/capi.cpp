#include "czflow/czflow.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <sstream>

#include "config.hpp"
#include "counterexample.hpp"
#include "function.hpp"
#include "io_util.hpp"
#include "maximal.hpp"

using namespace czflow;
using nlohmann::ordered_json;

struct czf_context {
  std::shared_ptr<Workspace> ws;
};

struct czf_family {
  std::shared_ptr<Workspace> ws;  // keeps the cube system alive
  std::unique_ptr<DyadicFamily> fam;
};

namespace {

thread_local std::string g_last_error;

czf_status to_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::config: return CZF_ERR_CONFIG;
    case ErrorCode::resource: return CZF_ERR_RESOURCE;
    case ErrorCode::certificate: return CZF_ERR_CERTIFICATE;
    case ErrorCode::internal: return CZF_ERR_INTERNAL;
  }
  return CZF_ERR_INTERNAL;
}

template <typename F>
czf_status wrap(F&& body) {
  try {
    body();
    return CZF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CZF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CZF_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

SimpleFunction make_function(const DyadicFamily& fam, const std::string& spec, std::uint64_t seed,
                             double* alpha_override, std::int64_t* converse_node) {
  auto parse_ref = [&](const std::string& body) {
    auto colon = body.find(':');
    if (colon == std::string::npos) fail(ErrorCode::config, "function spec needs level:index");
    int lv = std::stoi(body.substr(0, colon));
    std::size_t idx = std::stoul(body.substr(colon + 1));
    const auto& ids = fam.level(lv);
    if (idx >= ids.size()) fail(ErrorCode::config, "function spec index out of range");
    return ids[idx];
  };
  if (spec.rfind("random:", 0) == 0) {
    int n = std::stoi(spec.substr(7));
    if (n < 1 || n > 64) fail(ErrorCode::config, "random function needs 1..64 terms");
    std::mt19937_64 rng = make_rng(seed, 0xf00d);
    return random_simple_function(fam, n, rng);
  }
  if (spec.rfind("indicator:", 0) == 0) {
    std::int64_t node = parse_ref(spec.substr(10));
    return SimpleFunction(&fam, {{1.0, node}});
  }
  if (spec.rfind("converse:", 0) == 0) {
    // indicator of a son S of P0 at alpha = mu(S)/mu(R), R the minimal
    // proper superset of P0; the stopping family must be exactly {P0}
    std::int64_t p0 = parse_ref(spec.substr(9));
    const auto& kids = fam.children_of(p0);
    if (kids.empty()) fail(ErrorCode::config, "converse: node has no stored sons");
    std::int64_t S = kids.front();
    std::int64_t R = fam.parent_of(p0);
    if (alpha_override) *alpha_override = fam.node_measure(S) / fam.node_measure(R);
    if (converse_node) *converse_node = p0;
    return SimpleFunction(&fam, {{1.0, S}});
  }
  fail(ErrorCode::config, "unknown function spec: " + spec);
}

}  // namespace

extern "C" {

const char* czf_last_error(void) { return g_last_error.c_str(); }

czf_status czf_context_create(const char* config_json, czf_context** out) {
  return wrap([&] {
    if (!out) fail(ErrorCode::config, "null output pointer");
    std::string text = (config_json && *config_json) ? config_json : "{}";
    ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
    auto ctx = std::make_unique<czf_context>();
    ctx->ws = Workspace::make(cfg);
    *out = ctx.release();
  });
}

void czf_context_destroy(czf_context* ctx) { delete ctx; }

czf_status czf_context_resolved_config(czf_context* ctx, char** json_out) {
  return wrap([&] {
    if (!ctx || !json_out) fail(ErrorCode::config, "null argument");
    *json_out = dup_string(ctx->ws->resolved_json());
  });
}

void czf_string_free(char* s) { std::free(s); }

czf_status czf_distance(czf_context* ctx, const char* metric, const double* x, size_t x_len,
                        const double* y, size_t y_len, double* out) {
  return wrap([&] {
    if (!ctx || !metric || !x || !y || !out) fail(ErrorCode::config, "null argument");
    const GroupSpec& spec = ctx->ws->spec();
    size_t want = static_cast<size_t>(spec.base_dim()) + 1;
    if (x_len != want || y_len != want)
      fail(ErrorCode::config, "point length must be base_dim + 1");
    GroupPoint px, py;
    px.n = Vec(spec.base_dim());
    py.n = Vec(spec.base_dim());
    for (int d = 0; d < spec.base_dim(); ++d) {
      px.n[d] = x[d];
      py.n[d] = y[d];
    }
    px.a = x[want - 1];
    py.a = y[want - 1];
    std::string m(metric);
    if (m == "dN") {
      *out = dist_base(spec, px.n, py.n);
    } else if (m == "dG") {
      if (px.a <= 0 || py.a <= 0) fail(ErrorCode::config, "vertical coordinate must be positive");
      *out = dist_G(spec, px, py);
    } else if (m == "dZ") {
      if (px.a <= 0 || py.a <= 0) fail(ErrorCode::config, "vertical coordinate must be positive");
      *out = dist_Z(ctx->ws->field(), px, py);
    } else {
      fail(ErrorCode::config, "unknown metric: " + m);
    }
  });
}

czf_status czf_family_build(czf_context* ctx, int neg_depth, int pos_depth, czf_family** out) {
  return wrap([&] {
    if (!ctx || !out) fail(ErrorCode::config, "null argument");
    auto fam = std::make_unique<czf_family>();
    fam->ws = ctx->ws;
    fam->fam = std::make_unique<DyadicFamily>(ctx->ws->build_family(neg_depth, pos_depth));
    *out = fam.release();
  });
}

void czf_family_destroy(czf_family* fam) { delete fam; }

czf_status czf_family_dump(czf_family* fam, const char* path, char** summary_json_out) {
  return wrap([&] {
    if (!fam || !path) fail(ErrorCode::config, "null argument");
    fam->fam->dump_jsonl(path);
    if (summary_json_out) *summary_json_out = dup_string(fam->fam->summary_json());
  });
}

czf_status czf_family_dump_cubes(czf_family* fam, const char* path) {
  return wrap([&] {
    if (!fam || !path) fail(ErrorCode::config, "null argument");
    auto [lo, hi] = fam->fam->base_generation_range();
    write_atomic(path, cube_system_dump(*fam->fam->cubes(), lo, hi));
  });
}

czf_status czf_cz_decompose(czf_family* fam, const char* function_spec, double alpha,
                            const char* out_path, int* certificate_ok) {
  return wrap([&] {
    if (!fam || !function_spec || !out_path) fail(ErrorCode::config, "null argument");
    const Workspace& ws = *fam->ws;
    double alpha_eff = alpha;
    std::int64_t converse_node = -1;
    SimpleFunction f = make_function(*fam->fam, function_spec, ws.config().seed,
                                     &alpha_eff, &converse_node);
    if (converse_node < 0 && !(alpha > 0)) fail(ErrorCode::config, "alpha must be positive");
    DecompositionReport rep = cz_decompose(f, alpha_eff, ws.C4(), 4096, ws.config().seed);

    ordered_json j;
    j["alpha"] = rep.alpha;
    j["function"] = {{"spec", function_spec},
                     {"terms", f.terms().size()},
                     {"norm1", rep.norm1},
                     {"sup", f.sup_abs()}};
    ordered_json stops = ordered_json::array();
    for (const StoppingEntry& e : rep.stopping) {
      ordered_json s;
      s["r"] = e.cyl.r;
      s["a"] = e.cyl.a;
      s["base"] = {{"generation", e.cyl.base_gen()}, {"id", e.cyl.base.cube.id}};
      s["node"] = e.node;
      s["mu"] = e.mu;
      s["avg_abs"] = e.avg_abs;
      s["avg_signed"] = e.avg_signed;
      s["parent_avg_abs"] = e.parent_avg_abs;
      s["star_mu"] = e.star_mu;
      stops.push_back(s);
    }
    j["stopping"] = stops;
    j["bounds"] = {{"sup_good", rep.sup_good},
                   {"C1_alpha", rep.C1 * rep.alpha},
                   {"sum_bad_norm1", rep.sum_bad_norm1},
                   {"two_C1_norm1", 2.0 * rep.C1 * rep.norm1},
                   {"sum_stopping_mu", rep.sum_stopping_mu},
                   {"norm1_over_alpha", rep.norm1 / rep.alpha},
                   {"sum_star_mu", rep.sum_star_mu},
                   {"C4_norm1_over_alpha", rep.C4 * rep.norm1 / rep.alpha},
                   {"max_zero_mean_defect", rep.max_zero_mean_defect}};
    auto margin = [](double bound, double got) {
      return got > 0 ? bound / got : std::numeric_limits<double>::infinity();
    };
    j["margins"] = {{"good", margin(rep.C1 * rep.alpha, rep.sup_good)},
                    {"bad_norm", margin(2.0 * rep.C1 * rep.norm1, rep.sum_bad_norm1)},
                    {"stopping", margin(rep.norm1 / rep.alpha, rep.sum_stopping_mu)},
                    {"star", margin(rep.C4 * rep.norm1 / rep.alpha, rep.sum_star_mu)}};
    j["ok"] = {{"good", rep.ok_good},
               {"zero_mean", rep.ok_zero_mean},
               {"bad_norm", rep.ok_bad_norm},
               {"stopping", rep.ok_stopping},
               {"star", rep.ok_star}};
    if (converse_node >= 0) {
      bool single = rep.stopping.size() == 1 && rep.stopping.front().node == converse_node;
      j["converse_single_stopping"] = single;
    }
    j["config"] = ordered_json::parse(ws.resolved_json());
    write_atomic(out_path, j.dump(2) + "\n");
    if (certificate_ok) {
      bool ok = rep.all_ok();
      if (converse_node >= 0)
        ok = ok && rep.stopping.size() == 1 && rep.stopping.front().node == converse_node;
      *certificate_ok = ok ? 1 : 0;
    }
  });
}

czf_status czf_weak11(czf_family* fam, int n_functions, int terms_per_function,
                      const char* out_csv_path, int* certificate_ok) {
  return wrap([&] {
    if (!fam || !out_csv_path) fail(ErrorCode::config, "null argument");
    if (n_functions < 1 || terms_per_function < 1)
      fail(ErrorCode::config, "campaign needs positive sizes");
    const Workspace& ws = *fam->ws;
    std::vector<SimpleFunction> fns;
    for (int i = 0; i < n_functions; ++i) {
      std::mt19937_64 rng = make_rng(ws.config().seed, 0xab00 + i);
      fns.push_back(random_simple_function(*fam->fam, terms_per_function, rng));
    }
    Weak11Params prm;
    prm.samples_per_function = std::max(100, ws.config().samples / std::max(1, n_functions * 10));
    std::vector<Weak11Row> rows = weak11_campaign(fns, {}, ws.C2(), prm, ws.config().seed);
    std::ostringstream csv;
    csv << "function_id,alpha,level_measure,bound,margin\n";
    bool ok = true;
    for (const Weak11Row& r : rows) {
      csv << r.function_id << ',' << fmt_double(r.alpha) << ',' << fmt_double(r.level_measure)
          << ',' << fmt_double(r.bound) << ',' << fmt_double(r.margin) << '\n';
      ok = ok && r.level_measure <= r.bound * (1.0 + 1e-12);
    }
    write_atomic(out_csv_path, csv.str());
    write_atomic(std::string(out_csv_path) + ".config.json", ws.resolved_json() + "\n");
    if (certificate_ok) *certificate_ok = ok ? 1 : 0;
  });
}

czf_status czf_counterexample(czf_context* ctx, int l_max, double K, const char* out_csv_path,
                              int* certificate_ok) {
  return wrap([&] {
    if (!ctx || !out_csv_path) fail(ErrorCode::config, "null argument");
    const Workspace& ws = *ctx->ws;
    if (ws.spec().kind != BaseKind::heisenberg)
      fail(ErrorCode::config, "the divergence table targets the heisenberg group");
    CounterexampleParams prm;
    prm.r0 = ws.config().r0;
    prm.K = K;
    prm.gamma = ws.admissibility().gamma;
    prm.lambda = ws.admissibility().lambda;
    prm.cube_c = ws.cubes()->inner_c();
    prm.cube_C1 = ws.C1();
    std::vector<CounterexampleRow> rows = counterexample_table(prm, l_max);
    write_atomic(out_csv_path, counterexample_csv(rows));
    write_atomic(std::string(out_csv_path) + ".config.json", ws.resolved_json() + "\n");
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const CounterexampleRow& r = rows[i];
      ok = ok && r.link_full >= r.link_tau - 1e-9 && r.link_tau >= r.link_vertical - 1e-9 &&
           r.link_vertical >= r.link_final - 1e-9;
      ok = ok && r.log_r0_r >= 1.0 - 1e-12 && r.log_r0_r <= 2.0 + 1e-12;
      if (i > 0) ok = ok && r.log_ratio_lb > rows[i - 1].log_ratio_lb;
    }
    if (certificate_ok) *certificate_ok = ok ? 1 : 0;
  });
}

}  // extern "C"
