// czflow-cli: experiment driver over the czflow C API.
//
// Exit codes: 0 ok, 2 configuration error, 3 window/resource exhaustion,
// 4 a certified bound failed.

#include <czflow/czflow.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> window_radius, delta, gamma, lambda;
  std::optional<int> samples;
};

std::string merged_config(const GlobalFlags& g) {
  ordered_json j = ordered_json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << g.config_path << "\n";
      std::exit(2);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      j = ordered_json::parse(buf.str());
    } catch (const std::exception& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      std::exit(2);
    }
  }
  if (g.seed) j["seed"] = *g.seed;
  if (g.out) j["out"] = *g.out;
  if (g.window_radius) j["window_radius"] = *g.window_radius;
  if (g.delta) j["delta"] = *g.delta;
  if (g.gamma) j["gamma"] = *g.gamma;
  if (g.lambda) j["lambda"] = *g.lambda;
  if (g.samples) j["samples"] = *g.samples;
  return j.dump();
}

int fail_with(czf_status st) {
  std::cerr << "error: " << czf_last_error() << "\n";
  return static_cast<int>(st);
}

struct ContextGuard {
  czf_context* ctx = nullptr;
  ~ContextGuard() { czf_context_destroy(ctx); }
};

struct FamilyGuard {
  czf_family* fam = nullptr;
  ~FamilyGuard() { czf_family_destroy(fam); }
};

bool parse_point(const std::string& text, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "e")
      out.push_back(M_E);
    else if (tok == "pi")
      out.push_back(M_PI);
    else {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') return false;
      out.push_back(v);
    }
  }
  return !out.empty();
}

// 12 significant digits, fixed for ordinary magnitudes
std::string format_scalar(double v) {
  double mag = std::abs(v);
  char buf[64];
  if (v == 0.0 || (mag >= 1e-4 && mag < 1e6)) {
    int decimals = 11;
    if (mag >= 1.0) decimals = 11 - static_cast<int>(std::floor(std::log10(mag)));
    if (decimals < 0) decimals = 0;
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  } else {
    std::snprintf(buf, sizeof buf, "%.11e", v);
  }
  return buf;
}

std::string default_out(const GlobalFlags& g, const char* fallback) {
  return g.out ? *g.out : std::string(fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calderon-Zygmund flow-cylinder toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand name

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--out", g.out, "output path");
  app.add_option("--window-radius", g.window_radius, "spatial window radius");
  app.add_option("--delta", g.delta, "cube scale ratio");
  app.add_option("--gamma", g.gamma, "admissibility exponent (>= 5)");
  app.add_option("--lambda", g.lambda, "admissibility factor (> e^3/delta)");
  app.add_option("--samples", g.samples, "sampling budget");

  auto* cmd_distance = app.add_subcommand("distance", "evaluate dN, dG or dZ");
  std::string metric = "dG", x_text, y_text;
  cmd_distance->add_option("--metric", metric, "dN | dG | dZ")->required();
  cmd_distance->add_option("--x", x_text, "first point: n coordinates, then a")->required();
  cmd_distance->add_option("--y", y_text, "second point")->required();

  auto* cmd_partition = app.add_subcommand("partition", "build and dump a dyadic family");
  int neg = 3, pos = 3;
  std::string dump_cubes;
  cmd_partition->add_option("--neg", neg, "ascent generations");
  cmd_partition->add_option("--pos", pos, "sons generations");
  cmd_partition->add_option("--dump-cubes", dump_cubes, "also dump the cube cells (JSON lines)");

  auto* cmd_czdecomp = app.add_subcommand("czdecomp", "stopping-time decomposition report");
  std::string function_spec = "random:8";
  double alpha = 1.0;
  int cz_neg = 3, cz_pos = 5;
  cmd_czdecomp->add_option("--function", function_spec,
                           "random:<n> | indicator:<level>:<index> | converse:<level>:<index>");
  cmd_czdecomp->add_option("--alpha", alpha, "decomposition level");
  cmd_czdecomp->add_option("--neg", cz_neg, "family ascent generations");
  cmd_czdecomp->add_option("--pos", cz_pos, "family sons generations");

  auto* cmd_weak11 = app.add_subcommand("weak11", "maximal-function level-set campaign");
  int n_functions = 12, terms = 8, w_neg = 3, w_pos = 5;
  cmd_weak11->add_option("--functions", n_functions, "number of random functions");
  cmd_weak11->add_option("--terms", terms, "terms per function");
  cmd_weak11->add_option("--neg", w_neg, "family ascent generations");
  cmd_weak11->add_option("--pos", w_pos, "family sons generations");

  auto* cmd_counter = app.add_subcommand("counterexample", "divergence table in log space");
  int l_max = 4;
  double K = 1.0;
  cmd_counter->add_option("--lmax", l_max, "last row index (<= 6)");
  cmd_counter->add_option("--K", K, "neighborhood factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string cfg = merged_config(g);
  ContextGuard ctx;
  if (czf_status st = czf_context_create(cfg.c_str(), &ctx.ctx); st != CZF_OK)
    return fail_with(st);

  if (*cmd_distance) {
    std::vector<double> x, y;
    if (!parse_point(x_text, x) || !parse_point(y_text, y)) {
      std::cerr << "malformed point coordinates\n";
      return 2;
    }
    double d = 0;
    if (czf_status st = czf_distance(ctx.ctx, metric.c_str(), x.data(), x.size(), y.data(),
                                     y.size(), &d);
        st != CZF_OK)
      return fail_with(st);
    std::cout << format_scalar(d) << "\n";
    return 0;
  }

  if (*cmd_partition) {
    FamilyGuard fam;
    if (czf_status st = czf_family_build(ctx.ctx, neg, pos, &fam.fam); st != CZF_OK)
      return fail_with(st);
    std::string path = default_out(g, "family.jsonl");
    char* summary = nullptr;
    if (czf_status st = czf_family_dump(fam.fam, path.c_str(), &summary); st != CZF_OK)
      return fail_with(st);
    if (!dump_cubes.empty())
      if (czf_status st = czf_family_dump_cubes(fam.fam, dump_cubes.c_str()); st != CZF_OK)
        return fail_with(st);
    std::cout << summary << "\n";
    czf_string_free(summary);
    return 0;
  }

  if (*cmd_czdecomp) {
    FamilyGuard fam;
    if (czf_status st = czf_family_build(ctx.ctx, cz_neg, cz_pos, &fam.fam); st != CZF_OK)
      return fail_with(st);
    std::string path = default_out(g, "czdecomp.json");
    int ok = 0;
    if (czf_status st =
            czf_cz_decompose(fam.fam, function_spec.c_str(), alpha, path.c_str(), &ok);
        st != CZF_OK)
      return fail_with(st);
    std::cout << "report: " << path << (ok ? " (all bounds hold)" : " (BOUND FAILED)") << "\n";
    return ok ? 0 : 4;
  }

  if (*cmd_weak11) {
    FamilyGuard fam;
    if (czf_status st = czf_family_build(ctx.ctx, w_neg, w_pos, &fam.fam); st != CZF_OK)
      return fail_with(st);
    std::string path = default_out(g, "weak11.csv");
    int ok = 0;
    if (czf_status st = czf_weak11(fam.fam, n_functions, terms, path.c_str(), &ok); st != CZF_OK)
      return fail_with(st);
    std::cout << "table: " << path << (ok ? " (all rows within bound)" : " (BOUND FAILED)")
              << "\n";
    return ok ? 0 : 4;
  }

  if (*cmd_counter) {
    std::string path = default_out(g, "counterexample.csv");
    int ok = 0;
    if (czf_status st = czf_counterexample(ctx.ctx, l_max, K, path.c_str(), &ok); st != CZF_OK)
      return fail_with(st);
    std::cout << "table: " << path << (ok ? " (chain certified)" : " (CHAIN FAILED)") << "\n";
    return ok ? 0 : 4;
  }

  return 2;
}
