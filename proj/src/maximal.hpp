#pragma once

#include "function.hpp"

namespace czflow {

/// sup over the family cylinders through x of the |f| averages; exact within
/// the stored window.
double dyadic_maximal(const SimpleFunction& f, const GroupPoint& x);

struct StoppingEntry {
  Cylinder cyl;
  std::int64_t node = -1;  // family node id, or -1 for an ancestor above the window
  double mu = 0;
  double avg_abs = 0;      // (1/mu) int |f|, > alpha
  double avg_signed = 0;   // the value g takes here
  double parent_avg_abs = 0;  // <= alpha by maximality
  double parent_mu = 0;
  double star_mu = 0;      // measure of the enclosing enlargement cylinder
};

struct DecompositionReport {
  double alpha = 0;
  double norm1 = 0;
  double C1 = 0;
  double C4 = 0;
  std::vector<StoppingEntry> stopping;

  double sup_good = 0;             // sup |g| over stopping cylinders and sampled outside points
  double sum_bad_norm1 = 0;        // sum ||b_j||_1
  double sum_stopping_mu = 0;      // sum mu(P_j)
  double sum_star_mu = 0;          // sum mu(P_j^*)
  double max_zero_mean_defect = 0; // max_j |int_{P_j} b_j|

  bool ok_good = false;       // sup |g| <= C1 alpha
  bool ok_zero_mean = false;  // defects within 1e-10
  bool ok_bad_norm = false;   // sum ||b_j||_1 <= 2 C1 ||f||_1
  bool ok_stopping = false;   // sum mu(P_j) <= ||f||_1 / alpha
  bool ok_star = false;       // sum mu(P_j^*) <= C4 ||f||_1 / alpha

  bool all_ok() const { return ok_good && ok_zero_mean && ok_bad_norm && ok_stopping && ok_star; }
};

/// Stopping-time decomposition at level alpha: maximal dyadic cylinders with
/// |f|-average above alpha, selected top-down; roots whose average already
/// exceeds alpha are ascended through the family's virtual chain.  C4 is the
/// enlargement constant 2 D(mu_N, C*/c) used for the star bound.
DecompositionReport cz_decompose(const SimpleFunction& f, double alpha, double C4,
                                 int outside_samples = 4096, std::uint64_t seed = 7);

struct HlParams {
  int r_per_decade = 32;   // log-grid density for the radius
  int a_per_decade = 32;   // log-grid density for the anchor
  double r_cap = 1.0e5;    // largest catalog radius
  int max_generations = 40;
};

/// Maximal function over a discretized catalog of admissible cylinders
/// through x (every cube through x, admissible (r,a) region on log-grids).
/// A lower bound of the true supremum; see the campaign notes.
double hl_maximal(const SimpleFunction& f, const GroupPoint& x, const AdmissibilityParams& adm,
                  const HlParams& prm = {});

/// Covering selection: repeatedly take, among the cylinders disjoint from all
/// selected ones, one with base cube of minimal generation (ties by cube id,
/// then anchor, then radius).  Returns indices into the input.
std::vector<std::size_t> greedy_cover(const std::vector<Cylinder>& catalog);

struct Weak11Row {
  int function_id = 0;
  double alpha = 0;
  double level_measure = 0;  // sampled estimate of mu({M f > alpha} cap window)
  double bound = 0;          // C2 ||f||_1 / alpha
  double margin = 0;         // bound / level_measure (inf when the level set is empty)
};

struct Weak11Params {
  int samples_per_function = 400;
  HlParams hl;
};

/// Weak (1,1) campaign: for each function and each alpha on its geometric
/// grid, compares the sampled level-set measure against C2 ||f||_1 / alpha.
/// The computed maximal function underestimates the true sup, which only
/// shrinks the level set; margins quantify the slack.
std::vector<Weak11Row> weak11_campaign(const std::vector<SimpleFunction>& functions,
                                       const std::vector<double>& alphas_hint, double C2,
                                       const Weak11Params& prm, std::uint64_t seed);

/// Default geometric alpha grid for f: ratio 2 from ||f||_1/mu(window) to 2 sup|f|.
std::vector<double> default_alpha_grid(const SimpleFunction& f);

double window_measure(const DyadicFamily& fam);
GroupPoint sample_window_point(const DyadicFamily& fam, std::mt19937_64& rng);

}  // namespace czflow
