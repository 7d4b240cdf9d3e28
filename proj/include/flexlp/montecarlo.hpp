#pragma once

#include "flexlp/dgp.hpp"
#include "flexlp/girf.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace flexlp {

struct McConfig {
  DgpParams dgp = SvarGarchParams::paper();
  int n_reps = 20;
  int total = 300;  // simulated periods per replication, burn-in included
  int burn = 100;
  int lags = 2;
  GirfSettings girf;
  std::size_t shock_variable = 0;  // structural shock
  std::vector<double> shock_sizes{1.0};
  /// Sign-MA only: the two other contemporaneous shocks enter as controls.
  bool contemporaneous_shocks = true;
  TrueGirfOptions truth;
  std::uint64_t seed = 1;
  int threads = 1;  // replications in parallel
  double max_failure_rate = 0.1;

  void validate() const;
};

/// Desk- or paper-scale settings for "svar-garch", "tvar" or "sign-ma".
McConfig mc_preset(const std::string& dgp, const std::string& scale);

/// Estimation dataset for one response variable of a simulated sample.
LpDataset mc_dataset(const McConfig& config, const Simulation& sim, std::size_t response);

/// Shock size in the units of the LP shock column (the TVAR shifts y3 by its impact).
double lp_shock_size(const McConfig& config, double structural_size);

struct McRep {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  // [shock][variable][horizon]
  std::vector<std::vector<std::vector<double>>> linear;
  std::vector<std::vector<std::vector<double>>> bart_median;
};

struct McResult {
  std::string dgp;
  std::vector<std::string> variables;
  std::vector<double> shock_sizes;
  int horizons = 0;
  std::vector<Matrix> truth;  // per shock, variables x (H + 1)
  std::vector<McRep> reps;

  std::size_t failures() const;
};

/// Per-replication seed; a replication can be rerun from it alone.
std::uint64_t replication_seed(std::uint64_t master, std::size_t rep);
McRep run_replication(const McConfig& config, std::size_t rep, std::uint64_t seed);
Matrix mc_truth(const McConfig& config, double structural_size);
McResult run_mc(const McConfig& config);

enum class Estimator { kBart, kLinear };

struct McSummary {
  // [shock] of variables x (H + 1)
  std::vector<Matrix> bart_median, bart_lower, bart_upper, linear_mean, truth;
  std::vector<Matrix> bart_rmse, linear_rmse;  // across replications
};

McSummary summarize(const McResult& result);

/// Root mean squared gap between the summary curve (cross-rep BART median or
/// linear mean) and the truth over the listed variables and horizons.
double curve_rmse(const McSummary& summary, std::size_t shock, Estimator estimator,
                  const std::vector<std::size_t>& variables, const std::vector<int>& horizons);

/// 100 x share of paired replications with |IRF+| > |IRF-|, variables x (H + 1).
/// A tie counts as half a replication.
/// `positive` and `negative` index shock sizes of `result`.
Matrix sign_dominance(const McResult& result, std::size_t positive, std::size_t negative,
                      Estimator estimator = Estimator::kBart);
/// Same for two results that were run on identical replication seeds.
Matrix sign_dominance(const McResult& positive, const McResult& negative, Estimator estimator = Estimator::kBart);

/// Long format: rep,seed,shock_size,variable,horizon,estimator,value
void write_mc_csv(std::ostream& out, const McResult& result);
/// shock_size,variable,horizon,truth,bart_median,bart_q025,bart_q975,linear_mean
void write_mc_summary_csv(std::ostream& out, const McResult& result, const McSummary& summary);
nlohmann::json mc_config_json(const McConfig& config);

}  // namespace flexlp
