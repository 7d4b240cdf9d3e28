#pragma once

#include "flexlp/linalg.hpp"
#include "flexlp/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace flexlp {

struct SimConfig {
  int total = 300;
  int burn = 100;
  std::uint64_t seed = 1;

  int kept() const { return total - burn; }
  void validate() const;
};

/// Simulated paths after burn-in: one row per period.
struct Simulation {
  Matrix series;
  Matrix shocks;
  std::vector<std::string> series_names;
  std::vector<std::string> shock_names;
  std::vector<double> variance;  // SVAR-GARCH only
  std::vector<int> regime;       // TVAR only, 1 or 2
};

// h_t recursion. kLagged: h_t = w + p h_{t-1} + l sqrt(h_{t-1}) e_{1,t-1}.
// kLiteral: h_t = w + p h_{t-1} + l sqrt(h_t) e_{1t}, solved for sqrt(h_t).
enum class GarchTiming { kLagged, kLiteral };

struct SvarGarchParams {
  Matrix a;
  Vector b;
  double omega = 0.5;
  double persistence = 0.5;
  double loading = 0.3;
  double h0 = 1.0;
  double variance_floor = 1e-3;  // lagged timing can push h below zero
  GarchTiming timing = GarchTiming::kLagged;

  static SvarGarchParams paper();
  void validate() const;
};

struct TvarParams {
  Matrix pi1, pi2, b1, b2;
  std::size_t threshold_index = 2;
  double threshold = 0.0;
  Vector y0;  // y_{-1}; zero when empty

  static TvarParams paper();
  void validate() const;
};

/// Columns are lags 0..order, rows the three variables (gdp, inflation, ff).
struct SignMaParams {
  Matrix gdp, inflation, ff_pos, ff_neg;

  int order() const { return static_cast<int>(gdp.cols()) - 1; }
  void validate() const;
};

using DgpParams = std::variant<SvarGarchParams, TvarParams, SignMaParams>;

std::string dgp_name(const DgpParams& dgp);
/// Parameters under the config-file key names.
nlohmann::json dgp_params_json(const DgpParams& dgp);

Simulation simulate_svar_garch(const SvarGarchParams& params, const SimConfig& sim);
Simulation simulate_tvar(const TvarParams& params, const SimConfig& sim);
Simulation simulate_sign_ma(const SignMaParams& params, const SimConfig& sim);
Simulation simulate(const DgpParams& dgp, const SimConfig& sim);
/// Runs the recursion on given shocks (one row per period) and drops `burn` rows.
Simulation simulate_with_shocks(const DgpParams& dgp, const Matrix& shocks, int burn = 0);

/// ff_neg = ff; ff_pos = ff with entry 0 scaled by `factor` at gdp_horizons and
/// entry 1 scaled at inflation_horizons.
SignMaParams calibrate_sign_ma(const Matrix& gdp, const Matrix& inflation, const Matrix& ff, double factor = 3.0,
                               const std::vector<int>& gdp_horizons = {2, 3},
                               const std::vector<int>& inflation_horizons = {7, 8, 9, 10, 11, 12, 13, 14, 15, 16,
                                                                             17, 18, 19, 20});
/// Calibrated from hump-shaped synthetic responses of a recursively ordered system.
SignMaParams sign_ma_synthetic();

/// Long format lag,variable,block,value; blocks gdp, inflation and either ff
/// (calibrated on read with the default rule) or ff_pos and ff_neg.
SignMaParams read_sign_ma_csv(std::istream& in, const std::string& source, double factor = 3.0,
                              const std::vector<int>& gdp_horizons = {2, 3},
                              const std::vector<int>& inflation_horizons = {7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17,
                                                                            18, 19, 20});
void write_sign_ma_csv(std::ostream& out, const SignMaParams& params);

struct ShockSpec {
  std::size_t variable = 0;
  double size = 1.0;
};

enum class InitState {
  kFixed,       // the model's initial condition (TVAR y0, GARCH y = 0 and h0)
  kStationary,  // each path first runs `init_burn` periods from the fixed state
};

struct TrueGirfOptions {
  std::size_t n_paths = 10000;
  int horizons = 8;
  InitState init = InitState::kFixed;
  int init_burn = 100;
  bool common_random_numbers = true;
  int threads = 1;
};

struct TrueGirf {
  Matrix mean;       // variables x (H + 1)
  Matrix std_error;  // Monte Carlo standard error of `mean`
};

/// Average of shocked minus baseline paths. The shocked path sets the chosen
/// structural shock to `size` at period 0, the baseline sets it to zero; all
/// other shocks are shared under common random numbers.
TrueGirf true_girf_mc(const DgpParams& dgp, const ShockSpec& shock, const TrueGirfOptions& options,
                      const RngStream& rng);

/// Closed form for the sign-dependent MA: size times the block for the sign.
Matrix sign_ma_true_irf(const SignMaParams& params, const ShockSpec& shock, int horizons);

/// Default initial state per DGP for the true responses: stationary for
/// SVAR-GARCH, fixed (y0) otherwise.
InitState default_init(const DgpParams& dgp);

}  // namespace flexlp
