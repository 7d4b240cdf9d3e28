#pragma once

#include "flexlp/bart.hpp"
#include "flexlp/linalg.hpp"
#include "flexlp/lp.hpp"
#include "flexlp/rng.hpp"

#include <json.hpp>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace flexlp {

enum class Identification { kShockSeries, kRecursiveControls, kImpulseVector };

/// How the shock enters the conditioning point. Shock-series and recursive
/// identification both shift x; they differ only in which controls the dataset
/// carries. Impulse-vector identification shifts the lag-1 block of the lagged
/// series by the impulse vector, so IRF horizon h uses regression h - 1 and the
/// impact response is the impulse vector itself.
struct IdentificationScheme {
  Identification variant = Identification::kShockSeries;
  Vector impulse;                  // unit-size impulse, one entry per lagged column
  std::size_t response_index = 0;  // entry of `impulse` for the dataset's response

  bool shifts_lags() const { return variant == Identification::kImpulseVector; }
};

/// Impulse vector from a VAR(lags) on `series`: Cholesky column `shock_index` (0-based).
IdentificationScheme impulse_vector_scheme(const Matrix& series, int lags, std::size_t shock_index,
                                           std::size_t response_index);

enum class DrawMode {
  kSingle,    // one posterior draw per refit
  kPooled,    // every retained draw of every refit
  kAveraged,  // per refit, the average over its retained draws
};

struct GirfSettings {
  BartConfig bart;
  int horizons = 8;                 // H
  std::size_t residual_draws = 100;  // D
  DrawMode draw_mode = DrawMode::kSingle;
  ResidualConvention convention = ResidualConvention::kLeads;
  std::vector<double> quantile_levels{0.025, 0.16, 0.5, 0.84, 0.975};
  int threads = 1;
  /// When non-empty, only these horizons are estimated; the rest stay without draws.
  std::vector<int> only_horizons;
};

struct ConditioningPoint {
  std::vector<std::string> names;
  std::vector<double> values;
};

/// Column means of the horizon design's regressors.
ConditioningPoint baseline_point(const HorizonDesign& design);
ConditioningPoint baseline_point(const LpDataset& data, int h, std::optional<std::span<const double>> residuals = {},
                                 ResidualConvention convention = ResidualConvention::kLeads);

struct IrfResult {
  std::string variable;
  double shock_size = 0.0;
  std::vector<std::vector<double>> psi;  // [h][draw]
  std::vector<std::vector<double>> y0;
  std::vector<std::vector<double>> y1;
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantiles;  // [h][level]

  std::size_t horizon_count() const { return psi.size(); }
  void summarize(std::span<const double> levels);
};

std::vector<IrfResult> girf_compute(const LpDataset& data, const IdentificationScheme& scheme,
                                    std::span<const double> shock_sizes, const GirfSettings& settings, RngStream& rng);
IrfResult girf_compute(const LpDataset& data, const IdentificationScheme& scheme, double shock_size,
                       const GirfSettings& settings, RngStream& rng);

/// Which dates may serve as conditioning points.
struct StateFilter {
  enum class Kind { kAll, kBelow, kAbove };
  Kind kind = Kind::kAll;
  double percentile = 0.5;
  std::vector<double> state;  // one value per date of the dataset
  std::string label = "all";

  /// Type-7 percentile of `state`.
  double threshold() const;
  /// Strict comparison against threshold(): below keeps v < q, above keeps v > q.
  std::vector<bool> admitted() const;
};

std::vector<IrfResult> girf_state_conditional(const LpDataset& data, const IdentificationScheme& scheme,
                                              const StateFilter& filter, std::span<const double> shock_sizes,
                                              std::size_t condition_draws, const GirfSettings& settings,
                                              RngStream& rng);

/// Linear-LP counterpart: coefficient on x times the shock, or for impulse
/// vectors the lag-1 coefficients of regression h-1 applied to the impulse.
std::vector<double> linear_lp_irf(const LpDataset& data, const IdentificationScheme& scheme, double shock_size,
                                  int horizons);

struct MultiplierResult {
  std::vector<std::vector<double>> draws;  // [h][kept draw]
  std::vector<std::size_t> excluded;       // per horizon
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> quantile_levels;
  std::vector<std::vector<double>> quantiles;
};

/// Drawwise ratio of cumulated responses; draws whose cumulated denominator is
/// zero to within rounding are excluded and counted.
MultiplierResult cumulative_multiplier(const IrfResult& irf_y, const IrfResult& irf_g,
                                       std::span<const double> levels = {});

/// Long format: variable,shock_size,horizon,draw,psi,y0,y1
void write_irf_csv(std::ostream& out, std::span<const IrfResult> results);
std::vector<IrfResult> read_irf_csv(std::istream& in);
nlohmann::json irf_summary_json(std::span<const IrfResult> results);
void write_multiplier_csv(std::ostream& out, const MultiplierResult& m);

}  // namespace flexlp
