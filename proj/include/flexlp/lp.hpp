#pragma once

#include "flexlp/bart.hpp"
#include "flexlp/linalg.hpp"
#include "flexlp/rng.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flexlp {

/// Series for one local-projection target. All columns share the time index
/// 0..T-1. Design rows at date t hold x_t, the contemporaneous controls at t
/// and the `lagged` columns at t-1..t-L.
struct LpDataset {
  std::string response_name = "y";
  std::vector<double> response;
  std::optional<std::vector<double>> shock;  // absent under impulse-vector identification
  std::string shock_name = "x";
  DataMatrix contemporaneous;
  DataMatrix lagged;
  int lags = 1;

  std::size_t length() const { return response.size(); }
  /// First usable date; also the first row of the horizon-0 window.
  std::size_t first_row() const { return static_cast<std::size_t>(lags); }
  void validate() const;
};

/// Dating of the residual-augmentation columns W at horizon h.
/// kLeads: e_{t+1} .. e_{t+h-1} (h-1 columns); kLags: e_t .. e_{t-h+1} (h columns).
enum class ResidualConvention { kLeads, kLags };

std::size_t residual_columns(int h, ResidualConvention convention);

struct HorizonDesign {
  int h = 0;
  DataMatrix x;
  std::vector<double> y;
  std::vector<std::size_t> dates;  // t of each row
  std::optional<std::size_t> shock_column;
  std::size_t lag1_begin = 0;      // first column of the lag-1 block of `lagged`
  std::size_t w_begin = 0;
  std::size_t w_count = 0;
};

/// Residuals from the horizon-0 model are indexed by date - first_row().
HorizonDesign build_design(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                           ResidualConvention convention = ResidualConvention::kLeads);

/// Evenly spaced indices of `count` retained draws out of `n_draws`.
std::vector<std::size_t> thinned_draws(std::size_t n_draws, std::size_t count);

struct H0Fit {
  BartPosterior posterior;
  std::vector<std::size_t> draw_indices;              // retained draws the residuals come from
  std::vector<std::vector<double>> residual_draws;    // one vector per index, original units
};

/// Fits the horizon-0 model and stores D residual vectors from thinned posterior draws.
H0Fit fit_h0(const LpDataset& data, const BartConfig& config, std::size_t residual_draws, RngStream& rng,
             const BartOutputs& outputs = {});

struct HorizonModel {
  int h = 0;
  HorizonDesign design;
  BartPosterior posterior;
};

HorizonModel fit_horizon(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                         const BartConfig& config, RngStream& rng,
                         ResidualConvention convention = ResidualConvention::kLeads, const BartOutputs& outputs = {});

struct LinearLpFit {
  int h = 0;
  OlsFit ols;
  std::vector<std::string> names;  // "const" followed by the design columns
  HorizonDesign design;

  /// Coefficient on the shock column, or NaN when the dataset has none.
  double shock_coefficient() const;
  double shock_standard_error() const;
};

/// OLS of y_{t+h} on [1, x_t, z_t] over dates L..T-1-h (no W columns).
LinearLpFit linear_lp_fit(const LpDataset& data, int h);

}  // namespace flexlp
