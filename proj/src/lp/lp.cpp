#include "flexlp/lp.hpp"

#include "flexlp/errors.hpp"

#include <cmath>
#include <limits>

namespace flexlp {

void LpDataset::validate() const {
  const std::size_t t = length();
  if (lags < 1) throw ConfigError("lp: lag order must be >= 1");
  if (t == 0) throw DataError("lp: empty response series");
  if (shock && shock->size() != t) throw DataError("lp: shock series length differs from the response");
  if (contemporaneous.cols() > 0 && contemporaneous.rows() != t)
    throw DataError("lp: contemporaneous controls have the wrong length");
  if (lagged.cols() > 0 && lagged.rows() != t) throw DataError("lp: lagged series have the wrong length");
  if (contemporaneous.names.size() != contemporaneous.cols() || lagged.names.size() != lagged.cols())
    throw DataError("lp: column names missing");
  if (!shock && contemporaneous.cols() == 0 && lagged.cols() == 0) throw DataError("lp: no regressors");
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : response)
    if (!finite(v)) throw DataError("lp: non-finite value in " + response_name);
  if (shock)
    for (double v : *shock)
      if (!finite(v)) throw DataError("lp: non-finite value in " + shock_name);
  if (!contemporaneous.values.allFinite() || !lagged.values.allFinite())
    throw DataError("lp: non-finite value among the controls");
}

std::size_t residual_columns(int h, ResidualConvention convention) {
  if (h <= 0) return 0;
  return convention == ResidualConvention::kLeads ? static_cast<std::size_t>(h - 1) : static_cast<std::size_t>(h);
}

namespace {

HorizonDesign assemble(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                       ResidualConvention convention, bool include_w) {
  data.validate();
  const std::size_t t_len = data.length();
  const std::size_t first = data.first_row();
  if (h < 0 || t_len < first + static_cast<std::size_t>(h) + 1)
    throw DataError("lp: horizon " + std::to_string(h) + " too large for a sample of " + std::to_string(t_len) +
                    " with " + std::to_string(data.lags) + " lags");
  const std::size_t w = include_w ? residual_columns(h, convention) : 0;
  if (w > 0) {
    if (!residuals) throw DataError("lp: horizon " + std::to_string(h) + " needs horizon-0 residuals");
    if (residuals->size() != t_len - first) throw DataError("lp: residual vector does not match the horizon-0 window");
  }

  std::size_t t_begin = first;
  if (include_w && convention == ResidualConvention::kLags && h >= 2) t_begin = first + static_cast<std::size_t>(h) - 1;
  const std::size_t t_end = t_len - static_cast<std::size_t>(h);  // exclusive
  if (t_begin >= t_end) throw DataError("lp: no rows left at horizon " + std::to_string(h));

  HorizonDesign d;
  d.h = h;
  std::vector<std::string>& names = d.x.names;
  if (data.shock) {
    d.shock_column = names.size();
    names.push_back(data.shock_name);
  }
  for (const auto& n : data.contemporaneous.names) names.push_back(n);
  d.lag1_begin = names.size();
  for (int l = 1; l <= data.lags; ++l)
    for (const auto& n : data.lagged.names) names.push_back(n + "_l" + std::to_string(l));
  d.w_begin = names.size();
  d.w_count = w;
  for (std::size_t k = 1; k <= w; ++k) {
    if (convention == ResidualConvention::kLeads)
      names.push_back("e_lead" + std::to_string(k));
    else
      names.push_back(k == 1 ? std::string("e_l0") : "e_l" + std::to_string(k - 1));
  }

  const std::size_t rows = t_end - t_begin;
  d.x.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
  d.y.resize(rows);
  d.dates.resize(rows);
  const auto nc = static_cast<Eigen::Index>(data.contemporaneous.cols());
  const auto nl = static_cast<Eigen::Index>(data.lagged.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = t_begin + r;
    const auto ri = static_cast<Eigen::Index>(r);
    const auto ti = static_cast<Eigen::Index>(t);
    Eigen::Index c = 0;
    d.dates[r] = t;
    d.y[r] = data.response[t + static_cast<std::size_t>(h)];
    if (data.shock) d.x.values(ri, c++) = (*data.shock)[t];
    for (Eigen::Index k = 0; k < nc; ++k) d.x.values(ri, c++) = data.contemporaneous.values(ti, k);
    for (int l = 1; l <= data.lags; ++l)
      for (Eigen::Index k = 0; k < nl; ++k) d.x.values(ri, c++) = data.lagged.values(ti - l, k);
    for (std::size_t k = 1; k <= w; ++k) {
      const std::size_t date = convention == ResidualConvention::kLeads ? t + k : t + 1 - k;
      d.x.values(ri, c++) = (*residuals)[date - first];
    }
  }
  return d;
}

}  // namespace

HorizonDesign build_design(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                           ResidualConvention convention) {
  return assemble(data, h, residuals, convention, true);
}

std::vector<std::size_t> thinned_draws(std::size_t n_draws, std::size_t count) {
  if (count == 0 || count > n_draws) throw ParameterError("thinned_draws: need 1 <= count <= retained draws");
  std::vector<std::size_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = (k + 1) * n_draws / count - 1;
  return out;
}

H0Fit fit_h0(const LpDataset& data, const BartConfig& config, std::size_t residual_draws, RngStream& rng,
             const BartOutputs& outputs) {
  const HorizonDesign design = build_design(data, 0, std::nullopt);
  H0Fit out;
  out.draw_indices = thinned_draws(static_cast<std::size_t>(config.n_draws), residual_draws);
  BartOutputs req = outputs;
  req.train_fit_draws = out.draw_indices;
  out.posterior = bart_fit(design.x, design.y, config, rng, req);
  out.residual_draws.resize(residual_draws);
  for (std::size_t k = 0; k < residual_draws; ++k) {
    const std::vector<double>& fit = out.posterior.train_fits[k];
    std::vector<double>& e = out.residual_draws[k];
    e.resize(fit.size());
    for (std::size_t i = 0; i < fit.size(); ++i) e[i] = design.y[i] - fit[i];
  }
  return out;
}

HorizonModel fit_horizon(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                         const BartConfig& config, RngStream& rng, ResidualConvention convention,
                         const BartOutputs& outputs) {
  HorizonModel m;
  m.h = h;
  m.design = build_design(data, h, residuals, convention);
  m.posterior = bart_fit(m.design.x, m.design.y, config, rng, outputs);
  return m;
}

double LinearLpFit::shock_coefficient() const {
  if (!design.shock_column) return std::numeric_limits<double>::quiet_NaN();
  return ols.coefficients(static_cast<Eigen::Index>(*design.shock_column + 1));
}

double LinearLpFit::shock_standard_error() const {
  if (!design.shock_column) return std::numeric_limits<double>::quiet_NaN();
  return ols.standard_error(*design.shock_column + 1);
}

LinearLpFit linear_lp_fit(const LpDataset& data, int h) {
  LinearLpFit f;
  f.h = h;
  f.design = assemble(data, h, std::nullopt, ResidualConvention::kLeads, false);
  const auto n = f.design.x.values.rows();
  Matrix a(n, f.design.x.values.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(f.design.x.values.cols()) = f.design.x.values;
  f.names.push_back("const");
  for (const auto& s : f.design.x.names) f.names.push_back(s);
  f.ols = ols_fit(a, Eigen::Map<const Vector>(f.design.y.data(), n), f.names);
  return f;
}

}  // namespace flexlp
