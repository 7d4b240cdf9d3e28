#include "flexlp/var_model.hpp"

#include "flexlp/errors.hpp"

#include <string>

namespace flexlp {

VarModel var_fit(const Matrix& series, int lags) {
  if (lags < 1) throw ParameterError("var_fit: lag order must be >= 1");
  const Eigen::Index t_total = series.rows();
  const Eigen::Index k = series.cols();
  const Eigen::Index regressors = k * lags + 1;
  if (t_total <= regressors + lags) {
    throw DataError("var_fit: insufficient observations (T=" + std::to_string(t_total) + ", need more than " +
                    std::to_string(regressors + lags) + " for k=" + std::to_string(k) +
                    ", L=" + std::to_string(lags) + ")");
  }
  const Eigen::Index t_eff = t_total - lags;

  Matrix x(t_eff, regressors);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(regressors));
  names.emplace_back("const");
  for (int l = 1; l <= lags; ++l)
    for (Eigen::Index j = 0; j < k; ++j) names.push_back("y" + std::to_string(j) + ".lag" + std::to_string(l));
  for (Eigen::Index t = 0; t < t_eff; ++t) {
    x(t, 0) = 1.0;
    for (int l = 1; l <= lags; ++l) x.block(t, 1 + (l - 1) * k, 1, k) = series.row(t + lags - l);
  }

  VarModel model;
  model.lags = lags;
  model.coefficients.assign(static_cast<std::size_t>(lags), Matrix::Zero(k, k));
  model.intercept = Vector::Zero(k);
  model.residuals = Matrix::Zero(t_eff, k);
  for (Eigen::Index eq = 0; eq < k; ++eq) {
    const OlsFit fit = ols_fit(x, series.col(eq).tail(t_eff), names);
    model.intercept(eq) = fit.coefficients(0);
    for (int l = 0; l < lags; ++l)
      model.coefficients[static_cast<std::size_t>(l)].row(eq) = fit.coefficients.segment(1 + l * k, k).transpose();
    model.residuals.col(eq) = fit.residuals;
  }
  model.residual_cov = model.residuals.transpose() * model.residuals / static_cast<double>(t_eff - regressors);
  return model;
}

Vector var_impulse_vector(const VarModel& model, std::size_t shock_index, double size) {
  if (shock_index >= model.dim()) {
    throw ParameterError("var_impulse_vector: shock index " + std::to_string(shock_index) +
                         " out of range for a " + std::to_string(model.dim()) + "-variable VAR");
  }
  const Matrix chol = cholesky_lower(model.residual_cov);
  return size * chol.col(static_cast<Eigen::Index>(shock_index));
}

Matrix var_linear_irf(std::span<const Matrix> coefficients, const Vector& impact, int horizons) {
  if (horizons < 0) throw ParameterError("var_linear_irf: horizon must be >= 0");
  const Eigen::Index k = impact.size();
  for (const Matrix& a : coefficients) {
    if (a.rows() != k || a.cols() != k) throw ParameterError("var_linear_irf: coefficient/impact dimension mismatch");
  }
  Matrix out = Matrix::Zero(k, horizons + 1);
  out.col(0) = impact;
  for (int h = 1; h <= horizons; ++h) {
    for (std::size_t l = 1; l <= coefficients.size() && static_cast<int>(l) <= h; ++l) {
      out.col(h) += coefficients[l - 1] * out.col(h - static_cast<int>(l));
    }
  }
  return out;
}

}  // namespace flexlp
