#pragma once

#include "flexlp/linalg.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace flexlp {

/// Reduced-form VAR(L) with intercept: y_t = c + sum_l A_l y_{t-l} + u_t.
struct VarModel {
  int lags = 1;
  std::vector<Matrix> coefficients;  // A_1..A_L, each k x k
  Vector intercept;
  Matrix residual_cov;  // u'u / (T_eff - k L - 1)
  Matrix residuals;     // T_eff x k

  std::size_t dim() const { return static_cast<std::size_t>(intercept.size()); }
};

/// Equation-by-equation OLS on the T x k series.
VarModel var_fit(const Matrix& series, int lags);

/// size * (column `shock_index` of chol(residual_cov)); shock_index is 0-based.
Vector var_impulse_vector(const VarModel& model, std::size_t shock_index, double size);

/// k x (H + 1) responses: column 0 is the impact, column h iterates the lag recursion.
Matrix var_linear_irf(std::span<const Matrix> coefficients, const Vector& impact, int horizons);

}  // namespace flexlp
