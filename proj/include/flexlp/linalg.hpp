#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace flexlp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observations in rows, regressors in labeled columns.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> names;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  /// Column position for `name`; throws DataError when absent.
  std::size_t column(const std::string& name) const;
};

struct OlsFit {
  Vector coefficients;
  Vector residuals;
  double sigma2_hat = 0.0;  // RSS / (n - p)
  Matrix xtx_inverse;       // (X'X)^{-1}, for conventional standard errors

  double standard_error(std::size_t j) const;
};

/// Least squares via Householder QR (no pivoting, so column order is respected
/// and a rank failure can be attributed to the first dependent column).
OlsFit ols_fit(const Matrix& x, const Vector& y, const std::vector<std::string>& names = {});

/// Lower-triangular L with L L' = S. Throws DecompositionError naming the pivot.
Matrix cholesky_lower(const Matrix& s);

}  // namespace flexlp
