#include "flexlp/linalg.hpp"

#include "flexlp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace flexlp {

std::size_t DataMatrix::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

double OlsFit::standard_error(std::size_t j) const {
  return std::sqrt(sigma2_hat * xtx_inverse(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
}

OlsFit ols_fit(const Matrix& x, const Vector& y, const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DataError("ols_fit: response length does not match design rows");
  if (n <= p) {
    throw DataError("ols_fit: need more rows than columns (rows=" + std::to_string(n) +
                    ", cols=" + std::to_string(p) + ")");
  }

  Eigen::HouseholderQR<Matrix> qr(x);
  const Matrix& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scale = x.col(j).norm();
    if (scale == 0.0 || std::abs(packed(j, j)) <= 1e-10 * scale) {
      const auto col = static_cast<std::size_t>(j);
      throw SingularDesignError(col, col < names.size() ? names[col] : std::string());
    }
  }

  OlsFit fit;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - x * fit.coefficients;
  fit.sigma2_hat = fit.residuals.squaredNorm() / static_cast<double>(n - p);
  Matrix r = packed.topRows(p).triangularView<Eigen::Upper>();
  Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  fit.xtx_inverse = r_inv * r_inv.transpose();
  return fit;
}

Matrix cholesky_lower(const Matrix& s) {
  const Eigen::Index k = s.rows();
  if (s.cols() != k) throw ParameterError("cholesky_lower: matrix must be square");
  Matrix l = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double d = s(j, j);
    for (Eigen::Index m = 0; m < j; ++m) d -= l(j, m) * l(j, m);
    if (!(d > 0.0)) throw DecompositionError(static_cast<std::size_t>(j));
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      double v = s(i, j);
      for (Eigen::Index m = 0; m < j; ++m) v -= l(i, m) * l(j, m);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

}  // namespace flexlp
