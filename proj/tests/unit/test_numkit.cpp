#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexlp/distributions.hpp"
#include "flexlp/errors.hpp"
#include "flexlp/linalg.hpp"
#include "flexlp/rng.hpp"
#include "flexlp/var_model.hpp"

#include <cmath>
#include <vector>

using namespace flexlp;

namespace {

// Gaussian elimination with partial pivoting in long double on X'X b = X'y.
std::vector<long double> normal_equations(const Matrix& x, const Vector& y) {
  const int p = static_cast<int>(x.cols());
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j)
      for (int t = 0; t < x.rows(); ++t) a[i][j] += static_cast<long double>(x(t, i)) * x(t, j);
    for (int t = 0; t < x.rows(); ++t) a[i][p] += static_cast<long double>(x(t, i)) * y(t);
  }
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = c + 1; r < p; ++r) {
      const long double f = a[r][c] / a[c][c];
      for (int k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<long double> b(p);
  for (int r = p - 1; r >= 0; --r) {
    long double s = a[r][p];
    for (int k = r + 1; k < p; ++k) s -= a[r][k] * b[k];
    b[r] = s / a[r][r];
  }
  return b;
}

Matrix random_matrix(RngStream& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("rng streams are reproducible and substreams differ") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
  RngStream c = RngStream(42).substream({1, 2});
  RngStream d = RngStream(42).substream({1, 3});
  CHECK(c.seed() != d.seed());
  CHECK(RngStream(42).substream({1, 2}).seed() == c.seed());
  int outside = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = a.uniform();
    outside += (u > 0.0 && u < 1.0) ? 0 : 1;
  }
  CHECK(outside == 0);
}

TEST_CASE("ols constant and saturated fits") {
  Matrix ones = Matrix::Ones(3, 1);
  Vector y(3);
  y << 2, 2, 2;
  const OlsFit f = ols_fit(ones, y);
  CHECK(f.coefficients(0) == doctest::Approx(2.0));
  CHECK(f.residuals.cwiseAbs().maxCoeff() < 1e-14);

  Matrix two(2, 2);
  two << 1, 0, 0, 1;
  Vector y2(2);
  y2 << 3, 5;
  CHECK_THROWS_AS(ols_fit(two, y2), DataError);  // n must exceed p
  Matrix three(3, 2);
  three << 1, 0, 0, 1, 0, 1;
  Vector y3(3);
  y3 << 3, 5, 5;
  const OlsFit g = ols_fit(three, y3);
  CHECK(g.coefficients(0) == doctest::Approx(3.0));
  CHECK(g.coefficients(1) == doctest::Approx(5.0));
}

TEST_CASE("ols matches long-double normal equations and residuals are orthogonal") {
  RngStream rng(7);
  Matrix x = random_matrix(rng, 50, 3);
  Vector y = random_matrix(rng, 50, 1).col(0);
  const OlsFit f = ols_fit(x, y);
  const auto ref = normal_equations(x, y);
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(f.coefficients(j) - static_cast<double>(ref[j])) < 1e-10);
  const Vector xr = x.transpose() * f.residuals;
  CHECK(xr.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(f.sigma2_hat == doctest::Approx(f.residuals.squaredNorm() / 47.0));
}

TEST_CASE("ols names the dependent column") {
  RngStream rng(3);
  Matrix x = random_matrix(rng, 20, 3);
  x.col(2) = 2.0 * x.col(0) - x.col(1);
  Vector y = random_matrix(rng, 20, 1).col(0);
  try {
    ols_fit(x, y, {"a", "b", "c"});
    FAIL("expected singular design");
  } catch (const SingularDesignError& e) {
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
}

TEST_CASE("cholesky examples") {
  CHECK(cholesky_lower(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix s(2, 2);
  s << 4, 2, 2, 5;
  Matrix expected(2, 2);
  expected << 2, 0, 1, 2;
  CHECK((cholesky_lower(s) - expected).cwiseAbs().maxCoeff() < 1e-15);

  RngStream rng(11);
  const Matrix a = random_matrix(rng, 6, 6);
  const Matrix pd = a * a.transpose() + 0.5 * Matrix::Identity(6, 6);
  const Matrix l = cholesky_lower(pd);
  const double norm = pd.cwiseAbs().rowwise().sum().maxCoeff();
  CHECK((l * l.transpose() - pd).cwiseAbs().rowwise().sum().maxCoeff() < 1e-10 * norm);
  for (int i = 0; i < 6; ++i) CHECK(l(i, i) > 0.0);

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    cholesky_lower(bad);
    FAIL("expected failure");
  } catch (const DecompositionError& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("scaled inverse chi-square draws") {
  RngStream rng(5);
  double sum = 0.0;
  int nonpositive = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double v = draw_scaled_inv_chi2(rng, 10.0, 1.0);
    nonpositive += v > 0.0 ? 0 : 1;
    sum += v;
  }
  CHECK(nonpositive == 0);
  CHECK(std::fabs(sum / n - 1.25) < 0.02 * 1.25);

  RngStream a(9), b(9);
  for (int i = 0; i < 50; ++i) CHECK(draw_scaled_inv_chi2(a, 3.0, 0.5) == draw_scaled_inv_chi2(b, 3.0, 0.5));
  CHECK_THROWS_AS(draw_scaled_inv_chi2(a, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(draw_scaled_inv_chi2(a, 3.0, -1.0), ParameterError);
}

TEST_CASE("var fit recovers a VAR(1)") {
  Matrix a(2, 2);
  a << 0.5, 0.1, -0.2, 0.3;
  RngStream rng(21);
  const int t_len = 10000;
  Matrix y = Matrix::Zero(t_len, 2);
  for (int t = 1; t < t_len; ++t) {
    y.row(t) = (a * y.row(t - 1).transpose()).transpose();
    y(t, 0) += rng.normal();
    y(t, 1) += rng.normal();
  }
  const VarModel m = var_fit(y, 1);
  CHECK((m.coefficients[0] - a).cwiseAbs().maxCoeff() < 0.02);
  CHECK(m.residual_cov.isApprox(m.residual_cov.transpose()));

  Matrix noise = random_matrix(rng, 2000, 3);
  const VarModel w = var_fit(noise, 2);
  REQUIRE(w.coefficients.size() == 2);
  CHECK(w.coefficients[1].rows() == 3);
  CHECK(w.coefficients[1].cols() == 3);
  CHECK(w.coefficients[0].cwiseAbs().maxCoeff() < 0.1);

  CHECK_THROWS_AS(var_fit(random_matrix(rng, 5, 3), 2), DataError);
}

TEST_CASE("impulse vector from the residual covariance") {
  VarModel m;
  m.intercept = Vector::Zero(2);
  m.residual_cov = Matrix(2, 2);
  m.residual_cov << 4, 0, 0, 1;
  Vector d = var_impulse_vector(m, 0, 1.0);
  CHECK(d(0) == doctest::Approx(2.0));
  CHECK(d(1) == 0.0);
  CHECK(var_impulse_vector(m, 0, 0.0).isZero());
  m.residual_cov << 4, 2, 2, 5;
  d = var_impulse_vector(m, 0, 1.0);
  CHECK(d(0) == doctest::Approx(2.0));
  CHECK(d(1) == doctest::Approx(1.0));
  CHECK_THROWS(var_impulse_vector(m, 2, 1.0));
}

TEST_CASE("linear irf recursion") {
  std::vector<Matrix> ar{Matrix::Constant(1, 1, 0.5)};
  const Matrix r = var_linear_irf(ar, Vector::Ones(1), 5);
  for (int h = 0; h <= 5; ++h) CHECK(r(0, h) == doctest::Approx(std::pow(0.5, h)));

  std::vector<Matrix> zero{Matrix::Zero(2, 2)};
  Vector imp(2);
  imp << 1, -2;
  const Matrix z = var_linear_irf(zero, imp, 3);
  CHECK(z.col(0) == imp);
  CHECK(z.rightCols(3).isZero());

  RngStream rng(4);
  const Matrix a = 0.3 * random_matrix(rng, 3, 3);
  const Vector i3 = random_matrix(rng, 3, 1).col(0);
  std::vector<Matrix> one{a};
  const Matrix m = var_linear_irf(one, i3, 10);
  Matrix power = Matrix::Identity(3, 3);
  for (int h = 0; h <= 10; ++h) {
    CHECK((m.col(h) - power * i3).cwiseAbs().maxCoeff() < 1e-12);
    power = a * power;
  }

  // VAR(2): responses from brute-force iteration of the recursion.
  std::vector<Matrix> two{0.4 * random_matrix(rng, 3, 3), 0.2 * random_matrix(rng, 3, 3)};
  const Matrix m2 = var_linear_irf(two, i3, 8);
  std::vector<Vector> path{Vector::Zero(3), i3};
  for (int h = 1; h <= 8; ++h) path.push_back(two[0] * path.back() + two[1] * path[path.size() - 2]);
  for (int h = 0; h <= 8; ++h) CHECK((m2.col(h) - path[h + 1]).cwiseAbs().maxCoeff() < 1e-12);
}
