#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexlp/errors.hpp"
#include "flexlp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace flexlp;

namespace {

LpDataset ar1_dataset(int t_len, double rho, std::uint64_t seed, int lags = 1) {
  RngStream rng(seed);
  LpDataset d;
  d.response.resize(t_len);
  d.shock = std::vector<double>(t_len);
  double y = 0.0;
  for (int t = 0; t < t_len; ++t) {
    const double e = rng.normal();
    y = rho * y + e;
    (*d.shock)[t] = e;
    d.response[t] = y;
  }
  d.lagged.values = Eigen::Map<const Vector>(d.response.data(), t_len);
  d.lagged.names = {"y"};
  d.lags = lags;
  return d;
}

BartConfig quick() {
  BartConfig c;
  c.trees = 20;
  c.n_draws = 100;
  c.n_burn = 100;
  return c;
}

}  // namespace

TEST_CASE("design shapes and alignment") {
  LpDataset d = ar1_dataset(100, 0.5, 1, 4);
  d.contemporaneous.values = Matrix::Constant(100, 1, 1.0);
  d.contemporaneous.names = {"one"};
  std::vector<double> e(96);
  std::iota(e.begin(), e.end(), 1000.0);  // e at date t equals 1000 + t - 4

  const HorizonDesign h0 = build_design(d, 0, std::nullopt);
  CHECK(h0.w_count == 0);
  CHECK(h0.x.cols() == 1 + 1 + 4);
  CHECK(h0.x.rows() == 96);
  CHECK(h0.y[0] == d.response[4]);
  CHECK(h0.x.values(0, 0) == (*d.shock)[4]);
  CHECK(h0.x.values(0, h0.lag1_begin) == d.response[3]);
  CHECK(h0.x.values(0, h0.lag1_begin + 3) == d.response[0]);

  const HorizonDesign h3 = build_design(d, 3, std::span<const double>(e));
  CHECK(h3.w_count == 2);
  for (Eigen::Index r = 0; r < h3.x.values.rows(); ++r) {
    const auto t = static_cast<double>(h3.dates[static_cast<std::size_t>(r)]);
    CHECK(h3.x.values(r, static_cast<Eigen::Index>(h3.w_begin)) == 1000.0 + t + 1 - 4);
    CHECK(h3.x.values(r, static_cast<Eigen::Index>(h3.w_begin) + 1) == 1000.0 + t + 2 - 4);
    CHECK(h3.y[static_cast<std::size_t>(r)] == d.response[static_cast<std::size_t>(t) + 3]);
  }

  const HorizonDesign h5 = build_design(d, 5, std::span<const double>(e));
  CHECK(h5.x.rows() == 91);
  CHECK(build_design(d, 1, std::nullopt).w_count == 0);

  const HorizonDesign lag3 = build_design(d, 3, std::span<const double>(e), ResidualConvention::kLags);
  CHECK(lag3.w_count == 3);
  CHECK(lag3.x.rows() == 100 - 3 - 4 - 2);
  const auto t0 = static_cast<double>(lag3.dates[0]);
  CHECK(lag3.x.values(0, static_cast<Eigen::Index>(lag3.w_begin)) == 1000.0 + t0 - 4);
  CHECK(lag3.x.values(0, static_cast<Eigen::Index>(lag3.w_begin) + 2) == 1000.0 + t0 - 2 - 4);
  CHECK(build_design(d, 1, std::span<const double>(e), ResidualConvention::kLags).w_count == 1);

  CHECK_THROWS_AS(build_design(d, 2, std::nullopt), DataError);
  CHECK_THROWS_AS(build_design(d, 96, std::span<const double>(e)), DataError);
  CHECK_NOTHROW(build_design(d, 95, std::span<const double>(e)));
}

TEST_CASE("alignment depends only on relative dating") {
  LpDataset a = ar1_dataset(60, 0.5, 2, 2);
  LpDataset b = a;
  const std::size_t k = 7;
  b.response.insert(b.response.begin(), k, 99.0);
  b.shock->insert(b.shock->begin(), k, 99.0);
  Matrix lag(67, 1);
  lag.topRows(k).setConstant(99.0);
  lag.bottomRows(60) = a.lagged.values;
  b.lagged.values = lag;
  const HorizonDesign da = build_design(a, 1, std::nullopt);
  const HorizonDesign db = build_design(b, 1, std::nullopt);
  CHECK(db.x.values.bottomRows(da.x.rows()) == da.x.values);
}

TEST_CASE("horizon-0 fit and residual draws") {
  // pure noise: x irrelevant
  RngStream rng(3);
  LpDataset d;
  const int t_len = 1000;
  d.response.resize(t_len);
  d.shock = std::vector<double>(t_len);
  for (int t = 0; t < t_len; ++t) {
    d.response[t] = 2.0 * rng.normal();
    (*d.shock)[t] = rng.normal();
  }
  d.lagged.values = Eigen::Map<const Vector>(d.response.data(), t_len);
  d.lagged.names = {"y"};
  RngStream fit_rng(4);
  const H0Fit h0 = fit_h0(d, quick(), 5, fit_rng);
  REQUIRE(h0.residual_draws.size() == 5);
  CHECK(h0.draw_indices == std::vector<std::size_t>{19, 39, 59, 79, 99});
  const double sigma_hat = h0.posterior.sigma_hat * h0.posterior.transform.range;
  for (const auto& e : h0.residual_draws) {
    REQUIRE(e.size() == static_cast<std::size_t>(t_len - 1));
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    CHECK(std::fabs(mean) < 0.1 * sigma_hat);
    double ss = 0.0;
    for (double v : e) ss += (v - mean) * (v - mean);
    CHECK(ss / static_cast<double>(e.size()) == doctest::Approx(4.0).epsilon(0.15));
  }
  CHECK(h0.residual_draws[0] != h0.residual_draws[1]);

  RngStream same(4), again(4);
  const HorizonModel m0 = fit_horizon(d, 0, std::nullopt, quick(), same);
  CHECK(posterior_to_json(m0.posterior) == posterior_to_json(fit_h0(d, quick(), 5, again).posterior));
}

TEST_CASE("golden posterior on a fixed dataset") {
  LpDataset d = ar1_dataset(40, 0.5, 5);
  BartConfig c = quick();
  c.trees = 3;
  c.n_draws = 5;
  c.n_burn = 5;
  RngStream a(11), b(11);
  const HorizonModel ma = fit_horizon(d, 2, std::vector<double>(39, 0.25), c, a);
  const HorizonModel mb = fit_horizon(d, 2, std::vector<double>(39, 0.25), c, b);
  CHECK(posterior_to_json(ma.posterior).dump() == posterior_to_json(mb.posterior).dump());
  const std::vector<double> probe{0.1, 0.2, 0.25};
  // frozen values; a change here means the sampler path changed
  CHECK(bart_predict(ma.posterior, probe, 4) == doctest::Approx(-1.0881258611896065).epsilon(1e-14));
  CHECK(ma.posterior.sigma2_draws.back() == doctest::Approx(0.043996159391808835).epsilon(1e-14));
}

TEST_CASE("linear local projection") {
  RngStream rng(6);
  LpDataset d;
  const int t_len = 2000;
  d.response.resize(t_len);
  d.shock = std::vector<double>(t_len);
  for (int t = 0; t < t_len; ++t) (*d.shock)[t] = rng.normal();
  for (int t = 0; t < t_len; ++t) d.response[t] = (t >= 2 ? 2.0 * (*d.shock)[t - 2] : 0.0) + rng.normal();
  d.lagged.values = Matrix(t_len, 1);
  for (int t = 0; t < t_len; ++t) d.lagged.values(t, 0) = rng.normal();
  d.lagged.names = {"noise"};
  const LinearLpFit f2 = linear_lp_fit(d, 2);
  CHECK(std::fabs(f2.shock_coefficient() - 2.0) < 3.0 * f2.shock_standard_error());
  const LinearLpFit f0 = linear_lp_fit(d, 0);
  CHECK(std::fabs(f0.shock_coefficient()) < 3.0 * f0.shock_standard_error());
  CHECK(f2.names.front() == "const");

  const LpDataset ar = ar1_dataset(5000, 0.5, 7);
  for (int h = 0; h <= 4; ++h) {
    const LinearLpFit f = linear_lp_fit(ar, h);
    // h = 0 is an exact fit, so allow rounding there
    CHECK(std::fabs(f.shock_coefficient() - std::pow(0.5, h)) < std::max(3.0 * f.shock_standard_error(), 1e-10));
  }
}
