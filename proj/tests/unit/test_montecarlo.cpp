#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexlp/errors.hpp"
#include "flexlp/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace flexlp;

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

// one variable, one horizon, two shocks; the other variables stay NaN
McResult paired(const std::vector<std::pair<double, double>>& values) {
  McResult r;
  r.dgp = "sign-ma";
  r.variables = {"gdp", "inflation", "ff"};
  r.shock_sizes = {1.0, -1.0};
  r.horizons = 0;
  r.truth = {Matrix::Zero(3, 1), Matrix::Zero(3, 1)};
  for (std::size_t k = 0; k < values.size(); ++k) {
    McRep rep;
    rep.index = k;
    rep.seed = 100 + k;
    rep.bart_median.assign(2, std::vector<std::vector<double>>(3, std::vector<double>(1, kNan)));
    rep.linear = rep.bart_median;
    rep.bart_median[0][0][0] = values[k].first;
    rep.bart_median[1][0][0] = values[k].second;
    rep.linear[0][0][0] = values[k].first;
    rep.linear[1][0][0] = -values[k].first;
    r.reps.push_back(rep);
  }
  return r;
}

McConfig tiny(const std::string& dgp) {
  McConfig c = mc_preset(dgp, "desk");
  c.n_reps = 3;
  c.girf.bart.trees = 5;
  c.girf.bart.n_draws = 20;
  c.girf.bart.n_burn = 20;
  c.girf.residual_draws = 1;
  c.girf.horizons = 2;
  c.girf.only_horizons.clear();
  c.truth.n_paths = 200;
  c.truth.horizons = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("sign dominance counts") {
  McResult r = paired({{2.0, 1.0}, {-3.0, 1.0}, {0.5, -1.0}, {0.0, 0.0}, {1.0, -1.0}});
  Matrix d = sign_dominance(r, 0, 1);
  // wins: reps 0, 1; ties: reps 3, 4
  CHECK(d(0, 0) == doctest::Approx(100.0 * 3.0 / 5.0));
  CHECK(std::isnan(d(1, 0)));
  // the linear estimator here is exactly antisymmetric: every rep ties
  CHECK(sign_dominance(r, 0, 1, Estimator::kLinear)(0, 0) == 50.0);

  r.reps[1].failed = true;
  r.reps[2].bart_median[1][0][0] = kNan;
  // left: rep 0 win, reps 3, 4 ties
  CHECK(sign_dominance(r, 0, 1)(0, 0) == doctest::Approx(100.0 * 2.0 / 3.0));
  CHECK(sign_dominance(r, 1, 0)(0, 0) == doctest::Approx(100.0 * 1.0 / 3.0));
  CHECK_THROWS_AS(sign_dominance(r, 0, 2), ParameterError);

  McResult a = paired({{1.0, 0.0}, {1.0, 0.0}});
  McResult b = paired({{0.5, 0.0}, {2.0, 0.0}});
  a.shock_sizes = {1.0};
  b.shock_sizes = {-1.0};
  CHECK(sign_dominance(a, b)(0, 0) == 50.0);
  b.reps[1].seed = 7;
  CHECK_THROWS_AS(sign_dominance(a, b), DataError);
}

TEST_CASE("summary and curve rmse against hand computation") {
  McResult r = paired({{1.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}});
  r.truth[0](0, 0) = 1.5;
  const McSummary s = summarize(r);
  CHECK(s.bart_median[0](0, 0) == 2.0);
  CHECK(s.linear_mean[0](0, 0) == doctest::Approx(7.0 / 3.0));
  // rep-level errors 0.5, 0.5, 2.5
  CHECK(s.bart_rmse[0](0, 0) == doctest::Approx(1.5));
  CHECK(curve_rmse(s, 0, Estimator::kBart, {0}, {0}) == doctest::Approx(0.5));
  CHECK(curve_rmse(s, 0, Estimator::kLinear, {0}, {0}) == doctest::Approx(7.0 / 3.0 - 1.5));
  CHECK_THROWS_AS(curve_rmse(s, 0, Estimator::kBart, {1}, {0}), DataError);
  CHECK_THROWS_AS(curve_rmse(s, 0, Estimator::kBart, {}, {0}), ParameterError);
}

TEST_CASE("datasets follow each experiment's control set") {
  McConfig tv = mc_preset("tvar", "desk");
  const Simulation s = simulate(tv.dgp, SimConfig{60, 10, 3});
  const LpDataset d = mc_dataset(tv, s, 0);
  CHECK(d.contemporaneous.names == std::vector<std::string>{"y1", "y2"});
  CHECK(*d.shock == std::vector<double>(s.series.col(2).data(), s.series.col(2).data() + 50));
  CHECK(lp_shock_size(tv, 2.0) == 2.0 * std::get<TvarParams>(tv.dgp).b1(2, 2));

  McConfig sm = mc_preset("sign-ma", "desk");
  const Simulation m = simulate(sm.dgp, SimConfig{60, 10, 3});
  const LpDataset e = mc_dataset(sm, m, 1);
  CHECK(e.lagged.cols() == 6);
  CHECK(e.contemporaneous.cols() == 2);
  CHECK(e.shock_name == m.shock_names[2]);
  sm.contemporaneous_shocks = false;
  CHECK(mc_dataset(sm, m, 1).contemporaneous.cols() == 0);

  McConfig sv = mc_preset("svar-garch", "desk");
  const Simulation g = simulate(sv.dgp, SimConfig{60, 10, 3});
  CHECK(mc_dataset(sv, g, 2).contemporaneous.cols() == 0);
  CHECK(mc_dataset(sv, g, 2).lagged.cols() == 3);
}

TEST_CASE("replications rerun from their seed") {
  McConfig c = tiny("tvar");
  const McResult a = run_mc(c);
  c.threads = 2;
  const McResult b = run_mc(c);
  REQUIRE(a.reps.size() == 3);
  for (std::size_t k = 0; k < a.reps.size(); ++k) {
    CHECK(a.reps[k].seed == replication_seed(5, k));
    CHECK(a.reps[k].bart_median == b.reps[k].bart_median);
    CHECK(a.reps[k].linear == b.reps[k].linear);
  }
  CHECK(a.truth[0] == b.truth[0]);
  CHECK(a.reps[0].seed != a.reps[1].seed);
  const McRep again = run_replication(c, 1, a.reps[1].seed);
  CHECK(again.bart_median == a.reps[1].bart_median);

  std::ostringstream x, y;
  write_mc_csv(x, a);
  write_mc_csv(y, b);
  CHECK(x.str() == y.str());
  // header plus two estimators for 3 reps x 3 variables x 3 horizons
  std::size_t lines = 0;
  for (char ch : x.str()) lines += ch == '\n';
  CHECK(lines == 1 + 2 * 3 * 3 * 3);
}

TEST_CASE("failure budget") {
  McConfig c = tiny("svar-garch");
  c.lags = 199;  // leaves no estimation rows
  c.truth.n_paths = 10;
  try {
    run_mc(c);
    FAIL("expected the run to fail");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find(std::to_string(replication_seed(5, 0))) != std::string::npos);
  }
  c.max_failure_rate = 1.0;
  const McResult r = run_mc(c);
  CHECK(r.failures() == 3);
  CHECK(!r.reps[0].error.empty());
}

TEST_CASE("config validation") {
  McConfig c = tiny("tvar");
  c.girf.only_horizons = {3};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = tiny("svar-garch");
  c.shock_variable = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(mc_preset("var", "desk"), ConfigError);
  CHECK_THROWS_AS(mc_preset("tvar", "huge"), ConfigError);
  const McConfig p = mc_preset("sign-ma", "paper");
  CHECK(p.total == 400);
  CHECK(p.girf.residual_draws == 100);
  CHECK(p.girf.bart.trees == 250);
}
