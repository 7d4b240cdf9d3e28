#include "flexlp/montecarlo.hpp"

#include "flexlp/errors.hpp"
#include "flexlp/io.hpp"
#include "flexlp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace flexlp {

namespace {

constexpr std::uint64_t kSimStream = 0;
constexpr std::uint64_t kFitStream = 1;
constexpr std::uint64_t kTruthStream = 7;

const double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<double> column(const Matrix& m, Eigen::Index c) {
  return std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows());
}

const char* mode_name(DrawMode m) {
  switch (m) {
    case DrawMode::kSingle: return "single";
    case DrawMode::kPooled: return "pooled";
    default: return "averaged";
  }
}

}  // namespace

void McConfig::validate() const {
  if (n_reps < 1) throw ParameterError("n_reps must be at least 1");
  SimConfig{total, burn, 0}.validate();
  if (lags < 1) throw ParameterError("lags must be at least 1");
  if (shock_variable > 2) throw ParameterError("shock variable must be 0, 1 or 2");
  if (shock_sizes.empty()) throw ParameterError("at least one shock size is required");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) throw ParameterError("max_failure_rate must lie in [0, 1]");
  if (std::holds_alternative<SvarGarchParams>(dgp) && shock_variable != 0)
    throw ConfigError("the SVAR-GARCH experiment shocks the first variable");
  if (girf.horizons < 0) throw ParameterError("horizons must be non-negative");
  for (int h : girf.only_horizons)
    if (h < 0 || h > girf.horizons)
      throw ParameterError("only_horizons entry " + std::to_string(h) + " outside 0.." + std::to_string(girf.horizons));
  girf.bart.validate();
}

McConfig mc_preset(const std::string& dgp, const std::string& scale) {
  if (scale != "desk" && scale != "paper") throw ConfigError("scale must be 'desk' or 'paper', got '" + scale + "'");
  const bool paper = scale == "paper";
  McConfig c;
  c.girf.bart.trees = paper ? 250 : 50;
  c.girf.bart.n_draws = paper ? 2000 : 500;
  c.girf.bart.n_burn = paper ? 1000 : 250;
  c.girf.residual_draws = paper ? 100 : 2;
  c.girf.draw_mode = DrawMode::kPooled;
  c.girf.horizons = 8;
  c.n_reps = paper ? 100 : 20;
  c.truth.n_paths = paper ? 100000 : 20000;
  if (dgp == "svar-garch") {
    c.dgp = SvarGarchParams::paper();
    c.lags = 2;
    c.shock_variable = 0;
  } else if (dgp == "tvar") {
    c.dgp = TvarParams::paper();
    c.lags = 4;
    c.shock_variable = 2;
  } else if (dgp == "sign-ma") {
    c.dgp = sign_ma_synthetic();
    c.lags = 2;
    c.shock_variable = 2;
    c.shock_sizes = {1.0, -1.0};
    c.girf.horizons = 15;
    if (paper) {
      c.total = 400;
    } else {
      c.n_reps = 50;
      c.girf.residual_draws = 4;
      c.girf.only_horizons = {0, 2, 3, 6, 14, 15};
    }
  } else {
    throw ConfigError("unknown dgp '" + dgp + "' (expected svar-garch, tvar or sign-ma)");
  }
  c.truth.init = default_init(c.dgp);
  c.truth.horizons = c.girf.horizons;
  return c;
}

LpDataset mc_dataset(const McConfig& config, const Simulation& sim, std::size_t response) {
  LpDataset d;
  const auto v = static_cast<Eigen::Index>(config.shock_variable);
  d.response_name = sim.series_names[response];
  d.response = column(sim.series, static_cast<Eigen::Index>(response));
  d.lags = config.lags;
  d.contemporaneous.values = Matrix(sim.series.rows(), 0);
  if (std::holds_alternative<TvarParams>(config.dgp)) {
    // recursive ordering: x is the shocked variable, variables ordered before it are controls
    d.shock = column(sim.series, v);
    d.shock_name = sim.series_names[config.shock_variable];
    d.contemporaneous.values = sim.series.leftCols(v);
    d.contemporaneous.names.assign(sim.series_names.begin(), sim.series_names.begin() + v);
    d.lagged.values = sim.series;
    d.lagged.names = sim.series_names;
    return d;
  }
  d.shock = column(sim.shocks, v);
  d.shock_name = sim.shock_names[config.shock_variable];
  if (std::holds_alternative<SvarGarchParams>(config.dgp)) {
    d.lagged.values = sim.series;
    d.lagged.names = sim.series_names;
    return d;
  }
  if (config.contemporaneous_shocks) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index c = 0; c < 3; ++c)
      if (c != v) others.push_back(c);
    d.contemporaneous.values = Matrix(sim.shocks.rows(), static_cast<Eigen::Index>(others.size()));
    for (std::size_t k = 0; k < others.size(); ++k) {
      d.contemporaneous.values.col(static_cast<Eigen::Index>(k)) = sim.shocks.col(others[k]);
      d.contemporaneous.names.push_back(sim.shock_names[static_cast<std::size_t>(others[k])]);
    }
  }
  d.lagged.values = Matrix(sim.series.rows(), 6);
  d.lagged.values << sim.shocks, sim.series;
  d.lagged.names = sim.shock_names;
  d.lagged.names.insert(d.lagged.names.end(), sim.series_names.begin(), sim.series_names.end());
  return d;
}

double lp_shock_size(const McConfig& config, double structural_size) {
  if (const auto* t = std::get_if<TvarParams>(&config.dgp)) {
    const auto v = static_cast<Eigen::Index>(config.shock_variable);
    return structural_size * t->b1(v, v);
  }
  return structural_size;
}

std::size_t McResult::failures() const {
  return static_cast<std::size_t>(std::count_if(reps.begin(), reps.end(), [](const McRep& r) { return r.failed; }));
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
  return RngStream(master).substream({rep}).seed();
}

McRep run_replication(const McConfig& config, std::size_t rep, std::uint64_t seed) {
  McRep out;
  out.index = rep;
  out.seed = seed;
  const RngStream root(seed);
  const std::size_t n_shocks = config.shock_sizes.size();
  const auto cols = static_cast<std::size_t>(config.girf.horizons) + 1;
  out.linear.assign(n_shocks, std::vector<std::vector<double>>(3, std::vector<double>(cols, kNan)));
  out.bart_median = out.linear;
  try {
    SimConfig sim{config.total, config.burn, root.substream({kSimStream}).seed()};
    const Simulation s = simulate(config.dgp, sim);
    std::vector<double> sizes;
    for (double z : config.shock_sizes) sizes.push_back(lp_shock_size(config, z));
    for (std::size_t i = 0; i < 3; ++i) {
      const LpDataset data = mc_dataset(config, s, i);
      for (std::size_t k = 0; k < n_shocks; ++k)
        for (std::size_t h = 0; h < cols; ++h) {
          const bool wanted = config.girf.only_horizons.empty() ||
                              std::find(config.girf.only_horizons.begin(), config.girf.only_horizons.end(),
                                        static_cast<int>(h)) != config.girf.only_horizons.end();
          if (wanted) out.linear[k][i][h] = sizes[k] * linear_lp_fit(data, static_cast<int>(h)).shock_coefficient();
        }
      RngStream fit_rng = root.substream({kFitStream, i});
      const auto irfs = girf_compute(data, IdentificationScheme{}, sizes, config.girf, fit_rng);
      for (std::size_t k = 0; k < n_shocks; ++k) out.bart_median[k][i] = irfs[k].median;
    }
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

Matrix mc_truth(const McConfig& config, double structural_size) {
  const ShockSpec shock{config.shock_variable, structural_size};
  if (const auto* m = std::get_if<SignMaParams>(&config.dgp)) return sign_ma_true_irf(*m, shock, config.girf.horizons);
  TrueGirfOptions o = config.truth;
  o.horizons = config.girf.horizons;
  return true_girf_mc(config.dgp, shock, o, RngStream(config.seed).substream({kTruthStream})).mean;
}

McResult run_mc(const McConfig& config) {
  config.validate();
  McResult r;
  r.dgp = dgp_name(config.dgp);
  r.variables = simulate_with_shocks(config.dgp, Matrix::Zero(1, 3)).series_names;
  r.shock_sizes = config.shock_sizes;
  r.horizons = config.girf.horizons;
  for (double z : config.shock_sizes) r.truth.push_back(mc_truth(config, z));
  r.reps.resize(static_cast<std::size_t>(config.n_reps));
  parallel_for(r.reps.size(), config.threads, [&](std::size_t k) {
    r.reps[k] = run_replication(config, k, replication_seed(config.seed, k));
  });
  const std::size_t failed = r.failures();
  if (static_cast<double>(failed) > config.max_failure_rate * static_cast<double>(r.reps.size())) {
    std::string msg = std::to_string(failed) + " of " + std::to_string(r.reps.size()) + " replications failed";
    for (const auto& rep : r.reps)
      if (rep.failed) {
        msg += "; first: rep " + std::to_string(rep.index) + " seed " + std::to_string(rep.seed) + ": " + rep.error;
        break;
      }
    throw NumericalError(msg);
  }
  return r;
}

McSummary summarize(const McResult& result) {
  McSummary s;
  const auto cols = static_cast<Eigen::Index>(result.horizons + 1);
  const std::vector<double> band{0.025, 0.975};
  for (std::size_t k = 0; k < result.shock_sizes.size(); ++k) {
    Matrix med(3, cols), lo(3, cols), hi(3, cols), lin(3, cols), br(3, cols), lr(3, cols);
    for (std::size_t i = 0; i < 3; ++i)
      for (Eigen::Index h = 0; h < cols; ++h) {
        const double truth = result.truth[k](static_cast<Eigen::Index>(i), h);
        std::vector<double> b, l;
        double sb = 0.0, sl = 0.0;
        for (const auto& rep : result.reps) {
          if (rep.failed) continue;
          const double vb = rep.bart_median[k][i][static_cast<std::size_t>(h)];
          const double vl = rep.linear[k][i][static_cast<std::size_t>(h)];
          if (std::isnan(vb) || std::isnan(vl)) continue;
          b.push_back(vb);
          l.push_back(vl);
          sb += (vb - truth) * (vb - truth);
          sl += (vl - truth) * (vl - truth);
        }
        const auto ii = static_cast<Eigen::Index>(i);
        if (b.empty()) {
          med(ii, h) = lo(ii, h) = hi(ii, h) = lin(ii, h) = br(ii, h) = lr(ii, h) = kNan;
          continue;
        }
        med(ii, h) = median(b);
        const auto q = quantiles(b, band);
        lo(ii, h) = q[0];
        hi(ii, h) = q[1];
        lin(ii, h) = mean(l);
        br(ii, h) = std::sqrt(sb / static_cast<double>(b.size()));
        lr(ii, h) = std::sqrt(sl / static_cast<double>(l.size()));
      }
    s.bart_median.push_back(med);
    s.bart_lower.push_back(lo);
    s.bart_upper.push_back(hi);
    s.linear_mean.push_back(lin);
    s.truth.push_back(result.truth[k]);
    s.bart_rmse.push_back(br);
    s.linear_rmse.push_back(lr);
  }
  return s;
}

double curve_rmse(const McSummary& summary, std::size_t shock, Estimator estimator,
                  const std::vector<std::size_t>& variables, const std::vector<int>& horizons) {
  const Matrix& curve = estimator == Estimator::kBart ? summary.bart_median.at(shock) : summary.linear_mean.at(shock);
  const Matrix& truth = summary.truth.at(shock);
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i : variables)
    for (int h : horizons) {
      const double d = curve(static_cast<Eigen::Index>(i), h) - truth(static_cast<Eigen::Index>(i), h);
      if (std::isnan(d)) throw DataError("curve_rmse: horizon " + std::to_string(h) + " was not estimated");
      ss += d * d;
      ++n;
    }
  if (n == 0) throw ParameterError("curve_rmse needs at least one point");
  return std::sqrt(ss / static_cast<double>(n));
}

namespace {

Matrix dominance(const McResult& a, std::size_t ka, const McResult& b, std::size_t kb, Estimator e) {
  if (a.reps.size() != b.reps.size() || a.horizons != b.horizons)
    throw DataError("sign_dominance: results are not paired");
  const auto cols = static_cast<Eigen::Index>(a.horizons + 1);
  Matrix out(3, cols);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index h = 0; h < cols; ++h) {
      std::size_t n = 0;
      double wins = 0.0;
      for (std::size_t r = 0; r < a.reps.size(); ++r) {
        const McRep& ra = a.reps[r];
        const McRep& rb = b.reps[r];
        if (ra.seed != rb.seed) throw DataError("sign_dominance: replication seeds differ");
        if (ra.failed || rb.failed) continue;
        const auto& va = e == Estimator::kBart ? ra.bart_median[ka] : ra.linear[ka];
        const auto& vb = e == Estimator::kBart ? rb.bart_median[kb] : rb.linear[kb];
        const double p = va[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
        const double q = vb[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
        if (std::isnan(p) || std::isnan(q)) continue;
        ++n;
        // equal magnitudes (typically both exactly zero) score one half
        wins += std::fabs(p) > std::fabs(q) ? 1.0 : std::fabs(p) == std::fabs(q) ? 0.5 : 0.0;
      }
      out(i, h) = n ? 100.0 * wins / static_cast<double>(n) : kNan;
    }
  return out;
}

}  // namespace

Matrix sign_dominance(const McResult& result, std::size_t positive, std::size_t negative, Estimator estimator) {
  if (positive >= result.shock_sizes.size() || negative >= result.shock_sizes.size())
    throw ParameterError("sign_dominance: shock index out of range");
  return dominance(result, positive, result, negative, estimator);
}

Matrix sign_dominance(const McResult& positive, const McResult& negative, Estimator estimator) {
  if (positive.shock_sizes.size() != 1 || negative.shock_sizes.size() != 1)
    throw DataError("sign_dominance: each result must hold exactly one shock size");
  return dominance(positive, 0, negative, 0, estimator);
}

void write_mc_csv(std::ostream& out, const McResult& r) {
  out << "rep,seed,shock_size,variable,horizon,estimator,value\n";
  for (const auto& rep : r.reps) {
    if (rep.failed) continue;
    for (std::size_t k = 0; k < r.shock_sizes.size(); ++k)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t h = 0; h < static_cast<std::size_t>(r.horizons) + 1; ++h) {
          if (std::isnan(rep.bart_median[k][i][h])) continue;
          const std::string prefix = std::to_string(rep.index) + ',' + std::to_string(rep.seed) + ',' +
                                     format_double(r.shock_sizes[k]) + ',' + r.variables[i] + ',' + std::to_string(h);
          out << prefix << ",bart_median," << format_double(rep.bart_median[k][i][h]) << '\n';
          out << prefix << ",linear," << format_double(rep.linear[k][i][h]) << '\n';
        }
  }
}

void write_mc_summary_csv(std::ostream& out, const McResult& r, const McSummary& s) {
  out << "shock_size,variable,horizon,truth,bart_median,bart_q025,bart_q975,linear_mean\n";
  for (std::size_t k = 0; k < r.shock_sizes.size(); ++k)
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index h = 0; h <= r.horizons; ++h) {
        if (std::isnan(s.bart_median[k](i, h))) continue;
        out << format_double(r.shock_sizes[k]) << ',' << r.variables[static_cast<std::size_t>(i)] << ',' << h << ','
            << format_double(s.truth[k](i, h)) << ',' << format_double(s.bart_median[k](i, h)) << ','
            << format_double(s.bart_lower[k](i, h)) << ',' << format_double(s.bart_upper[k](i, h)) << ','
            << format_double(s.linear_mean[k](i, h)) << '\n';
      }
}

nlohmann::json mc_config_json(const McConfig& c) {
  nlohmann::json j;
  j["dgp"] = dgp_name(c.dgp);
  j["params"] = dgp_params_json(c.dgp);
  j["n_reps"] = c.n_reps;
  j["total"] = c.total;
  j["burn"] = c.burn;
  j["lags"] = c.lags;
  j["bart"] = to_json(c.girf.bart);
  j["horizons"] = c.girf.horizons;
  j["residual_draws"] = c.girf.residual_draws;
  j["draw_mode"] = mode_name(c.girf.draw_mode);
  j["convention"] = c.girf.convention == ResidualConvention::kLeads ? "leads" : "lags";
  j["only_horizons"] = c.girf.only_horizons;
  j["shock_variable"] = c.shock_variable;
  j["shock_sizes"] = c.shock_sizes;
  j["contemporaneous_shocks"] = c.contemporaneous_shocks;
  j["truth"] = {{"n_paths", c.truth.n_paths},
                {"init", c.truth.init == InitState::kFixed ? "fixed" : "stationary"},
                {"init_burn", c.truth.init_burn},
                {"common_random_numbers", c.truth.common_random_numbers}};
  j["seed"] = c.seed;
  j["max_failure_rate"] = c.max_failure_rate;
  return j;
}

}  // namespace flexlp
