#include "flexlp/girf.hpp"

#include "flexlp/errors.hpp"
#include "flexlp/io.hpp"
#include "flexlp/stats.hpp"
#include "flexlp/var_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace flexlp {

namespace {

constexpr std::uint64_t kFitStream = 0;
constexpr std::uint64_t kRowStream = 1;
constexpr std::uint64_t kPickStream = 2;

// Draws accumulated for one regression, per shock size.
struct Collected {
  std::vector<std::vector<double>> y0;  // [shock][draw]
  std::vector<std::vector<double>> y1;
};

Matrix point_rows(const HorizonDesign& design, const std::vector<std::size_t>* rows) {
  const Matrix& x = design.x.values;
  if (!rows) return x.colwise().mean();
  Matrix p(static_cast<Eigen::Index>(rows->size()), x.cols());
  for (std::size_t i = 0; i < rows->size(); ++i) p.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>((*rows)[i]));
  return p;
}

// [base; base shifted by s_1; ...; base shifted by s_S]
Matrix stacked_points(const HorizonDesign& design, const IdentificationScheme& scheme, const Matrix& base,
                      std::span<const double> shocks) {
  const Eigen::Index m = base.rows();
  Matrix out(m * static_cast<Eigen::Index>(shocks.size() + 1), base.cols());
  out.topRows(m) = base;
  for (std::size_t s = 0; s < shocks.size(); ++s) {
    auto block = out.middleRows(m * static_cast<Eigen::Index>(s + 1), m);
    block = base;
    if (scheme.shifts_lags()) {
      for (Eigen::Index k = 0; k < scheme.impulse.size(); ++k)
        block.col(static_cast<Eigen::Index>(design.lag1_begin) + k).array() += shocks[s] * scheme.impulse(k);
    } else {
      block.col(static_cast<Eigen::Index>(*design.shock_column)).array() += shocks[s];
    }
  }
  return out;
}

// Group means of draw r: index 0 is the baseline, 1..S the shocked points.
std::vector<double> group_means(const Matrix& pred, std::size_t r, Eigen::Index m, std::size_t groups) {
  std::vector<double> g(groups);
  for (std::size_t k = 0; k < groups; ++k)
    g[k] = pred.row(static_cast<Eigen::Index>(r)).segment(m * static_cast<Eigen::Index>(k), m).mean();
  return g;
}

void collect(const BartPosterior& post, Eigen::Index m, std::span<const std::size_t> draws, bool average,
             Collected& out) {
  const std::size_t shocks = out.y0.size();
  if (average) {
    std::vector<double> acc(shocks + 1, 0.0);
    for (std::size_t r : draws) {
      const auto g = group_means(post.eval_predictions, r, m, shocks + 1);
      for (std::size_t k = 0; k <= shocks; ++k) acc[k] += g[k];
    }
    for (double& a : acc) a /= static_cast<double>(draws.size());
    for (std::size_t s = 0; s < shocks; ++s) {
      out.y0[s].push_back(acc[0]);
      out.y1[s].push_back(acc[s + 1]);
    }
    return;
  }
  for (std::size_t r : draws) {
    const auto g = group_means(post.eval_predictions, r, m, shocks + 1);
    for (std::size_t s = 0; s < shocks; ++s) {
      out.y0[s].push_back(g[0]);
      out.y1[s].push_back(g[s + 1]);
    }
  }
}

std::vector<std::size_t> all_draws(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void validate_inputs(const LpDataset& data, const IdentificationScheme& scheme, std::span<const double> shocks,
                     const GirfSettings& settings) {
  data.validate();
  settings.bart.validate();
  if (settings.horizons < 0) throw ParameterError("horizons must be non-negative");
  if (settings.residual_draws < 1 || settings.residual_draws > static_cast<std::size_t>(settings.bart.n_draws))
    throw ParameterError("residual_draws must lie in 1..n_draws");
  for (int h : settings.only_horizons)
    if (h < 0 || h > settings.horizons) throw ParameterError("requested horizon " + std::to_string(h) + " outside 0..H");
  if (shocks.empty()) throw ParameterError("at least one shock size is required");
  for (double s : shocks)
    if (!std::isfinite(s)) throw ParameterError("shock size must be finite");
  if (scheme.shifts_lags()) {
    if (static_cast<std::size_t>(scheme.impulse.size()) != data.lagged.cols())
      throw ConfigError("impulse vector has " + std::to_string(scheme.impulse.size()) + " entries but the dataset has " +
                        std::to_string(data.lagged.cols()) + " lagged series");
    if (scheme.response_index >= data.lagged.cols()) throw ConfigError("response index outside the impulse vector");
  } else if (!data.shock) {
    throw ConfigError("shock identification needs a shock column");
  }
}

std::vector<IrfResult> run_girf(const LpDataset& data, const IdentificationScheme& scheme,
                                std::span<const double> shocks, const GirfSettings& settings, RngStream& rng,
                                const std::vector<bool>* admitted, std::size_t condition_draws) {
  validate_inputs(data, scheme, shocks, settings);
  const std::size_t n_shocks = shocks.size();
  const std::size_t d_count = settings.residual_draws;
  const auto n_draws = static_cast<std::size_t>(settings.bart.n_draws);
  const bool average = settings.draw_mode == DrawMode::kAveraged;
  const int offset = scheme.shifts_lags() ? 1 : 0;
  const int j_max = settings.horizons - offset;
  const RngStream root(rng.next_u64());
  auto wanted = [&](int h) {
    return settings.only_horizons.empty() ||
           std::find(settings.only_horizons.begin(), settings.only_horizons.end(), h) != settings.only_horizons.end();
  };

  std::vector<IrfResult> results(n_shocks);
  for (std::size_t s = 0; s < n_shocks; ++s) {
    results[s].variable = data.response_name;
    results[s].shock_size = shocks[s];
    results[s].psi.resize(static_cast<std::size_t>(settings.horizons) + 1);
    results[s].y0.resize(results[s].psi.size());
    results[s].y1.resize(results[s].psi.size());
  }
  if (offset == 1 && wanted(0)) {
    // impact is the impulse itself
    const std::size_t copies = average ? 1 : d_count;
    for (std::size_t s = 0; s < n_shocks; ++s) {
      const double phi0 = shocks[s] * scheme.impulse(static_cast<Eigen::Index>(scheme.response_index));
      results[s].psi[0].assign(copies, phi0);
      results[s].y0[0].assign(copies, 0.0);
      results[s].y1[0].assign(copies, phi0);
    }
  }

  // Conditioning rows for regression j, shared by every refit at that j.
  auto pick_rows = [&](const HorizonDesign& design, int j) -> std::optional<std::vector<std::size_t>> {
    if (!admitted) return std::nullopt;
    std::vector<std::size_t> eligible;
    for (std::size_t r = 0; r < design.dates.size(); ++r)
      if ((*admitted)[design.dates[r]]) eligible.push_back(r);
    if (eligible.empty())
      throw DataError("state filter admits no rows of the horizon-" + std::to_string(j + offset) + " regression");
    RngStream pick = root.substream({static_cast<std::uint64_t>(j), kRowStream});
    std::vector<std::size_t> rows(condition_draws);
    for (auto& r : rows) r = eligible[pick.index(eligible.size())];
    return rows;
  };

  auto store = [&](int j, Collected& c) {
    const auto h = static_cast<std::size_t>(j + offset);
    for (std::size_t s = 0; s < n_shocks; ++s) {
      results[s].y0[h] = std::move(c.y0[s]);
      results[s].y1[h] = std::move(c.y1[s]);
      auto& psi = results[s].psi[h];
      psi.resize(results[s].y0[h].size());
      for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = results[s].y1[h][k] - results[s].y0[h][k];
    }
  };

  if (j_max < 0) {
    for (auto& r : results) r.summarize(settings.quantile_levels);
    return results;
  }

  const std::vector<std::size_t> thinned = thinned_draws(n_draws, d_count);
  const std::vector<std::size_t> every = all_draws(n_draws);
  auto single_fit_draws = [&]() -> std::span<const std::size_t> {
    return settings.draw_mode == DrawMode::kSingle ? std::span<const std::size_t>(thinned)
                                                   : std::span<const std::size_t>(every);
  };

  // regression 0: supplies the residual draws and its own response
  std::vector<std::vector<double>> residuals(d_count);
  {
    const HorizonDesign design = build_design(data, 0, std::nullopt, settings.convention);
    const auto rows = pick_rows(design, 0);
    const Matrix base = point_rows(design, rows ? &*rows : nullptr);
    BartOutputs outputs;
    outputs.keep_forests = false;
    outputs.eval_points = stacked_points(design, scheme, base, shocks);
    outputs.train_fit_draws = thinned;
    RngStream fit_rng = root.substream({0, kFitStream});
    const BartPosterior post = bart_fit(design.x, design.y, settings.bart, fit_rng, outputs);
    for (std::size_t d = 0; d < d_count; ++d) {
      residuals[d].resize(design.y.size());
      for (std::size_t i = 0; i < design.y.size(); ++i) residuals[d][i] = design.y[i] - post.train_fits[d][i];
    }
    Collected c{std::vector<std::vector<double>>(n_shocks), std::vector<std::vector<double>>(n_shocks)};
    if (wanted(offset)) {
      collect(post, base.rows(), single_fit_draws(), average, c);
      store(0, c);
    }
  }

  for (int j = 1; j <= j_max; ++j) {
    if (!wanted(j + offset)) continue;
    const auto ju = static_cast<std::uint64_t>(j);
    Collected c{std::vector<std::vector<double>>(n_shocks), std::vector<std::vector<double>>(n_shocks)};
    if (residual_columns(j, settings.convention) == 0) {
      const HorizonDesign design = build_design(data, j, std::nullopt, settings.convention);
      const auto rows = pick_rows(design, j);
      const Matrix base = point_rows(design, rows ? &*rows : nullptr);
      BartOutputs outputs;
      outputs.keep_forests = false;
      outputs.eval_points = stacked_points(design, scheme, base, shocks);
      RngStream fit_rng = root.substream({ju, kFitStream});
      const BartPosterior post = bart_fit(design.x, design.y, settings.bart, fit_rng, outputs);
      collect(post, base.rows(), single_fit_draws(), average, c);
      store(j, c);
      continue;
    }
    // one refit per residual draw
    std::optional<std::vector<std::size_t>> rows;
    if (admitted) rows = pick_rows(build_design(data, j, std::span<const double>(residuals[0]), settings.convention), j);
    std::vector<Collected> per(d_count, Collected{std::vector<std::vector<double>>(n_shocks),
                                                  std::vector<std::vector<double>>(n_shocks)});
    parallel_for(d_count, settings.threads, [&](std::size_t d) {
      const HorizonDesign design = build_design(data, j, std::span<const double>(residuals[d]), settings.convention);
      const Matrix base = point_rows(design, rows ? &*rows : nullptr);
      BartOutputs outputs;
      outputs.keep_forests = false;
      outputs.eval_points = stacked_points(design, scheme, base, shocks);
      RngStream fit_rng = root.substream({ju, kFitStream, d});
      const BartPosterior post = bart_fit(design.x, design.y, settings.bart, fit_rng, outputs);
      if (settings.draw_mode == DrawMode::kSingle) {
        RngStream pick = root.substream({ju, kPickStream, d});
        const std::size_t r = pick.index(n_draws);
        collect(post, base.rows(), std::span<const std::size_t>(&r, 1), false, per[d]);
      } else {
        collect(post, base.rows(), every, average, per[d]);
      }
    });
    for (auto& p : per)
      for (std::size_t s = 0; s < n_shocks; ++s) {
        c.y0[s].insert(c.y0[s].end(), p.y0[s].begin(), p.y0[s].end());
        c.y1[s].insert(c.y1[s].end(), p.y1[s].begin(), p.y1[s].end());
      }
    store(j, c);
  }
  for (auto& r : results) r.summarize(settings.quantile_levels);
  return results;
}

}  // namespace

IdentificationScheme impulse_vector_scheme(const Matrix& series, int lags, std::size_t shock_index,
                                           std::size_t response_index) {
  const VarModel var = var_fit(series, lags);
  if (shock_index >= var.dim() || response_index >= var.dim())
    throw ConfigError("shock or response index outside the VAR dimension");
  IdentificationScheme s;
  s.variant = Identification::kImpulseVector;
  s.impulse = var_impulse_vector(var, shock_index, 1.0);
  s.response_index = response_index;
  return s;
}

ConditioningPoint baseline_point(const HorizonDesign& design) {
  if (design.x.rows() == 0) throw DataError("empty estimation window");
  ConditioningPoint p;
  p.names = design.x.names;
  const Vector m = design.x.values.colwise().mean();
  p.values.assign(m.data(), m.data() + m.size());
  return p;
}

ConditioningPoint baseline_point(const LpDataset& data, int h, std::optional<std::span<const double>> residuals,
                                 ResidualConvention convention) {
  return baseline_point(build_design(data, h, residuals, convention));
}

void IrfResult::summarize(std::span<const double> levels) {
  quantile_levels.assign(levels.begin(), levels.end());
  mean.clear();
  median.clear();
  quantiles.clear();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& draws : psi) {
    if (draws.empty()) {
      mean.push_back(nan);
      median.push_back(nan);
      quantiles.emplace_back(levels.size(), nan);
      continue;
    }
    mean.push_back(flexlp::mean(draws));
    median.push_back(flexlp::median(draws));
    quantiles.push_back(flexlp::quantiles(draws, levels));
  }
}

std::vector<IrfResult> girf_compute(const LpDataset& data, const IdentificationScheme& scheme,
                                    std::span<const double> shock_sizes, const GirfSettings& settings, RngStream& rng) {
  return run_girf(data, scheme, shock_sizes, settings, rng, nullptr, 0);
}

IrfResult girf_compute(const LpDataset& data, const IdentificationScheme& scheme, double shock_size,
                       const GirfSettings& settings, RngStream& rng) {
  return girf_compute(data, scheme, std::span<const double>(&shock_size, 1), settings, rng).front();
}

double StateFilter::threshold() const {
  if (state.empty()) throw DataError("state filter has no state series");
  if (!(percentile >= 0.0 && percentile <= 1.0)) throw ParameterError("state percentile must lie in [0, 1]");
  return quantile(state, percentile);
}

std::vector<bool> StateFilter::admitted() const {
  if (kind == Kind::kAll) return std::vector<bool>(state.size(), true);
  const double q = threshold();
  std::vector<bool> keep(state.size());
  for (std::size_t t = 0; t < state.size(); ++t) keep[t] = kind == Kind::kBelow ? state[t] < q : state[t] > q;
  return keep;
}

std::vector<IrfResult> girf_state_conditional(const LpDataset& data, const IdentificationScheme& scheme,
                                              const StateFilter& filter, std::span<const double> shock_sizes,
                                              std::size_t condition_draws, const GirfSettings& settings,
                                              RngStream& rng) {
  if (condition_draws < 1) throw ParameterError("condition_draws must be positive");
  std::vector<bool> keep;
  if (filter.kind == StateFilter::Kind::kAll && filter.state.empty()) {
    keep.assign(data.length(), true);
  } else {
    if (filter.state.size() != data.length())
      throw DataError("state series has " + std::to_string(filter.state.size()) + " values, dataset has " +
                      std::to_string(data.length()));
    keep = filter.admitted();
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; }))
    throw DataError("state filter '" + filter.label + "' admits no periods");
  auto out = run_girf(data, scheme, shock_sizes, settings, rng, &keep, condition_draws);
  for (auto& r : out) r.variable += "|" + filter.label;
  return out;
}

std::vector<double> linear_lp_irf(const LpDataset& data, const IdentificationScheme& scheme, double shock_size,
                                  int horizons) {
  std::vector<double> out;
  if (!scheme.shifts_lags()) {
    for (int h = 0; h <= horizons; ++h) out.push_back(shock_size * linear_lp_fit(data, h).shock_coefficient());
    return out;
  }
  out.push_back(shock_size * scheme.impulse(static_cast<Eigen::Index>(scheme.response_index)));
  for (int h = 1; h <= horizons; ++h) {
    const LinearLpFit f = linear_lp_fit(data, h - 1);
    double v = 0.0;
    for (Eigen::Index k = 0; k < scheme.impulse.size(); ++k)
      v += f.ols.coefficients(static_cast<Eigen::Index>(f.design.lag1_begin) + 1 + k) * scheme.impulse(k);
    out.push_back(shock_size * v);
  }
  return out;
}

MultiplierResult cumulative_multiplier(const IrfResult& irf_y, const IrfResult& irf_g, std::span<const double> levels) {
  if (irf_y.horizon_count() != irf_g.horizon_count() || irf_y.horizon_count() == 0)
    throw DataError("multiplier needs two responses over the same horizons");
  const std::size_t n = irf_y.psi[0].size();
  for (std::size_t h = 0; h < irf_y.horizon_count(); ++h)
    if (irf_y.psi[h].size() != n || irf_g.psi[h].size() != n)
      throw DataError("multiplier needs paired draws: unpaired draw counts at horizon " + std::to_string(h));
  MultiplierResult m;
  m.quantile_levels = levels.empty() ? (irf_y.quantile_levels.empty() ? std::vector<double>{0.025, 0.16, 0.5, 0.84, 0.975}
                                                                      : irf_y.quantile_levels)
                                     : std::vector<double>(levels.begin(), levels.end());
  std::vector<double> cy(n, 0.0), cg(n, 0.0), ag(n, 0.0);
  for (std::size_t h = 0; h < irf_y.horizon_count(); ++h) {
    std::vector<double> kept;
    std::size_t excluded = 0;
    for (std::size_t d = 0; d < n; ++d) {
      cy[d] += irf_y.psi[h][d];
      cg[d] += irf_g.psi[h][d];
      ag[d] += std::fabs(irf_g.psi[h][d]);
      if (std::fabs(cg[d]) <= 64.0 * std::numeric_limits<double>::epsilon() * ag[d]) {
        ++excluded;
        continue;
      }
      kept.push_back(cy[d] / cg[d]);
    }
    m.excluded.push_back(excluded);
    if (kept.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      m.mean.push_back(nan);
      m.median.push_back(nan);
      m.quantiles.emplace_back(m.quantile_levels.size(), nan);
    } else {
      m.mean.push_back(mean(kept));
      m.median.push_back(median(kept));
      m.quantiles.push_back(quantiles(kept, m.quantile_levels));
    }
    m.draws.push_back(std::move(kept));
  }
  return m;
}

void write_irf_csv(std::ostream& out, std::span<const IrfResult> results) {
  out << "variable,shock_size,horizon,draw,psi,y0,y1\n";
  for (const auto& r : results)
    for (std::size_t h = 0; h < r.psi.size(); ++h)
      for (std::size_t d = 0; d < r.psi[h].size(); ++d)
        out << r.variable << ',' << format_double(r.shock_size) << ',' << h << ',' << d << ','
            << format_double(r.psi[h][d]) << ',' << format_double(r.y0[h][d]) << ',' << format_double(r.y1[h][d])
            << '\n';
}

std::vector<IrfResult> read_irf_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"variable", "shock_size", "horizon",
                                                                                 "draw", "psi", "y0", "y1"})
    throw DataError("IRF file: expected header variable,shock_size,horizon,draw,psi,y0,y1");
  std::vector<IrfResult> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = "IRF file line " + std::to_string(line_no);
    if (cells.size() != 7) throw DataError(where + ": expected 7 cells");
    const auto key = std::make_pair(cells[0], cells[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.emplace_back();
      out.back().variable = cells[0];
      out.back().shock_size = parse_double(cells[1], where);
    }
    IrfResult& r = out[it->second];
    const double hd = parse_double(cells[2], where), dd = parse_double(cells[3], where);
    if (hd < 0 || dd < 0 || hd != std::floor(hd) || dd != std::floor(dd))
      throw DataError(where + ": horizon and draw must be non-negative integers");
    const auto h = static_cast<std::size_t>(hd);
    const auto d = static_cast<std::size_t>(dd);
    if (h >= r.psi.size()) {
      r.psi.resize(h + 1);
      r.y0.resize(h + 1);
      r.y1.resize(h + 1);
    }
    if (d != r.psi[h].size()) throw DataError(where + ": draws must be listed in order from 0");
    r.psi[h].push_back(parse_double(cells[4], where));
    r.y0[h].push_back(parse_double(cells[5], where));
    r.y1[h].push_back(parse_double(cells[6], where));
  }
  const std::vector<double> levels{0.025, 0.16, 0.5, 0.84, 0.975};
  for (auto& r : out) r.summarize(levels);
  return out;
}

nlohmann::json irf_summary_json(std::span<const IrfResult> results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j;
    j["variable"] = r.variable;
    j["shock_size"] = r.shock_size;
    j["quantile_levels"] = r.quantile_levels;
    nlohmann::json hs = nlohmann::json::array();
    for (std::size_t h = 0; h < r.psi.size(); ++h)
      hs.push_back({{"horizon", h}, {"draws", r.psi[h].size()}, {"mean", r.mean[h]}, {"median", r.median[h]},
                    {"quantiles", r.quantiles[h]}});
    j["horizons"] = hs;
    arr.push_back(j);
  }
  return arr;
}

void write_multiplier_csv(std::ostream& out, const MultiplierResult& m) {
  out << "horizon,kept,excluded,mean,median";
  for (double l : m.quantile_levels) out << ",q" << format_double(l);
  out << '\n';
  for (std::size_t h = 0; h < m.mean.size(); ++h) {
    out << h << ',' << m.draws[h].size() << ',' << m.excluded[h] << ',' << format_double(m.mean[h]) << ','
        << format_double(m.median[h]);
    for (double q : m.quantiles[h]) out << ',' << format_double(q);
    out << '\n';
  }
}

}  // namespace flexlp
