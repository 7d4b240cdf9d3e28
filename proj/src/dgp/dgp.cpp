#include "flexlp/dgp.hpp"

#include "flexlp/errors.hpp"
#include "flexlp/io.hpp"
#include "flexlp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>

namespace flexlp {

namespace {

void require_shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const std::string& what) {
  if (m.rows() != r || m.cols() != c)
    throw ParameterError(what + " must be " + std::to_string(r) + "x" + std::to_string(c));
  if (!m.allFinite()) throw ParameterError(what + " has non-finite entries");
}

Vector draw_shocks(RngStream& rng) {
  Vector e(3);
  for (int i = 0; i < 3; ++i) e(i) = rng.normal();
  return e;
}

struct GarchState {
  Vector y = Vector::Zero(3);
  double h = 1.0;
  double e1_prev = 0.0;
};

GarchState garch_start(const SvarGarchParams& p) {
  GarchState s;
  s.h = p.h0;
  return s;
}

const Vector& garch_step(const SvarGarchParams& p, GarchState& s, const Vector& e) {
  double h = 0.0;
  if (p.timing == GarchTiming::kLagged) {
    h = std::max(p.omega + p.persistence * s.h + p.loading * std::sqrt(s.h) * s.e1_prev, p.variance_floor);
  } else {
    // sqrt(h) is the positive root of r^2 - l e r - (w + p h_{t-1}) = 0
    const double c = p.omega + p.persistence * s.h;
    const double le = p.loading * e(0);
    const double r = 0.5 * (le + std::sqrt(le * le + 4.0 * c));
    h = std::max(r * r, p.variance_floor);
  }
  Vector u(3);
  u << std::sqrt(h) * e(0), e(1), e(2);
  s.y = p.a * s.y + p.b * h + u;
  s.h = h;
  s.e1_prev = e(0);
  return s.y;
}

struct TvarState {
  Vector y;
  int regime = 1;
};

TvarState tvar_start(const TvarParams& p) {
  TvarState s;
  s.y = p.y0.size() ? p.y0 : Vector::Zero(3);
  return s;
}

const Vector& tvar_step(const TvarParams& p, TvarState& s, const Vector& e) {
  s.regime = s.y(static_cast<Eigen::Index>(p.threshold_index)) <= p.threshold ? 1 : 2;
  if (s.regime == 1)
    s.y = p.pi1 * s.y + p.b1 * e;
  else
    s.y = p.pi2 * s.y + p.b2 * e;
  return s.y;
}

struct MaState {
  std::deque<Vector> past;  // most recent first
  Vector y = Vector::Zero(3);
};

MaState ma_start(const SignMaParams&) { return MaState{}; }

const Vector& ma_step(const SignMaParams& p, MaState& s, const Vector& e) {
  s.past.push_front(e);
  if (static_cast<int>(s.past.size()) > p.order() + 1) s.past.pop_back();
  s.y.setZero();
  for (std::size_t l = 0; l < s.past.size(); ++l) {
    const Vector& el = s.past[l];
    const auto c = static_cast<Eigen::Index>(l);
    s.y += p.gdp.col(c) * el(0) + p.inflation.col(c) * el(1) + (el(2) >= 0.0 ? p.ff_pos.col(c) : p.ff_neg.col(c)) * el(2);
  }
  return s.y;
}

Simulation frame(const SimConfig& sim, std::vector<std::string> series, std::vector<std::string> shocks) {
  sim.validate();
  Simulation out;
  out.series = Matrix(sim.kept(), 3);
  out.shocks = Matrix(sim.kept(), 3);
  out.series_names = std::move(series);
  out.shock_names = std::move(shocks);
  return out;
}

double hump(double peak, double at, int l) {
  const double r = static_cast<double>(l) / at;
  return peak * r * std::exp(1.0 - r);
}

// Per-path shocked-minus-baseline responses, summed in fixed blocks so the
// result does not depend on the thread count.
template <class Params, class State, class Start, class Step>
TrueGirf run_truth(const Params& p, Start start, Step step, const ShockSpec& shock, const TrueGirfOptions& o,
                   const RngStream& rng) {
  if (o.n_paths < 1) throw ParameterError("n_paths must be positive");
  if (o.horizons < 0) throw ParameterError("horizons must be non-negative");
  if (shock.variable > 2) throw ParameterError("shock variable must be 0, 1 or 2");
  const auto cols = static_cast<Eigen::Index>(o.horizons + 1);
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (o.n_paths + kBlock - 1) / kBlock;
  std::vector<Matrix> sum(blocks, Matrix::Zero(3, cols)), sumsq(blocks, Matrix::Zero(3, cols));

  auto history = [&](State& s, RngStream& r) {
    if (o.init == InitState::kStationary)
      for (int t = 0; t < o.init_burn; ++t) step(p, s, draw_shocks(r));
  };

  parallel_for(blocks, o.threads, [&](std::size_t b) {
    const std::size_t end = std::min(o.n_paths, (b + 1) * kBlock);
    Matrix diff(3, cols);
    for (std::size_t path = b * kBlock; path < end; ++path) {
      if (o.common_random_numbers) {
        RngStream r = rng.substream({path});
        State base = start(p);
        history(base, r);
        State shocked = base;
        for (Eigen::Index t = 0; t < cols; ++t) {
          Vector e = draw_shocks(r);
          Vector es = e;
          if (t == 0) {
            e(static_cast<Eigen::Index>(shock.variable)) = 0.0;
            es(static_cast<Eigen::Index>(shock.variable)) = shock.size;
          }
          diff.col(t) = step(p, shocked, es) - step(p, base, e);
        }
      } else {
        RngStream rb = rng.substream({path, 0}), rs = rng.substream({path, 1});
        State base = start(p), shocked = start(p);
        history(base, rb);
        history(shocked, rs);
        for (Eigen::Index t = 0; t < cols; ++t) {
          Vector e = draw_shocks(rb), es = draw_shocks(rs);
          if (t == 0) {
            e(static_cast<Eigen::Index>(shock.variable)) = 0.0;
            es(static_cast<Eigen::Index>(shock.variable)) = shock.size;
          }
          const Vector yb = step(p, base, e);
          diff.col(t) = step(p, shocked, es) - yb;
        }
      }
      sum[b] += diff;
      sumsq[b] += diff.cwiseProduct(diff);
    }
  });
  Matrix s = Matrix::Zero(3, cols), q = Matrix::Zero(3, cols);
  for (std::size_t b = 0; b < blocks; ++b) {
    s += sum[b];
    q += sumsq[b];
  }
  const auto n = static_cast<double>(o.n_paths);
  TrueGirf out;
  out.mean = s / n;
  if (o.n_paths > 1) {
    const Matrix var = ((q - n * out.mean.cwiseProduct(out.mean)) / (n - 1.0)).cwiseMax(0.0);
    out.std_error = (var / n).cwiseSqrt();
  } else {
    out.std_error = Matrix::Zero(3, cols);
  }
  return out;
}

}  // namespace

void SimConfig::validate() const {
  if (total < 1) throw ParameterError("simulation length must be positive");
  if (burn < 0 || burn >= total) throw ParameterError("burn must lie in 0..total-1");
}

SvarGarchParams SvarGarchParams::paper() {
  SvarGarchParams p;
  p.a = Matrix(3, 3);
  p.a << 0.5, -0.25, 0.25, 0.75, 0.25, 0.25, -0.25, -0.25, 0.75;
  p.b = Vector(3);
  p.b << -1.75, -1.5, 1.75;
  return p;
}

void SvarGarchParams::validate() const {
  require_shape(a, 3, 3, "A");
  require_shape(b, 3, 1, "B");
  if (!(h0 > 0.0)) throw ParameterError("h0 must be positive");
  if (!(variance_floor > 0.0)) throw ParameterError("variance_floor must be positive");
  if (!(omega > 0.0) || !(persistence >= 0.0) || !std::isfinite(loading))
    throw ParameterError("GARCH constants must satisfy omega > 0, persistence >= 0");
}

TvarParams TvarParams::paper() {
  TvarParams p;
  p.pi1 = Matrix(3, 3);
  p.pi1 << 0.25, 0.25, -0.25, -0.25, 0.25, -0.25, 0.25, 0.25, 0.15;
  p.b1 = Matrix(3, 3);
  p.b1 << 0.10, 0, 0, -0.20, 0.15, 0, 0.10, -0.10, 1;
  p.pi2 = Matrix(3, 3);
  p.pi2 << 0.50, 1.25, -1.75, -0.25, 0.50, -1.25, 0.25, 0.25, 0.15;
  p.b2 = Matrix(3, 3);
  p.b2 << 0.10, 0, 0, -0.20, 0.15, 0, 0.10, -0.10, 0.40;
  p.y0 = Vector::Zero(3);
  return p;
}

void TvarParams::validate() const {
  require_shape(pi1, 3, 3, "Pi1");
  require_shape(pi2, 3, 3, "Pi2");
  require_shape(b1, 3, 3, "B1");
  require_shape(b2, 3, 3, "B2");
  if (threshold_index > 2) throw ParameterError("threshold variable must be 0, 1 or 2");
  if (y0.size() != 0 && y0.size() != 3) throw ParameterError("y0 must have 3 entries");
}

void SignMaParams::validate() const {
  if (gdp.cols() < 1) throw ParameterError("sign-MA blocks are empty");
  for (const Matrix* m : {&gdp, &inflation, &ff_pos, &ff_neg}) require_shape(*m, 3, gdp.cols(), "sign-MA block");
}

std::string dgp_name(const DgpParams& dgp) {
  switch (dgp.index()) {
    case 0: return "svar-garch";
    case 1: return "tvar";
    default: return "sign-ma";
  }
}

namespace {

nlohmann::json rows_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json dgp_params_json(const DgpParams& dgp) {
  if (const auto* g = std::get_if<SvarGarchParams>(&dgp))
    return {{"A", rows_json(g->a)},
            {"B", vector_json(g->b)},
            {"omega", g->omega},
            {"persistence", g->persistence},
            {"loading", g->loading},
            {"h0", g->h0},
            {"variance_floor", g->variance_floor},
            {"garch_timing", g->timing == GarchTiming::kLagged ? "lagged" : "literal"}};
  if (const auto* t = std::get_if<TvarParams>(&dgp))
    return {{"Pi1", rows_json(t->pi1)},     {"Pi2", rows_json(t->pi2)},
            {"B1", rows_json(t->b1)},       {"B2", rows_json(t->b2)},
            {"threshold", t->threshold},    {"threshold_variable", t->threshold_index},
            {"y0", t->y0.size() ? vector_json(t->y0) : vector_json(Vector::Zero(3))}};
  const auto& m = std::get<SignMaParams>(dgp);
  return {{"gdp", rows_json(m.gdp)},
          {"inflation", rows_json(m.inflation)},
          {"ff_pos", rows_json(m.ff_pos)},
          {"ff_neg", rows_json(m.ff_neg)}};
}

namespace {

Matrix draw_shock_matrix(const SimConfig& sim) {
  sim.validate();
  RngStream rng(sim.seed);
  Matrix e(sim.total, 3);
  for (int t = 0; t < sim.total; ++t) e.row(t) = draw_shocks(rng).transpose();
  return e;
}

}  // namespace

Simulation simulate_svar_garch(const SvarGarchParams& p, const SimConfig& sim) {
  return simulate_with_shocks(p, draw_shock_matrix(sim), sim.burn);
}

Simulation simulate_tvar(const TvarParams& p, const SimConfig& sim) {
  return simulate_with_shocks(p, draw_shock_matrix(sim), sim.burn);
}

Simulation simulate_sign_ma(const SignMaParams& p, const SimConfig& sim) {
  return simulate_with_shocks(p, draw_shock_matrix(sim), sim.burn);
}

Simulation simulate(const DgpParams& dgp, const SimConfig& sim) {
  return simulate_with_shocks(dgp, draw_shock_matrix(sim), sim.burn);
}

Simulation simulate_with_shocks(const DgpParams& dgp, const Matrix& shocks, int burn) {
  if (shocks.cols() != 3) throw ParameterError("shock matrix must have 3 columns");
  SimConfig sim;
  sim.total = static_cast<int>(shocks.rows());
  sim.burn = burn;
  auto run = [&](const auto& p, auto state, auto step, std::vector<std::string> names, std::vector<std::string> shock_names,
                 auto record) {
    p.validate();
    Simulation out = frame(sim, std::move(names), std::move(shock_names));
    for (int t = 0; t < sim.total; ++t) {
      const Vector e = shocks.row(t).transpose();
      const Vector& y = step(p, state, e);
      if (t >= sim.burn) {
        out.series.row(t - sim.burn) = y.transpose();
        out.shocks.row(t - sim.burn) = e.transpose();
        record(out, state);
      }
    }
    return out;
  };
  if (const auto* g = std::get_if<SvarGarchParams>(&dgp))
    return run(*g, garch_start(*g), garch_step, {"y1", "y2", "y3"}, {"e1", "e2", "e3"},
               [](Simulation& o, const GarchState& s) { o.variance.push_back(s.h); });
  if (const auto* v = std::get_if<TvarParams>(&dgp))
    return run(*v, tvar_start(*v), tvar_step, {"y1", "y2", "y3"}, {"e1", "e2", "e3"},
               [](Simulation& o, const TvarState& s) { o.regime.push_back(s.regime); });
  const auto& m = std::get<SignMaParams>(dgp);
  return run(m, ma_start(m), ma_step, {"gdp", "inflation", "ff"}, {"e_gdp", "e_inflation", "e_ff"},
             [](Simulation&, const MaState&) {});
}

SignMaParams calibrate_sign_ma(const Matrix& gdp, const Matrix& inflation, const Matrix& ff, double factor,
                               const std::vector<int>& gdp_horizons, const std::vector<int>& inflation_horizons) {
  if (!std::isfinite(factor)) throw ParameterError("calibration factor must be finite");
  SignMaParams p;
  p.gdp = gdp;
  p.inflation = inflation;
  p.ff_neg = ff;
  p.ff_pos = ff;
  p.validate();
  auto scale = [&](const std::vector<int>& hs, Eigen::Index row) {
    for (int l : hs) {
      if (l < 0 || l > p.order())
        throw ParameterError("calibration horizon " + std::to_string(l) + " outside 0.." + std::to_string(p.order()));
      p.ff_pos(row, l) = factor * ff(row, l);
    }
  };
  scale(gdp_horizons, 0);
  scale(inflation_horizons, 1);
  return p;
}

SignMaParams sign_ma_synthetic() {
  constexpr int kOrder = 20;
  Matrix gdp(3, kOrder + 1), infl(3, kOrder + 1), ff(3, kOrder + 1);
  for (int l = 0; l <= kOrder; ++l) {
    gdp.col(l) << 0.6 * std::pow(0.85, l), hump(0.10, 4.0, l), hump(0.15, 3.0, l);
    infl.col(l) << hump(-0.05, 5.0, l), 0.4 * std::pow(0.8, l), hump(0.15, 3.0, l);
    ff.col(l) << hump(-0.25, 3.0, l), hump(-0.15, 12.0, l), 0.4 * std::pow(0.8, l);
  }
  return calibrate_sign_ma(gdp, infl, ff);
}

SignMaParams read_sign_ma_csv(std::istream& in, const std::string& source, double factor,
                              const std::vector<int>& gdp_horizons, const std::vector<int>& inflation_horizons) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"lag", "variable", "block", "value"})
    throw DataError(source + ": expected header lag,variable,block,value");
  const std::map<std::string, Eigen::Index> rows{{"gdp", 0}, {"inflation", 1}, {"ff", 2}};
  std::map<std::string, std::map<std::pair<int, Eigen::Index>, double>> cells;
  int max_lag = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto c = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (c.size() != 4) throw DataError(where + ": expected 4 cells");
    const double lag = parse_double(c[0], where);
    if (lag < 0 || lag != std::floor(lag) || lag > 1000) throw DataError(where + ": bad lag");
    const auto row = rows.find(c[1]);
    if (row == rows.end()) throw DataError(where + ": variable must be gdp, inflation or ff");
    if (c[2] != "gdp" && c[2] != "inflation" && c[2] != "ff" && c[2] != "ff_pos" && c[2] != "ff_neg")
      throw DataError(where + ": unknown block '" + c[2] + "'");
    if (!cells[c[2]].emplace(std::make_pair(static_cast<int>(lag), row->second), parse_double(c[3], where)).second)
      throw DataError(where + ": duplicate entry");
    max_lag = std::max(max_lag, static_cast<int>(lag));
  }
  auto block = [&](const std::string& name) {
    const auto it = cells.find(name);
    if (it == cells.end()) throw DataError(source + ": missing block '" + name + "'");
    Matrix m(3, max_lag + 1);
    for (int l = 0; l <= max_lag; ++l)
      for (Eigen::Index r = 0; r < 3; ++r) {
        const auto v = it->second.find({l, r});
        if (v == it->second.end())
          throw DataError(source + ": block '" + name + "' lacks lag " + std::to_string(l));
        m(r, l) = v->second;
      }
    return m;
  };
  if (cells.count("ff")) {
    if (cells.count("ff_pos") || cells.count("ff_neg")) throw DataError(source + ": give either ff or ff_pos/ff_neg");
    return calibrate_sign_ma(block("gdp"), block("inflation"), block("ff"), factor, gdp_horizons, inflation_horizons);
  }
  SignMaParams p;
  p.gdp = block("gdp");
  p.inflation = block("inflation");
  p.ff_pos = block("ff_pos");
  p.ff_neg = block("ff_neg");
  p.validate();
  return p;
}

void write_sign_ma_csv(std::ostream& out, const SignMaParams& p) {
  out << "lag,variable,block,value\n";
  const char* vars[] = {"gdp", "inflation", "ff"};
  const std::pair<const char*, const Matrix*> blocks[] = {
      {"gdp", &p.gdp}, {"inflation", &p.inflation}, {"ff_pos", &p.ff_pos}, {"ff_neg", &p.ff_neg}};
  for (const auto& [name, m] : blocks)
    for (Eigen::Index l = 0; l < m->cols(); ++l)
      for (Eigen::Index r = 0; r < 3; ++r)
        out << l << ',' << vars[r] << ',' << name << ',' << format_double((*m)(r, l)) << '\n';
}

TrueGirf true_girf_mc(const DgpParams& dgp, const ShockSpec& shock, const TrueGirfOptions& o, const RngStream& rng) {
  if (const auto* g = std::get_if<SvarGarchParams>(&dgp)) {
    g->validate();
    return run_truth<SvarGarchParams, GarchState>(*g, garch_start, garch_step, shock, o, rng);
  }
  if (const auto* t = std::get_if<TvarParams>(&dgp)) {
    t->validate();
    return run_truth<TvarParams, TvarState>(*t, tvar_start, tvar_step, shock, o, rng);
  }
  const auto& m = std::get<SignMaParams>(dgp);
  m.validate();
  return run_truth<SignMaParams, MaState>(m, ma_start, ma_step, shock, o, rng);
}

Matrix sign_ma_true_irf(const SignMaParams& p, const ShockSpec& shock, int horizons) {
  p.validate();
  if (horizons < 0) throw ParameterError("horizons must be non-negative");
  if (shock.variable > 2) throw ParameterError("shock variable must be 0, 1 or 2");
  const Matrix& block = shock.variable == 0   ? p.gdp
                        : shock.variable == 1 ? p.inflation
                        : shock.size >= 0.0   ? p.ff_pos
                                              : p.ff_neg;
  Matrix out = Matrix::Zero(3, horizons + 1);
  const auto n = std::min<Eigen::Index>(horizons + 1, block.cols());
  out.leftCols(n) = shock.size * block.leftCols(n);
  return out;
}

InitState default_init(const DgpParams& dgp) {
  return std::holds_alternative<SvarGarchParams>(dgp) ? InitState::kStationary : InitState::kFixed;
}

}  // namespace flexlp
