#include "config.hpp"

#include "flexlp/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace flexlp::cli {

namespace {

bool absent(const YAML::Node& v) { return !v.IsDefined() || v.IsNull(); }

std::string mark(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return "config";
  return "config line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1);
}

DrawMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "single") return DrawMode::kSingle;
  if (s == "pooled") return DrawMode::kPooled;
  if (s == "averaged") return DrawMode::kAveraged;
  throw ConfigError(where + ": draw_mode must be single, pooled or averaged, got '" + s + "'");
}

ResidualConvention parse_convention(const std::string& s, const std::string& where) {
  if (s == "leads") return ResidualConvention::kLeads;
  if (s == "lags") return ResidualConvention::kLags;
  throw ConfigError(where + ": convention must be leads or lags, got '" + s + "'");
}

}  // namespace

Section::Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
  if (present() && !node_.IsMap()) throw ConfigError(mark(node_) + ": section '" + path_ + "' must be a mapping");
}

bool Section::has(const std::string& key) const { return present() && !absent(node_[key]); }

std::string Section::where(const std::string& key) const {
  const std::string name = path_.empty() ? key : path_ + "." + key;
  if (has(key)) return mark(node_[key]) + " ('" + name + "')";
  return "'" + name + "'";
}

void Section::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(where(key) + ": " + message);
}

YAML::Node Section::value(const std::string& key) {
  used_.insert(key);
  if (!present()) return YAML::Node(YAML::NodeType::Undefined);
  const YAML::Node& n = node_;
  return n[key];
}

Section Section::child(const std::string& key) {
  const YAML::Node v = value(key);
  return Section(absent(v) ? YAML::Node() : v, path_.empty() ? key : path_ + "." + key);
}

double Section::number(const std::string& key, double fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    const double d = v.as<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  } catch (const YAML::Exception&) {
    fail(key, "expected a number");
  }
}

long long Section::integer(const std::string& key, long long fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    return v.as<long long>();
  } catch (const YAML::Exception&) {
    fail(key, "expected an integer");
  }
}

bool Section::boolean(const std::string& key, bool fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    return v.as<bool>();
  } catch (const YAML::Exception&) {
    fail(key, "expected true or false");
  }
}

std::string Section::text(const std::string& key, const std::string& fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  if (!v.IsScalar()) fail(key, "expected a string");
  return v.Scalar();
}

std::string Section::required_text(const std::string& key) {
  if (!has(key)) fail(key, "required key is missing");
  return text(key, "");
}

std::vector<double> Section::numbers(const std::string& key, const std::vector<double>& fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    if (v.IsScalar()) return {v.as<double>()};
    return v.as<std::vector<double>>();
  } catch (const YAML::Exception&) {
    fail(key, "expected a number or a list of numbers");
  }
}

std::vector<int> Section::integers(const std::string& key, const std::vector<int>& fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    if (v.IsScalar()) return {v.as<int>()};
    return v.as<std::vector<int>>();
  } catch (const YAML::Exception&) {
    fail(key, "expected an integer or a list of integers");
  }
}

std::vector<std::string> Section::texts(const std::string& key, const std::vector<std::string>& fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    if (v.IsScalar()) return {v.Scalar()};
    return v.as<std::vector<std::string>>();
  } catch (const YAML::Exception&) {
    fail(key, "expected a string or a list of strings");
  }
}

Matrix Section::matrix(const std::string& key, const Matrix& fallback) {
  const YAML::Node v = value(key);
  if (absent(v)) return fallback;
  try {
    if (v.IsSequence() && v.size() > 0 && v[0].IsScalar()) {
      const auto col = v.as<std::vector<double>>();
      return Eigen::Map<const Vector>(col.data(), static_cast<Eigen::Index>(col.size()));
    }
    const auto rows = v.as<std::vector<std::vector<double>>>();
    if (rows.empty()) fail(key, "empty matrix");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) fail(key, "matrix rows differ in length");
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
  } catch (const YAML::Exception&) {
    fail(key, "expected a list of rows of numbers");
  }
}

std::vector<Section> Section::list(const std::string& key) {
  const YAML::Node v = value(key);
  std::vector<Section> out;
  if (absent(v)) return out;
  if (!v.IsSequence()) fail(key, "expected a list");
  const std::string name = path_.empty() ? key : path_ + "." + key;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], name + "[" + std::to_string(i) + "]");
  return out;
}

void Section::finish() const {
  if (!present()) return;
  for (const auto& kv : node_) {
    const std::string k = kv.first.Scalar();
    if (!used_.count(k)) throw ConfigError(mark(kv.first) + ": unknown key '" + k + "'" + (path_.empty() ? std::string() : " in section '" + path_ + "'"));
  }
}

YAML::Node load_config(const std::string& path, const std::set<std::string>& allowed, const std::string& command) {
  YAML::Node root;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
      root = YAML::Load(in);
    } catch (const YAML::ParserException& e) {
      throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
  }
  if (root.IsNull() || !root.IsDefined()) return YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  for (const auto& kv : root) {
    const std::string k = kv.first.Scalar();
    if (!allowed.count(k))
      throw ConfigError(mark(kv.first) + ": section '" + k + "' is not used by the " + command + " command");
  }
  return root;
}

BartConfig read_bart(Section s, BartConfig c) {
  c.trees = static_cast<int>(s.integer("trees", c.trees));
  c.alpha = s.number("alpha", c.alpha);
  c.beta = s.number("beta", c.beta);
  c.kappa = s.number("kappa", c.kappa);
  c.nu = s.number("nu", c.nu);
  c.q = s.number("q", c.q);
  c.n_draws = static_cast<int>(s.integer("n_draws", c.n_draws));
  c.n_burn = static_cast<int>(s.integer("n_burn", c.n_burn));
  c.thin = static_cast<int>(s.integer("thin", c.thin));
  const long long ml = s.integer("min_leaf", static_cast<long long>(c.min_leaf));
  if (ml < 0) throw ConfigError(s.where("min_leaf") + ": must be non-negative");
  c.min_leaf = static_cast<std::size_t>(ml);
  c.max_depth = static_cast<int>(s.integer("max_depth", c.max_depth));
  if (s.has("move_probs")) {
    const auto v = s.numbers("move_probs", {});
    if (v.size() != 4) throw ConfigError(s.where("move_probs") + ": needs 4 entries (grow, prune, change, swap)");
    c.move_probs = MoveProbabilities{v[0], v[1], v[2], v[3]};
  }
  s.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError("bart: " + std::string(e.what()));
  }
  return c;
}

DgpParams read_dgp(const std::string& name, Section p) {
  if (name == "svar-garch") {
    SvarGarchParams g = SvarGarchParams::paper();
    g.a = p.matrix("A", g.a);
    const Matrix b = p.matrix("B", g.b);
    if (b.cols() != 1) throw ConfigError(p.where("B") + ": expected a list of numbers");
    g.b = b.col(0);
    g.omega = p.number("omega", g.omega);
    g.persistence = p.number("persistence", g.persistence);
    g.loading = p.number("loading", g.loading);
    g.h0 = p.number("h0", g.h0);
    g.variance_floor = p.number("variance_floor", g.variance_floor);
    const std::string timing = p.text("garch_timing", "lagged");
    if (timing == "literal")
      g.timing = GarchTiming::kLiteral;
    else if (timing != "lagged")
      throw ConfigError(p.where("garch_timing") + ": must be lagged or literal");
    p.finish();
    g.validate();
    return g;
  }
  if (name == "tvar") {
    TvarParams t = TvarParams::paper();
    t.pi1 = p.matrix("Pi1", t.pi1);
    t.pi2 = p.matrix("Pi2", t.pi2);
    t.b1 = p.matrix("B1", t.b1);
    t.b2 = p.matrix("B2", t.b2);
    t.threshold = p.number("threshold", t.threshold);
    const long long idx = p.integer("threshold_variable", static_cast<long long>(t.threshold_index));
    if (idx < 0 || idx > 2) throw ConfigError(p.where("threshold_variable") + ": must be 0, 1 or 2");
    t.threshold_index = static_cast<std::size_t>(idx);
    const Matrix y0 = p.matrix("y0", t.y0);
    if (y0.size() > 0 && y0.cols() != 1) throw ConfigError(p.where("y0") + ": expected a list of numbers");
    t.y0 = y0.size() > 0 ? Vector(y0.col(0)) : Vector();
    p.finish();
    t.validate();
    return t;
  }
  if (name == "sign-ma") {
    if (p.has("ff_pos") || p.has("ff_neg") || p.has("gdp") || p.has("inflation") || p.has("ff")) {
      SignMaParams m;
      m.gdp = p.matrix("gdp", {});
      m.inflation = p.matrix("inflation", {});
      if (p.has("ff")) {
        const Matrix ff = p.matrix("ff", {});
        const double factor = p.number("factor", 3.0);
        const auto gh = p.integers("gdp_horizons", {2, 3});
        const auto ih = p.integers("inflation_horizons", {7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
        p.finish();
        return calibrate_sign_ma(m.gdp, m.inflation, ff, factor, gh, ih);
      }
      m.ff_pos = p.matrix("ff_pos", {});
      m.ff_neg = p.matrix("ff_neg", {});
      p.finish();
      m.validate();
      return m;
    }
    const std::string file = p.text("coefficients", "");
    const double factor = p.number("factor", 3.0);
    const auto gh = p.integers("gdp_horizons", {2, 3});
    const auto ih = p.integers("inflation_horizons", {7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
    p.finish();
    if (file.empty()) return sign_ma_synthetic();
    std::ifstream in(file);
    if (!in) throw DataError("cannot open coefficient file '" + file + "'");
    return read_sign_ma_csv(in, file, factor, gh, ih);
  }
  throw ConfigError("unknown dgp '" + name + "' (expected svar-garch, tvar or sign-ma)");
}

DataSpec read_data(Section s) {
  DataSpec d;
  d.file = s.text("file", "");
  d.responses = s.texts("response", {});
  if (d.responses.empty()) throw ConfigError(s.where("response") + ": at least one response column is required");
  d.shock = s.text("shock", "");
  d.contemporaneous = s.texts("contemporaneous", {});
  d.lagged = s.texts("lagged", {});
  d.lags = static_cast<int>(s.integer("lags", 1));
  if (d.lags < 1) throw ConfigError(s.where("lags") + ": must be at least 1");
  s.finish();
  return d;
}

GirfSpec read_girf(Section s, GirfSettings base) {
  GirfSpec g;
  g.settings = base;
  g.settings.horizons = static_cast<int>(s.integer("horizons", g.settings.horizons));
  if (g.settings.horizons < 0) throw ConfigError(s.where("horizons") + ": must be non-negative");
  const long long d = s.integer("residual_draws", static_cast<long long>(g.settings.residual_draws));
  if (d < 1) throw ConfigError(s.where("residual_draws") + ": must be at least 1");
  g.settings.residual_draws = static_cast<std::size_t>(d);
  if (d > g.settings.bart.n_draws)
    throw ConfigError(s.where("residual_draws") + ": exceeds bart.n_draws (" + std::to_string(g.settings.bart.n_draws) +
                      ")");
  if (s.has("draw_mode")) g.settings.draw_mode = parse_mode(s.text("draw_mode", ""), s.where("draw_mode"));
  if (s.has("residual_convention"))
    g.settings.convention =
        parse_convention(s.text("residual_convention", ""), s.where("residual_convention"));
  g.settings.quantile_levels = s.numbers("quantiles", g.settings.quantile_levels);
  for (double q : g.settings.quantile_levels)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError(s.where("quantiles") + ": levels must lie in [0, 1]");
  g.settings.only_horizons = s.integers("only_horizons", g.settings.only_horizons);
  g.shocks = s.numbers("shocks", g.shocks);
  g.identification = s.text("identification", g.identification);
  if (g.identification != "shock_series" && g.identification != "recursive" && g.identification != "impulse_vector")
    throw ConfigError(s.where("identification") + ": must be shock_series, recursive or impulse_vector");
  g.impulse_shock = s.text("impulse_shock", "");
  if (g.identification == "impulse_vector" && g.impulse_shock.empty())
    throw ConfigError(s.where("impulse_shock") + ": impulse_vector identification names the shocked lagged series");
  const long long cd = s.integer("condition_draws", static_cast<long long>(g.condition_draws));
  if (cd < 1) throw ConfigError(s.where("condition_draws") + ": must be at least 1");
  g.condition_draws = static_cast<std::size_t>(cd);
  for (Section st : s.list("states")) {
    StateSpec x;
    x.label = st.required_text("label");
    x.variable = st.required_text("variable");
    x.percentile = st.number("percentile", 0.5);
    if (!(x.percentile >= 0.0 && x.percentile <= 1.0))
      throw ConfigError(st.where("percentile") + ": must lie in [0, 1]");
    const std::string side = st.text("side", "below");
    if (side == "below")
      x.kind = StateFilter::Kind::kBelow;
    else if (side == "above")
      x.kind = StateFilter::Kind::kAbove;
    else
      throw ConfigError(st.where("side") + ": must be below or above");
    st.finish();
    g.states.push_back(x);
  }
  s.finish();
  return g;
}

McConfig read_montecarlo(Section mc, Section girf, Section bart, const std::string& preset, const std::string& scale) {
  const std::string name = mc.text("dgp", preset);
  if (name.empty()) throw ConfigError("montecarlo: choose a dgp with --preset or montecarlo.dgp");
  McConfig c = mc_preset(name, mc.text("scale", scale.empty() ? "desk" : scale));
  c.dgp = read_dgp(name, mc.child("params"));
  c.n_reps = static_cast<int>(mc.integer("n_reps", c.n_reps));
  c.total = static_cast<int>(mc.integer("total", c.total));
  c.burn = static_cast<int>(mc.integer("burn", c.burn));
  c.lags = static_cast<int>(mc.integer("lags", c.lags));
  const long long sv = mc.integer("shock_variable", static_cast<long long>(c.shock_variable));
  if (sv < 0 || sv > 2) throw ConfigError(mc.where("shock_variable") + ": must be 0, 1 or 2");
  c.shock_variable = static_cast<std::size_t>(sv);
  c.shock_sizes = mc.numbers("shock_sizes", c.shock_sizes);
  c.contemporaneous_shocks = mc.boolean("contemporaneous_shocks", c.contemporaneous_shocks);
  const long long paths = mc.integer("truth_paths", static_cast<long long>(c.truth.n_paths));
  if (paths < 1) throw ConfigError(mc.where("truth_paths") + ": must be at least 1");
  c.truth.n_paths = static_cast<std::size_t>(paths);
  const std::string init = mc.text("truth_init", c.truth.init == InitState::kFixed ? "fixed" : "stationary");
  if (init != "fixed" && init != "stationary") throw ConfigError(mc.where("truth_init") + ": must be fixed or stationary");
  c.truth.init = init == "fixed" ? InitState::kFixed : InitState::kStationary;
  c.truth.init_burn = static_cast<int>(mc.integer("truth_burn", c.truth.init_burn));
  c.truth.common_random_numbers = mc.boolean("common_random_numbers", c.truth.common_random_numbers);
  c.max_failure_rate = mc.number("max_failure_rate", c.max_failure_rate);
  mc.finish();
  c.girf.bart = read_bart(bart, c.girf.bart);
  // a shorter horizon drops the preset's subset entries beyond it
  GirfSettings base = c.girf;
  if (girf.has("horizons") && !girf.has("only_horizons")) {
    const long long h = girf.integer("horizons", base.horizons);
    std::erase_if(base.only_horizons, [h](int x) { return x > h; });
  }
  const GirfSpec g = read_girf(girf, base);
  if (g.identification != "shock_series" || !g.states.empty() || girf.has("shocks"))
    throw ConfigError("montecarlo: girf.identification, girf.states and girf.shocks are set by the experiment");
  c.girf = g.settings;
  c.truth.horizons = c.girf.horizons;
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("montecarlo: ") + e.what());
  }
  return c;
}

nlohmann::json girf_settings_json(const GirfSettings& g) {
  nlohmann::json j;
  j["bart"] = to_json(g.bart);
  j["horizons"] = g.horizons;
  j["residual_draws"] = g.residual_draws;
  j["draw_mode"] = g.draw_mode == DrawMode::kSingle ? "single" : g.draw_mode == DrawMode::kPooled ? "pooled" : "averaged";
  j["residual_convention"] = g.convention == ResidualConvention::kLeads ? "leads" : "lags";
  j["quantiles"] = g.quantile_levels;
  j["only_horizons"] = g.only_horizons;
  return j;
}

}  // namespace flexlp::cli
