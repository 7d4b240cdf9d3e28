#include "commands.hpp"

#include "config.hpp"

#include "flexlp/errors.hpp"
#include "flexlp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#ifndef FLEXLP_VERSION
#define FLEXLP_VERSION "0.0.0"
#endif

namespace flexlp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string slurp(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + what + " '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Output directory plus the hashes of everything written to it.
class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << bytes;
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    hashes_[name] = fnv1a_hex(bytes);
  }

  void input(const std::string& path, const std::string& bytes) { inputs_[path] = fnv1a_hex(bytes); }

  void manifest(const std::string& command, std::uint64_t seed, const json& config) {
    json m;
    m["command"] = command;
    m["version"] = FLEXLP_VERSION;
    m["seed"] = seed;
    m["config"] = config;
    m["config_hash"] = fnv1a_hex(config.dump());
    m["inputs"] = inputs_;
    m["outputs"] = hashes_;
    const fs::path p = dir_ / "manifest.json";
    std::ofstream out(p, std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw DataError("cannot write '" + p.string() + "'");
  }

 private:
  fs::path dir_;
  std::map<std::string, std::string> hashes_;
  std::map<std::string, std::string> inputs_;
};

template <class F>
std::string render(F&& f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

struct Common {
  YAML::Node root;
  Section top{YAML::Node(), ""};
  std::uint64_t seed = 1;
  int threads = 1;
  fs::path base;  // directory of the config file
};

Common load(const Options& o, std::set<std::string> sections) {
  sections.insert("seed");
  sections.insert("threads");
  Common c;
  c.root = load_config(o.config, sections, o.command);
  c.top = Section(c.root, "");
  const long long seed = c.top.integer("seed", 1);
  if (seed < 0) throw ConfigError(c.top.where("seed") + ": must be non-negative");
  c.seed = o.seed ? *o.seed : static_cast<std::uint64_t>(seed);
  const long long threads = c.top.integer("threads", 1);
  c.threads = o.threads ? *o.threads : static_cast<int>(threads);
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  c.base = o.config.empty() ? fs::path() : fs::path(o.config).parent_path();
  return c;
}

std::string resolve(const Common& c, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (c.base / path).string();
}

struct Presets {
  std::string dgp;
  std::string scale;
};

Presets split_presets(const std::vector<std::string>& presets) {
  Presets p;
  for (const auto& s : presets) {
    std::string& slot = (s == "desk" || s == "paper") ? p.scale : p.dgp;
    if (s != "desk" && s != "paper" && s != "svar-garch" && s != "tvar" && s != "sign-ma")
      throw ConfigError("unknown preset '" + s + "'");
    if (!slot.empty() && slot != s) throw ConfigError("conflicting presets '" + slot + "' and '" + s + "'");
    slot = s;
  }
  return p;
}

json data_json(const DataSpec& d) {
  return {{"file", d.file},
          {"response", d.responses},
          {"shock", d.shock},
          {"contemporaneous", d.contemporaneous},
          {"lagged", d.lagged},
          {"lags", d.lags}};
}

std::vector<double> column(const SeriesTable& t, const std::string& name) {
  const auto c = static_cast<Eigen::Index>(t.data.column(name));
  return std::vector<double>(t.data.values.col(c).data(), t.data.values.col(c).data() + t.data.values.rows());
}

DataMatrix columns(const SeriesTable& t, const std::vector<std::string>& names) {
  DataMatrix m;
  m.names = names;
  m.values.resize(t.data.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j)
    m.values.col(static_cast<Eigen::Index>(j)) = t.data.values.col(static_cast<Eigen::Index>(t.data.column(names[j])));
  return m;
}

LpDataset dataset(const SeriesTable& t, const DataSpec& d, const std::string& response, bool with_shock) {
  LpDataset ds;
  ds.response_name = response;
  ds.response = column(t, response);
  if (with_shock) {
    if (d.shock.empty()) throw ConfigError("'data.shock' is required for this identification");
    ds.shock = column(t, d.shock);
    ds.shock_name = d.shock;
  }
  ds.contemporaneous = columns(t, d.contemporaneous);
  ds.lagged = columns(t, d.lagged.empty() ? d.responses : d.lagged);
  ds.lags = d.lags;
  ds.validate();
  return ds;
}

SeriesTable read_data_file(const Common& c, const DataSpec& d, Outputs& out) {
  if (d.file.empty()) throw ConfigError("'data.file' is required");
  const std::string path = resolve(c, d.file);
  const std::string bytes = slurp(path, "data file");
  out.input(d.file, bytes);
  std::istringstream in(bytes);
  return read_series_csv(in, d.file);
}

// simulate ------------------------------------------------------------------

void cmd_simulate(const Options& o, std::ostream& log) {
  Common c = load(o, {"simulate"});
  const Presets pre = split_presets(o.presets);
  Section& top = c.top;
  Section s = top.child("simulate");
  const std::string name = s.text("dgp", pre.dgp);
  if (name.empty()) throw ConfigError("simulate: choose a dgp with --preset or simulate.dgp");
  if (!pre.dgp.empty() && pre.dgp != name)
    throw ConfigError(s.where("dgp") + ": conflicts with --preset " + pre.dgp);
  const McConfig shape = mc_preset(name, pre.scale.empty() ? "desk" : pre.scale);
  SimConfig sim;
  sim.total = static_cast<int>(s.integer("total", shape.total));
  sim.burn = static_cast<int>(s.integer("burn", shape.burn));
  sim.seed = c.seed;
  const DgpParams params = read_dgp(name, s.child("params"));
  s.finish();
  top.finish();
  try {
    sim.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }

  const Simulation r = simulate(params, sim);
  SeriesTable t;
  t.time_name = "period";
  for (Eigen::Index i = 0; i < r.series.rows(); ++i) t.time.push_back(std::to_string(i));
  t.data.names = r.series_names;
  t.data.names.insert(t.data.names.end(), r.shock_names.begin(), r.shock_names.end());
  const Eigen::Index extra = r.variance.empty() && r.regime.empty() ? 0 : 1;
  t.data.values.setZero(r.series.rows(), r.series.cols() + r.shocks.cols() + extra);
  t.data.values.leftCols(r.series.cols()) = r.series;
  t.data.values.middleCols(r.series.cols(), r.shocks.cols()) = r.shocks;
  if (!r.variance.empty()) {
    t.data.names.push_back("variance");
    for (std::size_t i = 0; i < r.variance.size(); ++i) t.data.values(static_cast<Eigen::Index>(i), t.data.values.cols() - 1) = r.variance[i];
  } else if (!r.regime.empty()) {
    t.data.names.push_back("regime");
    for (std::size_t i = 0; i < r.regime.size(); ++i) t.data.values(static_cast<Eigen::Index>(i), t.data.values.cols() - 1) = r.regime[i];
  }

  Outputs out(o.out);
  out.write("data.csv", render([&](std::ostream& f) { write_series_csv(f, t); }));
  json cfg;
  cfg["seed"] = c.seed;
  cfg["simulate"] = {{"dgp", name}, {"total", sim.total}, {"burn", sim.burn}, {"params", dgp_params_json(params)}};
  out.manifest("simulate", c.seed, cfg);
  log << "simulate: " << name << ", " << r.series.rows() << " periods -> " << (fs::path(o.out) / "data.csv").string()
      << '\n';
}

// fit -----------------------------------------------------------------------

void cmd_fit(const Options& o, std::ostream& log) {
  Common c = load(o, {"data", "bart", "fit"});
  const Presets pre = split_presets(o.presets);
  if (!pre.dgp.empty()) throw ConfigError("fit: dgp presets apply to simulate and montecarlo only");
  Section& top = c.top;
  const DataSpec d = read_data(top.child("data"));
  const BartConfig base = pre.scale.empty() ? BartConfig{} : mc_preset("tvar", pre.scale).girf.bart;
  const BartConfig bart = read_bart(top.child("bart"), base);
  Section f = top.child("fit");
  const int horizons = static_cast<int>(f.integer("horizons", 0));
  if (horizons < 0) throw ConfigError(f.where("horizons") + ": must be non-negative");
  ResidualConvention conv = ResidualConvention::kLeads;
  const std::string cs = f.text("residual_convention", "leads");
  if (cs == "lags")
    conv = ResidualConvention::kLags;
  else if (cs != "leads")
    throw ConfigError(f.where("residual_convention") + ": must be leads or lags");
  const bool save = f.boolean("save_posterior", true);
  f.finish();
  top.finish();

  Outputs out(o.out);
  const SeriesTable table = read_data_file(c, d, out);
  const RngStream root(c.seed);
  json summary = json::array();
  std::ostringstream fitted;
  fitted << "variable,horizon,row,y,fit_mean\n";
  for (std::size_t r = 0; r < d.responses.size(); ++r) {
    const LpDataset ds = dataset(table, d, d.responses[r], !d.shock.empty());
    BartOutputs keep;
    keep.keep_forests = save;
    keep.train_fit_draws.resize(static_cast<std::size_t>(bart.n_draws));
    std::iota(keep.train_fit_draws.begin(), keep.train_fit_draws.end(), std::size_t{0});
    std::optional<std::vector<double>> residuals;
    for (int h = 0; h <= horizons; ++h) {
      RngStream rng = root.substream({r, static_cast<std::uint64_t>(h)});
      std::optional<std::span<const double>> w;
      if (residuals) w = std::span<const double>(*residuals);
      HorizonModel m = fit_horizon(ds, h, w, bart, rng, conv, keep);
      if (h == 0) {
        // W columns use the residuals of the last retained draw
        const auto& fit = m.posterior.train_fits.back();
        residuals.emplace(m.design.y.size());
        for (std::size_t i = 0; i < fit.size(); ++i) (*residuals)[i] = m.design.y[i] - fit[i];
      }
      const BartPosterior& p = m.posterior;
      const double range2 = p.transform.range * p.transform.range;
      std::vector<double> sigma2;
      for (double v : p.diagnostics.sigma2_trace) sigma2.push_back(v * range2);
      json moves;
      for (int k = 0; k < 4; ++k) {
        const auto& mc = p.diagnostics.moves;
        moves[to_string(static_cast<MoveKind>(k))] = {
            {"proposed", mc.proposed[static_cast<std::size_t>(k)]},
            {"accepted", mc.accepted[static_cast<std::size_t>(k)]},
            {"rate", mc.proposed[static_cast<std::size_t>(k)]
                         ? static_cast<double>(mc.accepted[static_cast<std::size_t>(k)]) /
                               static_cast<double>(mc.proposed[static_cast<std::size_t>(k)])
                         : 0.0}};
      }
      summary.push_back({{"variable", ds.response_name},
                         {"horizon", h},
                         {"rows", m.design.y.size()},
                         {"columns", m.design.x.names},
                         {"moves", moves},
                         {"mean_leaves", p.diagnostics.mean_leaves},
                         {"sigma2_trace", sigma2}});
      for (std::size_t i = 0; i < m.design.y.size(); ++i) {
        double s = 0.0;
        for (const auto& draw : p.train_fits) s += draw[i];
        fitted << ds.response_name << ',' << h << ',' << m.design.dates[i] << ',' << format_double(m.design.y[i]) << ','
               << format_double(s / static_cast<double>(p.train_fits.size())) << '\n';
      }
      if (save)
        out.write("posterior_" + ds.response_name + "_h" + std::to_string(h) + ".json",
                  posterior_to_json(p).dump() + '\n');
    }
  }
  out.write("fit_summary.json", summary.dump(2) + '\n');
  out.write("fitted.csv", fitted.str());
  json cfg;
  cfg["seed"] = c.seed;
  cfg["data"] = data_json(d);
  cfg["bart"] = to_json(bart);
  cfg["fit"] = {{"horizons", horizons}, {"residual_convention", cs}, {"save_posterior", save}};
  out.manifest("fit", c.seed, cfg);
  log << "fit: " << d.responses.size() << " response(s), horizons 0.." << horizons << '\n';
}

// girf ----------------------------------------------------------------------

bool safe_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
  });
}

void cmd_girf(const Options& o, std::ostream& log) {
  Common c = load(o, {"data", "bart", "girf"});
  const Presets pre = split_presets(o.presets);
  if (!pre.dgp.empty()) throw ConfigError("girf: dgp presets apply to simulate and montecarlo only");
  Section& top = c.top;
  const DataSpec d = read_data(top.child("data"));
  GirfSettings base;
  if (!pre.scale.empty()) base = mc_preset("tvar", pre.scale).girf;
  base.bart = read_bart(top.child("bart"), base.bart);
  Section gs = top.child("girf");
  GirfSpec g = read_girf(gs, base);
  top.finish();
  g.settings.threads = c.threads;
  for (const auto& st : g.states)
    if (!safe_label(st.label)) throw ConfigError("girf.states: label '" + st.label + "' must use letters, digits, _ or -");
  for (std::size_t i = 0; i < g.states.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (g.states[i].label == g.states[j].label) throw ConfigError("girf.states: duplicate label '" + g.states[i].label + "'");
  const bool iv = g.identification == "impulse_vector";
  if (iv && !d.shock.empty()) throw ConfigError("impulse_vector identification takes no 'data.shock' column");

  Outputs out(o.out);
  const SeriesTable table = read_data_file(c, d, out);
  const RngStream root(c.seed);
  const std::vector<std::string> lagged = d.lagged.empty() ? d.responses : d.lagged;

  std::vector<IrfResult> all;
  std::map<std::string, std::vector<IrfResult>> by_state;
  std::ostringstream linear;
  linear << "variable,shock_size,horizon,psi\n";
  for (std::size_t r = 0; r < d.responses.size(); ++r) {
    const LpDataset ds = dataset(table, d, d.responses[r], !iv);
    IdentificationScheme scheme;
    if (g.identification == "recursive") scheme.variant = Identification::kRecursiveControls;
    if (iv) {
      const auto at = [&](const std::string& n, const char* what) {
        const auto it = std::find(lagged.begin(), lagged.end(), n);
        if (it == lagged.end()) throw DataError(std::string(what) + " '" + n + "' is not among the lagged series");
        return static_cast<std::size_t>(it - lagged.begin());
      };
      scheme = impulse_vector_scheme(ds.lagged.values, d.lags, at(g.impulse_shock, "impulse shock"),
                                     at(d.responses[r], "response"));
    }
    RngStream rng = root.substream({0, r});
    auto res = girf_compute(ds, scheme, g.shocks, g.settings, rng);
    for (double z : g.shocks) {
      const auto lin = linear_lp_irf(ds, scheme, z, g.settings.horizons);
      for (std::size_t h = 0; h < lin.size(); ++h)
        linear << ds.response_name << ',' << format_double(z) << ',' << h << ',' << format_double(lin[h]) << '\n';
    }
    all.insert(all.end(), res.begin(), res.end());
    for (std::size_t s = 0; s < g.states.size(); ++s) {
      const StateSpec& st = g.states[s];
      StateFilter filter;
      filter.kind = st.kind;
      filter.percentile = st.percentile;
      filter.state = column(table, st.variable);
      filter.label = st.label;
      RngStream srng = root.substream({1 + s, r});
      auto sr = girf_state_conditional(ds, scheme, filter, g.shocks, g.condition_draws, g.settings, srng);
      auto& bucket = by_state[st.label];
      bucket.insert(bucket.end(), sr.begin(), sr.end());
    }
  }

  out.write("irf.csv", render([&](std::ostream& f) { write_irf_csv(f, all); }));
  out.write("irf_summary.json", irf_summary_json(all).dump(2) + '\n');
  out.write("irf_linear.csv", linear.str());
  for (const auto& [label, res] : by_state) {
    out.write("irf_" + label + ".csv", render([&](std::ostream& f) { write_irf_csv(f, res); }));
    out.write("irf_" + label + "_summary.json", irf_summary_json(res).dump(2) + '\n');
  }

  json cfg;
  cfg["seed"] = c.seed;
  cfg["data"] = data_json(d);
  cfg["bart"] = to_json(g.settings.bart);
  json gj = girf_settings_json(g.settings);
  gj.erase("bart");
  gj["shocks"] = g.shocks;
  gj["identification"] = g.identification;
  if (iv) gj["impulse_shock"] = g.impulse_shock;
  gj["condition_draws"] = g.condition_draws;
  json states = json::array();
  for (const auto& st : g.states)
    states.push_back({{"label", st.label},
                      {"variable", st.variable},
                      {"percentile", st.percentile},
                      {"side", st.kind == StateFilter::Kind::kAbove ? "above" : "below"}});
  gj["states"] = states;
  cfg["girf"] = gj;
  out.manifest("girf", c.seed, cfg);
  log << "girf: " << all.size() << " response curve(s), horizons 0.." << g.settings.horizons << '\n';
}

// montecarlo ----------------------------------------------------------------

void cmd_montecarlo(const Options& o, std::ostream& log) {
  Common c = load(o, {"montecarlo", "girf", "bart"});
  const Presets pre = split_presets(o.presets);
  Section& top = c.top;
  McConfig mc = read_montecarlo(top.child("montecarlo"), top.child("girf"), top.child("bart"), pre.dgp, pre.scale);
  top.finish();
  mc.seed = c.seed;
  mc.threads = c.threads;
  mc.truth.threads = c.threads;

  const McResult r = run_mc(mc);
  const McSummary s = summarize(r);
  Outputs out(o.out);
  out.write("mc_reps.csv", render([&](std::ostream& f) { write_mc_csv(f, r); }));
  out.write("mc_summary.csv", render([&](std::ostream& f) { write_mc_summary_csv(f, r, s); }));

  std::vector<int> hs;
  if (mc.girf.only_horizons.empty())
    for (int h = 0; h <= mc.girf.horizons; ++h) hs.push_back(h);
  else
    hs = mc.girf.only_horizons;
  json rmse = json::array();
  for (std::size_t k = 0; k < r.shock_sizes.size(); ++k)
    rmse.push_back({{"shock_size", r.shock_sizes[k]},
                    {"horizons", hs},
                    {"bart", curve_rmse(s, k, Estimator::kBart, {0, 1, 2}, hs)},
                    {"linear", curve_rmse(s, k, Estimator::kLinear, {0, 1, 2}, hs)}});
  out.write("rmse.json", rmse.dump(2) + '\n');

  // sign dominance for every (z, -z) pair
  std::ostringstream dom;
  dom << "positive,negative,estimator,variable,horizon,percent\n";
  bool any = false;
  for (std::size_t a = 0; a < r.shock_sizes.size(); ++a)
    for (std::size_t b = 0; b < r.shock_sizes.size(); ++b) {
      if (!(r.shock_sizes[a] > 0.0) || r.shock_sizes[b] != -r.shock_sizes[a]) continue;
      any = true;
      for (Estimator e : {Estimator::kBart, Estimator::kLinear}) {
        const Matrix m = sign_dominance(r, a, b, e);
        for (Eigen::Index i = 0; i < 3; ++i)
          for (Eigen::Index h = 0; h < m.cols(); ++h) {
            if (std::isnan(m(i, h))) continue;
            dom << format_double(r.shock_sizes[a]) << ',' << format_double(r.shock_sizes[b]) << ','
                << (e == Estimator::kBart ? "bart" : "linear") << ',' << r.variables[static_cast<std::size_t>(i)]
                << ',' << h << ',' << format_double(m(i, h)) << '\n';
          }
      }
    }
  if (any) out.write("dominance.csv", dom.str());

  json cfg;
  cfg["seed"] = c.seed;
  json m = mc_config_json(mc);
  m.erase("seed");
  cfg["montecarlo"] = m;
  json failures = json::array();
  for (const auto& rep : r.reps)
    if (rep.failed) failures.push_back({{"rep", rep.index}, {"seed", rep.seed}, {"error", rep.error}});
  cfg["failures"] = failures;
  out.manifest("montecarlo", c.seed, cfg);
  log << "montecarlo: " << r.dgp << ", " << r.reps.size() << " replications, " << r.failures() << " failed\n";
  for (const auto& x : rmse)
    log << "  shock " << x["shock_size"].get<double>() << ": curve RMSE bart " << x["bart"].get<double>()
        << ", linear " << x["linear"].get<double>() << '\n';
}

// multiplier ----------------------------------------------------------------

IrfResult pick(const std::vector<IrfResult>& rs, const std::string& variable, std::optional<double> shock,
               const std::string& file) {
  std::vector<const IrfResult*> hits;
  for (const auto& r : rs)
    if ((variable.empty() || r.variable == variable) && (!shock || r.shock_size == *shock)) hits.push_back(&r);
  if (hits.empty()) throw DataError(file + ": no response matches variable '" + variable + "'");
  if (hits.size() > 1)
    throw ConfigError(file + ": holds several responses; choose one with the variable and shock_size settings");
  return *hits.front();
}

void cmd_multiplier(const Options& o, std::ostream& log) {
  Common c = load(o, {"multiplier"});
  if (!o.presets.empty()) throw ConfigError("multiplier takes no presets");
  Section& top = c.top;
  Section m = top.child("multiplier");
  const std::string fy = o.irf_y.empty() ? m.text("irf_y", "") : o.irf_y;
  const std::string fg = o.irf_g.empty() ? m.text("irf_g", "") : o.irf_g;
  const std::string vy = o.variable_y.empty() ? m.text("variable_y", "") : o.variable_y;
  const std::string vg = o.variable_g.empty() ? m.text("variable_g", "") : o.variable_g;
  std::optional<double> shock;
  if (m.has("shock_size")) shock = m.number("shock_size", 0.0);
  if (o.shock_size) shock = o.shock_size;
  const auto levels = m.numbers("quantiles", {0.025, 0.16, 0.5, 0.84, 0.975});
  m.finish();
  top.finish();
  if (fy.empty() || fg.empty()) throw ConfigError("multiplier needs --irf-y and --irf-g");
  const bool from_cli_y = !o.irf_y.empty(), from_cli_g = !o.irf_g.empty();

  Outputs out(o.out);
  const auto read = [&](const std::string& f, bool cli_path) {
    const std::string path = cli_path ? f : resolve(c, f);
    const std::string bytes = slurp(path, "IRF file");
    out.input(f, bytes);
    std::istringstream in(bytes);
    return read_irf_csv(in);
  };
  const IrfResult y = pick(read(fy, from_cli_y), vy, shock, fy);
  const IrfResult g = pick(read(fg, from_cli_g), vg, shock, fg);
  const MultiplierResult r = cumulative_multiplier(y, g, levels);
  out.write("multiplier.csv", render([&](std::ostream& f) { write_multiplier_csv(f, r); }));
  json cfg;
  cfg["multiplier"] = {{"irf_y", fy}, {"irf_g", fg}, {"variable_y", y.variable}, {"variable_g", g.variable},
                       {"quantiles", levels}};
  if (shock) cfg["multiplier"]["shock_size"] = *shock;
  out.manifest("multiplier", c.seed, cfg);
  std::size_t excluded = 0;
  for (auto e : r.excluded) excluded += e;
  log << "multiplier: " << y.variable << " over " << g.variable << ", " << r.mean.size() << " horizons, " << excluded
      << " draw(s) excluded\n";
}

}  // namespace

void run_command(const Options& o, std::ostream& log) {
  if (o.command == "simulate") return cmd_simulate(o, log);
  if (o.command == "fit") return cmd_fit(o, log);
  if (o.command == "girf") return cmd_girf(o, log);
  if (o.command == "montecarlo") return cmd_montecarlo(o, log);
  if (o.command == "multiplier") return cmd_multiplier(o, log);
  throw ConfigError("unknown command '" + o.command + "'");
}

}  // namespace flexlp::cli
