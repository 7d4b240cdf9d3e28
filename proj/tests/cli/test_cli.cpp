#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"

#include "flexlp/errors.hpp"
#include "flexlp/io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace flexlp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flexlp_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

void run(const std::string& command, const fs::path& config, const fs::path& out,
         std::vector<std::string> presets = {}, std::optional<std::uint64_t> seed = {}) {
  cli::Options o;
  o.command = command;
  o.config = config.string();
  o.out = out.string();
  o.presets = std::move(presets);
  o.seed = seed;
  std::ostringstream log;
  cli::run_command(o, log);
}

/// Every file of `a` exists in `b` with the same bytes.
void same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++n;
    INFO(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(n > 1);
  CHECK(static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator())) == n);
}

int exit_code(const std::string& args) {
  const int status = std::system((std::string(FLEXLP_EXE) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string message_of(const std::string& command, const fs::path& config) {
  try {
    run(command, config, config.parent_path() / "unused");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kBart = "bart: {trees: 5, n_draws: 30, n_burn: 30}\n";

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(cli::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("config errors name the line and stop before any work") {
  const fs::path d = scratch("config");
  put(d / "a.yaml", "seed: 3\nbogus:\n  x: 1\n");
  CHECK(message_of("simulate", d / "a.yaml").find("config line 2") != std::string::npos);
  put(d / "b.yaml", "simulate:\n  dgp: tvar\n  totl: 5\n");
  const std::string b = message_of("simulate", d / "b.yaml");
  CHECK(b.find("line 3") != std::string::npos);
  CHECK(b.find("totl") != std::string::npos);
  put(d / "c.yaml", "simulate:\n  dgp: tvar\n  total: ten\n");
  CHECK(message_of("simulate", d / "c.yaml").find("line 3, column 10") != std::string::npos);
  put(d / "d.yaml", "simulate:\n  dgp: tvar\n  params:\n    Pi1: [[1, 2], [3]]\n");
  CHECK(message_of("simulate", d / "d.yaml").find("line 4") != std::string::npos);
  put(d / "e.yaml", "simulate: {dgp: tvar, total: 50, burn: 60}\n");
  CHECK_THROWS_AS(run("simulate", d / "e.yaml", d / "e"), ConfigError);
  put(d / "f.yaml", "simulate: [1, 2\n");
  CHECK_THROWS_AS(run("simulate", d / "f.yaml", d / "f"), ConfigError);
  put(d / "g.yaml", std::string("data: {file: none.csv, response: y, shock: x}\n") + kBart +
                        "girf: {draw_mode: sometimes, residual_draws: 2}\n");
  CHECK(message_of("girf", d / "g.yaml").find("draw_mode") != std::string::npos);
  put(d / "h.yaml", "montecarlo: {n_reps: 2}\ngirf: {horizons: 3, only_horizons: [5]}\n");
  CHECK_THROWS_AS(run("montecarlo", d / "h.yaml", d / "h", {"tvar"}), ConfigError);
  put(d / "i.yaml", std::string("data: {file: none.csv, response: y, shock: x}\n") + kBart);
  CHECK(message_of("girf", d / "i.yaml").find("residual_draws") != std::string::npos);
  CHECK(!fs::exists(d / "unused"));
  CHECK(!fs::exists(d / "e"));
  CHECK_THROWS_AS(run("simulate", d / "e.yaml", d / "e", {"tvar", "sign-ma"}), ConfigError);
}

TEST_CASE("simulate writes the dataset schema deterministically") {
  const fs::path d = scratch("simulate");
  put(d / "c.yaml", "seed: 7\n");
  run("simulate", d / "c.yaml", d / "a", {"svar-garch"});
  run("simulate", d / "c.yaml", d / "b", {"svar-garch"});
  same_tree(d / "a", d / "b");
  run("simulate", d / "c.yaml", d / "s", {"svar-garch"}, 8);
  CHECK(slurp(d / "s" / "data.csv") != slurp(d / "a" / "data.csv"));

  run("simulate", d / "c.yaml", d / "t", {"tvar"});
  const SeriesTable t = read_series_csv((d / "t" / "data.csv").string());
  CHECK(t.data.names.back() == "regime");
  CHECK(t.time_name == "period");

  run("simulate", d / "c.yaml", d / "m", {"sign-ma"});
  const SeriesTable m = read_series_csv((d / "m" / "data.csv").string());
  CHECK(m.data.names == std::vector<std::string>{"gdp", "inflation", "ff", "e_gdp", "e_inflation", "e_ff"});
  CHECK(m.data.rows() == 200);

  // the manifest's config reproduces the run
  const auto man = nlohmann::json::parse(slurp(d / "t" / "manifest.json"));
  put(d / "again.json", man["config"].dump());
  run("simulate", d / "again.json", d / "t2");
  CHECK(slurp(d / "t2" / "data.csv") == slurp(d / "t" / "data.csv"));
  CHECK(man["config_hash"] == cli::fnv1a_hex(man["config"].dump()));
  CHECK(man["outputs"]["data.csv"] == cli::fnv1a_hex(slurp(d / "t" / "data.csv")));

  std::ostringstream round;
  write_series_csv(round, t);
  CHECK(round.str() == slurp(d / "t" / "data.csv"));
}

TEST_CASE("girf outputs, zero shock and state files") {
  const fs::path d = scratch("girf");
  put(d / "sim.yaml", "seed: 4\nsimulate: {dgp: tvar}\n");
  run("simulate", d / "sim.yaml", d / "data");
  put(d / "g.yaml", std::string("seed: 9\n"
                                "data:\n  file: data/data.csv\n  response: [y1, y2]\n  shock: y3\n"
                                "  contemporaneous: [y1, y2]\n  lagged: [y1, y2, y3]\n  lags: 2\n") +
                        kBart +
                        "girf:\n  horizons: 3\n  residual_draws: 2\n  shocks: [0, 1]\n  condition_draws: 5\n"
                        "  states:\n"
                        "    - {label: recession, variable: y3, percentile: 0.2, side: below}\n"
                        "    - {label: expansion, variable: y3, percentile: 0.8, side: above}\n");
  run("girf", d / "g.yaml", d / "a");
  run("girf", d / "g.yaml", d / "b");
  same_tree(d / "a", d / "b");
  for (const char* f : {"irf.csv", "irf_summary.json", "irf_linear.csv", "irf_recession.csv", "irf_expansion.csv"})
    CHECK(fs::exists(d / "a" / f));

  std::ifstream in(d / "a" / "irf.csv");
  const auto irfs = read_irf_csv(in);
  REQUIRE(irfs.size() == 4);
  for (const auto& r : irfs) {
    if (r.shock_size != 0.0) continue;
    for (const auto& h : r.psi)
      for (double v : h) CHECK(v == 0.0);
  }
  std::ifstream rin(d / "a" / "irf_recession.csv");
  const auto rec = read_irf_csv(rin);
  REQUIRE(!rec.empty());
  CHECK(rec[0].variable == "y1|recession");

  put(d / "bad.yaml", std::string("data:\n  file: data/data.csv\n  response: y1\n  shock: nope\n") + kBart +
                          "girf: {residual_draws: 2}\n");
  CHECK_THROWS_AS(run("girf", d / "bad.yaml", d / "c"), DataError);
  put(d / "deep.yaml", std::string("data:\n  file: data/data.csv\n  response: y1\n  shock: y3\n") + kBart +
                           "girf: {horizons: 400, residual_draws: 2}\n");
  CHECK_THROWS_AS(run("girf", d / "deep.yaml", d / "c"), DataError);
}

TEST_CASE("impulse-vector identification starts at the Cholesky column") {
  const fs::path d = scratch("impulse");
  // VAR(1) with correlated errors
  RngStream rng(21);
  const int t_len = 400;
  Matrix y = Matrix::Zero(t_len, 2);
  for (int t = 1; t < t_len; ++t) {
    const double a = rng.normal(), b = rng.normal();
    y(t, 0) = 0.5 * y(t - 1, 0) + 0.1 * y(t - 1, 1) + a;
    y(t, 1) = 0.2 * y(t - 1, 0) + 0.3 * y(t - 1, 1) + 0.6 * a + 0.8 * b;
  }
  SeriesTable tab;
  tab.data.names = {"u", "v"};
  tab.data.values = y;
  {
    std::ofstream f(d / "var.csv");
    write_series_csv(f, tab);
  }
  put(d / "g.yaml", std::string("data:\n  file: var.csv\n  response: [u, v]\n  lags: 1\n") + kBart +
                        "girf: {horizons: 2, residual_draws: 1, shocks: [2], identification: impulse_vector, "
                        "impulse_shock: u}\n");
  run("girf", d / "g.yaml", d / "out");

  // oracle: OLS by QR, covariance with divisor T - 3, Cholesky column 0
  Matrix x(t_len - 1, 3);
  x.col(0).setOnes();
  x.rightCols(2) = y.topRows(t_len - 1);
  const Matrix lhs = y.bottomRows(t_len - 1);
  const Matrix beta = x.colPivHouseholderQr().solve(lhs);
  const Matrix u = lhs - x * beta;
  const Matrix sigma = u.transpose() * u / static_cast<double>(t_len - 1 - 3);
  const Matrix chol = sigma.llt().matrixL();

  std::ifstream in(d / "out" / "irf.csv");
  const auto irfs = read_irf_csv(in);
  REQUIRE(irfs.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(!irfs[i].psi[0].empty());
    for (double v : irfs[i].psi[0]) CHECK(v == doctest::Approx(2.0 * chol(static_cast<Eigen::Index>(i), 0)).epsilon(1e-10));
  }
}

TEST_CASE("fit writes loadable posteriors and diagnostics") {
  const fs::path d = scratch("fit");
  put(d / "sim.yaml", "simulate: {dgp: svar-garch}\n");
  run("simulate", d / "sim.yaml", d / "data");
  put(d / "f.yaml", std::string("data:\n  file: data/data.csv\n  response: y1\n  shock: e1\n"
                                "  lagged: [y1, y2, y3]\n  lags: 2\n") +
                        kBart + "fit: {horizons: 2}\n");
  run("fit", d / "f.yaml", d / "a");
  run("fit", d / "f.yaml", d / "b");
  same_tree(d / "a", d / "b");
  const auto summary = nlohmann::json::parse(slurp(d / "a" / "fit_summary.json"));
  REQUIRE(summary.size() == 3);
  CHECK(summary[2]["columns"].size() == 1 + 6 + 1);  // x, two lags of three series, one lead residual
  CHECK(summary[0]["sigma2_trace"].size() == 60);
  const BartPosterior p = posterior_from_json(nlohmann::json::parse(slurp(d / "a" / "posterior_y1_h0.json")));
  CHECK(p.draw_count() == 30);
}

TEST_CASE("montecarlo outputs are reproducible") {
  const fs::path d = scratch("mc");
  put(d / "m.yaml", std::string("seed: 2\nmontecarlo: {n_reps: 2, truth_paths: 100}\n") + kBart +
                        "girf: {horizons: 2, residual_draws: 1, only_horizons: [0, 1, 2]}\n");
  run("montecarlo", d / "m.yaml", d / "a", {"sign-ma"});
  run("montecarlo", d / "m.yaml", d / "b", {"sign-ma"});
  same_tree(d / "a", d / "b");
  // one summary row per (shock, variable, horizon)
  const std::string s = slurp(d / "a" / "mc_summary.csv");
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 2 * 3 * 3);
  const std::string dom = slurp(d / "a" / "dominance.csv");
  CHECK(std::count(dom.begin(), dom.end(), '\n') == 1 + 2 * 3 * 3);
  const auto man = nlohmann::json::parse(slurp(d / "a" / "manifest.json"));
  CHECK(man["config"]["montecarlo"]["n_reps"] == 2);
  CHECK(man["seed"] == 2);
}

TEST_CASE("multiplier on constructed files") {
  const fs::path d = scratch("multiplier");
  IrfResult g, y;
  g.variable = "g";
  y.variable = "y";
  g.shock_size = y.shock_size = 1.0;
  RngStream rng(5);
  for (int h = 0; h < 4; ++h) {
    g.psi.emplace_back();
    y.psi.emplace_back();
    for (int k = 0; k < 6; ++k) {
      const double v = 1.0 + rng.uniform();
      g.psi.back().push_back(v);
      y.psi.back().push_back(2.0 * v);
    }
    g.y0.push_back(std::vector<double>(6, 0.0));
    g.y1.push_back(g.psi.back());
    y.y0.push_back(std::vector<double>(6, 0.0));
    y.y1.push_back(y.psi.back());
  }
  {
    std::ofstream f(d / "g.csv");
    write_irf_csv(f, std::vector<IrfResult>{g});
    std::ofstream h(d / "y.csv");
    write_irf_csv(h, std::vector<IrfResult>{y});
  }
  cli::Options o;
  o.command = "multiplier";
  o.irf_y = (d / "g.csv").string();
  o.irf_g = (d / "g.csv").string();
  o.out = (d / "one").string();
  std::ostringstream log;
  cli::run_command(o, log);
  o.irf_y = (d / "y.csv").string();
  o.out = (d / "two").string();
  cli::run_command(o, log);
  for (const auto& [dir, value] : std::vector<std::pair<std::string, double>>{{"one", 1.0}, {"two", 2.0}}) {
    std::istringstream in(slurp(d / dir / "multiplier.csv"));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      const auto c = split_csv_line(line);
      CHECK(parse_double(c[3], "mean") == doctest::Approx(value).epsilon(1e-14));
      ++rows;
    }
    CHECK(rows == 4);
  }
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("exit");
  CHECK(exit_code("simulate --preset tvar --out " + (d / "ok").string()) == 0);
  CHECK(exit_code("simulate") == 2);
  CHECK(exit_code("simulate --preset nope") == 2);
  CHECK(exit_code("frobnicate") == 2);
  put(d / "bad.yaml", "simulate: {dgp: tvar, extra: 1}\n");
  CHECK(exit_code("simulate --config " + (d / "bad.yaml").string()) == 2);
  put(d / "g.yaml", "data: {file: missing.csv, response: y, shock: x}\n");
  CHECK(exit_code("girf --config " + (d / "g.yaml").string() + " --out " + (d / "g").string()) == 3);
  put(d / "nan.csv", "y,x\n1,2\n3,nan\n");
  put(d / "n.yaml", "data: {file: nan.csv, response: y, shock: x}\n");
  CHECK(exit_code("fit --config " + (d / "n.yaml").string() + " --out " + (d / "n").string()) == 3);
  // a constant response with a duplicated shock column makes the linear design singular
  std::string rows = "y,x,z\n";
  for (int t = 0; t < 40; ++t) rows += std::to_string(t % 3) + "," + std::to_string(t % 5) + "," + std::to_string(t % 5) + "\n";
  put(d / "sing.csv", rows);
  put(d / "s.yaml", std::string("data: {file: sing.csv, response: y, shock: x, contemporaneous: [z]}\n") + kBart +
                        "girf: {horizons: 1, residual_draws: 1}\n");
  CHECK(exit_code("girf --config " + (d / "s.yaml").string() + " --out " + (d / "s").string()) == 4);
}
