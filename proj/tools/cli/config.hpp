#pragma once

#include "flexlp/bart.hpp"
#include "flexlp/dgp.hpp"
#include "flexlp/girf.hpp"
#include "flexlp/montecarlo.hpp"

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flexlp::cli {

/// One mapping of the config file. Reads are recorded so that finish() can
/// reject keys nobody asked for. Errors carry the file line.
class Section {
 public:
  Section(YAML::Node node, std::string path);

  bool present() const { return node_.IsDefined() && !node_.IsNull(); }
  bool has(const std::string& key) const;
  Section child(const std::string& key);

  double number(const std::string& key, double fallback);
  long long integer(const std::string& key, long long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::string required_text(const std::string& key);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback);
  Matrix matrix(const std::string& key, const Matrix& fallback);
  std::vector<Section> list(const std::string& key);

  /// Throws ConfigError on keys that were never read.
  void finish() const;
  std::string where(const std::string& key) const;

 private:
  YAML::Node value(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

/// Loads the file (or an empty document) and rejects top-level sections not in `allowed`.
YAML::Node load_config(const std::string& path, const std::set<std::string>& allowed, const std::string& command);

BartConfig read_bart(Section s, BartConfig base = {});
DgpParams read_dgp(const std::string& name, Section params);

struct DataSpec {
  std::string file;
  std::vector<std::string> responses;
  std::string shock;
  std::vector<std::string> contemporaneous;
  std::vector<std::string> lagged;
  int lags = 1;
};
DataSpec read_data(Section s);

struct StateSpec {
  std::string label;
  std::string variable;
  double percentile = 0.5;
  StateFilter::Kind kind = StateFilter::Kind::kBelow;
};

struct GirfSpec {
  GirfSettings settings;
  std::vector<double> shocks{1.0};
  std::string identification = "shock_series";
  std::string impulse_shock;  // lagged series whose Cholesky shock is used
  std::vector<StateSpec> states;
  std::size_t condition_draws = 200;
};
GirfSpec read_girf(Section s, GirfSettings base = {});

/// Applies the montecarlo section on top of the preset chosen by name/scale.
McConfig read_montecarlo(Section mc, Section girf, Section bart, const std::string& preset, const std::string& scale);

nlohmann::json girf_settings_json(const GirfSettings& g);

}  // namespace flexlp::cli
