#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace flexlp::cli {

struct Options {
  std::string command;
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> presets;
  // multiplier only
  std::string irf_y, irf_g, variable_y, variable_g;
  std::optional<double> shock_size;
};

/// Runs one command; errors propagate as flexlp::Error.
void run_command(const Options& options, std::ostream& log);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace flexlp::cli
