#include "commands.hpp"

#include "flexlp/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using flexlp::cli::Options;
  CLI::App app{"Flexible local projections with BART"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  int threads = 0;

  const auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed (overrides the config)");
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
    cmd->add_option("--preset", o.presets, "svar-garch, tvar, sign-ma, desk or paper (repeatable)")
        ->check(CLI::IsMember({"svar-garch", "tvar", "sign-ma", "desk", "paper"}))
        ->allow_extra_args(false)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  };
  common(app.add_subcommand("simulate", "simulate one of the built-in DGPs"));
  common(app.add_subcommand("fit", "fit BART horizon models to a data file"));
  common(app.add_subcommand("girf", "generalized impulse responses from a data file"));
  common(app.add_subcommand("montecarlo", "Monte Carlo comparison against true impulse responses"));
  CLI::App* mult = app.add_subcommand("multiplier", "cumulative multiplier from two IRF files");
  common(mult);
  mult->add_option("--irf-y", o.irf_y, "IRF file of the numerator variable");
  mult->add_option("--irf-g", o.irf_g, "IRF file of the denominator variable");
  mult->add_option("--variable-y", o.variable_y);
  mult->add_option("--variable-g", o.variable_g);
  double shock_size = 0.0;
  mult->add_option("--shock-size", shock_size, "shock size to pick when a file holds several");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    o.command = sub->get_name();
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--threads")) o.threads = threads;
    if (sub == mult && mult->count("--shock-size")) o.shock_size = shock_size;
  }
  try {
    flexlp::cli::run_command(o, std::cout);
  } catch (const flexlp::Error& e) {
    std::cerr << "flexlp " << o.command << ": " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "flexlp " << o.command << ": out of memory\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "flexlp " << o.command << ": " << e.what() << '\n';
    return 4;
  }
  return 0;
}
