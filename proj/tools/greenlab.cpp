// greenlab: profile | verify | fuzz | family | growth

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "greenlab/io_cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string metric;
  std::optional<double> alpha;
  std::optional<double> mass;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  std::optional<int> ppd;
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::optional<double> tol;
  std::string out;
  bool serial = false;
  bool allow_indefinite = false;
  bool include_flat = false;
  std::optional<double> r0;
  std::optional<double> delta;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; command-line flags take precedence")->check(CLI::ExistingFile);
  cmd->add_option("--metric", f.metric, "profile kind, or a JSON metric spec");
  cmd->add_option("--alpha", f.alpha, "cone angle parameter");
  cmd->add_option("--mass", f.mass, "Schwarzschild mass");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--count", f.count, "fuzz samples or family size");
  cmd->add_option("--grid-ppd", f.ppd, "grid points per decade");
  cmd->add_option("--t-min", f.t_min, "inner grid radius");
  cmd->add_option("--t-max", f.t_max, "outer grid radius");
  cmd->add_option("--tol", f.tol, "override every check tolerance");
  cmd->add_option("--out", f.out, "output path ('-' for stdout)");
  cmd->add_flag("--serial", f.serial, "single thread");
  cmd->add_flag("--allow-indefinite", f.allow_indefinite, "run checks even where S < 0");
  cmd->add_flag("--include-flat", f.include_flat, "family: first profile is flat space");
  cmd->add_option("--r0", f.r0, "growth: starting level");
  cmd->add_option("--delta", f.delta, "growth: required excess of A_1 over 4 pi");
}

greenlab::RunConfig resolve(greenlab::Mode mode, const Flags& f) {
  using greenlab::Error;
  using greenlab::ErrorCode;
  greenlab::RunConfig c;
  c.mode = mode;
  if (!f.config.empty()) {
    greenlab::apply_config_file(c, f.config);
    c.mode = mode;
  }
  if (!f.metric.empty()) {
    if (f.metric.front() == '{') {
      try {
        c.metric = nlohmann::json::parse(f.metric);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("--metric is not valid JSON: ") + e.what());
      }
    } else {
      c.metric = {{"kind", f.metric}};
    }
  }
  if (f.alpha) c.metric["alpha"] = *f.alpha;
  if (f.mass) c.metric["mass"] = *f.mass;
  if (f.seed) c.seed = *f.seed;
  if (f.count) c.count = *f.count;
  if (f.ppd) c.points_per_decade = *f.ppd;
  if (f.t_min) c.t_min = *f.t_min;
  if (f.t_max) c.t_max = *f.t_max;
  if (f.tol) c.tolerance = *f.tol;
  if (!f.out.empty()) c.out = f.out;
  if (f.serial) c.serial = true;
  if (f.allow_indefinite) c.allow_indefinite = true;
  if (f.include_flat) c.include_flat = true;
  if (f.r0) c.r0 = *f.r0;
  if (f.delta) c.delta = *f.delta;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Green's function level-set functionals on warped products"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"profile", "write the functionals CSV and its JSON sidecar"},
      {"verify", "run every applicable check for one metric"},
      {"fuzz", "pointwise lemma fuzzing"},
      {"family", "headline and inequality checks over random S >= 0 profiles"},
      {"growth", "growth diagnostic for A_1"},
  };
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    const auto* sub = app.get_subcommands().front();
    const greenlab::RunConfig config = resolve(greenlab::mode_from_string(sub->get_name()), flags);
    return greenlab::run(config, std::cerr);
  } catch (const greenlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
