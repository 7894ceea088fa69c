#pragma once

// Run configuration, artifact writers and the five CLI commands.

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "greenlab/verify_suite.hpp"
#include "json.hpp"

namespace greenlab {

inline constexpr const char* kFunctionalsSchema = "greenlab.functionals/1";
inline constexpr const char* kProfileSchema = "greenlab.profile/1";
inline constexpr const char* kVerifySchema = "greenlab.verify/1";
inline constexpr const char* kFuzzSchema = "greenlab.fuzz/1";
inline constexpr const char* kFamilySchema = "greenlab.family/1";
inline constexpr const char* kGrowthSchema = "greenlab.growth/1";

enum class Mode { profile, verify, fuzz, family, growth };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct RunConfig {
  Mode mode = Mode::profile;
  nlohmann::json metric = {{"kind", "euclidean"}};
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::optional<int> points_per_decade;
  std::optional<double> tolerance;
  std::uint64_t seed = 1;
  std::optional<std::size_t> count;  // fuzz: 1e5 samples, family: 100 profiles
  std::string out;                   // empty: per-mode default
  bool serial = false;
  bool allow_indefinite = false;
  bool include_flat = false;  // family: first row is the rho = 0 profile
  std::optional<double> r0;   // growth
  double delta = 0.1;         // growth
};

/// Overlays the keys present in a config-file object onto `config`.
/// Unknown keys raise ConfigError.
void apply_config_json(RunConfig& config, const nlohmann::json& file);

/// Reads and applies a JSON config file.
void apply_config_file(RunConfig& config, const std::string& path);

/// Metric with the grid overrides applied. Throws ConfigError on bad bounds.
RadialWarpedMetric metric_of(const RunConfig& config);

/// %.17g; round-trips every double.
std::string format_double(double x);

/// Functionals CSV: schema comment, header, one row per level. The 13 contract
/// columns come first, then S and, with a pole, the integrals from the pole.
std::string functionals_csv(const LevelSetFunctionals& lf);
std::vector<std::string> functionals_columns(bool pole_present);

/// Threads for inner loops: 1 with --serial, else GREENLAB_THREADS or the hardware count.
unsigned thread_count(bool serial);

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written by index, so output does not depend on the thread count.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

int cmd_profile(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);
int cmd_fuzz(const RunConfig& config, std::ostream& log);
int cmd_family(const RunConfig& config, std::ostream& log);
int cmd_growth(const RunConfig& config, std::ostream& log);

/// Dispatches on config.mode and maps errors to exit codes:
/// 0 pass, 1 check failure, 2 config error, 3 numerical error.
int run(const RunConfig& config, std::ostream& log);

}  // namespace greenlab
