#include "greenlab/io_cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

namespace greenlab {

namespace {

constexpr std::size_t kDefaultFuzzCount = 100000;
constexpr std::size_t kDefaultFamilyCount = 100;

std::string default_out(Mode mode) {
  switch (mode) {
    case Mode::profile: return "profile.csv";
    case Mode::verify: return "verify.json";
    case Mode::fuzz: return "fuzz.json";
    case Mode::family: return "family.csv";
    case Mode::growth: return "growth.json";
  }
  return "out";
}

std::string out_path(const RunConfig& c) { return c.out.empty() ? default_out(c.mode) : c.out; }

// Writes the whole file at once; "-" means stdout.
void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  os << text;
  if (!os) throw Error(ErrorCode::ConfigError, "write failed for " + path);
}

void check_writable(const std::string& path) {
  if (path == "-") return;
  const std::filesystem::path p(path);
  const std::filesystem::path dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::ConfigError, "output directory does not exist: " + dir.string());
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

nlohmann::ordered_json grid_json(const RadialWarpedMetric& m) {
  nlohmann::ordered_json g;
  g["t_min"] = m.grid.t_min;
  g["t_max"] = m.grid.t_max;
  g["points_per_decade"] = m.grid.points_per_decade;
  return g;
}

nlohmann::ordered_json metric_json(const RadialWarpedMetric& m) {
  nlohmann::ordered_json j = m.profile.to_json();
  j["grid"] = grid_json(m);
  return j;
}

nlohmann::ordered_json optional_number(const std::optional<double>& x) {
  if (x) return *x;
  return nullptr;
}

// Splits `count` samples into fixed chunks with their own seeds, so the
// result is the same for any number of threads.
InequalityReport chunked(const std::function<InequalityReport(std::uint64_t, std::size_t)>& check, std::uint64_t seed,
                         std::size_t count, std::size_t chunk, unsigned threads) {
  const std::size_t n_chunks = count == 0 ? 1 : (count + chunk - 1) / chunk;
  std::vector<std::uint64_t> seeds(n_chunks);
  std::mt19937_64 rng(seed);
  for (auto& s : seeds) s = rng();
  std::vector<InequalityReport> parts(n_chunks);
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t len = std::min(chunk, count - std::min(count, c * chunk));
    parts[c] = check(seeds[c], len);
  });
  InequalityReport merged = make_report(parts[0].check_id, parts[0].kind, parts[0].tolerance);
  merged.metadata = parts[0].metadata;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (const auto& r : parts[c].residuals)
      merged.add(r.location + static_cast<double>(c * chunk), r.lhs, r.rhs, r.slack);
    merged.skipped += parts[c].skipped;
  }
  merged.finish();
  for (const auto& p : parts)
    if (!p.pass && p.n_points == 0) merged.pass = false;  // failures not tied to samples
  if (merged.metadata.contains("witness_gap") && std::abs(merged.metadata["witness_gap"].get<double>()) > 1e-14)
    merged.pass = false;
  return merged;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::profile: return "profile";
    case Mode::verify: return "verify";
    case Mode::fuzz: return "fuzz";
    case Mode::family: return "family";
    case Mode::growth: return "growth";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name) {
  for (Mode m : {Mode::profile, Mode::verify, Mode::fuzz, Mode::family, Mode::growth})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::ConfigError, "unknown mode '" + name + "'");
}

void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mode") c.mode = mode_from_string(v.get<std::string>());
      else if (key == "metric") c.metric = v.is_string() ? nlohmann::json{{"kind", v}} : v;
      else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "t_min") c.t_min = gv.get<double>();
          else if (gk == "t_max") c.t_max = gv.get<double>();
          else if (gk == "points_per_decade") c.points_per_decade = gv.get<int>();
          else throw Error(ErrorCode::ConfigError, "unknown grid key '" + gk + "'");
        }
      } else if (key == "tol") c.tolerance = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "count") c.count = v.get<std::size_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "serial") c.serial = v.get<bool>();
      else if (key == "allow_indefinite") c.allow_indefinite = v.get<bool>();
      else if (key == "include_flat") c.include_flat = v.get<bool>();
      else if (key == "r0") c.r0 = v.get<double>();
      else if (key == "delta") c.delta = v.get<double>();
      else throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
}

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot read config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "config " + path + " is not valid JSON: " + e.what());
  }
  apply_config_json(c, j);
}

RadialWarpedMetric metric_of(const RunConfig& c) {
  WarpProfile profile;
  try {
    profile = make_profile(c.metric);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad metric spec: ") + e.what());
  }
  GridSpec grid = default_grid(profile);
  if (c.t_min) grid.t_min = *c.t_min;
  if (c.t_max) grid.t_max = *c.t_max;
  if (c.points_per_decade) grid.points_per_decade = *c.points_per_decade;
  if (!(grid.t_min > 0.0) || !(grid.t_max > 100.0 * grid.t_min) || grid.points_per_decade < 1)
    throw Error(ErrorCode::ConfigError, "grid needs t_min > 0, t_max > 100 t_min and points_per_decade >= 1");
  return make_metric(std::move(profile), grid);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> functionals_columns(bool pole_present) {
  std::vector<std::string> cols = {"t", "r", "u", "b", "grad_b", "area", "A0", "A1", "B1", "B2", "S1", "a", "Vflux", "S"};
  if (pole_present) {
    cols.push_back("int_S1");
    cols.push_back("int_S1_B2");
  }
  return cols;
}

std::string functionals_csv(const LevelSetFunctionals& lf) {
  std::vector<const std::vector<double>*> data = {&lf.t,  &lf.r,  &lf.u,  &lf.b,  &lf.grad_b, &lf.area, &lf.A0,
                                                  &lf.A1, &lf.B1, &lf.B2, &lf.S1, &lf.a,      &lf.Vflux, &lf.S};
  std::vector<double> int_s1, int_s1_b2;
  if (lf.pole_present) {
    int_s1 = cumulative(lf, CumulativeOf::S1);
    int_s1_b2 = cumulative(lf, CumulativeOf::S1_plus_B2);
    data.push_back(&int_s1);
    data.push_back(&int_s1_b2);
  }
  std::string out = std::string("# schema=") + kFunctionalsSchema + "\n";
  const auto cols = functionals_columns(lf.pole_present);
  for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
  out += "\n";
  for (std::size_t i = 0; i < lf.size(); ++i) {
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (k) out += ',';
      out += format_double((*data[k])[i]);
    }
    out += '\n';
  }
  return out;
}

unsigned thread_count(bool serial) {
  if (serial) return 1;
  if (const char* env = std::getenv("GREENLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int cmd_profile(const RunConfig& c, std::ostream& log) {
  const std::string path = out_path(c);
  check_writable(path);
  const RadialWarpedMetric metric = metric_of(c);
  const GreensProfile profile = build_profile(metric);
  const LevelSetFunctionals lf = functionals_of(profile);
  const InequalityReport flux = check_flux(lf);

  nlohmann::ordered_json side;
  side["schema"] = kProfileSchema;
  side["csv_schema"] = kFunctionalsSchema;
  side["metric"] = metric.profile.to_json();
  side["grid"] = grid_json(metric);
  side["pole_present"] = lf.pole_present;
  side["columns"] = functionals_columns(lf.pole_present);
  side["n_levels"] = lf.size();
  side["alpha_inf"] = optional_number(profile.alpha_inf);
  side["c_inf"] = optional_number(profile.c_inf);
  side["tail_exact"] = profile.tail_exact;
  side["tail_fit_residual"] = profile.tail_fit_residual;
  side["pole_ratio"] = profile.pole_ratio;
  side["hessian_richardson_max"] = profile.richardson_max;
  side["flux_check"] = greenlab::to_json(flux, metric_json(metric));

  write_file(path, functionals_csv(lf));
  if (path != "-") {
    std::filesystem::path sidecar(path);
    sidecar.replace_extension(".json");
    write_file(sidecar.string(), dump(side));
    log << "wrote " << path << " and " << sidecar.string() << " (" << lf.size() << " levels)\n";
  }
  return flux.pass ? 0 : 1;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const std::string path = out_path(c);
  check_writable(path);
  const RadialWarpedMetric metric = metric_of(c);
  VerifyOptions opt;
  opt.allow_indefinite = c.allow_indefinite;
  opt.seed = c.seed;
  opt.tolerance = c.tolerance;
  const std::vector<InequalityReport> reports = verify_metric(metric, opt);

  bool pass = true;
  bool equality = false;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  const nlohmann::ordered_json mj = metric_json(metric);
  for (const auto& r : reports) {
    pass = pass && r.pass;
    if (r.check_id == "headline") equality = r.metadata.value("equality_case", false);
    list.push_back(greenlab::to_json(r, mj, c.seed));
    log << (r.pass ? "pass " : "FAIL ") << r.check_id << "  worst_slack=" << format_double(r.worst_slack) << "\n";
  }
  nlohmann::ordered_json bundle;
  bundle["schema"] = kVerifySchema;
  bundle["metric"] = mj;
  bundle["seed"] = c.seed;
  bundle["verdict"] = pass ? "pass" : "fail";
  bundle["equality_case"] = equality;
  bundle["reports"] = std::move(list);
  write_file(path, dump(bundle));
  return pass ? 0 : 1;
}

int cmd_fuzz(const RunConfig& c, std::ostream& log) {
  const std::string path = out_path(c);
  check_writable(path);
  const std::size_t count = c.count.value_or(kDefaultFuzzCount);
  const unsigned threads = thread_count(c.serial);

  std::vector<InequalityReport> reports;
  reports.push_back(chunked(check_matrix_lemma, c.seed, count, 5000, threads));
  reports.push_back(chunked(check_algebraic_hessian_identity, c.seed + 1, count, 5000, threads));
  reports.push_back(chunked(check_bochner_gauss_chart, c.seed + 2, count, 500, threads));

  bool pass = true;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (auto& r : reports) {
    if (c.tolerance) {
      r.tolerance = *c.tolerance;
      r.finish();
    }
    pass = pass && r.pass;
    list.push_back(greenlab::to_json(r, nullptr, c.seed));
    log << (r.pass ? "pass " : "FAIL ") << r.check_id << "  n=" << r.n_points << "  worst_slack=" << format_double(r.worst_slack)
        << "\n";
  }
  nlohmann::ordered_json bundle;
  bundle["schema"] = kFuzzSchema;
  bundle["seed"] = c.seed;
  bundle["count"] = count;
  bundle["verdict"] = pass ? "pass" : "fail";
  bundle["reports"] = std::move(list);
  write_file(path, dump(bundle));
  return pass ? 0 : 1;
}

int cmd_family(const RunConfig& c, std::ostream& log) {
  static const std::vector<std::string> checks = {"headline",          "mw_inequality", "B1_lower_bound",
                                                  "cauchy_schwarz_B2", "a_dynamics",    "a_dynamics_weighted"};
  const std::string path = out_path(c);
  check_writable(path);
  const std::size_t n = c.count.value_or(kDefaultFamilyCount);

  struct Row {
    std::uint64_t seed = 0;
    std::string profile;
    double min_S = 0.0;
    std::vector<double> slack;
    bool equality = false;
    bool pass = true;
  };
  std::vector<Row> rows(n);
  parallel_for(n, thread_count(c.serial), [&](std::size_t i) {
    Row& row = rows[i];
    row.seed = c.seed + i;
    const bool flat = c.include_flat && i == 0;
    const WarpProfile profile = flat ? make_profile({{"kind", "bumps"}, {"bumps", nlohmann::json::array()}})
                                     : sample_s_nonneg(row.seed, 1).front();
    row.profile = flat ? "flat" : "bumps";
    GridSpec grid = default_grid(profile);
    if (c.points_per_decade) grid.points_per_decade = *c.points_per_decade;
    const LevelSetFunctionals lf = functionals_of(build_profile(make_metric(profile, grid)));
    row.min_S = *std::min_element(lf.S.begin(), lf.S.end());

    std::vector<InequalityReport> reps;
    reps.push_back(check_headline(lf, c.allow_indefinite));
    reps.push_back(check_mw_inequality(lf));
    reps.push_back(check_B1_lower_bound(lf));
    reps.push_back(check_cauchy_schwarz_B2(lf));
    ADynamicsResult ad = check_a_dynamics(lf, 1000, row.seed);
    reps.push_back(std::move(ad.integral));
    reps.push_back(std::move(ad.weighted));
    for (auto& r : reps) {
      if (c.tolerance) {
        r.tolerance = *c.tolerance;
        r.finish();
      }
      row.slack.push_back(r.worst_slack);
      row.pass = row.pass && r.pass;
    }
    row.equality = reps.front().metadata["equality_case"].get<bool>();
  });

  std::string out = std::string("# schema=") + kFamilySchema + "\n";
  out += "seed,profile,min_S";
  for (const auto& id : checks) out += ",slack_" + id;
  out += ",equality,pass\n";
  std::size_t failures = 0, flagged = 0;
  for (const Row& row : rows) {
    out += std::to_string(row.seed) + "," + row.profile + "," + format_double(row.min_S);
    for (double s : row.slack) out += "," + format_double(s);
    out += std::string(",") + (row.equality ? "1" : "0") + "," + (row.pass ? "1" : "0") + "\n";
    failures += row.pass ? 0 : 1;
    flagged += row.equality ? 1 : 0;
  }
  write_file(path, out);
  log << n << " profiles, " << failures << " failing, " << flagged << " flagged equality\n";
  return failures == 0 ? 0 : 1;
}

int cmd_growth(const RunConfig& c, std::ostream& log) {
  const std::string path = out_path(c);
  check_writable(path);
  const RadialWarpedMetric metric = metric_of(c);
  const LevelSetFunctionals lf = functionals_of(build_profile(metric));

  nlohmann::ordered_json j;
  j["schema"] = kGrowthSchema;
  j["metric"] = metric_json(metric);
  try {
    const GrowthReport g = growth_diagnostic(lf, c.r0, c.delta);
    j["verdict"] = "computed";
    j["report"] = g.to_json();
    write_file(path, dump(j));
    log << "growth exponent " << format_double(g.growth_exponent) << " from r0 = " << format_double(g.r0)
        << (g.conditional ? " (conditional: S < 0 somewhere)" : "") << "\n";
    return 0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisNotMet) throw;
    j["verdict"] = "hypothesis_not_met";
    j["error"] = e.what();
    write_file(path, dump(j));
    log << e.what() << "\n";
    return 1;
  }
}

int run(const RunConfig& c, std::ostream& log) {
  try {
    switch (c.mode) {
      case Mode::profile: return cmd_profile(c, log);
      case Mode::verify: return cmd_verify(c, log);
      case Mode::fuzz: return cmd_fuzz(c, log);
      case Mode::family: return cmd_family(c, log);
      case Mode::growth: return cmd_growth(c, log);
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::InvalidParam: return 2;
      default: return 3;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace greenlab
