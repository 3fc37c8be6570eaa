#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "trick/errors.hpp"
#include "trick/experiments.hpp"
#include "trick/tables.hpp"

namespace trick::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  int verbosity = 0;
};

// Failures while reading inputs map to exit code 1.
struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path resolve_config(const std::string& given) {
  if (given.empty()) throw ConfigFailure("--config is required for this command");
  fs::path p(given);
  if (!fs::exists(p) && fs::exists(given + ".conf")) p = given + ".conf";
  if (!fs::exists(p)) throw ConfigFailure(given + ": no such file");
  return fs::absolute(p).lexically_normal();
}

fs::path output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("TRICK_OUTPUT_DIR"); env && *env) return env;
  return "results";
}

unsigned worker_count(const Options& o) {
  if (o.threads > 0) return o.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
auto load(Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw ConfigFailure(e.what());
  }
}

std::string manifest_text(const Options& o, const fs::path& config, const ConfigDocument& doc) {
  std::ostringstream s;
  s << "# trick " << o.command << " manifest\n";
  s << "# source = " << config.string() << "\n";
  s << "# output_dir = " << fs::absolute(output_dir(o)).lexically_normal().string() << "\n";
  s << "# Re-run with: trick " << o.command << " --config manifest.conf\n\n";
  s << format_config(doc);
  return s.str();
}

// Whatever goes to stdout also lands in summary.txt next to the tables.
void emit_summary(const fs::path& dir, const std::string& text, std::ostream& out) {
  write_text(dir, "summary.txt", text);
  out << text;
}

int attack_demo(const Options& o, std::ostream& out) {
  const fs::path config = resolve_config(o.config);
  AttackScenario scenario = load([&] { return load_attack_scenario(config); });
  if (o.seed) scenario.seed = *o.seed;

  const AttackDemoReport rep = run_attack_demo(scenario);
  const fs::path dir = output_dir(o);
  write_json(dir, "attack_demo.json", to_json(rep));
  write_text(dir, "trace.csv", trace_csv(rep.trace));
  write_text(dir, "manifest.conf", manifest_text(o, config, attack_scenario_document(scenario)));

  std::ostringstream s;
  s << "scenario " << scenario.name << " seed " << scenario.seed << "\n";
  s << "plan feasible: " << (rep.plan.feasible ? "yes" : "no") << " (" << rep.snapshot.gnss.size()
    << " GNSS satellites)\n";
  s << "baseline error to fake target: " << format_number(rep.baseline_error_to_fake_m) << " m\n";
  s << "trick max residual: " << format_number(rep.integrity.residual->max_residual_m) << " m, verdict "
    << (rep.integrity.accepted() ? "accept" : "reject (" + rep.integrity.reject_reason() + ")") << "\n";
  if (rep.scheme) s << "scheme sum error: " << format_number(rep.scheme->outcome.sum_error_m) << " m\n";
  emit_summary(dir, s.str(), out);
  if (o.verbosity > 0) out << "wrote " << fs::absolute(dir).string() << "\n";
  if (!rep.plan.feasible) {
    out << "error: spoof plan is infeasible for this geometry\n";
    return kExperimentFailure;
  }
  return kSuccess;
}

int residual_mc(const Options& o, std::ostream& out) {
  const fs::path config = resolve_config(o.config);
  ResidualMcConfig cfg = load([&] { return load_residual_mc(config); });
  if (o.seed) cfg.grid.base_seed = *o.seed;

  const auto rows = run_residual_mc(cfg, worker_count(o));
  const auto cells = summarize_residuals(rows);
  const fs::path dir = output_dir(o);
  write_text(dir, "residual_mc.csv", residual_csv(rows));
  write_text(dir, "residual_mc_summary.csv", residual_summary_csv(cells));
  write_text(dir, "manifest.conf", manifest_text(o, config, residual_mc_document(cfg)));

  std::ostringstream s;
  int flagged = 0;
  for (const auto& r : rows) flagged += r.flag.empty() ? 0 : 1;
  s << rows.size() << " trials, " << flagged << " flagged, seed " << cfg.grid.base_seed << "\n";
  for (const auto& c : cells)
    s << "offset " << format_number(c.offset_m) << " m sigma " << format_number(c.sigma_m)
      << " m: min " << format_number(c.min) << " median " << format_number(c.median) << "\n";
  emit_summary(dir, s.str(), out);
  return kSuccess;
}

int coverage(const Options& o, std::ostream& out) {
  const fs::path config = resolve_config(o.config);
  CoverageRun run = load([&] { return load_coverage(config); });
  if (o.seed) run.seed = *o.seed;

  const auto rows = run_coverage(run, worker_count(o));
  const fs::path dir = output_dir(o);
  for (auto mode : run.modes) {
    std::vector<AvailabilityRow> subset;
    for (const auto& r : rows)
      if (r.mode == mode) subset.push_back(r);
    write_text(dir, "coverage_" + to_string(mode) + ".csv", coverage_csv(subset));
    if (o.verbosity > 0) out << "wrote coverage_" << to_string(mode) << ".csv\n";
  }
  write_text(dir, "manifest.conf", manifest_text(o, config, coverage_document(run)));
  std::ostringstream s;
  for (const auto& r : rows) {
    if (r.dt_s) continue;
    s << to_string(r.mode) << ' ' << r.station << ": " << format_number(r.availability_pct) << " %\n";
  }
  emit_summary(dir, s.str(), out);
  return kSuccess;
}

int run_selfcheck(const Options& o, std::ostream& out) {
  const auto lines = selfcheck(o.seed.value_or(kDefaultSeed));
  std::ostringstream text;
  bool all = true;
  for (const auto& l : lines) {
    text << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << "\n";
    all = all && l.pass;
  }
  out << text.str();
  if (!o.out.empty() || std::getenv("TRICK_OUTPUT_DIR")) write_text(output_dir(o), "selfcheck.txt", text.str());
  return all ? kSuccess : kExperimentFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secure-positioning simulator: spoofing demo, residual Monte Carlo and coverage"};
  app.name("trick");
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config,-c", o.config, "Experiment definition file (.conf may be omitted)");
    if (needs_config) c->required();
    sub->add_option("--out,-o", o.out, "Output directory (default: $TRICK_OUTPUT_DIR, else ./results)");
    sub->add_option("--seed", o.seed, "Base seed, overrides the file value (default 42)");
    sub->add_option("--threads,-j", o.threads, "Worker threads (default: all cores)");
    sub->add_flag("-v,--verbose", o.verbosity, "More output");
  };
  add_common(app.add_subcommand("attack-demo", "Spoof the baseline receiver and run the TRICK checks"), true);
  add_common(app.add_subcommand("residual-mc", "Second-check residual Monte Carlo"), true);
  add_common(app.add_subcommand("coverage", "Secure-triangle availability per station"), true);
  add_common(app.add_subcommand("selfcheck", "Run the built-in invariant suite"), false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "attack-demo") return attack_demo(o, out);
    if (o.command == "residual-mc") return residual_mc(o, out);
    if (o.command == "coverage") return coverage(o, out);
    return run_selfcheck(o, out);
  } catch (const ConfigFailure& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "experiment failed: " << e.what() << "\n";
    return kExperimentFailure;
  } catch (const std::exception& e) {
    err << "experiment failed: " << e.what() << "\n";
    return kExperimentFailure;
  }
}

}  // namespace trick::cli
