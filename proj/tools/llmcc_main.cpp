#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llmcc/comparison.hpp"
#include "llmcc/config.hpp"
#include "llmcc/errors.hpp"
#include "llmcc/experiments.hpp"
#include "llmcc/run_io.hpp"
#include "llmcc/text.hpp"

namespace fs = std::filesystem;
using namespace llmcc;

namespace {

struct Common {
  std::optional<std::string> config;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (default: $LLMCC_CONFIG)");
    app->add_option("--set", overrides, "Override a config key, e.g. server.max_batch=128")->take_all();
  }
  RunConfig resolve() const {
    std::optional<fs::path> p;
    if (config) p = *config;
    return resolve_config(p, overrides);
  }
};

int cmd_gen_trace(const Common& common, const std::string& recipe, const std::optional<std::string>& schedule,
                  std::optional<std::uint64_t> seed, const std::string& out) {
  RunConfig cfg = common.resolve();
  const std::uint64_t s = seed.value_or(cfg.run.seed);
  Trace trace;
  if (recipe == "paper") {
    if (schedule) throw ValidationError("--schedule applies only to --recipe custom");
    trace = paper_trace(cfg.workload, s);
  } else {
    if (!schedule) throw ValidationError("--recipe custom requires --schedule");
    trace = generate_trace(parse_schedule(*schedule), cfg.workload, s);
  }
  write_trace(trace, out);
  std::cout << "wrote " << trace.events.size() << " arrivals over " << trace.duration_ms / 1000.0 << " s to "
            << out << '\n';
  return 0;
}

int cmd_run(const Common& common, const std::string& trace_path, const std::string& mode, const std::string& out,
            std::optional<std::uint64_t> seed, std::optional<double> t1, std::optional<double> t2) {
  RunConfig cfg = common.resolve();
  if (seed) cfg.run.seed = *seed;
  if (t1) cfg.controller.t1_ms = t1;
  if (t2) cfg.controller.t2_ms = t2;
  Trace trace = read_trace(trace_path);
  SimOptions opt;
  opt.seed = cfg.run.seed;
  opt.cutoff_s = cfg.run.cutoff_s;

  RunResult run;
  if (mode == "bounded") {
    cfg.controller.validate();
    LinearController controller(cfg.controller);
    run = run_simulation(trace, cfg.server, cfg.models, cfg.controller, &controller, opt);
  } else {
    run = run_unbounded(trace, cfg.server, cfg.models, opt);
  }
  write_run_dir(out, trace, run, cfg);
  std::cout << format_summary(run);
  return 0;
}

int cmd_calibrate(const std::string& run_dir, const std::optional<std::string>& out) {
  const fs::path dir(run_dir);
  const fs::path per_second = dir / run_files::kPerSecond;
  std::vector<SecondAggregate> rows;
  try {
    rows = parse_per_second(read_text_file(per_second));
  } catch (const ParseError& e) {
    throw ValidationError(per_second.string() + ": " + e.what());
  }
  auto [t1, t2] = calibrate_thresholds(tbt_series(rows));
  const fs::path dest = out ? fs::path(*out) : dir / "calibrated_config.json";
  const std::string fragment = "{\n  \"controller\": {\n    \"t1_ms\": " + text::fmt_double(t1) +
                               ",\n    \"t2_ms\": " + text::fmt_double(t2) + "\n  }\n}\n";
  write_text_file(dest, fragment);
  std::cout << "t1_ms: " << text::fmt_double(t1) << "\nt2_ms: " << text::fmt_double(t2) << "\nconfig_fragment: "
            << dest.string() << '\n';
  return 0;
}

int cmd_compare(const Common& common, const std::string& unbounded_dir, const std::string& bounded_dir,
                const std::string& window_text, const std::optional<std::string>& out) {
  RunConfig cfg = common.resolve();
  RunRecord u = read_run_dir(unbounded_dir);
  RunRecord b = read_run_dir(bounded_dir);
  Window w = kPresetWindow;
  if (window_text == "auto") {
    if (auto d = default_window(u, b)) w = *d;
  } else {
    w = parse_window(window_text);
  }
  RunComparison c = compare_runs(u, b, w, cfg.models.quality);
  const std::string report = format_comparison(c);
  if (out) {
    std::error_code ec;
    fs::create_directories(*out, ec);
    if (ec) throw IoError("cannot create output directory " + *out + ": " + ec.message());
    write_text_file(fs::path(*out) / "comparison.txt", report);
    write_text_file(fs::path(*out) / "side_by_side.csv", format_side_by_side(u, b));
  }
  std::cout << report;
  return 0;
}

int cmd_sweep(const Common& common, const std::string& range, double step, double duration, unsigned threads,
              const std::optional<std::string>& out) {
  RunConfig cfg = common.resolve();
  auto points = run_sweep(cfg, parse_rps_range(range, step), duration, threads);
  const std::string table = format_sweep(points);
  if (out) write_text_file(*out, table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for length-bounded LLM serving under congestion"};
  app.require_subcommand(1);

  Common gen_common, run_common, cmp_common, sweep_common;

  auto* gen = app.add_subcommand("gen-trace", "Generate an arrival trace");
  std::string recipe = "paper";
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  gen->add_option("--recipe", recipe, "paper or custom")->check(CLI::IsMember({"paper", "custom"}));
  gen->add_option("--schedule", schedule, "Phases 'dur:rate' or 'dur:from-to', comma separated");
  gen->add_option("--seed", gen_seed, "Trace seed (default: run.seed)");
  gen->add_option("--out", gen_out, "Trace file to write")->required();
  gen_common.attach(gen);

  auto* run = app.add_subcommand("run", "Simulate a trace");
  std::string trace_path, mode = "unbounded", run_out;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> t1, t2;
  run->add_option("--trace", trace_path, "Trace file")->required();
  run->add_option("--mode", mode, "unbounded or bounded")->check(CLI::IsMember({"unbounded", "bounded"}));
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--seed", run_seed, "Simulation seed (default: run.seed)");
  run->add_option("--t1", t1, "Lower TBT threshold in ms (overrides controller.t1_ms)");
  run->add_option("--t2", t2, "Upper TBT threshold in ms (overrides controller.t2_ms)");
  run_common.attach(run);

  auto* cal = app.add_subcommand("calibrate", "Derive TBT thresholds from an unbounded run");
  std::string cal_dir;
  std::optional<std::string> cal_out;
  cal->add_option("--unbounded-run", cal_dir, "Unbounded run directory")->required();
  cal->add_option("--out", cal_out, "Config fragment to write (default: <run>/calibrated_config.json)");

  auto* cmp = app.add_subcommand("compare", "Compare an unbounded and a bounded run");
  std::string cmp_u, cmp_b, window = "130:500";
  std::optional<std::string> cmp_out;
  cmp->add_option("--unbounded", cmp_u, "Unbounded run directory")->required();
  cmp->add_option("--bounded", cmp_b, "Bounded run directory")->required();
  cmp->add_option("--window", window, "start:end seconds, or auto");
  cmp->add_option("--out", cmp_out, "Directory for comparison.txt and side_by_side.csv");
  cmp_common.attach(cmp);

  auto* sweep = app.add_subcommand("sweep", "Constant-load saturation sweep");
  std::string range = "1.0..3.0";
  double step = 0.2, duration = 1200.0;
  unsigned threads = 0;
  std::optional<std::string> sweep_out;
  sweep->add_option("--rps", range, "a..b or a single value");
  sweep->add_option("--step", step, "RPS increment");
  sweep->add_option("--duration", duration, "Offered-load seconds per point");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out", sweep_out, "CSV file to write");
  sweep_common.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kValidation);
  }

  try {
    if (*gen) return cmd_gen_trace(gen_common, recipe, schedule, gen_seed, gen_out);
    if (*run) return cmd_run(run_common, trace_path, mode, run_out, run_seed, t1, t2);
    if (*cal) return cmd_calibrate(cal_dir, cal_out);
    if (*cmp) return cmd_compare(cmp_common, cmp_u, cmp_b, window, cmp_out);
    if (*sweep) return cmd_sweep(sweep_common, range, step, duration, threads, sweep_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return 0;
}
