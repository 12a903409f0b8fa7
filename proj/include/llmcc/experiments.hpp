#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "llmcc/comparison.hpp"
#include "llmcc/config.hpp"
#include "llmcc/simulator.hpp"

namespace llmcc {

// Offered loads from "a..b" stepped by step (inclusive of b within rounding).
// A single number gives one point. Throws ValidationError.
std::vector<double> parse_rps_range(std::string_view range, double step);

// Ordinary least-squares slope of queue depth (requests per second) over
// seconds [from_s, to_s). Zero when fewer than two rows fall in range.
double queue_growth_slope(std::span<const SecondAggregate> rows, std::int64_t from_s, std::int64_t to_s);

struct SweepPoint {
  double rps = 0.0;
  std::int64_t arrivals = 0;
  std::int64_t completed = 0;
  double queue_slope = 0.0;  // over the second half of the offered-load period
  std::int64_t end_queue_depth = 0;  // at the end of the offered-load period
  std::optional<double> tbt_p50_ms;
  std::optional<double> e2e_p50_ms;
  std::optional<double> e2e_p99_ms;
  std::optional<double> queueing_p99_ms;
};

// One unbounded constant-rate simulation per load, run concurrently on up to
// `threads` engines (0 = hardware concurrency). Each point draws its trace
// from a seed derived from cfg.run.seed and the point index.
std::vector<SweepPoint> run_sweep(const RunConfig& cfg, std::span<const double> rps, double duration_s,
                                  unsigned threads = 0);

std::string format_sweep(std::span<const SweepPoint> points);

// Per-second TBT averages that feed threshold calibration.
std::vector<double> tbt_series(std::span<const SecondAggregate> rows);

// Unbounded run, thresholds from it, bounded run on the same trace and seed.
struct ExperimentPair {
  Trace trace;
  RunResult unbounded;
  std::pair<double, double> thresholds;
  RunResult bounded;
};

ExperimentPair run_pair(const RunConfig& cfg, const Trace& trace);

}  // namespace llmcc
