#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "llmcc/controller.hpp"
#include "llmcc/metrics.hpp"
#include "llmcc/simulator.hpp"
#include "llmcc/trace.hpp"

namespace llmcc {

// Per-request outcome as persisted in a run directory (requests.csv).
struct RequestRecord {
  std::int64_t request_id = 0;
  std::int64_t arrival_ms = 0;
  RequestClass request_class = RequestClass::kSummarization;
  std::int32_t input_words = 0;
  std::int32_t unbounded_output_words = 0;
  std::int32_t realized_output_words = 0;
  std::int32_t target_words = 0;  // 0 when not rewritten
  double r_applied = 0.0;
  double queueing_ms = 0.0;
  double ttft_ms = 0.0;
  double e2e_ms = 0.0;

  bool rewritten() const { return r_applied > 0.0; }
  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

// Everything compare_runs needs from one run; loadable from a run directory.
struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t trace_fingerprint = 0;
  std::int64_t trace_events = 0;
  bool controlled = false;
  std::vector<SecondAggregate> per_second;
  std::vector<RequestRecord> requests;  // completed requests, completion order
  std::vector<ControllerTransition> transitions;
};

RunRecord to_record(const RunResult& run);

// Half-open window [start_s, end_s) of simulated seconds.
struct Window {
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

inline constexpr Window kPresetWindow{130, 500};

// "a:b" -> Window; throws ValidationError.
Window parse_window(std::string_view text);

// From one second before the first activation to the end of unbounded
// queueing. Empty when the bounded run never activated or the unbounded run
// never queued.
std::optional<Window> default_window(const RunRecord& unbounded, const RunRecord& bounded);

struct RunComparison {
  Window window;
  double e2e_peak_unbounded_ms = 0.0;
  double e2e_peak_bounded_ms = 0.0;
  double e2e_peak_ratio = 0.0;
  std::int64_t completions_unbounded = 0;
  std::int64_t completions_bounded = 0;
  double completions_delta_pct = 0.0;
  double energy_unbounded_j = 0.0;
  double energy_bounded_j = 0.0;
  double energy_delta_pct = 0.0;
  std::int64_t rewritten_requests = 0;
  std::optional<double> median_r_active;
  std::optional<double> similarity_median_active;
  std::optional<double> similarity_median_inactive;
};

// Requests completed in both runs are scored against the unbounded length
// of the same request; each score draws from the "similarity" substream of
// the shared seed. Throws ValidationError when the runs did not replay the
// same trace and seed or the window falls outside either horizon, and
// DegenerateDataError when a ratio has a zero denominator.
RunComparison compare_runs(const RunRecord& unbounded, const RunRecord& bounded, Window window,
                           const QualityModel& quality);

}  // namespace llmcc
