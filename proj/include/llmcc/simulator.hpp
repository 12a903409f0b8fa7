#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "llmcc/controller.hpp"
#include "llmcc/metrics.hpp"
#include "llmcc/server_model.hpp"
#include "llmcc/trace.hpp"
#include "llmcc/workload_models.hpp"

namespace llmcc {

// Life of one request inside the simulator. Times are microseconds since trace start.
struct RequestState {
  ArrivalEvent event;
  std::optional<RewriteDecision> rewrite;
  std::optional<Micros> dispatch;
  std::optional<Micros> first_token;
  std::optional<Micros> completion;
  std::int32_t realized_output_words = 0;
  std::int32_t words_emitted = 0;
  std::vector<Micros> tbt_samples;

  Micros arrival() const { return event.arrival_ms * kMicrosPerMs; }
  double queueing_ms() const { return to_ms(dispatch.value() - arrival()); }
  double ttft_ms() const { return to_ms(first_token.value() - arrival()); }
  double e2e_ms() const { return to_ms(completion.value() - arrival()); }
  double r_applied() const { return rewrite ? rewrite->r_applied : 0.0; }
};

struct SimOptions {
  std::uint64_t seed = 0;
  // Stop processing at this simulated time; unfinished work marks the run truncated.
  std::optional<double> cutoff_s;
  // Keep the raw metric event stream (large); used by tests.
  bool record_events = false;
};

struct RunResult {
  std::vector<RequestState> completed;   // in completion order
  std::vector<RequestState> unfinished;  // queued or in flight when the run stopped
  std::vector<SecondAggregate> per_second;
  MicroJoules total_energy_uj = 0;
  std::vector<ControllerLogEntry> controller_log;
  std::vector<ControllerTransition> transitions;
  std::vector<MetricEvent> events;  // only with SimOptions::record_events
  bool truncated = false;
  bool controlled = false;

  // Echo of the inputs, used to check that two runs are comparable.
  ServerConfig server;
  std::uint64_t seed = 0;
  std::uint64_t trace_fingerprint = 0;
  std::int64_t trace_events = 0;
  std::int64_t trace_duration_ms = 0;

  double total_energy_j() const { return to_joules(total_energy_uj); }
};

// Continuous-batching serving node. One global decode loop: each iteration
// every decoding request emits one word; iteration time depends on the decode
// batch size. Queued requests are admitted FIFO at iteration boundaries (or on
// arrival when the loop is idle) while fewer than max_batch requests are
// admitted. Admission starts a prefill that does not slow other requests; the
// first word is emitted at the first iteration boundary at or after prefill
// completion. With a controller, each request is rewritten at admission using
// the controller's current r, and the controller receives one average-TBT
// sample at the end of every second that produced tokens.
RunResult run_simulation(const Trace& trace, const ServerConfig& server, const ModelBundle& models,
                         const ControllerConfig& policy, CongestionController* controller,
                         const SimOptions& options);

// Unbounded run: no controller, no rewrites.
RunResult run_unbounded(const Trace& trace, const ServerConfig& server, const ModelBundle& models,
                        const SimOptions& options);

// Sum of all energy accounted during the run (input, output and idle).
MicroJoules accumulate_energy(const RunResult& run);

}  // namespace llmcc
