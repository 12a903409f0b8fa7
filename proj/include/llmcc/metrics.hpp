#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "llmcc/server_model.hpp"

namespace llmcc {

// Nearest-rank percentile: sorted ascending, element at rank ceil(p/100 * n)
// (1-based); p = 0 yields the minimum. Throws ValidationError on empty input
// or p outside [0, 100].
double percentile(std::span<const double> samples, double p);

// Metrics attributable to one simulated second [s, s+1).
struct SecondAggregate {
  std::int64_t second = 0;
  std::int64_t rps_in = 0;       // arrivals during the second
  std::int64_t queue_depth = 0;  // waiting requests at the end of the second
  std::int64_t in_flight = 0;    // admitted, not completed, at the end of the second
  std::optional<double> avg_queueing_ms;
  std::optional<double> avg_ttft_ms;
  std::optional<double> avg_tbt_ms;
  std::optional<double> avg_e2e_ms;
  double active_r = 0.0;
  std::int64_t completions = 0;
  MicroJoules energy_uj = 0;

  double energy_j() const { return to_joules(energy_uj); }

  friend bool operator==(const SecondAggregate&, const SecondAggregate&) = default;
};

enum class MetricKind {
  kArrival,     // value unused
  kDispatch,    // value = queueing latency (us)
  kFirstToken,  // value = TTFT (us)
  kToken,       // value = gap since the request's previous token (us)
  kCompletion,  // value = E2E latency (us)
  kEnergy,      // value = microjoules
  kSnapshot,    // end-of-second state: value = queue depth, aux = in-flight, r = active r
};

struct MetricEvent {
  Micros time = 0;
  MetricKind kind = MetricKind::kArrival;
  std::int64_t value = 0;
  std::int64_t aux = 0;
  double r = 0.0;
};

// Streaming per-second aggregation. Events must be pushed in nondecreasing
// time order; each is attributed to the second containing its timestamp.
// Pushing into a later second closes the earlier ones.
class SecondAccumulator {
 public:
  void push(const MetricEvent& e);
  // Closes every second up to and including `second`.
  void close_through(std::int64_t second);
  std::int64_t next_open_second() const { return current_; }
  const std::vector<SecondAggregate>& rows() const { return rows_; }
  std::vector<SecondAggregate> take_rows() { return std::move(rows_); }

 private:
  struct Sums {
    std::int64_t arrivals = 0;
    std::int64_t dispatch_n = 0, dispatch_sum = 0;
    std::int64_t ttft_n = 0, ttft_sum = 0;
    std::int64_t tbt_n = 0, tbt_sum = 0;
    std::int64_t e2e_n = 0, e2e_sum = 0;
    MicroJoules energy = 0;
  };

  SecondAggregate finish(std::int64_t second, const Sums& s) const;

  std::int64_t current_ = 0;
  Sums open_;
  std::vector<SecondAggregate> rows_;
  // State carried across empty seconds.
  std::int64_t queue_depth_ = 0;
  std::int64_t in_flight_ = 0;
  double r_ = 0.0;
};

// Offline aggregation of a full event stream; rows cover seconds
// 0..last event second inclusive. Empty input gives an empty series.
std::vector<SecondAggregate> aggregate_per_second(std::span<const MetricEvent> events);

}  // namespace llmcc
