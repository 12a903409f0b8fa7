#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llmcc {

enum class RequestClass { kSummarization, kCoding, kShortForm };

std::string_view to_string(RequestClass c);
RequestClass parse_request_class(std::string_view s);  // throws ValidationError

struct ArrivalEvent {
  std::int64_t request_id = 0;
  std::int64_t arrival_ms = 0;
  std::int32_t input_words = 1;
  std::int32_t unbounded_output_words = 1;  // median length the model produces with no bound
  RequestClass request_class = RequestClass::kSummarization;

  friend bool operator==(const ArrivalEvent&, const ArrivalEvent&) = default;
};

enum class PhaseShape { kConstant, kLinearRamp };

struct Phase {
  double duration_s = 0.0;
  double target_rps = 0.0;
  PhaseShape shape = PhaseShape::kConstant;
  // Ramp start; when unset a ramp starts from the previous phase's target (0 for the first phase).
  std::optional<double> ramp_from_rps;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct PhaseSchedule {
  std::vector<Phase> phases;

  void validate() const;
  std::int64_t duration_ms() const;
  // Instantaneous offered load at time t (seconds from trace start).
  double rate_at(double t_s) const;
  std::string describe() const;  // round-trips through parse_schedule

  friend bool operator==(const PhaseSchedule&, const PhaseSchedule&) = default;
};

// "60:0-2.5,90:2.5" -> ramp 0 to 2.5 RPS over 60 s, then 90 s at 2.5 RPS.
PhaseSchedule parse_schedule(std::string_view text);

// Request attribute distributions. Defaults describe long-document summarization.
struct WorkloadProfile {
  double input_median_words = 9000.0;
  double input_log_sigma = 0.35;
  std::int32_t input_min_words = 2000;
  std::int32_t input_max_words = 20000;
  double output_mean_words = 500.0;
  double output_sd_words = 80.0;
  std::int32_t output_min_words = 100;
  std::int32_t output_max_words = 1200;
  // Relative weights; need not sum to one.
  double weight_summarization = 1.0;
  double weight_coding = 0.0;
  double weight_short_form = 0.0;

  void validate() const;
};

struct TraceMetadata {
  std::uint64_t seed = 0;
  std::string schedule;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

struct Trace {
  std::vector<ArrivalEvent> events;
  std::int64_t duration_ms = 0;
  TraceMetadata metadata;

  void validate() const;
  // Stable content hash used to check that two runs replayed the same trace.
  std::uint64_t fingerprint() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

// Open-loop Poisson arrivals. Each phase draws from its own RNG substreams keyed
// by (seed, stream_base + phase index), so phases are independent of each other.
Trace generate_trace(const PhaseSchedule& schedule, const WorkloadProfile& workload,
                     std::uint64_t seed, std::uint64_t stream_base = 0);

// 22-minute two-peak schedule: a 2.5 RPS overload peak and a 1.5 RPS peak.
PhaseSchedule paper_schedule();
Trace paper_trace(const WorkloadProfile& workload, std::uint64_t seed);

// Constant-rate trace used by load sweeps.
Trace constant_rate_trace(double rps, double duration_s, const WorkloadProfile& workload,
                          std::uint64_t seed);

void write_trace(const Trace& trace, const std::filesystem::path& path);
Trace read_trace(const std::filesystem::path& path);

std::string format_trace(const Trace& trace);
Trace parse_trace(std::string_view text);

}  // namespace llmcc
