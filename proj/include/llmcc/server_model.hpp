#pragma once

#include <cstdint>

namespace llmcc {

// Simulation time unit: integer microseconds.
using Micros = std::int64_t;

constexpr Micros kMicrosPerMs = 1000;
constexpr Micros kMicrosPerSecond = 1'000'000;

inline double to_ms(Micros us) { return static_cast<double>(us) / static_cast<double>(kMicrosPerMs); }
Micros ms_to_micros(double ms);

// Service-time and energy model of one serving node. Defaults saturate
// between 2.2 and 2.6 RPS with the default workload (see README).
struct ServerConfig {
  double t0_ms = 50.0;          // decode iteration time up to the knee
  std::int32_t knee_batch = 8;  // batch size where iterations start slowing down
  double slope_ms = 0.3;        // added ms per active request beyond the knee
  double prefill_ms_per_kword = 80.0;
  std::int32_t max_batch = 96;  // admitted requests (prefilling + decoding)
  double e_in_j_per_word = 0.05;
  double e_out_j_per_word = 0.5;
  double p_idle_w = 300.0;
  double tokens_per_word = 1.3;  // reporting only

  void validate() const;
};

// Iteration time for a decode batch of active_batch requests.
// Throws ValidationError outside 1..max_batch.
Micros decode_iteration_time(std::int32_t active_batch, const ServerConfig& cfg);
double decode_iteration_time_ms(std::int32_t active_batch, const ServerConfig& cfg);

// Throws ValidationError for input_words < 1.
Micros prefill_time(std::int32_t input_words, const ServerConfig& cfg);
double prefill_time_ms(std::int32_t input_words, const ServerConfig& cfg);

// Energy is accounted in integer microjoules so per-second shares sum exactly.
using MicroJoules = std::int64_t;

inline double to_joules(MicroJoules uj) { return static_cast<double>(uj) * 1e-6; }

MicroJoules input_energy(std::int64_t words, const ServerConfig& cfg);
MicroJoules output_energy(std::int64_t words, const ServerConfig& cfg);
MicroJoules idle_energy(Micros idle, const ServerConfig& cfg);

}  // namespace llmcc
