#include "llmcc/server_model.hpp"

#include <cmath>
#include <string>

#include "llmcc/errors.hpp"

namespace llmcc {

Micros ms_to_micros(double ms) { return std::llround(ms * static_cast<double>(kMicrosPerMs)); }

void ServerConfig::validate() const {
  if (!(t0_ms >= 0.0)) throw ValidationError("server.t0_ms must be >= 0");
  if (!(slope_ms >= 0.0)) throw ValidationError("server.slope_ms must be >= 0");
  if (!(prefill_ms_per_kword >= 0.0)) throw ValidationError("server.prefill_ms_per_kword must be >= 0");
  if (max_batch < 1) throw ValidationError("server.max_batch must be >= 1");
  if (knee_batch < 0 || knee_batch > max_batch) {
    throw ValidationError("server.knee_batch must be in [0, max_batch]");
  }
  if (!(e_in_j_per_word >= 0.0) || !(e_out_j_per_word >= 0.0) || !(p_idle_w >= 0.0)) {
    throw ValidationError("server energy coefficients must be >= 0");
  }
  if (!(tokens_per_word > 0.0)) throw ValidationError("server.tokens_per_word must be > 0");
}

Micros decode_iteration_time(std::int32_t active_batch, const ServerConfig& cfg) {
  if (active_batch < 1 || active_batch > cfg.max_batch) {
    throw ValidationError("decode batch " + std::to_string(active_batch) + " outside [1, " +
                          std::to_string(cfg.max_batch) + "]");
  }
  std::int32_t over = active_batch > cfg.knee_batch ? active_batch - cfg.knee_batch : 0;
  return ms_to_micros(cfg.t0_ms) + over * ms_to_micros(cfg.slope_ms);
}

double decode_iteration_time_ms(std::int32_t active_batch, const ServerConfig& cfg) {
  return to_ms(decode_iteration_time(active_batch, cfg));
}

Micros prefill_time(std::int32_t input_words, const ServerConfig& cfg) {
  if (input_words < 1) throw ValidationError("prefill_time: input_words must be >= 1");
  return std::llround(cfg.prefill_ms_per_kword * static_cast<double>(input_words));
}

double prefill_time_ms(std::int32_t input_words, const ServerConfig& cfg) {
  return to_ms(prefill_time(input_words, cfg));
}

MicroJoules input_energy(std::int64_t words, const ServerConfig& cfg) {
  return words * std::llround(cfg.e_in_j_per_word * 1e6);
}

MicroJoules output_energy(std::int64_t words, const ServerConfig& cfg) {
  return words * std::llround(cfg.e_out_j_per_word * 1e6);
}

MicroJoules idle_energy(Micros idle, const ServerConfig& cfg) {
  // W * us = uJ
  return std::llround(cfg.p_idle_w * static_cast<double>(idle));
}

}  // namespace llmcc
