#include <gtest/gtest.h>

#include "llmcc/errors.hpp"
#include "llmcc/server_model.hpp"

using namespace llmcc;

namespace {

ServerConfig reference_server() {
  ServerConfig s;
  s.t0_ms = 50.0;
  s.knee_batch = 8;
  s.slope_ms = 6.0;
  s.prefill_ms_per_kword = 80.0;
  s.max_batch = 64;
  s.e_in_j_per_word = 0.05;
  s.e_out_j_per_word = 0.5;
  s.p_idle_w = 300.0;
  return s;
}

}  // namespace

TEST(DecodeIteration, FlatBelowKneeThenLinear) {
  ServerConfig s = reference_server();
  EXPECT_EQ(decode_iteration_time_ms(1, s), 50.0);
  EXPECT_EQ(decode_iteration_time_ms(8, s), 50.0);
  EXPECT_EQ(decode_iteration_time_ms(16, s), 98.0);
  EXPECT_EQ(decode_iteration_time(16, s), 98000);
  EXPECT_THROW(decode_iteration_time(0, s), ValidationError);
  EXPECT_THROW(decode_iteration_time(65, s), ValidationError);
}

TEST(DecodeIteration, DefaultsAreIndependentOfReferenceProfile) {
  ServerConfig d;
  EXPECT_EQ(decode_iteration_time_ms(1, d), d.t0_ms);
  EXPECT_NO_THROW(d.validate());
}

TEST(Prefill, LinearInInputWords) {
  ServerConfig s = reference_server();
  EXPECT_EQ(prefill_time_ms(10000, s), 800.0);
  EXPECT_EQ(prefill_time(1, s), 80);
  EXPECT_EQ(prefill_time_ms(1, s), 0.08);
  EXPECT_THROW(prefill_time(0, s), ValidationError);
}

TEST(Energy, CoefficientArithmetic) {
  ServerConfig s = reference_server();
  EXPECT_EQ(input_energy(10000, s) + output_energy(500, s), 750'000'000);
  s.p_idle_w = 100.0;
  EXPECT_EQ(idle_energy(10 * kMicrosPerSecond, s), 1'000'000'000);
  EXPECT_EQ(to_joules(750'000'000), 750.0);
}

TEST(ServerConfigValidation, RejectsBadValues) {
  ServerConfig s = reference_server();
  s.max_batch = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = reference_server();
  s.knee_batch = 65;
  EXPECT_THROW(s.validate(), ValidationError);
  s = reference_server();
  s.t0_ms = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = reference_server();
  s.p_idle_w = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
}
