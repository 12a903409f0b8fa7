#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "llmcc/errors.hpp"
#include "llmcc/text.hpp"
#include "llmcc/trace.hpp"

using namespace llmcc;

namespace {

std::int64_t count_between(const Trace& t, std::int64_t from_ms, std::int64_t to_ms) {
  std::int64_t n = 0;
  for (const ArrivalEvent& e : t.events) n += e.arrival_ms >= from_ms && e.arrival_ms < to_ms;
  return n;
}

void expect_well_formed(const Trace& t) {
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    EXPECT_EQ(t.events[i].request_id, static_cast<std::int64_t>(i));
    if (i) EXPECT_LE(t.events[i - 1].arrival_ms, t.events[i].arrival_ms);
    EXPECT_GE(t.events[i].arrival_ms, 0);
    EXPECT_LE(t.events[i].arrival_ms, t.duration_ms);
  }
  EXPECT_NO_THROW(t.validate());
}

ArrivalEvent ev(std::int64_t id, std::int64_t at, std::int32_t in, std::int32_t out, RequestClass c) {
  ArrivalEvent e;
  e.request_id = id;
  e.arrival_ms = at;
  e.input_words = in;
  e.unbounded_output_words = out;
  e.request_class = c;
  return e;
}

}  // namespace

TEST(Schedule, ParsesConstantAndRampPhases) {
  PhaseSchedule s = parse_schedule("60:0-2.5,90:2.5");
  ASSERT_EQ(s.phases.size(), 2u);
  EXPECT_EQ(s.phases[0].shape, PhaseShape::kLinearRamp);
  EXPECT_EQ(s.phases[0].ramp_from_rps, 0.0);
  EXPECT_EQ(s.phases[0].target_rps, 2.5);
  EXPECT_EQ(s.phases[1].shape, PhaseShape::kConstant);
  EXPECT_EQ(s.duration_ms(), 150000);
  EXPECT_EQ(s.describe(), "60:0-2.5,90:2.5");
  EXPECT_DOUBLE_EQ(s.rate_at(30.0), 1.25);
  EXPECT_DOUBLE_EQ(s.rate_at(100.0), 2.5);
  EXPECT_EQ(s.rate_at(500.0), 0.0);
}

TEST(Schedule, RejectsBadPhases) {
  EXPECT_THROW(parse_schedule(""), ValidationError);
  EXPECT_THROW(parse_schedule("60"), ValidationError);
  EXPECT_THROW(parse_schedule("0:1"), ValidationError);
  EXPECT_THROW(parse_schedule("-5:1"), ValidationError);
  EXPECT_THROW(parse_schedule("10:-1"), ValidationError);
  EXPECT_THROW(parse_schedule("10:x"), ValidationError);
  PhaseSchedule s{{{10.0, -1.0, PhaseShape::kConstant, std::nullopt}}};
  EXPECT_THROW(generate_trace(s, WorkloadProfile{}, 1), ValidationError);
}

TEST(Schedule, PaperScheduleRoundTripsThroughText) {
  PhaseSchedule s = paper_schedule();
  EXPECT_EQ(parse_schedule(s.describe()), s);
  EXPECT_EQ(s.duration_ms(), 1'320'000);
}

TEST(GenerateTrace, ConstantPhaseCountWithinPoissonBand) {
  PhaseSchedule s = parse_schedule("90:2.5");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Trace t = generate_trace(s, WorkloadProfile{}, seed);
    EXPECT_GE(t.events.size(), 165u) << seed;
    EXPECT_LE(t.events.size(), 285u) << seed;
  }
}

TEST(GenerateTrace, ZeroRatePhaseIsEmpty) {
  Trace t = generate_trace(parse_schedule("60:0"), WorkloadProfile{}, 3);
  EXPECT_TRUE(t.events.empty());
  EXPECT_EQ(t.duration_ms, 60000);
}

TEST(GenerateTrace, SecondPhaseStartsAfterFirst) {
  Trace t = generate_trace(parse_schedule("30:2,30:3"), WorkloadProfile{}, 9);
  PhaseSchedule first = parse_schedule("30:2");
  Trace only_first = generate_trace(first, WorkloadProfile{}, 9);
  for (std::size_t i = only_first.events.size(); i < t.events.size(); ++i) {
    EXPECT_GE(t.events[i].arrival_ms, 30000);
  }
}

TEST(GenerateTrace, DeterministicPerSeed) {
  Trace a = paper_trace(WorkloadProfile{}, 11);
  Trace b = paper_trace(WorkloadProfile{}, 11);
  Trace c = paper_trace(WorkloadProfile{}, 12);
  EXPECT_EQ(a, b);
  EXPECT_EQ(format_trace(a), format_trace(b));
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(GenerateTrace, WellFormedOverRandomSchedules) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dur(1.0, 120.0), rate(0.0, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    PhaseSchedule s;
    const int n = 1 + trial % 5;
    for (int i = 0; i < n; ++i) {
      Phase p{std::round(dur(rng)), rate(rng), i % 2 ? PhaseShape::kLinearRamp : PhaseShape::kConstant, std::nullopt};
      s.phases.push_back(p);
    }
    expect_well_formed(generate_trace(s, WorkloadProfile{}, static_cast<std::uint64_t>(trial)));
  }
}

TEST(GenerateTrace, MeanInterArrivalMatchesRate) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Trace t = generate_trace(parse_schedule("5000:2"), WorkloadProfile{}, seed);
    ASSERT_GE(t.events.size(), 5000u);
    const double mean_gap_s =
        static_cast<double>(t.events.back().arrival_ms - t.events.front().arrival_ms) / 1000.0 /
        static_cast<double>(t.events.size() - 1);
    EXPECT_NEAR(mean_gap_s, 0.5, 0.5 * 0.05) << seed;
  }
}

TEST(GenerateTrace, RampFollowsInterpolatedRate) {
  std::int64_t first_half = 0, second_half = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trace t = generate_trace(parse_schedule("200:0-4"), WorkloadProfile{}, seed);
    first_half += count_between(t, 0, 100000);
    second_half += count_between(t, 100000, 200000);
  }
  // Expected 100 and 300 per trace.
  EXPECT_NEAR(static_cast<double>(first_half) / 20.0, 100.0, 10.0);
  EXPECT_NEAR(static_cast<double>(second_half) / 20.0, 300.0, 15.0);
}

TEST(GenerateTrace, PhasesConcatenateFromSplitStreams) {
  PhaseSchedule a = parse_schedule("40:1.5,20:1.5-0.5");
  PhaseSchedule b = parse_schedule("30:2,25:2-0");
  PhaseSchedule ab = a;
  ab.phases.insert(ab.phases.end(), b.phases.begin(), b.phases.end());

  Trace whole = generate_trace(ab, WorkloadProfile{}, 77);
  Trace left = generate_trace(a, WorkloadProfile{}, 77);
  Trace right = generate_trace(b, WorkloadProfile{}, 77, a.phases.size());
  ASSERT_EQ(whole.events.size(), left.events.size() + right.events.size());
  for (std::size_t i = 0; i < left.events.size(); ++i) EXPECT_EQ(whole.events[i], left.events[i]);
  for (std::size_t i = 0; i < right.events.size(); ++i) {
    ArrivalEvent e = right.events[i];
    e.arrival_ms += a.duration_ms();
    e.request_id += static_cast<std::int64_t>(left.events.size());
    EXPECT_EQ(whole.events[left.events.size() + i], e);
  }
}

TEST(GenerateTrace, AttributesRespectClampsAndClasses) {
  WorkloadProfile w;
  w.weight_coding = 1.0;
  w.weight_short_form = 1.0;
  Trace t = generate_trace(parse_schedule("600:3"), w, 4);
  int classes[3] = {0, 0, 0};
  for (const ArrivalEvent& e : t.events) {
    EXPECT_GE(e.input_words, w.input_min_words);
    EXPECT_LE(e.input_words, w.input_max_words);
    EXPECT_GE(e.unbounded_output_words, w.output_min_words);
    EXPECT_LE(e.unbounded_output_words, w.output_max_words);
    ++classes[static_cast<int>(e.request_class)];
  }
  for (int c : classes) EXPECT_GT(c, 400);
}

TEST(PaperTrace, DurationAndPlateauRates) {
  double first = 0.0, second = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trace t = paper_trace(WorkloadProfile{}, seed);
    EXPECT_EQ(t.duration_ms, 1'320'000);
    first += static_cast<double>(count_between(t, 180000, 270000)) / 90.0;
    second += static_cast<double>(count_between(t, 900000, 960000)) / 60.0;
    expect_well_formed(t);
  }
  EXPECT_NEAR(first / 20.0, 2.5, 2.5 * 0.15);
  EXPECT_NEAR(second / 20.0, 1.5, 1.5 * 0.15);
}

TEST(TraceFile, EmptyTraceRoundTrips) {
  Trace t;
  t.duration_ms = 5000;
  const std::string text = format_trace(t);
  EXPECT_NE(text.find("id,arrival_ms,input_words,unbounded_output_words,class\n"), std::string::npos);
  EXPECT_EQ(parse_trace(text), t);
}

TEST(TraceFile, ThreeEventsRoundTripThroughDisk) {
  Trace t;
  t.duration_ms = 10000;
  t.metadata = {3, "10:1"};
  t.events = {ev(0, 10, 9000, 500, RequestClass::kSummarization), ev(1, 10, 2000, 120, RequestClass::kCoding),
              ev(2, 9999, 15000, 800, RequestClass::kShortForm)};
  const auto path = std::filesystem::temp_directory_path() / "llmcc_trace_roundtrip.csv";
  write_trace(t, path);
  Trace back = read_trace(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back, t);
  int data_lines = 0;
  for (auto line : text::lines(format_trace(t))) data_lines += !line.empty() && line[0] >= '0' && line[0] <= '9';
  EXPECT_EQ(data_lines, 3);
}

TEST(TraceFile, DecreasingArrivalCitesLine) {
  const std::string text =
      "id,arrival_ms,input_words,unbounded_output_words,class\n"
      "0,100,9000,500,summarization\n"
      "1,200,9000,500,summarization\n"
      "2,300,9000,500,summarization\n"
      "3,250,9000,500,summarization\n";
  try {
    parse_trace(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
}

TEST(TraceFile, MalformedLinesAreRejected) {
  const std::string header = "id,arrival_ms,input_words,unbounded_output_words,class\n";
  EXPECT_THROW(parse_trace(header + "0,100,9000,500\n"), ParseError);
  EXPECT_THROW(parse_trace(header + "0,-1,9000,500,summarization\n"), ParseError);
  EXPECT_THROW(parse_trace(header + "0,1,0,500,summarization\n"), ParseError);
  EXPECT_THROW(parse_trace(header + "0,1,10,500,poetry\n"), ParseError);
  EXPECT_THROW(parse_trace(header + "0,1,10,500,coding\n0,2,10,500,coding\n"), ParseError);
  EXPECT_THROW(parse_trace(header + "# late comment\n"), ParseError);
  EXPECT_THROW(parse_trace("0,1,10,500,coding\n"), ParseError);
  EXPECT_THROW(read_trace("/nonexistent/llmcc/trace.csv"), IoError);
}
