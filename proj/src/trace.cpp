#include "llmcc/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "llmcc/errors.hpp"
#include "llmcc/rng.hpp"
#include "llmcc/text.hpp"

namespace llmcc {

namespace {

constexpr std::string_view kTraceHeader = "id,arrival_ms,input_words,unbounded_output_words,class";

double phase_start_rate(const PhaseSchedule& schedule, std::size_t i) {
  const Phase& p = schedule.phases[i];
  if (p.ramp_from_rps) return *p.ramp_from_rps;
  return i == 0 ? 0.0 : schedule.phases[i - 1].target_rps;
}

std::int32_t clamp_round(double v, std::int32_t lo, std::int32_t hi) {
  double r = std::round(v);
  if (r < lo) return lo;
  if (r > hi) return hi;
  return static_cast<std::int32_t>(r);
}

struct AttributeStreams {
  Rng input;
  Rng output;
  Rng cls;

  AttributeStreams(std::uint64_t seed, std::uint64_t index)
      : input(make_stream(seed, "input_words", index)),
        output(make_stream(seed, "output_words", index)),
        cls(make_stream(seed, "class", index)) {}
};

ArrivalEvent draw_attributes(const WorkloadProfile& w, AttributeStreams& s) {
  ArrivalEvent e;
  std::normal_distribution<double> z(0.0, 1.0);
  e.input_words = clamp_round(w.input_median_words * std::exp(w.input_log_sigma * z(s.input)),
                              w.input_min_words, w.input_max_words);
  std::normal_distribution<double> out(w.output_mean_words, w.output_sd_words);
  e.unbounded_output_words = clamp_round(out(s.output), w.output_min_words, w.output_max_words);
  double total = w.weight_summarization + w.weight_coding + w.weight_short_form;
  double u = std::uniform_real_distribution<double>(0.0, total)(s.cls);
  if (u < w.weight_summarization) {
    e.request_class = RequestClass::kSummarization;
  } else if (u < w.weight_summarization + w.weight_coding) {
    e.request_class = RequestClass::kCoding;
  } else {
    e.request_class = RequestClass::kShortForm;
  }
  return e;
}

}  // namespace

std::string_view to_string(RequestClass c) {
  switch (c) {
    case RequestClass::kSummarization: return "summarization";
    case RequestClass::kCoding: return "coding";
    case RequestClass::kShortForm: return "short-form";
  }
  return "summarization";
}

RequestClass parse_request_class(std::string_view s) {
  if (s == "summarization") return RequestClass::kSummarization;
  if (s == "coding") return RequestClass::kCoding;
  if (s == "short-form") return RequestClass::kShortForm;
  throw ValidationError("unknown request class '" + std::string(s) + "'");
}

void PhaseSchedule::validate() const {
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& p = phases[i];
    if (!(p.duration_s > 0.0) || !std::isfinite(p.duration_s)) {
      throw ValidationError("phase " + std::to_string(i) + ": duration must be positive");
    }
    if (!(p.target_rps >= 0.0) || !std::isfinite(p.target_rps)) {
      throw ValidationError("phase " + std::to_string(i) + ": rate must be non-negative");
    }
    if (p.ramp_from_rps && !(*p.ramp_from_rps >= 0.0)) {
      throw ValidationError("phase " + std::to_string(i) + ": ramp start rate must be non-negative");
    }
  }
}

std::int64_t PhaseSchedule::duration_ms() const {
  double total = 0.0;
  for (const Phase& p : phases) total += p.duration_s;
  return std::llround(total * 1000.0);
}

double PhaseSchedule::rate_at(double t_s) const {
  double start = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& p = phases[i];
    if (t_s < start + p.duration_s) {
      if (p.shape == PhaseShape::kConstant) return p.target_rps;
      double from = phase_start_rate(*this, i);
      return from + (p.target_rps - from) * (t_s - start) / p.duration_s;
    }
    start += p.duration_s;
  }
  return 0.0;
}

std::string PhaseSchedule::describe() const {
  std::string out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& p = phases[i];
    if (i) out += ',';
    out += text::fmt_double(p.duration_s) + ':';
    if (p.shape == PhaseShape::kLinearRamp) {
      out += text::fmt_double(phase_start_rate(*this, i)) + '-';
    }
    out += text::fmt_double(p.target_rps);
  }
  return out;
}

PhaseSchedule parse_schedule(std::string_view schedule_text) {
  PhaseSchedule s;
  if (text::trim(schedule_text).empty()) throw ValidationError("empty schedule");
  for (std::string_view item : text::split(schedule_text, ',')) {
    item = text::trim(item);
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ValidationError("schedule phase '" + std::string(item) + "' is not duration:rate");
    }
    Phase p;
    auto dur = text::parse_double(item.substr(0, colon));
    if (!dur) throw ValidationError("bad phase duration in '" + std::string(item) + "'");
    p.duration_s = *dur;
    std::string_view rate = item.substr(colon + 1);
    // A leading '-' would be a negative rate, not a ramp separator.
    auto dash = rate.find('-', 1);
    if (dash == std::string_view::npos) {
      auto r = text::parse_double(rate);
      if (!r) throw ValidationError("bad phase rate in '" + std::string(item) + "'");
      p.target_rps = *r;
    } else {
      auto from = text::parse_double(rate.substr(0, dash));
      auto to = text::parse_double(rate.substr(dash + 1));
      if (!from || !to) throw ValidationError("bad ramp in '" + std::string(item) + "'");
      p.shape = PhaseShape::kLinearRamp;
      p.ramp_from_rps = *from;
      p.target_rps = *to;
    }
    s.phases.push_back(p);
  }
  s.validate();
  return s;
}

void WorkloadProfile::validate() const {
  if (!(input_median_words >= 1.0)) throw ValidationError("workload.input_median_words must be >= 1");
  if (!(input_log_sigma >= 0.0)) throw ValidationError("workload.input_log_sigma must be >= 0");
  if (input_min_words < 1 || input_max_words < input_min_words) {
    throw ValidationError("workload input clamp must satisfy 1 <= min <= max");
  }
  if (!(output_mean_words >= 1.0)) throw ValidationError("workload.output_mean_words must be >= 1");
  if (!(output_sd_words >= 0.0)) throw ValidationError("workload.output_sd_words must be >= 0");
  if (output_min_words < 1 || output_max_words < output_min_words) {
    throw ValidationError("workload output clamp must satisfy 1 <= min <= max");
  }
  if (weight_summarization < 0 || weight_coding < 0 || weight_short_form < 0 ||
      weight_summarization + weight_coding + weight_short_form <= 0) {
    throw ValidationError("workload class weights must be non-negative with a positive sum");
  }
}

void Trace::validate() const {
  std::unordered_set<std::int64_t> ids;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const ArrivalEvent& e = events[i];
    if (e.arrival_ms < 0 || e.arrival_ms > duration_ms) {
      throw ValidationError("event " + std::to_string(e.request_id) + ": arrival outside trace duration");
    }
    if (i > 0 && e.arrival_ms < events[i - 1].arrival_ms) {
      throw ValidationError("events not sorted by arrival_ms at index " + std::to_string(i));
    }
    if (e.input_words < 1 || e.unbounded_output_words < 1) {
      throw ValidationError("event " + std::to_string(e.request_id) + ": word counts must be >= 1");
    }
    if (!ids.insert(e.request_id).second) {
      throw ValidationError("duplicate request id " + std::to_string(e.request_id));
    }
  }
}

std::uint64_t Trace::fingerprint() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(duration_ms));
  for (const ArrivalEvent& e : events) {
    h = mix64(h ^ static_cast<std::uint64_t>(e.request_id));
    h = mix64(h ^ static_cast<std::uint64_t>(e.arrival_ms));
    h = mix64(h ^ static_cast<std::uint64_t>(e.input_words));
    h = mix64(h ^ static_cast<std::uint64_t>(e.unbounded_output_words));
    h = mix64(h ^ static_cast<std::uint64_t>(e.request_class));
  }
  return h;
}

Trace generate_trace(const PhaseSchedule& schedule, const WorkloadProfile& workload,
                     std::uint64_t seed, std::uint64_t stream_base) {
  schedule.validate();
  workload.validate();

  Trace trace;
  trace.duration_ms = schedule.duration_ms();
  trace.metadata = {seed, schedule.describe()};

  double phase_start_s = 0.0;
  for (std::size_t i = 0; i < schedule.phases.size(); ++i) {
    const Phase& p = schedule.phases[i];
    const std::uint64_t stream = stream_base + i;
    const std::int64_t phase_start_ms = std::llround(phase_start_s * 1000.0);
    const std::int64_t phase_end_ms = std::llround((phase_start_s + p.duration_s) * 1000.0);

    double from = p.shape == PhaseShape::kConstant ? p.target_rps : phase_start_rate(schedule, i);
    double rate_max = std::max(from, p.target_rps);
    if (rate_max > 0.0) {
      Rng arrivals = make_stream(seed, "arrivals", stream);
      Rng thinning = make_stream(seed, "thinning", stream);
      AttributeStreams attrs(seed, stream);
      std::exponential_distribution<double> gap(rate_max);
      std::uniform_real_distribution<double> accept(0.0, 1.0);
      double t = 0.0;
      while (true) {
        t += gap(arrivals);
        if (t >= p.duration_s) break;
        if (p.shape == PhaseShape::kLinearRamp) {
          // Thinning: keep the candidate with probability rate(t) / rate_max.
          double rate = from + (p.target_rps - from) * t / p.duration_s;
          if (accept(thinning) * rate_max >= rate) continue;
        }
        ArrivalEvent e = draw_attributes(workload, attrs);
        e.request_id = static_cast<std::int64_t>(trace.events.size());
        e.arrival_ms = std::min(phase_start_ms + static_cast<std::int64_t>(std::floor(t * 1000.0)),
                                phase_end_ms);
        trace.events.push_back(e);
      }
    }
    phase_start_s += p.duration_s;
  }
  return trace;
}

PhaseSchedule paper_schedule() {
  using enum PhaseShape;
  return PhaseSchedule{{
      {180.0, 2.5, kLinearRamp, 0.0},
      {90.0, 2.5, kConstant, std::nullopt},
      {60.0, 0.0, kLinearRamp, 2.5},
      {510.0, 0.0, kConstant, std::nullopt},
      {60.0, 1.5, kLinearRamp, 0.0},
      {60.0, 1.5, kConstant, std::nullopt},
      {60.0, 0.0, kLinearRamp, 1.5},
      {300.0, 0.0, kConstant, std::nullopt},
  }};
}

Trace paper_trace(const WorkloadProfile& workload, std::uint64_t seed) {
  return generate_trace(paper_schedule(), workload, seed);
}

Trace constant_rate_trace(double rps, double duration_s, const WorkloadProfile& workload,
                          std::uint64_t seed) {
  PhaseSchedule s{{{duration_s, rps, PhaseShape::kConstant, std::nullopt}}};
  return generate_trace(s, workload, seed);
}

std::string format_trace(const Trace& trace) {
  std::ostringstream out;
  out << "# duration_ms: " << trace.duration_ms << '\n';
  out << "# seed: " << trace.metadata.seed << '\n';
  out << "# schedule: " << trace.metadata.schedule << '\n';
  out << kTraceHeader << '\n';
  for (const ArrivalEvent& e : trace.events) {
    out << e.request_id << ',' << e.arrival_ms << ',' << e.input_words << ','
        << e.unbounded_output_words << ',' << to_string(e.request_class) << '\n';
  }
  return out.str();
}

Trace parse_trace(std::string_view content) {
  Trace trace;
  std::optional<std::int64_t> duration;
  bool header_seen = false;
  std::unordered_set<std::int64_t> ids;
  std::size_t line_no = 0;
  for (std::string_view raw : text::lines(content)) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (!header_seen) {
      if (line.empty()) continue;
      if (line.front() == '#') {
        line.remove_prefix(1);
        auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string_view key = text::trim(line.substr(0, colon));
        std::string_view value = text::trim(line.substr(colon + 1));
        if (key == "duration_ms") {
          duration = text::parse_int<std::int64_t>(value);
          if (!duration || *duration < 0) throw ParseError(line_no, "bad duration_ms comment");
        } else if (key == "seed") {
          auto seed = text::parse_int<std::uint64_t>(value);
          if (!seed) throw ParseError(line_no, "bad seed comment");
          trace.metadata.seed = *seed;
        } else if (key == "schedule") {
          trace.metadata.schedule = std::string(value);
        }
        continue;
      }
      if (line != kTraceHeader) throw ParseError(line_no, "expected header '" + std::string(kTraceHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '#') throw ParseError(line_no, "comments are only allowed before the header");
    auto fields = text::split(line, ',');
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    ArrivalEvent e;
    auto id = text::parse_int<std::int64_t>(fields[0]);
    auto at = text::parse_int<std::int64_t>(fields[1]);
    auto in = text::parse_int<std::int32_t>(fields[2]);
    auto out = text::parse_int<std::int32_t>(fields[3]);
    if (!id) throw ParseError(line_no, "bad id");
    if (!at || *at < 0) throw ParseError(line_no, "arrival_ms must be a non-negative integer");
    if (!in || *in < 1) throw ParseError(line_no, "input_words must be a positive integer");
    if (!out || *out < 1) throw ParseError(line_no, "unbounded_output_words must be a positive integer");
    try {
      e.request_class = parse_request_class(text::trim(fields[4]));
    } catch (const ValidationError& err) {
      throw ParseError(line_no, err.what());
    }
    e.request_id = *id;
    e.arrival_ms = *at;
    e.input_words = *in;
    e.unbounded_output_words = *out;
    if (!trace.events.empty() && e.arrival_ms < trace.events.back().arrival_ms) {
      throw ParseError(line_no, "arrival_ms decreases (unsorted trace)");
    }
    if (!ids.insert(e.request_id).second) throw ParseError(line_no, "duplicate request id");
    trace.events.push_back(e);
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header line");
  trace.duration_ms = duration.value_or(trace.events.empty() ? 0 : trace.events.back().arrival_ms);
  trace.validate();
  return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << format_trace(trace);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found: '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace llmcc
