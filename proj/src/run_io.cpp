#include "llmcc/run_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llmcc/errors.hpp"
#include "llmcc/text.hpp"

namespace llmcc {

namespace fs = std::filesystem;

namespace {

std::string cell(const std::optional<double>& v) { return v ? text::fmt_double(*v) : std::string(); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

// Splits a CSV body after checking the header; returns (line number, fields) pairs.
std::vector<std::pair<std::size_t, std::vector<std::string_view>>> csv_rows(std::string_view content,
                                                                              std::string_view header,
                                                                              std::string_view what) {
  auto ls = text::lines(content);
  if (ls.empty() || text::trim(ls[0]) != header) {
    throw ParseError(1, std::string(what) + ": expected header '" + std::string(header) + "'");
  }
  const std::size_t width = text::split(header, ',').size();
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> out;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (text::trim(ls[i]).empty()) continue;
    auto f = text::split(text::trim(ls[i]), ',');
    if (f.size() != width) {
      throw ParseError(i + 1, std::string(what) + ": expected " + std::to_string(width) + " fields, got " +
                                  std::to_string(f.size()));
    }
    out.emplace_back(i + 1, std::move(f));
  }
  return out;
}

template <typename Int>
Int need_int(std::size_t line, std::string_view s, const char* col) {
  auto v = text::parse_int<Int>(s);
  if (!v) throw ParseError(line, std::string("bad integer in column ") + col + ": '" + std::string(s) + "'");
  return *v;
}

double need_double(std::size_t line, std::string_view s, const char* col) {
  auto v = text::parse_double(s);
  if (!v) throw ParseError(line, std::string("bad number in column ") + col + ": '" + std::string(s) + "'");
  return *v;
}

std::optional<double> maybe_double(std::size_t line, std::string_view s, const char* col) {
  if (text::trim(s).empty()) return std::nullopt;
  return need_double(line, s, col);
}

std::string join_seconds(const std::vector<ControllerTransition>& ts, bool activated) {
  std::string out;
  for (const ControllerTransition& t : ts) {
    if (t.activated != activated) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(t.second);
  }
  return out;
}

std::vector<ControllerTransition> transitions_from_log(const std::vector<ControllerLogEntry>& log) {
  std::vector<ControllerTransition> out;
  bool active = false;
  for (const ControllerLogEntry& e : log) {
    if (e.active != active) out.push_back({e.second, e.active});
    active = e.active;
  }
  return out;
}

const std::string& need_key(const std::map<std::string, std::string>& m, const std::string& key,
                            const fs::path& file) {
  auto it = m.find(key);
  if (it == m.end()) throw ValidationError(file.string() + ": missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found or unreadable: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_per_second(std::span<const SecondAggregate> rows) {
  std::string out(kPerSecondHeader);
  out += '\n';
  for (const SecondAggregate& a : rows) {
    out += std::to_string(a.second) + ',' + std::to_string(a.rps_in) + ',' + std::to_string(a.queue_depth) + ',' +
           cell(a.avg_queueing_ms) + ',' + cell(a.avg_ttft_ms) + ',' + cell(a.avg_tbt_ms) + ',' +
           cell(a.avg_e2e_ms) + ',' + text::fmt_double(a.active_r) + ',' + std::to_string(a.completions) + ',' +
           text::fmt_double(a.energy_j()) + '\n';
  }
  return out;
}

std::vector<SecondAggregate> parse_per_second(std::string_view content) {
  std::vector<SecondAggregate> out;
  for (auto& [line, f] : csv_rows(content, kPerSecondHeader, "per-second metrics")) {
    SecondAggregate a;
    a.second = need_int<std::int64_t>(line, f[0], "second");
    a.rps_in = need_int<std::int64_t>(line, f[1], "rps_in");
    a.queue_depth = need_int<std::int64_t>(line, f[2], "queue_depth");
    a.avg_queueing_ms = maybe_double(line, f[3], "avg_queueing_ms");
    a.avg_ttft_ms = maybe_double(line, f[4], "avg_ttft_ms");
    a.avg_tbt_ms = maybe_double(line, f[5], "avg_tbt_ms");
    a.avg_e2e_ms = maybe_double(line, f[6], "avg_e2e_ms");
    a.active_r = need_double(line, f[7], "active_r");
    a.completions = need_int<std::int64_t>(line, f[8], "completions");
    a.energy_uj = std::llround(need_double(line, f[9], "energy_j") * 1e6);
    if (a.second != static_cast<std::int64_t>(out.size())) {
      throw ParseError(line, "seconds must be consecutive from 0");
    }
    out.push_back(a);
  }
  return out;
}

std::string format_controller_log(std::span<const ControllerLogEntry> rows) {
  std::string out(kControllerLogHeader);
  out += '\n';
  for (const ControllerLogEntry& e : rows) {
    out += std::to_string(e.second) + ',' + text::fmt_double(e.ma_tbt_ms) + ',' + text::fmt_double(e.r) + ',' +
           (e.active ? "1" : "0") + '\n';
  }
  return out;
}

std::vector<ControllerLogEntry> parse_controller_log(std::string_view content) {
  std::vector<ControllerLogEntry> out;
  for (auto& [line, f] : csv_rows(content, kControllerLogHeader, "controller log")) {
    ControllerLogEntry e;
    e.second = need_int<std::int64_t>(line, f[0], "second");
    e.ma_tbt_ms = need_double(line, f[1], "ma_tbt_ms");
    e.r = need_double(line, f[2], "r");
    const int active = need_int<int>(line, f[3], "active");
    if (active != 0 && active != 1) throw ParseError(line, "active must be 0 or 1");
    e.active = active == 1;
    out.push_back(e);
  }
  return out;
}

std::string format_requests(std::span<const RequestRecord> rows) {
  std::string out(kRequestsHeader);
  out += '\n';
  for (const RequestRecord& q : rows) {
    out += std::to_string(q.request_id) + ',' + std::to_string(q.arrival_ms) + ',' +
           std::string(to_string(q.request_class)) + ',' + std::to_string(q.input_words) + ',' +
           std::to_string(q.unbounded_output_words) + ',' + std::to_string(q.realized_output_words) + ',' +
           std::to_string(q.target_words) + ',' + text::fmt_double(q.r_applied) + ',' +
           text::fmt_double(q.queueing_ms) + ',' + text::fmt_double(q.ttft_ms) + ',' + text::fmt_double(q.e2e_ms) +
           '\n';
  }
  return out;
}

std::vector<RequestRecord> parse_requests(std::string_view content) {
  std::vector<RequestRecord> out;
  for (auto& [line, f] : csv_rows(content, kRequestsHeader, "request records")) {
    RequestRecord q;
    q.request_id = need_int<std::int64_t>(line, f[0], "id");
    q.arrival_ms = need_int<std::int64_t>(line, f[1], "arrival_ms");
    try {
      q.request_class = parse_request_class(text::trim(f[2]));
    } catch (const ValidationError& e) {
      throw ParseError(line, e.what());
    }
    q.input_words = need_int<std::int32_t>(line, f[3], "input_words");
    q.unbounded_output_words = need_int<std::int32_t>(line, f[4], "unbounded_output_words");
    q.realized_output_words = need_int<std::int32_t>(line, f[5], "realized_output_words");
    q.target_words = need_int<std::int32_t>(line, f[6], "target_words");
    q.r_applied = need_double(line, f[7], "r_applied");
    q.queueing_ms = need_double(line, f[8], "queueing_ms");
    q.ttft_ms = need_double(line, f[9], "ttft_ms");
    q.e2e_ms = need_double(line, f[10], "e2e_ms");
    out.push_back(q);
  }
  return out;
}

std::string format_summary(const RunResult& run) {
  std::vector<double> queueing, ttft, tbt, e2e, rates;
  std::int64_t words = 0;
  for (const RequestState& q : run.completed) {
    queueing.push_back(q.queueing_ms());
    ttft.push_back(q.ttft_ms());
    e2e.push_back(q.e2e_ms());
    for (Micros g : q.tbt_samples) tbt.push_back(to_ms(g));
    words += q.realized_output_words;
    if (q.r_applied() > 0.0) rates.push_back(q.r_applied());
  }
  std::ostringstream out;
  auto kv = [&out](std::string_view k, const std::string& v) { out << k << ": " << v << '\n'; };
  auto pct = [&](std::string_view name, const std::vector<double>& v) {
    for (double p : {50.0, 90.0, 99.0}) {
      const std::string key = std::string(name) + "_p" + std::to_string(static_cast<int>(p)) + "_ms";
      kv(key, v.empty() ? std::string() : text::fmt_fixed(percentile(v, p), 3));
    }
  };
  kv("mode", run.controlled ? "bounded" : "unbounded");
  kv("seed", std::to_string(run.seed));
  kv("trace_fingerprint", hex64(run.trace_fingerprint));
  kv("trace_events", std::to_string(run.trace_events));
  kv("trace_duration_ms", std::to_string(run.trace_duration_ms));
  kv("horizon_s", std::to_string(run.per_second.size()));
  kv("truncated", run.truncated ? "true" : "false");
  kv("completed", std::to_string(run.completed.size()));
  kv("unfinished", std::to_string(run.unfinished.size()));
  kv("output_words", std::to_string(words));
  kv("output_tokens_est", std::to_string(std::llround(static_cast<double>(words) * run.server.tokens_per_word)));
  kv("total_energy_j", text::fmt_fixed(run.total_energy_j(), 6));
  pct("queueing", queueing);
  pct("ttft", ttft);
  pct("tbt", tbt);
  pct("e2e", e2e);
  kv("rewritten_requests", std::to_string(rates.size()));
  kv("median_r", rates.empty() ? std::string() : text::fmt_fixed(percentile(rates, 50.0), 4));
  kv("activation_s", join_seconds(run.transitions, true));
  kv("deactivation_s", join_seconds(run.transitions, false));
  return out.str();
}

std::map<std::string, std::string> parse_summary(std::string_view content) {
  std::map<std::string, std::string> out;
  auto ls = text::lines(content);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    std::string_view l = text::trim(ls[i]);
    if (l.empty() || l.front() == '#') continue;
    auto colon = l.find(':');
    if (colon == std::string_view::npos) throw ParseError(i + 1, "summary line is not 'key: value'");
    out[std::string(text::trim(l.substr(0, colon)))] = std::string(text::trim(l.substr(colon + 1)));
  }
  return out;
}

void write_run_dir(const fs::path& dir, const Trace& trace, const RunResult& run, const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_trace(trace, dir / run_files::kTrace);
  write_text_file(dir / run_files::kPerSecond, format_per_second(run.per_second));
  write_text_file(dir / run_files::kRequests, format_requests(to_record(run).requests));
  write_text_file(dir / run_files::kSummary, format_summary(run));
  write_text_file(dir / run_files::kEffectiveConfig, dump_config(cfg));
  const fs::path log = dir / run_files::kControllerLog;
  if (run.controlled) {
    write_text_file(log, format_controller_log(run.controller_log));
  } else {
    fs::remove(log, ec);
  }
}

RunRecord read_run_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("run directory not found: " + dir.string());
  const fs::path summary_path = dir / run_files::kSummary;
  const auto summary = parse_summary(read_text_file(summary_path));
  RunRecord r;
  auto seed = text::parse_int<std::uint64_t>(need_key(summary, "seed", summary_path));
  std::uint64_t fp = 0;
  const std::string& fp_text = need_key(summary, "trace_fingerprint", summary_path);
  auto res = std::from_chars(fp_text.data(), fp_text.data() + fp_text.size(), fp, 16);
  auto events = text::parse_int<std::int64_t>(need_key(summary, "trace_events", summary_path));
  if (!seed || res.ec != std::errc() || !events) throw ValidationError(summary_path.string() + ": malformed header keys");
  r.seed = *seed;
  r.trace_fingerprint = fp;
  r.trace_events = *events;
  r.controlled = need_key(summary, "mode", summary_path) == "bounded";
  auto wrap = [](const fs::path& p, auto parse) {
    try {
      return parse(read_text_file(p));
    } catch (const ParseError& e) {
      throw ValidationError(p.string() + ": " + e.what());
    }
  };
  r.per_second = wrap(dir / run_files::kPerSecond, [](const std::string& s) { return parse_per_second(s); });
  r.requests = wrap(dir / run_files::kRequests, [](const std::string& s) { return parse_requests(s); });
  if (r.controlled) {
    auto log = wrap(dir / run_files::kControllerLog, [](const std::string& s) { return parse_controller_log(s); });
    r.transitions = transitions_from_log(log);
  }
  return r;
}

std::string format_comparison(const RunComparison& c) {
  std::ostringstream out;
  auto kv = [&out](std::string_view k, const std::string& v) { out << k << ": " << v << '\n'; };
  auto opt = [](const std::optional<double>& v, int prec) { return v ? text::fmt_fixed(*v, prec) : std::string(); };
  kv("window", std::to_string(c.window.start_s) + ":" + std::to_string(c.window.end_s));
  kv("e2e_peak_unbounded_ms", text::fmt_fixed(c.e2e_peak_unbounded_ms, 3));
  kv("e2e_peak_bounded_ms", text::fmt_fixed(c.e2e_peak_bounded_ms, 3));
  kv("e2e_peak_ratio", text::fmt_fixed(c.e2e_peak_ratio, 3));
  kv("completions_unbounded", std::to_string(c.completions_unbounded));
  kv("completions_bounded", std::to_string(c.completions_bounded));
  kv("completions_delta_pct", text::fmt_fixed(c.completions_delta_pct, 2));
  kv("energy_unbounded_j", text::fmt_fixed(c.energy_unbounded_j, 3));
  kv("energy_bounded_j", text::fmt_fixed(c.energy_bounded_j, 3));
  kv("energy_delta_pct", text::fmt_fixed(c.energy_delta_pct, 2));
  kv("rewritten_requests", std::to_string(c.rewritten_requests));
  kv("median_r_active", opt(c.median_r_active, 4));
  kv("similarity_median_active", opt(c.similarity_median_active, 2));
  kv("similarity_median_inactive", opt(c.similarity_median_inactive, 2));
  return out.str();
}

std::string format_side_by_side(const RunRecord& unbounded, const RunRecord& bounded) {
  static constexpr std::string_view kCols[] = {"rps_in",      "queue_depth", "avg_queueing_ms",
                                               "avg_ttft_ms", "avg_tbt_ms",  "avg_e2e_ms",
                                               "active_r",    "completions", "energy_j"};
  std::string out = "second";
  for (std::string_view c : kCols) {
    out += ',' + std::string(c) + "_unbounded," + std::string(c) + "_bounded";
  }
  out += '\n';
  auto fields = [](const SecondAggregate* a) {
    std::vector<std::string> f(std::size(kCols));
    if (!a) return f;
    f = {std::to_string(a->rps_in),  std::to_string(a->queue_depth), cell(a->avg_queueing_ms),
         cell(a->avg_ttft_ms),       cell(a->avg_tbt_ms),            cell(a->avg_e2e_ms),
         text::fmt_double(a->active_r), std::to_string(a->completions), text::fmt_double(a->energy_j())};
    return f;
  };
  const std::size_t n = std::max(unbounded.per_second.size(), bounded.per_second.size());
  for (std::size_t s = 0; s < n; ++s) {
    auto u = fields(s < unbounded.per_second.size() ? &unbounded.per_second[s] : nullptr);
    auto b = fields(s < bounded.per_second.size() ? &bounded.per_second[s] : nullptr);
    out += std::to_string(s);
    for (std::size_t i = 0; i < u.size(); ++i) out += ',' + u[i] + ',' + b[i];
    out += '\n';
  }
  return out;
}

}  // namespace llmcc
