#include "llmcc/comparison.hpp"

#include <algorithm>
#include <unordered_map>

#include "llmcc/errors.hpp"
#include "llmcc/rng.hpp"
#include "llmcc/text.hpp"

namespace llmcc {

namespace {

struct WindowTotals {
  double e2e_peak_ms = 0.0;
  std::int64_t completions = 0;
  MicroJoules energy_uj = 0;
};

WindowTotals totals(const RunRecord& run, Window w) {
  WindowTotals t;
  for (std::int64_t s = w.start_s; s < w.end_s; ++s) {
    const SecondAggregate& row = run.per_second[static_cast<std::size_t>(s)];
    if (row.avg_e2e_ms) t.e2e_peak_ms = std::max(t.e2e_peak_ms, *row.avg_e2e_ms);
    t.completions += row.completions;
    t.energy_uj += row.energy_uj;
  }
  return t;
}

std::optional<double> median_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return percentile(v, 50.0);
}

}  // namespace

RunRecord to_record(const RunResult& run) {
  RunRecord r;
  r.seed = run.seed;
  r.trace_fingerprint = run.trace_fingerprint;
  r.trace_events = run.trace_events;
  r.controlled = run.controlled;
  r.per_second = run.per_second;
  r.transitions = run.transitions;
  r.requests.reserve(run.completed.size());
  for (const RequestState& s : run.completed) {
    RequestRecord q;
    q.request_id = s.event.request_id;
    q.arrival_ms = s.event.arrival_ms;
    q.request_class = s.event.request_class;
    q.input_words = s.event.input_words;
    q.unbounded_output_words = s.event.unbounded_output_words;
    q.realized_output_words = s.realized_output_words;
    if (s.rewrite && s.rewrite->rewritten()) q.target_words = s.rewrite->target_words;
    q.r_applied = s.r_applied();
    q.queueing_ms = s.queueing_ms();
    q.ttft_ms = s.ttft_ms();
    q.e2e_ms = s.e2e_ms();
    r.requests.push_back(q);
  }
  return r;
}

Window parse_window(std::string_view text) {
  auto parts = text::split(text, ':');
  if (parts.size() != 2) throw ValidationError("window '" + std::string(text) + "' is not start:end");
  auto a = text::parse_int<std::int64_t>(parts[0]);
  auto b = text::parse_int<std::int64_t>(parts[1]);
  if (!a || !b) throw ValidationError("window '" + std::string(text) + "' needs integer seconds");
  if (*a < 0 || *a >= *b) throw ValidationError("window must satisfy 0 <= start < end");
  return {*a, *b};
}

std::optional<Window> default_window(const RunRecord& unbounded, const RunRecord& bounded) {
  auto on = std::find_if(bounded.transitions.begin(), bounded.transitions.end(),
                         [](const ControllerTransition& t) { return t.activated; });
  if (on == bounded.transitions.end()) return std::nullopt;
  std::optional<std::int64_t> last_queued;
  for (const SecondAggregate& row : unbounded.per_second) {
    if (row.queue_depth > 0) last_queued = row.second;
  }
  if (!last_queued) return std::nullopt;
  Window w{std::max<std::int64_t>(0, on->second - 1), *last_queued + 1};
  const auto horizon = static_cast<std::int64_t>(std::min(unbounded.per_second.size(), bounded.per_second.size()));
  w.end_s = std::min(w.end_s, horizon);
  if (w.start_s >= w.end_s) return std::nullopt;
  return w;
}

RunComparison compare_runs(const RunRecord& unbounded, const RunRecord& bounded, Window window,
                           const QualityModel& quality) {
  if (unbounded.trace_fingerprint != bounded.trace_fingerprint ||
      unbounded.trace_events != bounded.trace_events) {
    throw ValidationError("runs replayed different traces; comparison is invalid");
  }
  if (unbounded.seed != bounded.seed) {
    throw ValidationError("runs used different seeds (" + std::to_string(unbounded.seed) + " vs " +
                          std::to_string(bounded.seed) + "); comparison is invalid");
  }
  if (window.start_s < 0 || window.start_s >= window.end_s) {
    throw ValidationError("window must satisfy 0 <= start < end");
  }
  const auto horizon = static_cast<std::int64_t>(std::min(unbounded.per_second.size(), bounded.per_second.size()));
  if (window.end_s > horizon) {
    throw ValidationError("window " + std::to_string(window.start_s) + ":" + std::to_string(window.end_s) +
                          " exceeds the run horizon of " + std::to_string(horizon) + " s");
  }

  RunComparison c;
  c.window = window;
  const WindowTotals u = totals(unbounded, window);
  const WindowTotals b = totals(bounded, window);
  if (u.completions == 0) throw DegenerateDataError("no unbounded completions inside the window");
  if (u.energy_uj == 0) throw DegenerateDataError("no unbounded energy inside the window");
  if (b.e2e_peak_ms <= 0.0) throw DegenerateDataError("no bounded completions inside the window");
  c.e2e_peak_unbounded_ms = u.e2e_peak_ms;
  c.e2e_peak_bounded_ms = b.e2e_peak_ms;
  c.e2e_peak_ratio = u.e2e_peak_ms / b.e2e_peak_ms;
  c.completions_unbounded = u.completions;
  c.completions_bounded = b.completions;
  c.completions_delta_pct =
      100.0 * static_cast<double>(b.completions - u.completions) / static_cast<double>(u.completions);
  c.energy_unbounded_j = to_joules(u.energy_uj);
  c.energy_bounded_j = to_joules(b.energy_uj);
  c.energy_delta_pct = 100.0 * static_cast<double>(b.energy_uj - u.energy_uj) / static_cast<double>(u.energy_uj);

  std::unordered_map<std::int64_t, std::int32_t> reference;
  reference.reserve(unbounded.requests.size());
  for (const RequestRecord& q : unbounded.requests) reference[q.request_id] = q.realized_output_words;

  std::vector<double> rates, active, inactive;
  for (const RequestRecord& q : bounded.requests) {
    if (q.rewritten()) rates.push_back(q.r_applied);
    auto it = reference.find(q.request_id);
    if (it == reference.end()) continue;
    const double ref = it->second;
    const double reduction = (ref - q.realized_output_words) / ref;
    Rng rng = make_stream(bounded.seed, "similarity", static_cast<std::uint64_t>(q.request_id));
    const double score = similarity_score(reduction, q.rewritten(), quality, rng);
    (q.rewritten() ? active : inactive).push_back(score);
  }
  c.rewritten_requests = static_cast<std::int64_t>(rates.size());
  c.median_r_active = median_of(rates);
  c.similarity_median_active = median_of(active);
  c.similarity_median_inactive = median_of(inactive);
  return c;
}

}  // namespace llmcc
