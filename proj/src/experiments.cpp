#include "llmcc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "llmcc/errors.hpp"
#include "llmcc/rng.hpp"
#include "llmcc/text.hpp"

namespace llmcc {

namespace {

std::optional<double> pct_or_empty(const std::vector<double>& v, double p) {
  if (v.empty()) return std::nullopt;
  return percentile(v, p);
}

SweepPoint sweep_one(const RunConfig& cfg, double rps, double duration_s, std::uint64_t index) {
  const std::uint64_t seed = derive_seed(cfg.run.seed, "sweep", index);
  Trace trace = constant_rate_trace(rps, duration_s, cfg.workload, seed);
  SimOptions opt;
  opt.seed = seed;
  opt.cutoff_s = cfg.run.cutoff_s;
  RunResult run = run_unbounded(trace, cfg.server, cfg.models, opt);

  SweepPoint p;
  p.rps = rps;
  p.arrivals = static_cast<std::int64_t>(trace.events.size());
  p.completed = static_cast<std::int64_t>(run.completed.size());
  const auto end = static_cast<std::int64_t>(std::ceil(duration_s));
  p.queue_slope = queue_growth_slope(run.per_second, end / 2, end);
  if (end >= 1 && static_cast<std::size_t>(end) <= run.per_second.size()) {
    p.end_queue_depth = run.per_second[static_cast<std::size_t>(end - 1)].queue_depth;
  }
  std::vector<double> tbt, e2e, queueing;
  for (const RequestState& q : run.completed) {
    for (Micros g : q.tbt_samples) tbt.push_back(to_ms(g));
    e2e.push_back(q.e2e_ms());
    queueing.push_back(q.queueing_ms());
  }
  p.tbt_p50_ms = pct_or_empty(tbt, 50.0);
  p.e2e_p50_ms = pct_or_empty(e2e, 50.0);
  p.e2e_p99_ms = pct_or_empty(e2e, 99.0);
  p.queueing_p99_ms = pct_or_empty(queueing, 99.0);
  return p;
}

}  // namespace

std::vector<double> parse_rps_range(std::string_view range, double step) {
  const auto dots = range.find("..");
  auto bad = [&] { return ValidationError("rps range '" + std::string(range) + "' is not a..b or a single value"); };
  std::optional<double> a, b;
  if (dots == std::string_view::npos) {
    a = b = text::parse_double(range);
  } else {
    a = text::parse_double(range.substr(0, dots));
    b = text::parse_double(range.substr(dots + 2));
  }
  if (!a || !b) throw bad();
  if (!(*a > 0.0) || *b < *a) throw ValidationError("rps range needs 0 < a <= b");
  if (!(step > 0.0)) throw ValidationError("sweep step must be > 0");
  std::vector<double> out;
  // Integer stepping avoids accumulating float error.
  const auto n = static_cast<std::int64_t>(std::floor((*b - *a) / step + 1e-9));
  for (std::int64_t i = 0; i <= n; ++i) {
    out.push_back(std::round((*a + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return out;
}

double queue_growth_slope(std::span<const SecondAggregate> rows, std::int64_t from_s, std::int64_t to_s) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const SecondAggregate& a : rows) {
    if (a.second < from_s || a.second >= to_s) continue;
    const auto x = static_cast<double>(a.second);
    const auto y = static_cast<double>(a.queue_depth);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, std::span<const double> rps, double duration_s,
                                  unsigned threads) {
  cfg.validate();
  if (!(duration_s > 0.0)) throw ValidationError("sweep duration must be > 0");
  std::vector<SweepPoint> out(rps.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, rps.size())));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < rps.size(); i = next++) out[i] = sweep_one(cfg, rps[i], duration_s, i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string format_sweep(std::span<const SweepPoint> points) {
  auto opt = [](const std::optional<double>& v) { return v ? text::fmt_fixed(*v, 3) : std::string(); };
  std::ostringstream out;
  out << "rps,arrivals,completed,queue_slope,end_queue_depth,tbt_p50_ms,e2e_p50_ms,e2e_p99_ms,queueing_p99_ms\n";
  for (const SweepPoint& p : points) {
    out << text::fmt_double(p.rps) << ',' << p.arrivals << ',' << p.completed << ','
        << text::fmt_fixed(p.queue_slope, 5) << ',' << p.end_queue_depth << ',' << opt(p.tbt_p50_ms) << ','
        << opt(p.e2e_p50_ms) << ',' << opt(p.e2e_p99_ms) << ',' << opt(p.queueing_p99_ms) << '\n';
  }
  return out.str();
}

std::vector<double> tbt_series(std::span<const SecondAggregate> rows) {
  std::vector<double> out;
  for (const SecondAggregate& a : rows) {
    if (a.avg_tbt_ms) out.push_back(*a.avg_tbt_ms);
  }
  return out;
}

ExperimentPair run_pair(const RunConfig& cfg, const Trace& trace) {
  cfg.validate();
  ExperimentPair p;
  p.trace = trace;
  SimOptions opt;
  opt.seed = cfg.run.seed;
  opt.cutoff_s = cfg.run.cutoff_s;
  p.unbounded = run_unbounded(p.trace, cfg.server, cfg.models, opt);
  p.thresholds = calibrate_thresholds(tbt_series(p.unbounded.per_second));
  ControllerConfig cc = cfg.controller;
  cc.t1_ms = p.thresholds.first;
  cc.t2_ms = p.thresholds.second;
  LinearController controller(cc);
  p.bounded = run_simulation(p.trace, cfg.server, cfg.models, cc, &controller, opt);
  return p;
}

}  // namespace llmcc
