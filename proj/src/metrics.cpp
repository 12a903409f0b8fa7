#include "llmcc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "llmcc/errors.hpp"

namespace llmcc {

namespace {

std::int64_t second_of(Micros t) { return t / kMicrosPerSecond; }

std::optional<double> mean_ms(std::int64_t sum_us, std::int64_t n) {
  if (n == 0) return std::nullopt;
  return static_cast<double>(sum_us) / static_cast<double>(n) / static_cast<double>(kMicrosPerMs);
}

}  // namespace

double percentile(std::span<const double> samples, double p) {
  if (samples.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("percentile p must be in [0, 100]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // p * n first keeps integer-valued products exact.
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

void SecondAccumulator::push(const MetricEvent& e) {
  const std::int64_t s = second_of(e.time);
  if (s < current_) throw ValidationError("metric event for an already closed second");
  if (s > current_) close_through(s - 1);
  switch (e.kind) {
    case MetricKind::kArrival: ++open_.arrivals; break;
    case MetricKind::kDispatch: ++open_.dispatch_n; open_.dispatch_sum += e.value; break;
    case MetricKind::kFirstToken: ++open_.ttft_n; open_.ttft_sum += e.value; break;
    case MetricKind::kToken: ++open_.tbt_n; open_.tbt_sum += e.value; break;
    case MetricKind::kCompletion: ++open_.e2e_n; open_.e2e_sum += e.value; break;
    case MetricKind::kEnergy: open_.energy += e.value; break;
    case MetricKind::kSnapshot:
      queue_depth_ = e.value;
      in_flight_ = e.aux;
      r_ = e.r;
      break;
  }
}

SecondAggregate SecondAccumulator::finish(std::int64_t second, const Sums& s) const {
  SecondAggregate a;
  a.second = second;
  a.rps_in = s.arrivals;
  a.queue_depth = queue_depth_;
  a.in_flight = in_flight_;
  a.avg_queueing_ms = mean_ms(s.dispatch_sum, s.dispatch_n);
  a.avg_ttft_ms = mean_ms(s.ttft_sum, s.ttft_n);
  a.avg_tbt_ms = mean_ms(s.tbt_sum, s.tbt_n);
  a.avg_e2e_ms = mean_ms(s.e2e_sum, s.e2e_n);
  a.active_r = r_;
  a.completions = s.e2e_n;
  a.energy_uj = s.energy;
  return a;
}

void SecondAccumulator::close_through(std::int64_t second) {
  while (current_ <= second) {
    rows_.push_back(finish(current_, open_));
    open_ = Sums{};
    ++current_;
  }
}

std::vector<SecondAggregate> aggregate_per_second(std::span<const MetricEvent> events) {
  if (events.empty()) return {};
  SecondAccumulator acc;
  for (const MetricEvent& e : events) acc.push(e);
  acc.close_through(second_of(events.back().time));
  return acc.take_rows();
}

}  // namespace llmcc
