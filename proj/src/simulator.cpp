#include "llmcc/simulator.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>

#include "llmcc/errors.hpp"
#include "llmcc/rng.hpp"

namespace llmcc {

namespace {

constexpr Micros kNever = std::numeric_limits<Micros>::max();

Micros ceil_to_second(Micros t) {
  return (t + kMicrosPerSecond - 1) / kMicrosPerSecond * kMicrosPerSecond;
}

class Engine {
 public:
  Engine(const Trace& trace, const ServerConfig& server, const ModelBundle& models,
         const ControllerConfig& policy, CongestionController* controller, const SimOptions& options)
      : trace_(trace),
        server_(server),
        models_(models),
        policy_(policy),
        controller_(controller),
        options_(options) {
    requests_.reserve(trace.events.size());
    for (const ArrivalEvent& e : trace.events) requests_.emplace_back().event = e;
    last_token_.assign(requests_.size(), 0);
  }

  RunResult run();

 private:
  Micros next_arrival() const {
    return next_arrival_ < requests_.size() ? requests_[next_arrival_].arrival() : kNever;
  }
  Micros next_prefill_done() const { return prefills_.empty() ? kNever : prefills_.top().first; }
  std::int64_t occupancy() const {
    return static_cast<std::int64_t>(decoding_.size() + prefilling_count_);
  }
  bool system_empty() const {
    return next_arrival_ >= requests_.size() && queue_.empty() && occupancy() == 0;
  }

  void emit(Micros t, MetricKind kind, std::int64_t value = 0, std::int64_t aux = 0, double r = 0.0) {
    MetricEvent e{t, kind, value, aux, r};
    acc_.push(e);
    if (options_.record_events) result_.events.push_back(e);
  }
  void add_energy(Micros t, MicroJoules uj) {
    if (uj == 0) return;
    emit(t, MetricKind::kEnergy, uj);
    result_.total_energy_uj += uj;
  }

  void tick(Micros t);
  void finish_iteration(Micros t);
  void boundary(Micros t);
  void admit(Micros t);
  void on_arrival(Micros t);
  void emit_word(std::size_t idx, Micros t);
  void complete(std::size_t idx, Micros t);
  void leave_idle(Micros t);
  void enter_idle(Micros t);
  void account_idle(Micros from, Micros to);

  const Trace& trace_;
  const ServerConfig& server_;
  const ModelBundle& models_;
  const ControllerConfig& policy_;
  CongestionController* controller_;
  const SimOptions& options_;

  std::vector<RequestState> requests_;
  std::size_t next_arrival_ = 0;
  std::deque<std::size_t> queue_;
  std::vector<std::size_t> decoding_;  // admission order
  using PrefillItem = std::pair<Micros, std::size_t>;
  std::priority_queue<PrefillItem, std::vector<PrefillItem>, std::greater<>> prefills_;
  std::size_t prefilling_count_ = 0;
  std::vector<Micros> last_token_;
  Micros iteration_end_ = kNever;
  Micros next_tick_ = kMicrosPerSecond;
  std::optional<Micros> idle_since_ = Micros{0};

  SecondAccumulator acc_;
  RunResult result_;
};

void Engine::account_idle(Micros from, Micros to) {
  // Split by second so each second receives its own share.
  while (from < to) {
    Micros edge = std::min(to, (from / kMicrosPerSecond + 1) * kMicrosPerSecond);
    add_energy(from, idle_energy(edge - from, server_));
    from = edge;
  }
}

void Engine::leave_idle(Micros t) {
  if (idle_since_) {
    account_idle(*idle_since_, t);
    idle_since_.reset();
  }
}

void Engine::enter_idle(Micros t) {
  if (occupancy() == 0 && !idle_since_) idle_since_ = t;
}

void Engine::tick(Micros t) {
  // Idle energy must land in the second it belongs to before that second closes.
  if (idle_since_) {
    account_idle(*idle_since_, t);
    idle_since_ = t;
  }
  const double r = controller_ ? controller_->current_r() : 0.0;
  emit(t - 1, MetricKind::kSnapshot, static_cast<std::int64_t>(queue_.size()), occupancy(), r);
  const std::int64_t second = t / kMicrosPerSecond - 1;
  acc_.close_through(second);
  const SecondAggregate& row = acc_.rows().back();
  if (controller_ && row.avg_tbt_ms) {
    ControllerLogEntry entry = controller_->ingest_sample(second, *row.avg_tbt_ms);
    const bool was_active = !result_.controller_log.empty() && result_.controller_log.back().active;
    if (entry.active != was_active) result_.transitions.push_back({second, entry.active});
    result_.controller_log.push_back(entry);
  }
  next_tick_ = t + kMicrosPerSecond;
}

void Engine::emit_word(std::size_t idx, Micros t) {
  RequestState& rq = requests_[idx];
  ++rq.words_emitted;
  if (rq.words_emitted == 1) {
    rq.first_token = t;
    emit(t, MetricKind::kFirstToken, t - rq.arrival());
  } else {
    const Micros gap = t - last_token_[idx];
    rq.tbt_samples.push_back(gap);
    emit(t, MetricKind::kToken, gap);
  }
  last_token_[idx] = t;
}

void Engine::complete(std::size_t idx, Micros t) {
  RequestState& rq = requests_[idx];
  rq.completion = t;
  emit(t, MetricKind::kCompletion, t - rq.arrival());
  result_.completed.push_back(rq);
}

void Engine::finish_iteration(Micros t) {
  add_energy(t, output_energy(static_cast<std::int64_t>(decoding_.size()), server_));
  std::vector<std::size_t> still;
  still.reserve(decoding_.size());
  for (std::size_t idx : decoding_) {
    emit_word(idx, t);
    if (requests_[idx].words_emitted >= requests_[idx].realized_output_words) {
      complete(idx, t);
    } else {
      still.push_back(idx);
    }
  }
  decoding_ = std::move(still);
  iteration_end_ = kNever;
}

void Engine::boundary(Micros t) {
  // Finished prefills join the batch and emit their first word here.
  std::int64_t first_words = 0;
  while (!prefills_.empty() && prefills_.top().first <= t) {
    const std::size_t idx = prefills_.top().second;
    prefills_.pop();
    --prefilling_count_;
    emit_word(idx, t);
    ++first_words;
    if (requests_[idx].words_emitted >= requests_[idx].realized_output_words) {
      complete(idx, t);
    } else {
      decoding_.push_back(idx);
    }
  }
  add_energy(t, output_energy(first_words, server_));
  admit(t);
  if (!decoding_.empty()) {
    iteration_end_ = t + decode_iteration_time(static_cast<std::int32_t>(decoding_.size()), server_);
  }
  enter_idle(t);
}

void Engine::admit(Micros t) {
  while (!queue_.empty() && occupancy() < server_.max_batch) {
    const std::size_t idx = queue_.front();
    queue_.pop_front();
    leave_idle(t);
    RequestState& rq = requests_[idx];
    rq.dispatch = t;
    emit(t, MetricKind::kDispatch, t - rq.arrival());

    const std::uint64_t id = static_cast<std::uint64_t>(rq.event.request_id);
    std::optional<std::int32_t> target;
    if (controller_) {
      Rng rng = make_stream(options_.seed, "predictor", id);
      RewriteDecision d = rewrite_request(rq.event, controller_->current_r(), models_.predictor, policy_, rng);
      if (d.rewritten()) target = d.target_words;
      rq.rewrite = std::move(d);
    }
    // Separate streams keep unbounded draws identical across controlled and uncontrolled runs.
    Rng draw = target ? make_stream(options_.seed, "compliance", id) : make_stream(options_.seed, "unbounded", id);
    rq.realized_output_words = realized_length(target, rq.event.unbounded_output_words, models_.compliance, draw);

    add_energy(t, input_energy(rq.event.input_words, server_));
    prefills_.push({t + prefill_time(rq.event.input_words, server_), idx});
    ++prefilling_count_;
  }
}

void Engine::on_arrival(Micros t) {
  while (next_arrival_ < requests_.size() && requests_[next_arrival_].arrival() == t) {
    queue_.push_back(next_arrival_);
    emit(t, MetricKind::kArrival);
    ++next_arrival_;
  }
  if (iteration_end_ == kNever) admit(t);
}

RunResult Engine::run() {
  trace_.validate();
  server_.validate();
  models_.validate();
  if (controller_) policy_.validate_policy();

  const Micros duration = trace_.duration_ms * kMicrosPerMs;
  const Micros cutoff = options_.cutoff_s ? std::llround(*options_.cutoff_s * 1e6) : kNever;
  std::optional<Micros> last_event;

  while (true) {
    const Micros prefill_wake = iteration_end_ == kNever ? next_prefill_done() : kNever;
    const Micros t_event = std::min({iteration_end_, prefill_wake, next_arrival()});

    if (t_event == kNever) {
      // Drained: close the remaining seconds up to the horizon.
      Micros horizon = ceil_to_second(duration);
      if (last_event) horizon = std::max(horizon, (*last_event / kMicrosPerSecond + 1) * kMicrosPerSecond);
      if (cutoff != kNever) horizon = std::min(horizon, ceil_to_second(cutoff));
      while (next_tick_ <= horizon) tick(next_tick_);
      break;
    }
    if (t_event >= cutoff) {
      const Micros horizon = ceil_to_second(cutoff);
      while (next_tick_ <= horizon) tick(next_tick_);
      result_.truncated = true;
      break;
    }
    if (next_tick_ <= t_event) {
      tick(next_tick_);
      continue;
    }

    last_event = t_event;
    if (iteration_end_ == t_event) {
      finish_iteration(t_event);
      boundary(t_event);
    } else if (prefill_wake == t_event) {
      boundary(t_event);
    } else {
      on_arrival(t_event);
    }
  }

  for (std::size_t idx = 0; idx < requests_.size(); ++idx) {
    if (!requests_[idx].completion && idx < next_arrival_) result_.unfinished.push_back(requests_[idx]);
  }
  if (next_arrival_ < requests_.size()) result_.truncated = true;

  result_.per_second = acc_.take_rows();
  result_.controlled = controller_ != nullptr;
  result_.server = server_;
  result_.seed = options_.seed;
  result_.trace_fingerprint = trace_.fingerprint();
  result_.trace_events = static_cast<std::int64_t>(trace_.events.size());
  result_.trace_duration_ms = trace_.duration_ms;
  return std::move(result_);
}

}  // namespace

RunResult run_simulation(const Trace& trace, const ServerConfig& server, const ModelBundle& models,
                         const ControllerConfig& policy, CongestionController* controller,
                         const SimOptions& options) {
  Engine engine(trace, server, models, policy, controller, options);
  return engine.run();
}

RunResult run_unbounded(const Trace& trace, const ServerConfig& server, const ModelBundle& models,
                        const SimOptions& options) {
  return run_simulation(trace, server, models, ControllerConfig{}, nullptr, options);
}

MicroJoules accumulate_energy(const RunResult& run) {
  MicroJoules total = 0;
  for (const SecondAggregate& s : run.per_second) total += s.energy_uj;
  return total;
}

}  // namespace llmcc
