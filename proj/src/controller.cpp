#include "llmcc/controller.hpp"

#include <algorithm>
#include <cmath>

#include "llmcc/errors.hpp"
#include "llmcc/metrics.hpp"

namespace llmcc {

namespace {

void check_order(std::optional<std::int64_t>& last, std::int64_t second) {
  if (last && second < *last) {
    throw ValidationError("controller sample for second " + std::to_string(second) +
                          " arrived after second " + std::to_string(*last));
  }
  last = second;
}

}  // namespace

ClassMode ControllerConfig::mode_for(RequestClass c) const {
  auto it = class_policy.find(c);
  return it == class_policy.end() ? ClassMode::kNormal : it->second;
}

void ControllerConfig::validate_policy() const {
  if (window_s < 1) throw ValidationError("controller.window_s must be >= 1");
  if (!(r_min > 0.0 && r_min <= r_max && r_max < 1.0)) {
    throw ValidationError("controller rates must satisfy 0 < r_min <= r_max < 1");
  }
  if (deactivate_after < 1) throw ValidationError("controller.deactivate_after must be >= 1");
  if (min_words_bypass < 0) throw ValidationError("controller.min_words_bypass must be >= 0");
}

void ControllerConfig::validate() const {
  validate_policy();
  std::string missing;
  if (!t1_ms) missing += "controller.t1_ms";
  if (!t2_ms) missing += std::string(missing.empty() ? "" : ", ") + "controller.t2_ms";
  if (!missing.empty()) throw ValidationError("missing controller thresholds: " + missing);
  if (!(*t1_ms < *t2_ms)) throw ValidationError("controller thresholds must satisfy t1_ms < t2_ms");
}

double reduction_rate(double ma_tbt_ms, const ControllerConfig& cfg) {
  const double t1 = cfg.t1_ms.value();
  const double t2 = cfg.t2_ms.value();
  if (ma_tbt_ms < t1) return 0.0;
  // Weighted form keeps the endpoints and midpoints exact.
  double r = (cfg.r_min * (t2 - ma_tbt_ms) + cfg.r_max * (ma_tbt_ms - t1)) / (t2 - t1);
  return std::clamp(r, cfg.r_min, cfg.r_max);
}

LinearController::LinearController(ControllerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

double LinearController::moving_average() const {
  if (window_.empty()) return 0.0;
  double sum = 0.0;
  for (double v : window_) sum += v;
  return sum / static_cast<double>(window_.size());
}

ControllerLogEntry LinearController::ingest_sample(std::int64_t second, double avg_tbt_ms) {
  check_order(last_second_, second);
  window_.push_back(avg_tbt_ms);
  if (window_.size() > static_cast<std::size_t>(cfg_.window_s)) window_.pop_front();

  const double ma = moving_average();
  const double r = reduction_rate(ma, cfg_);
  if (r > 0.0) {
    below_count_ = 0;
    if (!active_) transitions_.push_back({second, true});
    active_ = true;
    current_r_ = r;
  } else if (active_ && ++below_count_ >= cfg_.deactivate_after) {
    // Until then r holds its last value.
    active_ = false;
    current_r_ = 0.0;
    below_count_ = 0;
    transitions_.push_back({second, false});
  }
  return {second, ma, current_r_, active_};
}

ConstantController::ConstantController(double r) : r_(r) {
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("constant controller r must be in [0, 1)");
}

ControllerLogEntry ConstantController::ingest_sample(std::int64_t second, double avg_tbt_ms) {
  check_order(last_second_, second);
  return {second, avg_tbt_ms, r_, r_ > 0.0};
}

RewriteDecision rewrite_request(const ArrivalEvent& event, double current_r,
                                const PredictorModel& predictor, const ControllerConfig& cfg,
                                Rng& rng) {
  RewriteDecision d;
  if (current_r <= 0.0 || cfg.mode_for(event.request_class) == ClassMode::kBypass) return d;
  d.predicted_length = predict_length(event.unbounded_output_words, predictor, rng);
  if (d.predicted_length < cfg.min_words_bypass) return d;
  d.r_applied = current_r;
  d.target_words = bounded_target(d.predicted_length, current_r);
  d.appended_instruction = "Summarize in exactly " + std::to_string(d.target_words) + " words.";
  return d;
}

std::pair<double, double> calibrate_thresholds(std::span<const double> unbounded_tbt_ms) {
  if (unbounded_tbt_ms.size() < 4) {
    throw InsufficientDataError("threshold calibration needs at least 4 per-second TBT samples, got " +
                              std::to_string(unbounded_tbt_ms.size()));
  }
  double t1 = percentile(unbounded_tbt_ms, 50.0);
  double t2 = percentile(unbounded_tbt_ms, 75.0);
  if (!(t1 < t2)) {
    throw DegenerateDistributionError(
        "median and 75th percentile TBT are equal; the unbounded run has too little TBT "
        "variation (widen the trace or raise its peak load)");
  }
  return {t1, t2};
}

}  // namespace llmcc
