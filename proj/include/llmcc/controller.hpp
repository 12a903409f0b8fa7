#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "llmcc/rng.hpp"
#include "llmcc/trace.hpp"
#include "llmcc/workload_models.hpp"

namespace llmcc {

enum class ClassMode { kNormal, kBypass };

struct ControllerConfig {
  std::int32_t window_s = 5;
  double r_min = 0.05;
  double r_max = 0.20;
  // Unset until calibrated from an unbounded run.
  std::optional<double> t1_ms;
  std::optional<double> t2_ms;
  // Consecutive below-trigger updates required before resetting r to 0.
  std::int32_t deactivate_after = 1;
  std::map<RequestClass, ClassMode> class_policy = {{RequestClass::kCoding, ClassMode::kBypass}};
  std::int32_t min_words_bypass = 0;

  ClassMode mode_for(RequestClass c) const;
  // Checks everything except the thresholds.
  void validate_policy() const;
  // Full check; also requires t1 < t2 to be present.
  void validate() const;
};

// One row of the controller log.
struct ControllerLogEntry {
  std::int64_t second = 0;
  double ma_tbt_ms = 0.0;
  double r = 0.0;
  bool active = false;

  friend bool operator==(const ControllerLogEntry&, const ControllerLogEntry&) = default;
};

struct ControllerTransition {
  std::int64_t second = 0;
  bool activated = false;  // false: deactivated

  friend bool operator==(const ControllerTransition&, const ControllerTransition&) = default;
};

// Contract every congestion controller satisfies. The simulator feeds one
// average-TBT sample per simulated second that produced tokens and queries the
// current reduction rate whenever it admits a request. current_r() is 0 exactly
// when the controller is inactive.
class CongestionController {
 public:
  virtual ~CongestionController() = default;

  // Samples must arrive in nondecreasing second order; seconds without
  // tokens are skipped. Throws ValidationError on out-of-order input.
  virtual ControllerLogEntry ingest_sample(std::int64_t second, double avg_tbt_ms) = 0;
  virtual double current_r() const = 0;
  virtual bool active() const { return current_r() > 0.0; }
  virtual std::string name() const = 0;
};

// r as a function of the moving-average TBT: 0 below t1, then linear from
// r_min at t1 to r_max at t2, clamped at r_max.
double reduction_rate(double ma_tbt_ms, const ControllerConfig& cfg);

// Moving average over the last window_s samples, and the linear control law.
class LinearController final : public CongestionController {
 public:
  explicit LinearController(ControllerConfig cfg);

  ControllerLogEntry ingest_sample(std::int64_t second, double avg_tbt_ms) override;
  double current_r() const override { return current_r_; }
  bool active() const override { return active_; }
  std::string name() const override { return "linear"; }

  double moving_average() const;
  const std::vector<ControllerTransition>& transitions() const { return transitions_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  std::deque<double> window_;
  std::optional<std::int64_t> last_second_;
  double current_r_ = 0.0;
  bool active_ = false;
  std::int32_t below_count_ = 0;
  std::vector<ControllerTransition> transitions_;
};

// Always returns the same r (0 makes it a null controller).
class ConstantController final : public CongestionController {
 public:
  explicit ConstantController(double r);

  ControllerLogEntry ingest_sample(std::int64_t second, double avg_tbt_ms) override;
  double current_r() const override { return r_; }
  std::string name() const override { return "constant"; }

 private:
  double r_;
  std::optional<std::int64_t> last_second_;
};

struct RewriteDecision {
  std::int32_t predicted_length = 0;
  double r_applied = 0.0;
  std::int32_t target_words = 0;
  std::string appended_instruction;  // empty when r_applied == 0

  bool rewritten() const { return r_applied > 0.0; }
};

// Decides the length bound for a request leaving the queue. Bypassed classes,
// short predicted outputs, and an inactive controller leave the prompt as is.
RewriteDecision rewrite_request(const ArrivalEvent& event, double current_r,
                                const PredictorModel& predictor, const ControllerConfig& cfg,
                                Rng& rng);

// T1 = nearest-rank median, T2 = nearest-rank 75th percentile of per-second
// average TBT from an unbounded run. Throws InsufficientDataError for fewer
// than 4 samples and DegenerateDistributionError when T1 == T2.
std::pair<double, double> calibrate_thresholds(std::span<const double> unbounded_tbt_ms);

}  // namespace llmcc
