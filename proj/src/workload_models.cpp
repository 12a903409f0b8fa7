#include "llmcc/workload_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "llmcc/errors.hpp"

namespace llmcc {

namespace {

std::int32_t round_at_least_one(double v) {
  if (!(v >= 1.0)) return 1;
  if (v > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    return std::numeric_limits<std::int32_t>::max();
  }
  return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::llround(v)));
}

double laplace(double scale, Rng& rng) {
  // Inverse CDF on u in (-1/2, 1/2).
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  double u = uni(rng);
  if (u == -0.5) u = 0.0;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
}

}  // namespace

void PredictorModel::validate() const {
  if (!(noise_scale >= 0.0)) throw ValidationError("models.predictor.noise_scale must be >= 0");
  if (min_output < 1) throw ValidationError("models.predictor.min_output must be >= 1");
  if (!(latency_ms >= 0.0)) throw ValidationError("models.predictor.latency_ms must be >= 0");
}

void ComplianceModel::validate() const {
  if (!std::isfinite(poly_a0) || !std::isfinite(poly_a1) || !std::isfinite(poly_a2)) {
    throw ValidationError("compliance polynomial coefficients must be finite");
  }
  if (!(rel_noise >= 0.0)) throw ValidationError("models.compliance.rel_noise must be >= 0");
  if (!(unbounded_log_sigma >= 0.0)) throw ValidationError("models.compliance.unbounded_log_sigma must be >= 0");
  if (!(band_low_factor > 0.0 && band_low_factor <= 1.0 && band_high_factor >= 1.0 &&
        std::isfinite(band_high_factor))) {
    throw ValidationError("models.compliance band factors must satisfy 0 < low <= 1 <= high");
  }
}

void QualityModel::validate() const {
  if (!(0.0 <= floor && floor <= sim_active_median && sim_active_median <= sim_inactive_median &&
        sim_inactive_median <= 100.0)) {
    throw ValidationError("quality scores must satisfy 0 <= floor <= active <= inactive <= 100");
  }
  if (!(0.0 < safe_window && safe_window < decay_end && decay_end <= 1.0)) {
    throw ValidationError("quality knots must satisfy 0 < safe_window < decay_end <= 1");
  }
  if (!(score_noise >= 0.0)) throw ValidationError("models.quality.score_noise must be >= 0");
}

std::int32_t predict_length(std::int32_t true_length, const PredictorModel& model, Rng& rng) {
  if (true_length < 1) throw ValidationError("predict_length: true length must be >= 1");
  double noisy = static_cast<double>(true_length);
  if (model.noise_scale > 0.0) noisy += laplace(model.noise_scale, rng);
  double rounded = std::round(noisy);
  return static_cast<std::int32_t>(std::max<double>(rounded, model.min_output));
}

std::int32_t bounded_target(std::int32_t predicted_length, double r) {
  if (predicted_length < 1) throw ValidationError("bounded_target: length must be >= 1");
  if (!(r >= 0.0 && r < 1.0)) throw ValidationError("bounded_target: r must satisfy 0 <= r < 1");
  return round_at_least_one(static_cast<double>(predicted_length) * (1.0 - r));
}

std::int32_t realized_length(std::optional<std::int32_t> target, std::int32_t unbounded_length,
                             const ComplianceModel& model, Rng& rng) {
  if (unbounded_length < 1) throw ValidationError("realized_length: unbounded length must be >= 1");
  if (target) {
    if (*target < 1) throw ValidationError("realized_length: target must be >= 1");
    double n = static_cast<double>(*target);
    double curve = model.poly_a0 + model.poly_a1 * n + model.poly_a2 * n * n;
    double factor = 1.0;
    if (model.rel_noise > 0.0) factor += std::normal_distribution<double>(0.0, model.rel_noise)(rng);
    return round_at_least_one(curve * factor);
  }
  double g = 0.0;
  if (model.unbounded_log_sigma > 0.0) {
    g = std::normal_distribution<double>(0.0, model.unbounded_log_sigma)(rng);
  }
  g = std::clamp(g, std::log(model.band_low_factor), std::log(model.band_high_factor));
  return round_at_least_one(static_cast<double>(unbounded_length) * std::exp(g));
}

double similarity_base(double reduction, bool control_active, const QualityModel& model) {
  if (!control_active) return model.sim_inactive_median;
  if (reduction <= model.safe_window) return model.sim_active_median;
  if (reduction >= model.decay_end) return model.floor;
  double frac = (reduction - model.safe_window) / (model.decay_end - model.safe_window);
  return model.sim_active_median + (model.floor - model.sim_active_median) * frac;
}

double similarity_score(double reduction, bool control_active, const QualityModel& model, Rng& rng) {
  double score = similarity_base(reduction, control_active, model);
  if (model.score_noise > 0.0) score += std::normal_distribution<double>(0.0, model.score_noise)(rng);
  return std::clamp(score, 0.0, 100.0);
}

}  // namespace llmcc
