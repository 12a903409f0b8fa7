#pragma once

#include <cstdint>
#include <optional>

#include "llmcc/rng.hpp"

namespace llmcc {

// Noisy oracle for the unbounded output length. Error ~ Laplace(0, noise_scale),
// so the mean absolute error equals noise_scale.
struct PredictorModel {
  double noise_scale = 36.0;
  std::int32_t min_output = 1;
  double latency_ms = 50.0;

  void validate() const;
};

// Realized length for an "exactly N words" instruction:
// (a0 + a1*N + a2*N^2) * (1 + Gaussian(0, rel_noise)).
// The unbounded branch scales the request's median length by exp(g), g a
// Gaussian clipped to [log(band_low_factor), log(band_high_factor)].
struct ComplianceModel {
  double poly_a0 = 0.0;
  double poly_a1 = 1.0;
  double poly_a2 = 0.0;
  double rel_noise = 0.05;
  double unbounded_log_sigma = 0.0875;
  double band_low_factor = 1.0 / 1.38;
  double band_high_factor = 1.25;

  void validate() const;
};

// Similarity (0-100) of a response to its unbounded reference.
struct QualityModel {
  double sim_inactive_median = 88.0;
  double sim_active_median = 87.0;
  double floor = 65.0;
  double safe_window = 0.20;
  double decay_end = 0.40;
  double score_noise = 2.0;

  void validate() const;
};

struct ModelBundle {
  PredictorModel predictor;
  ComplianceModel compliance;
  QualityModel quality;

  void validate() const {
    predictor.validate();
    compliance.validate();
    quality.validate();
  }
};

std::int32_t predict_length(std::int32_t true_length, const PredictorModel& model, Rng& rng);

// N = round(L * (1 - r)), at least 1. Throws ValidationError unless 0 <= r < 1.
std::int32_t bounded_target(std::int32_t predicted_length, double r);

// Draws the generated length. With a target the compliance curve applies;
// without one the unbounded variability band applies around unbounded_length.
std::int32_t realized_length(std::optional<std::int32_t> target, std::int32_t unbounded_length,
                             const ComplianceModel& model, Rng& rng);

// Noise-free quality curve (the median score at a given reduction).
double similarity_base(double reduction, bool control_active, const QualityModel& model);

// reduction is signed: (reference - length) / reference; negative means longer.
double similarity_score(double reduction, bool control_active, const QualityModel& model, Rng& rng);

}  // namespace llmcc
