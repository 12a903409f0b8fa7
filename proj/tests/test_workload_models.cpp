#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "llmcc/errors.hpp"
#include "llmcc/metrics.hpp"
#include "llmcc/workload_models.hpp"

using namespace llmcc;

TEST(Predictor, ZeroNoiseIsIdentity) {
  PredictorModel m;
  m.noise_scale = 0.0;
  Rng rng(1);
  EXPECT_EQ(predict_length(500, m, rng), 500);
}

TEST(Predictor, MeanAbsoluteErrorMatchesScale) {
  PredictorModel m;
  Rng rng(2024);
  double abs_err = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) abs_err += std::abs(predict_length(500, m, rng) - 500);
  EXPECT_NEAR(abs_err / n, 36.0, 2.0);
}

TEST(Predictor, Unbiased) {
  PredictorModel m;
  Rng rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += predict_length(500, m, rng) - 500;
  EXPECT_NEAR(sum / n, 0.0, 1.5);
}

TEST(Predictor, ClampsToMinimumOutput) {
  PredictorModel m;
  m.noise_scale = 1000.0;
  Rng rng(3);
  bool clamped = false;
  for (int i = 0; i < 1000; ++i) {
    const auto p = predict_length(5, m, rng);
    EXPECT_GE(p, 1);
    clamped |= p == 1;
  }
  EXPECT_TRUE(clamped);
  EXPECT_THROW(predict_length(0, m, rng), ValidationError);
}

TEST(BoundedTarget, Examples) {
  EXPECT_EQ(bounded_target(500, 0.08), 460);
  EXPECT_EQ(bounded_target(500, 0.0), 500);
  EXPECT_EQ(bounded_target(350, 0.20), 280);
  EXPECT_EQ(bounded_target(1, 0.9), 1);
  EXPECT_THROW(bounded_target(500, 1.0), ValidationError);
  EXPECT_THROW(bounded_target(500, -0.1), ValidationError);
}

TEST(RealizedLength, IdentityComplianceWithoutNoise) {
  ComplianceModel m;
  m.rel_noise = 0.0;
  Rng rng(1);
  EXPECT_EQ(realized_length(460, 500, m, rng), 460);
  for (int n = 100; n <= 1000; n += 37) EXPECT_EQ(realized_length(n, 500, m, rng), n);
}

TEST(RealizedLength, PolynomialCurve) {
  ComplianceModel m;
  m.poly_a0 = 50.0;
  m.poly_a1 = 0.8;
  m.rel_noise = 0.0;
  Rng rng(1);
  EXPECT_EQ(realized_length(300, 500, m, rng), 290);
}

TEST(RealizedLength, UnboundedBandAroundMedian) {
  ComplianceModel m;
  Rng rng(7);
  std::vector<double> v;
  for (int i = 0; i < 10000; ++i) v.push_back(realized_length(std::nullopt, 500, m, rng));
  const double median = percentile(v, 50.0);
  int inside = 0;
  for (double x : v) inside += x > median * 0.62 && x < median * 1.25;
  EXPECT_GE(inside, 9900);
}

TEST(RealizedLength, ClampsToOne) {
  ComplianceModel m;
  m.poly_a0 = -1000.0;
  Rng rng(1);
  EXPECT_EQ(realized_length(10, 500, m, rng), 1);
  m = ComplianceModel{};
  m.rel_noise = 5.0;
  for (int i = 0; i < 1000; ++i) EXPECT_GE(realized_length(3, 3, m, rng), 1);
  EXPECT_THROW(realized_length(0, 500, m, rng), ValidationError);
  EXPECT_THROW(realized_length(std::nullopt, 0, m, rng), ValidationError);
}

TEST(Similarity, Examples) {
  QualityModel q;
  q.score_noise = 0.0;
  Rng rng(1);
  EXPECT_EQ(similarity_score(0.0, false, q, rng), 88.0);
  EXPECT_EQ(similarity_score(0.08, true, q, rng), 87.0);
  EXPECT_EQ(similarity_score(0.40, true, q, rng), 65.0);
  EXPECT_EQ(similarity_score(0.30, true, q, rng), 76.0);
}

TEST(Similarity, NonIncreasingPastSafeWindow) {
  QualityModel q;
  q.score_noise = 0.0;
  Rng rng(1);
  double prev = 100.0;
  for (double red = q.safe_window; red < 0.99; red += 0.005) {
    const double s = similarity_score(red, true, q, rng);
    EXPECT_LE(s, prev);
    prev = s;
  }
}

TEST(Similarity, ScoresStayInRange) {
  QualityModel q;
  q.score_noise = 500.0;
  Rng rng(4);
  for (double red : {-0.99, -0.5, 0.0, 0.3, 0.99}) {
    for (int i = 0; i < 200; ++i) {
      const double s = similarity_score(red, i % 2 == 0, q, rng);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 100.0);
    }
  }
}

TEST(Models, ValidateRejectsBadParameters) {
  PredictorModel p;
  p.min_output = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  ComplianceModel c;
  c.band_low_factor = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  QualityModel q;
  q.floor = 90.0;
  EXPECT_THROW(q.validate(), ValidationError);
  q = QualityModel{};
  q.decay_end = 0.1;
  EXPECT_THROW(q.validate(), ValidationError);
  EXPECT_NO_THROW(ModelBundle{}.validate());
}
