#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hetpop/model.hpp"
#include "hetpop/pca.hpp"
#include "hetpop/stochastics.hpp"

namespace hetpop {

/// Share of individuals with |c1| > 1 and |c2| > 1.
struct KappaValue {
  double kappa = 0.0;
  Eigen::Index n = 0;
  Eigen::Index count = 0;
};

/// Source of the synthetic single-population reference samples.
enum class ReferenceMethod {
  parametric,  // bivariate normal with the observed r
  bootstrap,   // resampled from the pooled standardized observations
};

std::string_view to_string(ReferenceMethod method);
ReferenceMethod parse_reference_method(std::string_view text);

struct ReferenceDistribution {
  std::vector<double> values;
  ReferenceMethod method = ReferenceMethod::parametric;
  double r_used = 0.0;
  Eigen::Index n = 0;
};

struct DetectionResult {
  double r = 0.0;
  Eigen::Index n = 0;
  double kappa_x = 0.0;
  double kappa_y_mean = 0.0;
  double p05 = 0.0;
  bool heterogeneous = false;
  int nruns = 0;
  ReferenceMethod method = ReferenceMethod::parametric;
};

inline constexpr int kMinReferenceRuns = 20;
inline constexpr int kDefaultReferenceRuns = 500;

KappaValue kappa(const ComponentScores& scores);

/// kappa of a raw n x 2 sample, streaming (no score matrix is kept).
KappaValue kappa(const BivariateSample& sample, const CorrelationSummary& summary);

/// nruns kappa values of single-population samples with the observed n and
/// correlation r. Each run recomputes its own correlation and components.
ReferenceDistribution reference_distribution(double r, const BivariateSample& sample, int nruns,
                                             ReferenceMethod method, RngState& rng);

/// floor(0.05 nruns)-th smallest value (1-based).
double percentile_5(std::span<const double> values);
double percentile_5(const ReferenceDistribution& dist);

/// Flags heterogeneous item populations when kappa_x < percentile_5 of the
/// reference distribution.
DetectionResult detect(const BivariateSample& sample, int nruns, ReferenceMethod method, RngState& rng);

}  // namespace hetpop
