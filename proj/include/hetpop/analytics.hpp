#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace hetpop {

/// Expected inter-item correlation in the total population of individuals,
/// split into the part shared by all subpopulations (lambda^2 phi) and the
/// part carried by population-specific factors.
struct CorrelationPrediction {
  double rho = 0.0;
  double common_part = 0.0;
  double subpopulation_part = 0.0;
};

/// rho = (1/q + phi (1 - 1/q)) lambda^2 / (1 + omega).
///
/// Item-mean variance omega inflates the item variance but leaves the common
/// variance untouched, hence the 1/(1 + omega) attenuation; both parts of the
/// decomposition are scaled by it.
CorrelationPrediction expected_correlation(std::int64_t q, double lambda, double phi, double omega = 0.0);

/// Single-factor loading observed in the total population,
/// sqrt(1/q + phi (1 - 1/q)) lambda, standardized by sqrt(1 + omega).
double expected_loading(std::int64_t q, double lambda, double phi, double omega = 0.0);

/// Largest total-population loading attainable with q > 1 populations of
/// uncorrelated factors and no item-mean variance (q = 2, lambda = 1).
inline constexpr double kSinglePopulationLoadingBound = 0.70710678118654752440;

/// Reproduced covariance of m essentially parallel items:
/// lambda^2 off the diagonal, 1 + omega on it.
Eigen::MatrixXd reproduced_covariance(int m, double lambda, double omega = 0.0);

}  // namespace hetpop
