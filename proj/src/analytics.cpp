#include "hetpop/analytics.hpp"

#include <cmath>

#include "hetpop/errors.hpp"

namespace hetpop {

namespace {

void check_domain(std::int64_t q, double lambda, double phi, double omega) {
  if (q < 1) throw DomainError("q must be at least 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
  if (!(phi >= 0.0 && phi < 1.0)) throw DomainError("phi must lie in [0, 1)");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("omega must be finite and >= 0");
}

}  // namespace

CorrelationPrediction expected_correlation(std::int64_t q, double lambda, double phi, double omega) {
  check_domain(q, lambda, phi, omega);
  const double inv_q = 1.0 / static_cast<double>(q);
  const double l2 = lambda * lambda;
  const double scale = 1.0 / (1.0 + omega);
  CorrelationPrediction p;
  p.common_part = l2 * phi * scale;
  p.subpopulation_part = (inv_q * l2 - inv_q * l2 * phi) * scale;
  p.rho = (inv_q - inv_q * phi + phi) * l2 * scale;
  return p;
}

double expected_loading(std::int64_t q, double lambda, double phi, double omega) {
  check_domain(q, lambda, phi, omega);
  const double inv_q = 1.0 / static_cast<double>(q);
  return std::sqrt(inv_q + phi * (1.0 - inv_q)) * lambda / std::sqrt(1.0 + omega);
}

Eigen::MatrixXd reproduced_covariance(int m, double lambda, double omega) {
  if (m < 2) throw DomainError("reproduced_covariance: m must be at least 2");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("omega must be finite and >= 0");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(m, m, lambda * lambda);
  sigma.diagonal().setConstant(1.0 + omega);
  return sigma;
}

}  // namespace hetpop
