#include "hetpop/kappa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hetpop/errors.hpp"

namespace hetpop {

std::string_view to_string(ReferenceMethod method) {
  return method == ReferenceMethod::bootstrap ? "bootstrap" : "parametric";
}

ReferenceMethod parse_reference_method(std::string_view text) {
  if (text == "parametric" || text == "normal") return ReferenceMethod::parametric;
  if (text == "bootstrap") return ReferenceMethod::bootstrap;
  throw DomainError("unknown reference method '" + std::string(text) + "'");
}

KappaValue kappa(const ComponentScores& scores) {
  const auto outer = (scores.scores.array().abs() > 1.0).rowwise().all();
  KappaValue k;
  k.n = scores.rows();
  k.count = outer.count();
  k.kappa = k.n > 0 ? static_cast<double>(k.count) / static_cast<double>(k.n) : 0.0;
  return k;
}

KappaValue kappa(const BivariateSample& sample, const CorrelationSummary& summary) {
  KappaValue k;
  k.n = sample.rows();
  k.count = count_outer_quadrants(sample.scores(), summary);
  k.kappa = static_cast<double>(k.count) / static_cast<double>(k.n);
  return k;
}

namespace {

// Pooled column vector of both items, standardized with the pooled mean and
// standard deviation.
Eigen::VectorXd pooled_standardized(const ItemScores& x) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd pool(2 * n);
  pool << x.col(0), x.col(1);
  const double mean = pool.mean();
  pool.array() -= mean;
  const double sd = std::sqrt(pool.squaredNorm() / static_cast<double>(2 * n - 1));
  if (!(sd > 0.0)) throw DegenerateError("bootstrap: pooled observations are constant");
  pool /= sd;
  return pool;
}

}  // namespace

ReferenceDistribution reference_distribution(double r, const BivariateSample& sample, int nruns,
                                             ReferenceMethod method, RngState& rng) {
  if (nruns < kMinReferenceRuns) {
    throw DomainError("reference distribution needs at least " + std::to_string(kMinReferenceRuns) + " runs");
  }
  if (!(std::abs(r) < 1.0 - kSingularityTolerance)) {
    throw DegenerateError("reference distribution undefined: |r| is too close to 1");
  }
  const Eigen::Index n = sample.rows();
  if (n < 3) throw DataError("reference distribution needs at least 3 observations");

  // Upper Cholesky factor of [[1, r], [r, 1]]: y1 = z1, y2 = r z1 + sqrt(1 - r^2) z2.
  const double tail = std::sqrt(1.0 - r * r);

  Eigen::VectorXd pool;
  if (method == ReferenceMethod::bootstrap) pool = pooled_standardized(sample.scores());

  ReferenceDistribution dist;
  dist.method = method;
  dist.r_used = r;
  dist.n = n;
  dist.values.reserve(static_cast<std::size_t>(nruns));

  ItemScores y(n, 2);
  for (int run = 0; run < nruns; ++run) {
    if (method == ReferenceMethod::parametric) {
      rng.fill_standard_normal(std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    } else {
      const Eigen::Index pool_size = pool.size();
      for (Eigen::Index c = 0; c < 2; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) y(i, c) = pool(rng.uniform_index(pool_size));
      }
    }
    y.col(1) = r * y.col(0) + tail * y.col(1);

    const CorrelationSummary s = summarize(y);
    const Eigen::Index count = count_outer_quadrants(y, s);
    dist.values.push_back(static_cast<double>(count) / static_cast<double>(n));
  }
  return dist;
}

double percentile_5(std::span<const double> values) {
  if (values.size() < static_cast<std::size_t>(kMinReferenceRuns)) {
    throw DomainError("percentile_5 needs at least " + std::to_string(kMinReferenceRuns) + " values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(sorted.size())));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

double percentile_5(const ReferenceDistribution& dist) { return percentile_5(dist.values); }

DetectionResult detect(const BivariateSample& sample, int nruns, ReferenceMethod method, RngState& rng) {
  if (sample.rows() < 3) throw DataError("detection needs at least 3 observations");
  const CorrelationSummary summary = summarize(sample);
  const KappaValue kx = kappa(sample, summary);
  const ReferenceDistribution dist = reference_distribution(summary.r, sample, nruns, method, rng);

  DetectionResult out;
  out.r = summary.r;
  out.n = sample.rows();
  out.kappa_x = kx.kappa;
  out.kappa_y_mean = std::accumulate(dist.values.begin(), dist.values.end(), 0.0) /
                     static_cast<double>(dist.values.size());
  out.p05 = percentile_5(dist);
  out.heterogeneous = out.kappa_x < out.p05;
  out.nruns = nruns;
  out.method = method;
  return out;
}

}  // namespace hetpop
