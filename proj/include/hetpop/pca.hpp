#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "hetpop/errors.hpp"
#include "hetpop/model.hpp"

namespace hetpop {

/// Means, standard deviations (n - 1 denominator) and Pearson r of two columns.
struct CorrelationSummary {
  Eigen::Index n = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double sd1 = 0.0;
  double sd2 = 0.0;
  double r = 0.0;
};

/// Closed-form principal axes of the 2x2 correlation matrix [[1, r], [r, 1]].
///
/// Eigenvalues are 1 + r and 1 - r with eigenvectors (1, 1)/sqrt2 and
/// (1, -1)/sqrt2, ordered by descending eigenvalue; each eigenvector has a
/// positive first component. loadings = V diag(sqrt(eigenvalues)), so that
/// loadings * loadings' reproduces the correlation matrix.
struct PrincipalAxes {
  Eigen::Vector2d eigenvalues;
  Eigen::Matrix2d eigenvectors;
  Eigen::Matrix2d loadings;
  double sum_scale = 0.0;   // 1 / sqrt(2 (1 + r))
  double diff_scale = 0.0;  // 1 / sqrt(2 (1 - r))
  bool sum_first = true;    // (1,1) axis carries the larger eigenvalue
};

/// |r| must stay below 1 - kSingularityTolerance for component scores to exist.
inline constexpr double kSingularityTolerance = 1e-8;

/// Whitened scores of the two principal components, one row per individual.
struct ComponentScores {
  Eigen::Matrix<double, Eigen::Dynamic, 2> scores;
  Eigen::Vector2d eigenvalues;
  Eigen::Matrix2d loadings;

  auto c1() const { return scores.col(0); }
  auto c2() const { return scores.col(1); }
  Eigen::Index rows() const { return scores.rows(); }
};

/// Throws DegenerateError when |r| >= 1 - kSingularityTolerance.
PrincipalAxes principal_axes(double r);

/// Sample summary of an n x 2 matrix. Throws DataError when n < 3 and
/// DegenerateError when a column is constant.
template <typename Derived>
CorrelationSummary summarize(const Eigen::MatrixBase<Derived>& x) {
  static_assert(Derived::ColsAtCompileTime == 2 || Derived::ColsAtCompileTime == Eigen::Dynamic);
  if (x.cols() != 2) throw DataError("summarize: expected exactly two columns");
  const Eigen::Index n = x.rows();
  if (n < 3) throw DataError("summarize: at least 3 observations are required");

  CorrelationSummary s;
  s.n = n;
  s.mean1 = x.col(0).mean();
  s.mean2 = x.col(1).mean();
  const auto d1 = x.col(0).array() - s.mean1;
  const auto d2 = x.col(1).array() - s.mean2;
  const double ss1 = d1.square().sum();
  const double ss2 = d2.square().sum();
  const double sp = (d1 * d2).sum();
  const double denom = static_cast<double>(n - 1);
  s.sd1 = std::sqrt(ss1 / denom);
  s.sd2 = std::sqrt(ss2 / denom);

  const auto constant = [](double sd, double mean) {
    return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
  };
  if (constant(s.sd1, s.mean1) || constant(s.sd2, s.mean2)) {
    throw DegenerateError("summarize: a column is constant");
  }
  s.r = std::clamp(sp / std::sqrt(ss1 * ss2), -1.0, 1.0);
  return s;
}

inline CorrelationSummary summarize(const BivariateSample& sample) { return summarize(sample.scores()); }

namespace detail {

// Sum/difference components of one standardized observation. Shared by the
// materializing and the streaming code paths so both round identically.
struct Standardizer {
  double mean1, mean2, inv_sd1, inv_sd2, sum_scale, diff_scale;

  Standardizer(const CorrelationSummary& s, const PrincipalAxes& axes)
      : mean1(s.mean1), mean2(s.mean2), inv_sd1(1.0 / s.sd1), inv_sd2(1.0 / s.sd2),
        sum_scale(axes.sum_scale), diff_scale(axes.diff_scale) {}

  double z1(double x1) const { return (x1 - mean1) * inv_sd1; }
  double z2(double x2) const { return (x2 - mean2) * inv_sd2; }
  double sum_component(double z1v, double z2v) const { return (z1v + z2v) * sum_scale; }
  double diff_component(double z1v, double z2v) const { return (z1v - z2v) * diff_scale; }
};

}  // namespace detail

/// Standardize columns and project onto the whitened principal components.
ComponentScores component_scores(const BivariateSample& sample, const CorrelationSummary& summary);

template <typename Derived>
ComponentScores component_scores(const Eigen::MatrixBase<Derived>& x, const CorrelationSummary& summary) {
  const PrincipalAxes axes = principal_axes(summary.r);
  const detail::Standardizer st(summary, axes);
  const int sum_col = axes.sum_first ? 0 : 1;
  ComponentScores out;
  out.scores.resize(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z1 = st.z1(x(i, 0));
    const double z2 = st.z2(x(i, 1));
    out.scores(i, sum_col) = st.sum_component(z1, z2);
    out.scores(i, 1 - sum_col) = st.diff_component(z1, z2);
  }
  out.eigenvalues = axes.eigenvalues;
  out.loadings = axes.loadings;
  return out;
}

/// Number of observations whose two component scores both exceed 1 in
/// absolute value, computed without materializing the scores.
template <typename Derived>
Eigen::Index count_outer_quadrants(const Eigen::MatrixBase<Derived>& x, const CorrelationSummary& summary) {
  const PrincipalAxes axes = principal_axes(summary.r);
  const detail::Standardizer st(summary, axes);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z1 = st.z1(x(i, 0));
    const double z2 = st.z2(x(i, 1));
    const bool outer = std::abs(st.sum_component(z1, z2)) > 1.0 && std::abs(st.diff_component(z1, z2)) > 1.0;
    count += outer ? 1 : 0;
  }
  return count;
}

}  // namespace hetpop
