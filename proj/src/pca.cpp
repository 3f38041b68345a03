#include "hetpop/pca.hpp"

#include <numbers>

namespace hetpop {

PrincipalAxes principal_axes(double r) {
  if (!(std::abs(r) < 1.0 - kSingularityTolerance)) {
    throw DegenerateError("component scores undefined: |r| is too close to 1");
  }
  constexpr double h = std::numbers::sqrt2 / 2.0;
  PrincipalAxes axes;
  axes.sum_first = r >= 0.0;
  axes.sum_scale = 1.0 / std::sqrt(2.0 * (1.0 + r));
  axes.diff_scale = 1.0 / std::sqrt(2.0 * (1.0 - r));
  if (axes.sum_first) {
    axes.eigenvalues << 1.0 + r, 1.0 - r;
    axes.eigenvectors << h, h, h, -h;
  } else {
    axes.eigenvalues << 1.0 - r, 1.0 + r;
    axes.eigenvectors << h, h, -h, h;
  }
  axes.loadings = axes.eigenvectors * axes.eigenvalues.cwiseSqrt().asDiagonal();
  return axes;
}

ComponentScores component_scores(const BivariateSample& sample, const CorrelationSummary& summary) {
  return component_scores(sample.scores(), summary);
}

}  // namespace hetpop
