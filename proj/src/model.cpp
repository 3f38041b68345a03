#include "hetpop/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "hetpop/errors.hpp"

namespace hetpop {

std::string_view to_string(AssignmentMode mode) {
  switch (mode) {
    case AssignmentMode::independent_per_item: return "independent_per_item";
    case AssignmentMode::shared_within_individual: return "shared_within_individual";
    case AssignmentMode::single_population: return "single_population";
  }
  return "unknown";
}

AssignmentMode parse_assignment_mode(std::string_view text) {
  if (text == "independent_per_item" || text == "independent") return AssignmentMode::independent_per_item;
  if (text == "shared_within_individual" || text == "shared") return AssignmentMode::shared_within_individual;
  if (text == "single_population" || text == "single") return AssignmentMode::single_population;
  throw DomainError("unknown assignment mode '" + std::string(text) + "'");
}

void ModelSpec::validate() const {
  if (q < 1) throw DomainError("q must be at least 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in (0, 1]");
  if (!(phi >= 0.0 && phi < 1.0)) throw DomainError("phi must lie in [0, 1)");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("omega must be finite and >= 0");
  if (n < 2) throw DomainError("n must be at least 2");
}

double ModelSpec::unique_loading() const { return std::sqrt(std::max(0.0, 1.0 - lambda * lambda)); }

BivariateSample::BivariateSample(ItemScores scores, std::optional<SampleProvenance> provenance)
    : scores_(std::move(scores)), provenance_(std::move(provenance)) {
  if (scores_.rows() < 2) throw DataError("a bivariate sample needs at least 2 rows");
  if (!scores_.allFinite()) throw DataError("sample contains non-finite values");
}

Eigen::MatrixXd factor_correlation(int q, double phi) {
  if (q < 1) throw DomainError("q must be at least 1");
  if (!(phi >= 0.0 && phi < 1.0)) throw DomainError("phi must lie in [0, 1)");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(q, q, phi);
  m.diagonal().setOnes();
  return m;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("cholesky_lower: matrix must be square");
  if (!m.isApprox(m.transpose(), 1e-12)) throw DegenerateError("cholesky_lower: matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DegenerateError("cholesky_lower: matrix is not positive definite (invalid q/phi)");
  }
  Eigen::MatrixXd l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) {
    throw DegenerateError("cholesky_lower: matrix is singular (invalid q/phi)");
  }
  return l;
}

namespace {

// Column index per individual, uniform over q. q == 1 consumes no draws so
// that every mode yields the same stream when there is one population.
std::vector<int> draw_assignment(Eigen::Index n, int q, RngState& rng) {
  std::vector<int> pick(static_cast<std::size_t>(n), 0);
  if (q > 1) {
    for (auto& p : pick) p = static_cast<int>(rng.uniform_index(q));
  }
  return pick;
}

Eigen::MatrixXd generate_items(const ModelSpec& spec, int m, RngState& rng) {
  spec.validate();
  if (m < 1) throw DomainError("number of items must be positive");
  const Eigen::Index n = spec.n;
  const int q = spec.q;
  const Eigen::MatrixXd chol = cholesky_lower(factor_correlation(q, spec.phi));

  // Correlated factor scores: one row per individual, one column per population.
  const Eigen::MatrixXd factors = standard_normal(rng, n, q) * chol.transpose();
  const double psi = spec.unique_loading();
  const double mean_sd = std::sqrt(spec.omega);

  std::vector<int> shared;
  if (spec.mode == AssignmentMode::shared_within_individual) shared = draw_assignment(n, q, rng);

  Eigen::MatrixXd items(n, m);
  for (int j = 0; j < m; ++j) {
    Eigen::MatrixXd candidates = spec.lambda * factors + psi * standard_normal(rng, n, q);
    if (spec.omega > 0.0) candidates += mean_sd * standard_normal(rng, n, q);

    std::vector<int> own;
    const std::vector<int>* pick = &shared;
    if (spec.mode == AssignmentMode::independent_per_item) {
      own = draw_assignment(n, q, rng);
      pick = &own;
    } else if (spec.mode == AssignmentMode::single_population) {
      own.assign(static_cast<std::size_t>(n), 0);
      pick = &own;
    }
    for (Eigen::Index i = 0; i < n; ++i) items(i, j) = candidates(i, (*pick)[static_cast<std::size_t>(i)]);
  }
  return items;
}

}  // namespace

BivariateSample generate_item_pair(const ModelSpec& spec, RngState& rng) {
  const std::uint64_t seed = rng.seed();
  const std::uint64_t stream = rng.stream_id();
  ItemScores scores = generate_items(spec, 2, rng);
  return BivariateSample(std::move(scores), SampleProvenance{spec, seed, stream});
}

Eigen::MatrixXd generate_m_items(const ModelSpec& spec, int m, RngState& rng) {
  if (m < 2) throw DomainError("generate_m_items: m must be at least 2");
  return generate_items(spec, m, rng);
}

}  // namespace hetpop
