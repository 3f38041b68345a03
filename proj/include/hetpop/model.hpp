#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "hetpop/stochastics.hpp"

namespace hetpop {

/// How items are assigned to item populations for each individual.
enum class AssignmentMode {
  independent_per_item,      // every (individual, item) draws its own population
  shared_within_individual,  // one population per individual, reused for all items
  single_population,         // everybody answers items of population 1
};

std::string_view to_string(AssignmentMode mode);
AssignmentMode parse_assignment_mode(std::string_view text);

/// Full generative condition of the essentially-parallel model.
struct ModelSpec {
  int q = 1;              // number of item populations (one factor each)
  double lambda = 0.7;    // common loading, equal for all items
  double phi = 0.0;       // correlation between population factors
  double omega = 0.0;     // variance of item means
  Eigen::Index n = 250;   // individuals
  AssignmentMode mode = AssignmentMode::independent_per_item;

  /// Throws DomainError unless q >= 1, lambda in (0,1], phi in [0,1),
  /// omega >= 0 and n >= 2.
  void validate() const;

  /// Unique-factor loading sqrt(1 - lambda^2).
  double unique_loading() const;

  bool operator==(const ModelSpec&) const = default;
};

using ItemScores = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct SampleProvenance {
  ModelSpec spec;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// n x 2 matrix of item scores; provenance is empty for ingested data.
class BivariateSample {
 public:
  /// Throws DataError for n < 2 or non-finite entries.
  explicit BivariateSample(ItemScores scores, std::optional<SampleProvenance> provenance = {});

  const ItemScores& scores() const noexcept { return scores_; }
  Eigen::Index rows() const noexcept { return scores_.rows(); }
  const std::optional<SampleProvenance>& provenance() const noexcept { return provenance_; }
  bool ingested() const noexcept { return !provenance_.has_value(); }

 private:
  ItemScores scores_;
  std::optional<SampleProvenance> provenance_;
};

/// q x q compound-symmetry matrix: unit diagonal, phi elsewhere.
Eigen::MatrixXd factor_correlation(int q, double phi);

/// Lower Cholesky factor L with L L' = m. Throws DegenerateError when m is
/// not symmetric positive definite.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m);

/// Two item columns for spec.n individuals.
BivariateSample generate_item_pair(const ModelSpec& spec, RngState& rng);

/// n x m item scores; every item draws its population assignment anew
/// (or shares the individual's population under shared_within_individual).
Eigen::MatrixXd generate_m_items(const ModelSpec& spec, int m, RngState& rng);

}  // namespace hetpop
