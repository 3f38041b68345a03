#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetpop/kappa.hpp"
#include "hetpop/model.hpp"

namespace hetpop {

inline constexpr std::uint64_t kDefaultSeed = 20210419;

struct HarnessParams {
  int nsamples = 1000;  // Monte-Carlo samples per condition
  int nruns = kDefaultReferenceRuns;
  ReferenceMethod method = ReferenceMethod::parametric;
  unsigned threads = 0;  // 0: all hardware threads; never changes results
};

struct ConditionGrid {
  std::vector<ModelSpec> conditions;
  HarnessParams harness;
  std::uint64_t base_seed = kDefaultSeed;
};

/// One table row.
struct ConditionResult {
  ModelSpec spec;
  int nsamples = 0;
  int nruns = 0;
  ReferenceMethod method = ReferenceMethod::parametric;
  double expected_rho = 0.0;
  double mean_r = 0.0;
  double sd_r = 0.0;
  double mean_kappa_x = 0.0;
  double sd_kappa_x = 0.0;
  double mean_kappa_y = 0.0;  // mean over samples of per-sample reference means
  double mean_p05 = 0.0;      // mean over samples of per-sample 5th percentiles
  int flagged = 0;
  double detection_rate = 0.0;  // flagged / nsamples
};

/// Stream id of replication `index` of a condition. It depends only on the
/// condition's parameters, so a condition gives the same numbers alone or
/// inside any grid.
std::uint64_t replication_stream(const ModelSpec& spec, std::uint64_t index);

ConditionResult run_condition(const ModelSpec& spec, const HarnessParams& harness, std::uint64_t base_seed);

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const ConditionResult&)>;

std::vector<ConditionResult> run_grid(const ConditionGrid& grid, const ProgressFn& progress = {});

/// 3 sample sizes x 5 loadings x q in {1, 2, 3}, phi = 0: 45 conditions.
ConditionGrid table1_preset();
/// Same loadings and sample sizes, q in {2, 3}, phi = .40: 30 conditions.
ConditionGrid table2_preset();
/// table1 conditions with 200 samples and 200 reference runs.
ConditionGrid quick_preset();
ConditionGrid preset_by_name(std::string_view name);

enum class TableFormat { csv, markdown, raw_csv };

/// csv and markdown show 3 decimals; raw_csv keeps 17 significant digits and
/// adds harness columns.
std::string emit_table(std::span<const ConditionResult> results, TableFormat format);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

double pairwise_sum(std::span<const double> values);

}  // namespace hetpop
