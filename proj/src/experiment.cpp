#include "hetpop/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "hetpop/analytics.hpp"
#include "hetpop/errors.hpp"

namespace hetpop {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

double mean_of(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

double sd_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [mean](double x) { return (x - mean) * (x - mean); });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

std::uint64_t condition_key(const ModelSpec& spec) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(spec.q));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(spec.lambda));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(spec.phi));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(spec.omega));
  h = mix64(h ^ static_cast<std::uint64_t>(spec.n));
  return mix64(h ^ static_cast<std::uint64_t>(spec.mode));
}

std::string condition_label(const ModelSpec& s) {
  std::ostringstream os;
  os << "q=" << s.q << " lambda=" << s.lambda << " phi=" << s.phi << " omega=" << s.omega << " n=" << s.n
     << " mode=" << to_string(s.mode);
  return os.str();
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t replication_stream(const ModelSpec& spec, std::uint64_t index) {
  return mix64(condition_key(spec)) ^ index;
}

ConditionResult run_condition(const ModelSpec& spec, const HarnessParams& harness, std::uint64_t base_seed) {
  spec.validate();
  if (harness.nsamples < 2) throw DomainError("nsamples must be at least 2");
  if (harness.nruns < kMinReferenceRuns) throw DomainError("nruns must be at least 20");

  const auto count = static_cast<std::size_t>(harness.nsamples);
  std::vector<double> r(count), kx(count), ky(count), p05(count);
  std::vector<char> flag(count);

  try {
    parallel_for(count, harness.threads, [&](std::size_t i) {
      RngState rng = seed_stream(base_seed, replication_stream(spec, i));
      const BivariateSample sample = generate_item_pair(spec, rng);
      const DetectionResult d = detect(sample, harness.nruns, harness.method, rng);
      r[i] = d.r;
      kx[i] = d.kappa_x;
      ky[i] = d.kappa_y_mean;
      p05[i] = d.p05;
      flag[i] = d.heterogeneous ? 1 : 0;
    });
  } catch (const std::exception& e) {
    throw std::runtime_error("condition " + condition_label(spec) + ": " + e.what());
  }

  ConditionResult out;
  out.spec = spec;
  out.nsamples = harness.nsamples;
  out.nruns = harness.nruns;
  out.method = harness.method;
  out.expected_rho = expected_correlation(spec.q, spec.lambda, spec.phi, spec.omega).rho;
  out.mean_r = mean_of(r);
  out.sd_r = sd_of(r, out.mean_r);
  out.mean_kappa_x = mean_of(kx);
  out.sd_kappa_x = sd_of(kx, out.mean_kappa_x);
  out.mean_kappa_y = mean_of(ky);
  out.mean_p05 = mean_of(p05);
  out.flagged = static_cast<int>(std::count(flag.begin(), flag.end(), 1));
  out.detection_rate = static_cast<double>(out.flagged) / static_cast<double>(harness.nsamples);
  return out;
}

std::vector<ConditionResult> run_grid(const ConditionGrid& grid, const ProgressFn& progress) {
  if (grid.conditions.empty()) throw DomainError("condition grid is empty");
  std::vector<ConditionResult> results;
  results.reserve(grid.conditions.size());
  for (const ModelSpec& spec : grid.conditions) {
    results.push_back(run_condition(spec, grid.harness, grid.base_seed));
    if (progress) progress(results.size(), grid.conditions.size(), results.back());
  }
  return results;
}

namespace {

ConditionGrid loading_grid(std::initializer_list<int> qs, double phi) {
  ConditionGrid grid;
  for (int q : qs) {
    for (double lambda : {0.70, 0.75, 0.80, 0.85, 0.90}) {
      for (Eigen::Index n : {250, 500, 1000}) {
        ModelSpec s;
        s.q = q;
        s.lambda = lambda;
        s.phi = phi;
        s.n = n;
        grid.conditions.push_back(s);
      }
    }
  }
  return grid;
}

}  // namespace

ConditionGrid table1_preset() { return loading_grid({1, 2, 3}, 0.0); }

ConditionGrid table2_preset() { return loading_grid({2, 3}, 0.40); }

ConditionGrid quick_preset() {
  ConditionGrid grid = table1_preset();
  grid.harness.nsamples = 200;
  grid.harness.nruns = 200;
  return grid;
}

ConditionGrid preset_by_name(std::string_view name) {
  if (name == "table1") return table1_preset();
  if (name == "table2") return table2_preset();
  if (name == "quick") return quick_preset();
  throw DomainError("unknown preset '" + std::string(name) + "' (expected table1, table2 or quick)");
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

const std::vector<std::string> kDisplayColumns = {
    "q", "lambda", "phi", "omega", "n", "expected_rho", "mean_kappa_x", "sd_kappa_x",
    "mean_kappa_y", "mean_p05", "detection_rate"};

std::vector<std::string> display_row(const ConditionResult& c) {
  return {std::to_string(c.spec.q), fixed3(c.spec.lambda), fixed3(c.spec.phi),  fixed3(c.spec.omega),
          std::to_string(c.spec.n), fixed3(c.expected_rho), fixed3(c.mean_kappa_x), fixed3(c.sd_kappa_x),
          fixed3(c.mean_kappa_y), fixed3(c.mean_p05),      fixed3(c.detection_rate)};
}

std::string join(const std::vector<std::string>& cells, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += sep;
    out += cells[i];
  }
  return out;
}

}  // namespace

std::string emit_table(std::span<const ConditionResult> results, TableFormat format) {
  if (results.empty()) throw DomainError("emit_table: no results");
  std::string out;
  switch (format) {
    case TableFormat::csv:
      out += join(kDisplayColumns, ",") + "\n";
      for (const auto& c : results) out += join(display_row(c), ",") + "\n";
      break;
    case TableFormat::markdown: {
      out += "| " + join(kDisplayColumns, " | ") + " |\n";
      out += "|";
      for (std::size_t i = 0; i < kDisplayColumns.size(); ++i) out += "---|";
      out += "\n";
      for (const auto& c : results) out += "| " + join(display_row(c), " | ") + " |\n";
      break;
    }
    case TableFormat::raw_csv:
      out += "q,lambda,phi,omega,n,mode,nsamples,nruns,method,expected_rho,mean_r,sd_r,"
             "mean_kappa_x,sd_kappa_x,mean_kappa_y,mean_p05,flagged,detection_rate\n";
      for (const auto& c : results) {
        out += join({std::to_string(c.spec.q), full(c.spec.lambda), full(c.spec.phi), full(c.spec.omega),
                     std::to_string(c.spec.n), std::string(to_string(c.spec.mode)), std::to_string(c.nsamples),
                     std::to_string(c.nruns), std::string(to_string(c.method)), full(c.expected_rho),
                     full(c.mean_r), full(c.sd_r), full(c.mean_kappa_x), full(c.sd_kappa_x),
                     full(c.mean_kappa_y), full(c.mean_p05), std::to_string(c.flagged),
                     full(c.detection_rate)},
                    ",") +
               "\n";
      }
      break;
  }
  return out;
}

}  // namespace hetpop
