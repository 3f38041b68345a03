// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tables produced along the way are written to the working
// directory as acceptance_table1.md and acceptance_table2.md.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hetpop/analytics.hpp"
#include "hetpop/experiment.hpp"
#include "hetpop/kappa.hpp"
#include "hetpop/model.hpp"
#include "hetpop/pca.hpp"
#include "hetpop/stochastics.hpp"

using namespace hetpop;

namespace {

// Tolerances, all absolute.
constexpr double kWhiteMeanTol = 1e-10;
constexpr double kWhiteVarTol = 1e-8;
constexpr double kWhiteCovTol = 1e-8;
constexpr double kReconstructionTol = 1e-8;
constexpr double kQuadrantTarget = 0.1012;
constexpr double kQuadrantTol = 0.002;
constexpr double kSharedRTol = 0.004;
constexpr double kFalsePositiveLo = 0.02;
constexpr double kFalsePositiveHi = 0.08;
constexpr double kKappaQ1Lo = 0.100 - 0.003;
constexpr double kKappaQ1Hi = 0.101 + 0.003;
constexpr double kP05Tol = 0.004;
constexpr double kKappaTol = 0.003;
constexpr double kBlockSecondsOnFourCores = 120.0;
constexpr double kStandardErrors = 3.0;

struct Check {
  std::string what;
  bool ok;
};

class Gate {
 public:
  void add(Check c) { checks_.push_back(std::move(c)); }

  void within(const std::string& label, double value, double target, double tol) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.4f (target %.4f +- %.4f)", label.c_str(), value, target, tol);
    add({buf, std::abs(value - target) <= tol});
  }

  void between(const std::string& label, double value, double lo, double hi) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.4f (range [%.4f, %.4f])", label.c_str(), value, lo, hi);
    add({buf, value >= lo && value <= hi});
  }

  // Prints the verdict line and the sub-checks, then resets.
  bool close(const std::string& id, const std::string& title) {
    bool ok = true;
    for (const auto& c : checks_) ok = ok && c.ok;
    std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", id.c_str(), title.c_str());
    for (const auto& c : checks_) std::printf("         %s %s\n", c.ok ? "ok  " : "FAIL", c.what.c_str());
    std::fflush(stdout);
    checks_.clear();
    all_ok_ = all_ok_ && ok;
    return ok;
  }

  bool all_ok() const { return all_ok_; }

 private:
  std::vector<Check> checks_;
  bool all_ok_ = true;
};

double cpu_seconds() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<double>(u.ru_utime.tv_sec + u.ru_stime.tv_sec) +
         1e-6 * static_cast<double>(u.ru_utime.tv_usec + u.ru_stime.tv_usec);
}

const ConditionResult& row(const std::vector<ConditionResult>& rows, int q, double lambda, Eigen::Index n) {
  for (const auto& r : rows)
    if (r.spec.q == q && std::abs(r.spec.lambda - lambda) < 1e-9 && r.spec.n == n) return r;
  throw std::runtime_error("missing condition");
}

std::string cond(int q, double lambda, Eigen::Index n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "q=%d lambda=%.2f n=%lld", q, lambda, static_cast<long long>(n));
  return buf;
}

void whitening(Gate& g) {
  std::mt19937_64 gen(9001);
  std::uniform_int_distribution<int> qd(1, 4);
  std::uniform_real_distribution<double> ld(0.3, 0.95), pd(0.0, 0.8), od(0.0, 1.0);
  std::uniform_int_distribution<int> nd(10, 3000);
  double worst_mean = 0, worst_var = 0, worst_cov = 0, worst_rec = 0;
  int failures = 0;
  for (int s = 0; s < 1000; ++s) {
    ModelSpec spec;
    spec.q = qd(gen);
    spec.lambda = ld(gen);
    spec.phi = pd(gen);
    spec.omega = od(gen);
    spec.n = nd(gen);
    RngState rng = seed_stream(9001, static_cast<std::uint64_t>(s));
    const BivariateSample x = generate_item_pair(spec, rng);
    const CorrelationSummary sum = summarize(x);
    const ComponentScores c = component_scores(x, sum);
    const double n = static_cast<double>(c.rows());
    const Eigen::Vector2d mean = c.scores.colwise().mean();
    const Eigen::Matrix2d cov = c.scores.transpose() * c.scores / (n - 1);
    Eigen::MatrixXd z(2, c.rows());
    z.row(0) = ((x.scores().col(0).array() - sum.mean1) / sum.sd1).transpose();
    z.row(1) = ((x.scores().col(1).array() - sum.mean2) / sum.sd2).transpose();
    const double rec = (c.loadings * c.scores.transpose() - z).cwiseAbs().maxCoeff();

    const double m = mean.cwiseAbs().maxCoeff();
    const double v = std::max(std::abs(cov(0, 0) - 1), std::abs(cov(1, 1) - 1));
    const double o = std::abs(cov(0, 1));
    worst_mean = std::max(worst_mean, m);
    worst_var = std::max(worst_var, v);
    worst_cov = std::max(worst_cov, o);
    worst_rec = std::max(worst_rec, rec);
    if (m > kWhiteMeanTol || v > kWhiteVarTol || o > kWhiteCovTol || rec > kReconstructionTol) ++failures;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "max |mean| = %.2e (tol %.0e)", worst_mean, kWhiteMeanTol);
  g.add({buf, worst_mean <= kWhiteMeanTol});
  std::snprintf(buf, sizeof buf, "max |var - 1| = %.2e (tol %.0e)", worst_var, kWhiteVarTol);
  g.add({buf, worst_var <= kWhiteVarTol});
  std::snprintf(buf, sizeof buf, "max |cov(c1, c2)| = %.2e (tol %.0e)", worst_cov, kWhiteCovTol);
  g.add({buf, worst_cov <= kWhiteCovTol});
  std::snprintf(buf, sizeof buf, "max reconstruction error = %.2e (tol %.0e)", worst_rec, kReconstructionTol);
  g.add({buf, worst_rec <= kReconstructionTol});
  std::snprintf(buf, sizeof buf, "samples violating any invariant = %d of 1000", failures);
  g.add({buf, failures == 0});
  g.close("AC9", "component-score whitening on 1000 random samples");
}

void quadrant_probability(Gate& g) {
  ModelSpec spec;
  spec.q = 1;
  spec.n = 1'000'000;
  RngState data = seed_stream(kDefaultSeed, 700);
  const BivariateSample shape = generate_item_pair(spec, data);
  std::uint64_t stream = 701;
  for (double r : {0.0, 0.3, 0.45, 0.6}) {
    RngState rng = seed_stream(kDefaultSeed, stream++);
    const ReferenceDistribution d = reference_distribution(r, shape, 20, ReferenceMethod::parametric, rng);
    const double mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / 20.0;
    char label[64];
    std::snprintf(label, sizeof label, "r=%.2f mean kappa_Y (20 runs, n=1e6)", r);
    g.within(label, mean, kQuadrantTarget, kQuadrantTol);
  }
  g.close("AC7", "asymptotic quadrant probability");
}

void illustrative(Gate& g) {
  ModelSpec spec;
  spec.q = 2;
  spec.lambda = 0.95;
  spec.n = 100'000;
  RngState data = seed_stream(kDefaultSeed, 0);
  const BivariateSample x = generate_item_pair(spec, data);
  RngState ref = seed_stream(kDefaultSeed, 0);
  const DetectionResult d = detect(x, 100, ReferenceMethod::parametric, ref);
  g.within("r", d.r, 0.451, 0.005);
  g.within("kappa_X", d.kappa_x, 0.056, 0.004);
  g.within("kappa_Y mean (100 runs)", d.kappa_y_mean, 0.108, 0.005);
  g.within("p05", d.p05, 0.099, 0.005);
  g.add({std::string("verdict ") + (d.heterogeneous ? "heterogeneous" : "homogeneous"), d.heterogeneous});
  g.close("AC5", "illustrative q=2 lambda=.95 n=100000 sample");
}

void shared_population(Gate& g) {
  for (int q : {2, 5}) {
    ModelSpec spec;
    spec.q = q;
    spec.lambda = 0.8;
    spec.n = 1'000'000;
    spec.mode = AssignmentMode::shared_within_individual;
    RngState rng = seed_stream(kDefaultSeed, 800 + static_cast<std::uint64_t>(q));
    const BivariateSample x = generate_item_pair(spec, rng);
    g.within("q=" + std::to_string(q) + " r at n=1e6", summarize(x).r, 0.64, kSharedRTol);

    spec.n = 500;
    HarnessParams h;
    h.nsamples = 1000;
    h.nruns = 500;
    const ConditionResult c = run_condition(spec, h, kDefaultSeed);
    g.between("q=" + std::to_string(q) + " detection rate (1000 reps, n=500)", c.detection_rate, kFalsePositiveLo,
              kFalsePositiveHi);
  }
  g.close("AC8", "shared item population per individual behaves as one population");
}

void write_table(const std::string& path, const std::vector<ConditionResult>& rows) {
  std::ofstream(path) << emit_table(rows, TableFormat::markdown);
}

}  // namespace

int main() {
  Gate g;
  const auto wall0 = std::chrono::steady_clock::now();

  whitening(g);
  quadrant_probability(g);
  illustrative(g);
  shared_population(g);

  // Table 1 at 8 threads, timing each q block in process CPU time.
  ConditionGrid t1 = table1_preset();
  t1.harness.threads = 8;
  std::vector<double> block_cpu(4, 0.0);
  double last = cpu_seconds();
  const auto table1 = run_grid(t1, [&](std::size_t, std::size_t, const ConditionResult& r) {
    const double now = cpu_seconds();
    block_cpu[static_cast<std::size_t>(r.spec.q)] += now - last;
    last = now;
  });
  write_table("acceptance_table1.md", table1);

  const double p05_target[] = {0.074, 0.082, 0.087};
  const Eigen::Index sizes[] = {250, 500, 1000};
  for (double lambda : {0.70, 0.75, 0.80, 0.85, 0.90}) {
    for (int k = 0; k < 3; ++k) {
      const ConditionResult& r = row(table1, 1, lambda, sizes[k]);
      const std::string c = cond(1, lambda, sizes[k]);
      g.between(c + " mean kappa_X", r.mean_kappa_x, kKappaQ1Lo, kKappaQ1Hi);
      g.between(c + " mean kappa_Y", r.mean_kappa_y, kKappaQ1Lo, kKappaQ1Hi);
      g.within(c + " mean p05", r.mean_p05, p05_target[k], kP05Tol);
      g.between(c + " detection rate", r.detection_rate, kFalsePositiveLo, kFalsePositiveHi);
    }
  }
  for (int q = 1; q <= 3; ++q) {
    char buf[128];
    const double four_core = block_cpu[static_cast<std::size_t>(q)] / 4.0;
    std::snprintf(buf, sizeof buf, "q=%d block: %.1f s CPU, %.1f s on 4 cores (limit %.0f s)", q,
                  block_cpu[static_cast<std::size_t>(q)], four_core, kBlockSecondsOnFourCores);
    g.add({buf, four_core < kBlockSecondsOnFourCores});
  }
  g.close("AC1", "single-population block of the loading x sample-size table");

  g.within(cond(2, 0.90, 1000) + " mean kappa_X", row(table1, 2, 0.90, 1000).mean_kappa_x, 0.066, kKappaTol);
  g.within(cond(2, 0.90, 1000) + " detection rate", row(table1, 2, 0.90, 1000).detection_rate, 0.99, 0.03);
  g.within(cond(2, 0.85, 1000) + " detection rate", row(table1, 2, 0.85, 1000).detection_rate, 0.91, 0.04);
  g.within(cond(2, 0.70, 250) + " detection rate", row(table1, 2, 0.70, 250).detection_rate, 0.11, 0.04);
  g.close("AC2", "two populations, uncorrelated factors");

  g.within(cond(3, 0.90, 1000) + " mean kappa_X", row(table1, 3, 0.90, 1000).mean_kappa_x, 0.075, kKappaTol);
  g.within(cond(3, 0.90, 1000) + " detection rate", row(table1, 3, 0.90, 1000).detection_rate, 0.95, 0.04);
  g.within(cond(3, 0.80, 500) + " detection rate", row(table1, 3, 0.80, 500).detection_rate, 0.33, 0.05);
  g.close("AC3", "three populations, uncorrelated factors");

  ConditionGrid t2 = table2_preset();
  t2.harness.threads = 8;
  const auto table2 = run_grid(t2);
  write_table("acceptance_table2.md", table2);
  g.within(cond(2, 0.90, 1000) + " detection rate", row(table2, 2, 0.90, 1000).detection_rate, 0.76, 0.05);
  g.within(cond(3, 0.90, 1000) + " detection rate", row(table2, 3, 0.90, 1000).detection_rate, 0.52, 0.05);
  g.within(cond(2, 0.70, 250) + " detection rate", row(table2, 2, 0.70, 250).detection_rate, 0.06, 0.04);
  g.close("AC4", "correlated factors (phi = .40)");

  int outside = 0;
  double worst = 0.0;
  std::string worst_label;
  for (const auto* table : {&table1, &table2}) {
    for (const auto& r : *table) {
      const double se = r.sd_r / std::sqrt(static_cast<double>(r.nsamples));
      const double z = std::abs(r.mean_r - r.expected_rho) / se;
      if (z >= kStandardErrors) ++outside;
      if (z > worst) {
        worst = z;
        char buf[128];
        std::snprintf(buf, sizeof buf, "q=%d lambda=%.2f phi=%.2f n=%lld", r.spec.q, r.spec.lambda, r.spec.phi,
                      static_cast<long long>(r.spec.n));
        worst_label = buf;
      }
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "conditions beyond %.0f standard errors: %d of %zu", kStandardErrors, outside,
                table1.size() + table2.size());
  g.add({buf, outside == 0});
  std::snprintf(buf, sizeof buf, "largest deviation %.2f SE at %s", worst, worst_label.c_str());
  g.add({buf, worst < kStandardErrors});
  g.close("AC6", "mean sample correlation matches the closed form in every condition");

  ConditionGrid t1_serial = table1_preset();
  t1_serial.harness.threads = 1;
  const auto serial = run_grid(t1_serial);
  const std::string a = emit_table(table1, TableFormat::raw_csv);
  const std::string b = emit_table(serial, TableFormat::raw_csv);
  std::snprintf(buf, sizeof buf, "raw CSV at 8 threads and at 1 thread: %zu and %zu bytes, %s", a.size(), b.size(),
                a == b ? "identical" : "different");
  g.add({buf, a == b});
  g.close("AC10", "thread count does not change results");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  std::printf("acceptance: %s (%.0f s wall, %.0f s CPU)\n", g.all_ok() ? "all criteria passed" : "FAILED", wall,
              cpu_seconds());
  return g.all_ok() ? 0 : 1;
}
