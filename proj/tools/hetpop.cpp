// hetpop: simulate heterogeneous item populations and test item pairs for them.
//
//   hetpop generate --q 2 --lambda 0.95 --n 100000 --out items.csv
//   hetpop detect   --in items.csv --all-pairs --json report.json
//   hetpop simulate --preset table1 --out-dir results
//   hetpop scatter  --q 2 --lambda 0.95 --n 100000 --out scatter.csv
//   hetpop oracle   --q 3 --lambda 0.85
//
// Any subcommand accepts --config FILE.json; its keys are option names and
// are overridden by flags given on the command line. HETPOP_SEED supplies the
// seed when neither a flag nor the config does.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetpop/analytics.hpp"
#include "hetpop/csv_io.hpp"
#include "hetpop/errors.hpp"
#include "hetpop/experiment.hpp"
#include "hetpop/kappa.hpp"
#include "hetpop/model.hpp"
#include "hetpop/pca.hpp"

namespace {

using json = nlohmann::json;
using namespace hetpop;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

struct ModelFlags {
  int q = 2;
  double lambda = 0.95;
  double phi = 0.0;
  double omega = 0.0;
  long long n = 100000;
  std::string mode = "independent_per_item";

  ModelSpec spec() const {
    ModelSpec s;
    s.q = q;
    s.lambda = lambda;
    s.phi = phi;
    s.omega = omega;
    s.n = static_cast<Eigen::Index>(n);
    s.mode = parse_assignment_mode(mode);
    s.validate();
    return s;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--q", f.q, "Number of item populations")->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Common factor loading in (0, 1]")->capture_default_str();
  cmd->add_option("--phi", f.phi, "Correlation between population factors in [0, 1)")->capture_default_str();
  cmd->add_option("--omega", f.omega, "Variance of item means")->capture_default_str();
  cmd->add_option("--n", f.n, "Number of individuals")->capture_default_str();
  cmd->add_option("--mode", f.mode, "independent_per_item | shared_within_individual | single_population")
      ->capture_default_str();
}

struct InputFlags {
  std::string in;
  bool no_header = false;
  std::string col_a;
  std::string col_b;
};

void add_input_flags(CLI::App* cmd, InputFlags& f, bool required) {
  auto* opt = cmd->add_option("--in", f.in, "Input CSV file");
  if (required) opt->required();
  cmd->add_flag("--no-header", f.no_header, "Input has no header row");
  cmd->add_option("--col-a", f.col_a, "First column (name or 1-based index)");
  cmd->add_option("--col-b", f.col_b, "Second column (name or 1-based index)");
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("HETPOP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw DomainError(std::string("HETPOP_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return kDefaultSeed;
}

// Output stream for a path, "-" meaning stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw DataError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

BivariateSample pair_from_table(const NumericTable& table, Eigen::Index a, Eigen::Index b) {
  ItemScores scores(table.values.rows(), 2);
  scores.col(0) = table.values.col(a);
  scores.col(1) = table.values.col(b);
  if (scores.rows() < 3) throw DataError("need at least 3 rows, found " + std::to_string(scores.rows()));
  return BivariateSample(std::move(scores));
}

json report_json(const std::string& a, const std::string& b, const DetectionResult& d) {
  return json{{"pair", {a, b}},          {"n", d.n},         {"r", d.r},
              {"kappa_x", d.kappa_x},    {"kappa_y_mean", d.kappa_y_mean},
              {"p05", d.p05},            {"nruns", d.nruns}, {"method", std::string(to_string(d.method))},
              {"heterogeneous", d.heterogeneous}};
}

// Config keys become "--key value" tokens placed before the user's tokens;
// every option takes the last value given, so flags win.
std::vector<std::string> config_tokens(const json& cfg, const std::vector<std::string>& reserved) {
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (std::find(reserved.begin(), reserved.end(), key) != reserved.end()) continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number_unsigned()) {
      tokens.push_back(flag);
      tokens.push_back(std::to_string(value.get<std::uint64_t>()));
    } else if (value.is_number_integer()) {
      tokens.push_back(flag);
      tokens.push_back(std::to_string(value.get<std::int64_t>()));
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(format_double(value.get<double>()));
    } else {
      throw DomainError("config key '" + key + "' must be a scalar");
    }
  }
  return tokens;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  try {
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw DomainError("config '" + path + "' must hold a JSON object");
    return cfg;
  } catch (const json::parse_error& e) {
    throw DomainError("config '" + path + "': " + e.what());
  }
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.q = j.value("q", s.q);
  s.lambda = j.value("lambda", s.lambda);
  s.phi = j.value("phi", s.phi);
  s.omega = j.value("omega", s.omega);
  s.n = j.value("n", static_cast<std::int64_t>(s.n));
  if (j.contains("mode")) s.mode = parse_assignment_mode(j.at("mode").get<std::string>());
  s.validate();
  return s;
}

// "conditions": [{...}, ...] or "grid": {"q": [...], "lambda": [...], ...}.
std::vector<ModelSpec> conditions_from_json(const json& cfg) {
  std::vector<ModelSpec> out;
  if (cfg.contains("conditions")) {
    for (const auto& c : cfg.at("conditions")) out.push_back(spec_from_json(c));
  }
  if (cfg.contains("grid")) {
    const json& g = cfg.at("grid");
    auto axis = [&](const char* key, json fallback) {
      if (!g.contains(key)) return fallback;
      const json& v = g.at(key);
      return v.is_array() ? v : json::array({v});
    };
    for (const auto& q : axis("q", {1}))
      for (const auto& lambda : axis("lambda", {0.7}))
        for (const auto& phi : axis("phi", {0.0}))
          for (const auto& omega : axis("omega", {0.0}))
            for (const auto& n : axis("n", {250}))
              for (const auto& mode : axis("mode", {"independent_per_item"}))
                out.push_back(spec_from_json(
                    json{{"q", q}, {"lambda", lambda}, {"phi", phi}, {"omega", omega}, {"n", n}, {"mode", mode}}));
  }
  return out;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // Pull in --config before parsing so its values act as defaults.
  json cfg = json::object();
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    }
    if (!path.empty()) cfg = load_json(path);
  }

  CLI::App app{"Heterogeneous item populations: simulation and detection"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON file with option defaults");
    return cmd->add_option("--seed", seed, "Random seed (default: HETPOP_SEED or 20210419)");
  };

  // generate
  ModelFlags gen_model;
  int gen_m = 2;
  std::string gen_out = "-";
  auto* gen = app.add_subcommand("generate", "Write simulated item scores as CSV");
  add_model_flags(gen, gen_model);
  gen->add_option("--m", gen_m, "Number of items")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV ('-' for stdout)");
  auto* gen_seed = add_common(gen);

  // detect
  InputFlags det_in;
  bool det_all_pairs = false;
  int det_runs = kDefaultReferenceRuns;
  std::string det_method = "parametric";
  std::string det_json;
  auto* det = app.add_subcommand("detect", "Test item pairs for heterogeneous item populations");
  add_input_flags(det, det_in, true);
  det->add_flag("--all-pairs", det_all_pairs, "Test every pair of columns");
  det->add_option("--runs", det_runs, "Reference runs per pair")->capture_default_str();
  det->add_option("--method", det_method, "parametric | bootstrap")->capture_default_str();
  det->add_option("--json", det_json, "Also write a JSON report ('-' for stdout)");
  det->add_option("--threads", threads, "Worker threads (0: all cores)");
  auto* det_seed = add_common(det);

  // simulate
  std::string sim_preset;
  std::string sim_out_dir;
  int sim_nsamples = 0;
  int sim_nruns = 0;
  std::string sim_method;
  auto* sim = app.add_subcommand("simulate", "Reproduce detection-rate tables");
  sim->add_option("--preset", sim_preset, "table1 | table2 | quick");
  sim->add_option("--out-dir", sim_out_dir, "Directory for the table files")->required();
  sim->add_option("--nsamples", sim_nsamples, "Override samples per condition");
  sim->add_option("--nruns", sim_nruns, "Override reference runs per sample");
  sim->add_option("--method", sim_method, "parametric | bootstrap");
  sim->add_option("--threads", threads, "Worker threads (0: all cores)");
  auto* sim_seed = add_common(sim);

  // scatter
  ModelFlags sc_model;
  InputFlags sc_in;
  std::string sc_out = "-";
  auto* sc = app.add_subcommand("scatter", "Write raw and component scores for plotting");
  add_model_flags(sc, sc_model);
  add_input_flags(sc, sc_in, false);
  sc->add_option("--out", sc_out, "Output CSV ('-' for stdout)");
  auto* sc_seed = add_common(sc);

  // oracle
  int or_q = 2;
  double or_lambda = 1.0;
  double or_phi = 0.0;
  double or_omega = 0.0;
  bool or_json = false;
  auto* orc = app.add_subcommand("oracle", "Closed-form correlation and loading");
  orc->add_option("--q", or_q, "Number of item populations")->capture_default_str();
  orc->add_option("--lambda", or_lambda, "Common factor loading")->capture_default_str();
  orc->add_option("--phi", or_phi, "Factor correlation")->capture_default_str();
  orc->add_option("--omega", or_omega, "Variance of item means")->capture_default_str();
  orc->add_flag("--json", or_json, "Print JSON instead of text");
  add_common(orc);

  std::vector<std::string> tokens;
  if (!args.empty()) {
    tokens.push_back(args.front());
    const auto extra = config_tokens(cfg, {"conditions", "grid"});
    tokens.insert(tokens.end(), extra.begin(), extra.end());
    tokens.insert(tokens.end(), args.begin() + 1, args.end());
  }
  std::reverse(tokens.begin(), tokens.end());
  try {
    app.parse(tokens);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (gen->parsed()) {
    const ModelSpec spec = gen_model.spec();
    RngState rng = seed_stream(resolve_seed(gen_seed, seed), 0);
    const Eigen::MatrixXd items = generate_m_items(spec, gen_m, rng);
    std::vector<std::string> names;
    for (int j = 1; j <= gen_m; ++j) names.push_back("item" + std::to_string(j));
    Output out(gen_out);
    write_csv(out.stream(), names, items);
    return 0;
  }

  if (det->parsed()) {
    const std::uint64_t s = resolve_seed(det_seed, seed);
    const ReferenceMethod method = parse_reference_method(det_method);
    const NumericTable table = read_csv(det_in.in, !det_in.no_header);
    if (table.values.cols() < 2) throw DataError("input needs at least two numeric columns");

    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    if (det_all_pairs) {
      for (Eigen::Index a = 0; a < table.values.cols(); ++a)
        for (Eigen::Index b = a + 1; b < table.values.cols(); ++b) pairs.emplace_back(a, b);
    } else {
      const Eigen::Index a = det_in.col_a.empty() ? 0 : table.column(det_in.col_a);
      const Eigen::Index b = det_in.col_b.empty() ? 1 : table.column(det_in.col_b);
      if (a == b) throw DomainError("--col-a and --col-b name the same column");
      pairs.emplace_back(a, b);
    }

    // Pair k always uses stream k, so results do not depend on --threads.
    std::vector<DetectionResult> results(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
      const BivariateSample sample = pair_from_table(table, pairs[k].first, pairs[k].second);
      RngState rng = seed_stream(s, k);
      results[k] = detect(sample, det_runs, method, rng);
    });

    std::printf("%-24s %8s %8s %8s %12s %8s  %s\n", "pair", "n", "r", "kappa_x", "kappa_y_mean", "p05",
                "verdict");
    json report = json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& d = results[k];
      const std::string& a = table.names[static_cast<std::size_t>(pairs[k].first)];
      const std::string& b = table.names[static_cast<std::size_t>(pairs[k].second)];
      std::printf("%-24s %8lld %8.4f %8.4f %12.4f %8.4f  %s\n", (a + "," + b).c_str(),
                  static_cast<long long>(d.n), d.r, d.kappa_x, d.kappa_y_mean, d.p05,
                  d.heterogeneous ? "heterogeneous" : "homogeneous");
      report.push_back(report_json(a, b, d));
    }
    if (!det_json.empty()) {
      Output out(det_json);
      out.stream() << (det_all_pairs ? report : report.front()).dump(2) << '\n';
    }
    return 0;
  }

  if (sim->parsed()) {
    ConditionGrid grid;
    std::string name = sim_preset;
    if (!sim_preset.empty()) {
      grid = preset_by_name(sim_preset);
    } else {
      grid.conditions = conditions_from_json(cfg);
      name = "grid";
      if (grid.conditions.empty()) throw DomainError("simulate needs --preset or a config with conditions/grid");
    }
    if (sim_nsamples > 0) grid.harness.nsamples = sim_nsamples;
    if (sim_nruns > 0) grid.harness.nruns = sim_nruns;
    if (!sim_method.empty()) grid.harness.method = parse_reference_method(sim_method);
    grid.harness.threads = threads;
    grid.base_seed = resolve_seed(sim_seed, seed);

    const auto results = run_grid(grid, [](std::size_t done, std::size_t total, const ConditionResult& c) {
      std::fprintf(stderr, "[%zu/%zu] q=%d lambda=%.2f phi=%.2f omega=%.2f n=%lld  kappa_x=%.3f detection=%.3f\n",
                   done, total, c.spec.q, c.spec.lambda, c.spec.phi, c.spec.omega,
                   static_cast<long long>(c.spec.n), c.mean_kappa_x, c.detection_rate);
    });

    const std::filesystem::path dir(sim_out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / (name + ".csv"), emit_table(results, TableFormat::csv));
    write_text_file(dir / (name + "_raw.csv"), emit_table(results, TableFormat::raw_csv));
    write_text_file(dir / (name + ".md"), emit_table(results, TableFormat::markdown));
    std::fprintf(stderr, "wrote %s/%s{.csv,_raw.csv,.md}\n", dir.string().c_str(), name.c_str());
    return 0;
  }

  if (sc->parsed()) {
    ItemScores scores;
    if (!sc_in.in.empty()) {
      const NumericTable table = read_csv(sc_in.in, !sc_in.no_header);
      if (table.values.cols() < 2) throw DataError("input needs at least two numeric columns");
      const Eigen::Index a = sc_in.col_a.empty() ? 0 : table.column(sc_in.col_a);
      const Eigen::Index b = sc_in.col_b.empty() ? 1 : table.column(sc_in.col_b);
      scores = pair_from_table(table, a, b).scores();
    } else {
      RngState rng = seed_stream(resolve_seed(sc_seed, seed), 0);
      scores = generate_item_pair(sc_model.spec(), rng).scores();
    }
    const BivariateSample sample(scores);
    const CorrelationSummary summary = summarize(sample);
    const ComponentScores comp = component_scores(sample, summary);
    Eigen::MatrixXd out(sample.rows(), 4);
    out << sample.scores(), comp.scores;
    Output o(sc_out);
    write_csv(o.stream(), {"x1", "x2", "c1", "c2"}, out);
    return 0;
  }

  if (orc->parsed()) {
    const CorrelationPrediction p = expected_correlation(or_q, or_lambda, or_phi, or_omega);
    const double loading = expected_loading(or_q, or_lambda, or_phi, or_omega);
    const bool exceeds = loading > kSinglePopulationLoadingBound;
    if (or_json) {
      std::cout << json{{"q", or_q},
                        {"lambda", or_lambda},
                        {"phi", or_phi},
                        {"omega", or_omega},
                        {"rho", p.rho},
                        {"common_part", p.common_part},
                        {"subpopulation_part", p.subpopulation_part},
                        {"loading", loading},
                        {"exceeds_single_population_bound", exceeds}}
                       .dump(2)
                << '\n';
    } else {
      std::printf("rho                 %.3f  (%s)\n", p.rho, format_double(p.rho).c_str());
      std::printf("  common part       %.3f\n", p.common_part);
      std::printf("  subpopulation     %.3f\n", p.subpopulation_part);
      std::printf("loading             %.3f  (%s)\n", loading, format_double(loading).c_str());
      std::printf("exceeds .71 bound   %s\n", exceeds ? "true" : "false");
    }
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
