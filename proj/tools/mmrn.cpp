// Command-line front end: fit-sdr, fit-svs, simulate, benchmark.
//
// Exit codes: 0 success, 1 usage or input error, 2 the fit produced valid
// output but stopped on the iteration cap.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmrn/benchmark.hpp"

namespace {

using mmrn::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

// ===== JSON config files (command line wins over file values) =====

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool defaults, bool,
                        std::string) const override {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable()) continue;
      const std::string name = opt->get_single_name();
      if (opt->count() > 0) {
        j[name] = opt->results().size() == 1 ? Json(opt->results().front())
                                             : Json(opt->results());
      } else if (defaults) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json j;
    try {
      input >> j;
    } catch (const Json::exception& e) {
      throw CLI::FileError(std::string("config is not valid JSON: ") +
                           e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const Json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) {
      throw CLI::FileError("config root must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto deeper = parents;
        deeper.push_back(key);
        flatten(value, deeper, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
};

// ===== Shared flag groups =====

struct FitFlags {
  mmrn::FitOptions opts;
  std::string init = "sir";
  bool paperDefaults = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f,
                   const std::string& seedFlag = "--seed") {
  cmd->add_option("--eps", f.opts.eps, "Objective perturbation constant")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", f.opts.alpha,
                  "Sufficient-increase constant of the line search")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sigma", f.opts.sigma, "Step-halving factor in (0,1)")
      ->check(CLI::Range(1e-6, 0.999999))
      ->capture_default_str();
  cmd->add_option("--rel-tol", f.opts.relTol,
                  "Relative objective-change stopping tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iter", f.opts.maxIter, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-halvings", f.opts.maxHalvings,
                  "Line-search halving cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--slices", f.opts.sirSlices,
                  "Slice count for the sliced-inverse-regression start")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  cmd->add_option("--init", f.init, "Initialization: sir or random")
      ->check(CLI::IsMember({"sir", "random"}))
      ->capture_default_str();
  cmd->add_option(seedFlag, f.opts.seed,
                  "Seed for the random init / degenerate-slicing fallback")
      ->capture_default_str();
  cmd->add_flag("--paper-defaults", f.paperDefaults,
                "Pin eps=1e-10 sigma=0.5 alpha=1e-20 rel-tol=1e-7 "
                "max-iter=1000 regardless of other flags");
}

mmrn::FitOptions resolve_fit_flags(const FitFlags& f) {
  mmrn::FitOptions opts = f.opts;
  opts.init = f.init == "random" ? mmrn::FitOptions::Init::kRandom
                                 : mmrn::FitOptions::Init::kSir;
  if (f.paperDefaults) {
    opts.eps = 1e-10;
    opts.sigma = 0.5;
    opts.alpha = 1e-20;
    opts.relTol = 1e-7;
    opts.maxIter = 1000;
  }
  return opts;
}

struct ScenarioFlags {
  std::string family = "model-a";
  int part = 1;
  int n = 100;
  int p = -1;  // -1: family default
  std::uint64_t seed = 0;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& s) {
  cmd->add_option("--family", s.family, "Scenario family")
      ->check(CLI::IsMember({"model-a", "model-b", "model-c", "toy-circle",
                             "study1", "study2", "study3", "study4"}))
      ->capture_default_str();
  cmd->add_option("--part", s.part,
                  "Predictor family for models: 1 normal, 2 nonnormal, "
                  "3 discrete")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd->add_option("--n", s.n, "Sample size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--p", s.p,
                  "Predictor count (default: 6 for models, 24 for studies, "
                  "20 for the toy circle)");
  cmd->add_option("--seed", s.seed, "Master seed")->capture_default_str();
}

mmrn::ScenarioSpec resolve_scenario_flags(const ScenarioFlags& s) {
  mmrn::ScenarioSpec spec;
  if (s.family == "model-a") {
    spec.family = mmrn::Family::kModelA;
  } else if (s.family == "model-b") {
    spec.family = mmrn::Family::kModelB;
  } else if (s.family == "model-c") {
    spec.family = mmrn::Family::kModelC;
  } else if (s.family == "toy-circle") {
    spec.family = mmrn::Family::kToyCircle;
  } else if (s.family == "study1") {
    spec.family = mmrn::Family::kStudy1;
  } else if (s.family == "study2") {
    spec.family = mmrn::Family::kStudy2;
  } else if (s.family == "study3") {
    spec.family = mmrn::Family::kStudy3;
  } else {
    spec.family = mmrn::Family::kStudy4;
  }
  spec.part = static_cast<mmrn::Part>(s.part);
  spec.n = s.n;
  if (s.p > 0) {
    spec.p = s.p;
  } else if (spec.family == mmrn::Family::kToyCircle) {
    spec.p = 20;
  } else if (spec.family == mmrn::Family::kModelA ||
             spec.family == mmrn::Family::kModelB ||
             spec.family == mmrn::Family::kModelC) {
    spec.p = 6;
  } else {
    spec.p = 24;
  }
  spec.seed = s.seed;
  spec.validate();
  return spec;
}

/// Make sure the output location is writable before burning compute.
void check_writable(const std::string& path) {
  if (path.empty()) return;
  std::ofstream probe(path, std::ios::app);
  if (!probe) {
    throw std::runtime_error("output path is not writable: " + path);
  }
}

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    mmrn::write_json(path, j);
  }
}

// ===== Subcommands =====

struct SdrArgs {
  std::string input;
  std::string output;
  int d = 1;
  FitFlags fit;
};

int run_fit_sdr(const SdrArgs& args) {
  check_writable(args.output);
  const mmrn::SampleSet data = mmrn::read_sample_csv(args.input);
  if (args.d < 1 || args.d >= data.p()) {
    std::cerr << "error: need 1 <= d < p (d=" << args.d << ", p=" << data.p()
              << ")\n";
    return kExitError;
  }
  const auto opts = resolve_fit_flags(args.fit);
  const mmrn::FitResult res = mmrn::fit_sdr(data, args.d, opts);
  Json j = mmrn::fit_result_to_json(res);
  j["d"] = args.d;
  j["input"] = args.input;
  emit(j, args.output);
  return res.converged ? kExitOk : kExitNotConverged;
}

struct SvsArgs {
  std::string input;
  std::string output;
  int d = 1;
  double lambda = -1.0;  // <0: tune over a grid
  bool lambdaSet = false;
  std::vector<double> theta;
  bool adaptive = true;
  double weightFloor = 1e-6;
  double truncationTol = 1e-7;
  int gridSize = 20;
  FitFlags fit;
};

int run_fit_svs(const SvsArgs& args) {
  check_writable(args.output);
  const mmrn::SampleSet data = mmrn::read_sample_csv(args.input);
  if (args.d < 1 || args.d >= data.p()) {
    std::cerr << "error: need 1 <= d < p (d=" << args.d << ", p=" << data.p()
              << ")\n";
    return kExitError;
  }
  const auto opts = resolve_fit_flags(args.fit);

  mmrn::PenaltyConfig cfg;
  cfg.adaptive = args.adaptive;
  cfg.weightFloor = args.weightFloor;
  cfg.truncationTol = args.truncationTol;
  if (!args.theta.empty()) {
    cfg.theta = Eigen::Map<const mmrn::Vector>(
        args.theta.data(), static_cast<Eigen::Index>(args.theta.size()));
  }

  Json j;
  bool converged = false;
  if (args.lambdaSet) {
    cfg.lambda = args.lambda;
    const auto res = mmrn::fit_svs(data, args.d, cfg, opts);
    j = mmrn::sparse_result_to_json(res);
    converged = res.fit.converged;
  } else {
    const auto grid = mmrn::default_lambda_grid(data, args.gridSize);
    const auto sel = mmrn::bic_select(data, args.d, grid, cfg, opts);
    j = mmrn::bic_selection_to_json(sel);
    converged = sel.best.fit.converged;
  }
  j["d"] = args.d;
  j["input"] = args.input;
  emit(j, args.output);
  return converged ? kExitOk : kExitNotConverged;
}

struct SimulateArgs {
  ScenarioFlags scenario;
  std::string output;
  std::string truthPath;
};

int run_simulate(const SimulateArgs& args) {
  const auto spec = resolve_scenario_flags(args.scenario);
  check_writable(args.output);
  const std::string truthPath =
      args.truthPath.empty() ? args.output + ".truth.json" : args.truthPath;
  check_writable(truthPath);
  const auto g = mmrn::generate(spec);
  mmrn::write_sample_csv(args.output, g.data);
  mmrn::write_json(truthPath, mmrn::truth_to_json(g.truth, spec.seed));
  return kExitOk;
}

struct BenchmarkArgs {
  ScenarioFlags scenario;
  std::string method = "sdr";
  int replicates = 10;
  std::string csvPath;
  std::string jsonPath;
  bool tuneLambda = true;
  double lambda = -1.0;
  bool lambdaSet = false;
  bool adaptive = true;
  int gridSize = 20;
  int restarts = 2;
  FitFlags fit;
};

int run_benchmark_cmd(const BenchmarkArgs& args) {
  const auto spec = resolve_scenario_flags(args.scenario);
  check_writable(args.csvPath);
  check_writable(args.jsonPath);

  mmrn::MethodConfig method;
  method.kind = args.method == "svs" ? mmrn::MethodConfig::Kind::kSvs
                                     : mmrn::MethodConfig::Kind::kSdr;
  method.opts = resolve_fit_flags(args.fit);
  method.restarts = args.restarts;
  method.penalty.adaptive = args.adaptive;
  if (args.lambdaSet) {
    method.tuneLambda = false;
    method.penalty.lambda = args.lambda;
  } else {
    method.tuneLambda = args.tuneLambda;
  }

  const auto report = mmrn::run_benchmark(spec, args.replicates, method);
  if (!args.csvPath.empty()) mmrn::write_benchmark_csv(args.csvPath, report);
  emit(mmrn::benchmark_report_to_json(report), args.jsonPath);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Distance-covariance sufficient dimension reduction and variable "
      "selection"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (flags win)");
  app.get_config_ptr()->configurable(false);

  SdrArgs sdr;
  CLI::App* cmdSdr =
      app.add_subcommand("fit-sdr", "Fit the dimension-reduction model");
  cmdSdr->add_option("--input,-i", sdr.input, "Sample CSV (x1..xp,y1..yq)")
      ->required();
  cmdSdr->add_option("--output,-o", sdr.output,
                     "Result JSON path (default: stdout)");
  cmdSdr->add_option("--d,-d", sdr.d, "Target subspace dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  add_fit_flags(cmdSdr, sdr.fit);

  SvsArgs svs;
  CLI::App* cmdSvs = app.add_subcommand(
      "fit-svs", "Fit the row-sparse variable-selection model");
  cmdSvs->add_option("--input,-i", svs.input, "Sample CSV (x1..xp,y1..yq)")
      ->required();
  cmdSvs->add_option("--output,-o", svs.output,
                     "Result JSON path (default: stdout)");
  cmdSvs->add_option("--d,-d", svs.d, "Target subspace dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  CLI::Option* lambdaOpt =
      cmdSvs
          ->add_option("--lambda", svs.lambda,
                       "Penalty strength; omit to tune over a grid")
          ->check(CLI::NonNegativeNumber);
  cmdSvs->add_option("--theta", svs.theta,
                     "Explicit per-row penalty weights (overrides --adaptive)");
  cmdSvs->add_flag("--adaptive,!--no-adaptive", svs.adaptive,
                   "Derive weights from an unpenalized pilot fit");
  cmdSvs->add_option("--weight-floor", svs.weightFloor,
                     "Floor inside the adaptive weights")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmdSvs->add_option("--truncation-tol", svs.truncationTol,
                     "Row norms at or below this are reported inactive")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmdSvs->add_option("--grid-size", svs.gridSize,
                     "Lambda grid size when tuning")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  add_fit_flags(cmdSvs, svs.fit);

  SimulateArgs sim;
  CLI::App* cmdSim =
      app.add_subcommand("simulate", "Generate a benchmark scenario");
  add_scenario_flags(cmdSim, sim.scenario);
  cmdSim->add_option("--output,-o", sim.output, "Data CSV path")->required();
  cmdSim->add_option("--truth", sim.truthPath,
                     "Ground-truth sidecar JSON (default: <output>.truth.json)");

  BenchmarkArgs bench;
  CLI::App* cmdBench = app.add_subcommand(
      "benchmark", "Run replicated scenarios and score the fits");
  add_scenario_flags(cmdBench, bench.scenario);
  cmdBench->add_option("--method", bench.method, "sdr or svs")
      ->check(CLI::IsMember({"sdr", "svs"}))
      ->capture_default_str();
  cmdBench->add_option("--reps", bench.replicates, "Replicate count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmdBench
      ->add_option("--restarts", bench.restarts,
                   "Extra random starts per replicate (best objective wins)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmdBench->add_option("--csv", bench.csvPath, "Per-replicate CSV path");
  cmdBench->add_option("--json", bench.jsonPath,
                       "Aggregate JSON path (default: stdout)");
  CLI::Option* benchLambda =
      cmdBench
          ->add_option("--lambda", bench.lambda,
                       "Fixed penalty strength for --method svs")
          ->check(CLI::NonNegativeNumber);
  cmdBench->add_flag("--adaptive,!--no-adaptive", bench.adaptive,
                     "Adaptive penalty weights for --method svs");
  add_fit_flags(cmdBench, bench.fit, "--fit-seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  svs.lambdaSet = lambdaOpt->count() > 0;
  bench.lambdaSet = benchLambda->count() > 0;

  try {
    if (cmdSdr->parsed()) return run_fit_sdr(sdr);
    if (cmdSvs->parsed()) return run_fit_svs(svs);
    if (cmdSim->parsed()) return run_simulate(sim);
    return run_benchmark_cmd(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
