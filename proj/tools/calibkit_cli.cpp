// calibkit: calibration error estimates and calibration tests for
// probabilistic classifiers, plus the synthetic Dirichlet experiments.
//
//   calibkit estimate data.csv --skce-uq --kernel "exp(nu=median)"
//   calibkit test data.csv --method A_uq --boot 1000 --seed 7
//   calibkit synth M2 --n 250 --seed 1 --out m2.csv
//   calibkit experiment errors --models M1,M2,M3 --R 500 --out errors.csv
//   calibkit experiment pvalues --models M1 --R 500 --out pvalues.csv
//
// Exit codes: 0 success, 1 rejection under --fail-on-reject, 2 input error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calibkit/calibkit.hpp"

namespace {

using namespace calibkit;

constexpr int kExitInputError = 2;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadParameter, what + ": cannot parse '" + item + "'");
    }
  }
  if (values.empty()) throw Error(ErrorKind::BadParameter, what + " is empty");
  return values;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) names.push_back(item);
  }
  return names;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

/// `from:to:step` or a comma list.
std::vector<double> parse_alpha_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text, "significance grid");
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || !(parts[2] > 0.0)) throw Error(ErrorKind::BadParameter, "grid must be from:to:step");
  std::vector<double> grid;
  const auto count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (int i = 0; i <= count; ++i) grid.push_back(std::round((parts[0] + i * parts[2]) * 1e12) / 1e12);
  return grid;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CALIBKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadParameter, "CALIBKIT_SEED must be a non-negative integer");
    }
  }
  return 0;
}

/// Writes to `path`, or stdout for "-".
template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write(out);
  if (!out) throw Error(ErrorKind::IoError, "write failure on " + path);
}

std::string format_params(const TestResult& r) {
  std::string s;
  for (const auto& [key, value] : r.params) {
    if (!s.empty()) s += ';';
    s += key + "=" + format_double(value);
  }
  if (r.seed) s += (s.empty() ? "" : ";") + std::string("seed=") + std::to_string(*r.seed);
  return s;
}

// ---------------------------------------------------------------------------

struct EstimateOptions {
  std::string dataset;
  bool skce_b = false, skce_uq = false, skce_ul = false, ece = false, mmce = false;
  std::string kernel = "exp(nu=median)";
  std::string bins = "uniform:10";
  std::string meantv_alpha;
  std::string out = "-";
};

int run_estimate(const EstimateOptions& opt) {
  const LabeledDataset ds = load_dataset_csv(std::filesystem::path(opt.dataset));
  const bool any = opt.skce_b || opt.skce_uq || opt.skce_ul || opt.ece || opt.mmce;
  const KernelChoice choice = parse_kernel(opt.kernel);
  std::optional<Vector> alpha;
  if (!opt.meantv_alpha.empty()) alpha = to_vector(parse_list(opt.meantv_alpha, "--meantv-alpha"));

  std::ostringstream rows;
  rows << "estimator,value,n,descriptor\n";
  const bool want_skce = !any || opt.skce_b || opt.skce_uq || opt.skce_ul || opt.mmce;
  std::optional<MatrixKernelSpec> kernel;
  if (want_skce) kernel = resolve_kernel(choice, ds, alpha);
  auto row = [&](const std::string& name, double value, const std::string& descriptor) {
    rows << name << ',' << format_double(value) << ',' << ds.size() << ',' << csv_field(descriptor) << '\n';
  };
  if (!any || opt.skce_b) row("SKCE_b", skce_biased(*kernel, ds).value, kernel->describe());
  if (!any || opt.skce_uq) row("SKCE_uq", skce_unbiased(*kernel, ds).value, kernel->describe());
  if (!any || opt.skce_ul) row("SKCE_ul", skce_linear(*kernel, ds).value, kernel->describe());
  if (!any || opt.ece) {
    const auto binning = parse_binning(opt.bins);
    row("ECE", ece_histogram(ds, binning).value, describe(binning));
  }
  if (opt.mmce) {
    // The scalar kernel acts on the binary max-confidence view.
    row("MMCE2", mmce_squared(kernel->terms().front().scalar, ds), kernel->terms().front().scalar.describe());
  }
  emit(opt.out, [&](std::ostream& o) { o << rows.str(); });
  return 0;
}

struct TestOptions {
  std::string dataset;
  std::string method;
  std::string kernel = "exp(nu=median)";
  std::string bins = "uniform:10";
  std::string meantv_alpha;
  double alpha = 0.05;
  int boot = kDefaultBootstrapRounds;
  std::optional<std::uint64_t> seed;
  std::string p = "2", q = "2";
  int workers = 1;
  bool fail_on_reject = false;
};

int run_test(const TestOptions& opt) {
  const LabeledDataset ds = load_dataset_csv(std::filesystem::path(opt.dataset));
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw Error(ErrorKind::BadParameter, "--alpha must lie in (0, 1)");
  const TestMethod method = parse_test_method(opt.method);
  const std::uint64_t seed = resolve_seed(opt.seed);

  TestResult result{};
  if (method == TestMethod::ConsistencyResampling) {
    result = test_consistency_resampling(ds, parse_binning(opt.bins), opt.boot, seed, opt.workers);
  } else {
    std::optional<Vector> alpha;
    if (!opt.meantv_alpha.empty()) alpha = to_vector(parse_list(opt.meantv_alpha, "--meantv-alpha"));
    const MatrixKernelSpec kernel = resolve_kernel(parse_kernel(opt.kernel), ds, alpha);
    switch (method) {
      case TestMethod::AsymptoticLinear:
        result = test_linear_asymptotic(kernel, ds);
        break;
      case TestMethod::AsymptoticQuadraticBootstrap:
        result = test_quadratic_bootstrap(kernel, ds, opt.boot, seed, opt.workers);
        break;
      default:
        result = test_distribution_free(method, kernel, ds, parse_norm_index(opt.p), parse_norm_index(opt.q));
        break;
    }
  }
  const bool reject = result.rejects(opt.alpha);
  std::cout << "method,statistic,pvalue,alpha,reject,descriptor,params\n"
            << to_string(result.method) << ',' << format_double(result.statistic) << ','
            << format_double(result.pvalue) << ',' << format_double(opt.alpha) << ',' << (reject ? "true" : "false")
            << ',' << csv_field(result.kernel) << ',' << csv_field(format_params(result)) << '\n';
  return reject && opt.fail_on_reject ? 1 : 0;
}

struct ModelOptions {
  std::string preset;
  std::string alpha, pi, beta;
  int m = 10;
};

ModelSpec resolve_model(const ModelOptions& opt) {
  if (!opt.preset.empty()) return preset_model(parse_preset(opt.preset), opt.m);
  if (opt.alpha.empty() || opt.pi.empty() || opt.beta.empty()) {
    throw Error(ErrorKind::BadParameter, "give a preset (M1, M2, M3) or all of --alpha, --pi, --beta");
  }
  auto alpha = parse_list(opt.alpha, "--alpha");
  if (alpha.size() == 1) alpha.assign(static_cast<std::size_t>(opt.m), alpha.front());
  auto beta = parse_list(opt.beta, "--beta");
  GenerativeConfig cfg{to_vector(alpha), parse_list(opt.pi, "--pi").front(), to_vector(beta)};
  cfg.validate();
  return {"custom", cfg, 0};
}

struct SynthOptions {
  ModelOptions model;
  Index n = 250;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
};

int run_synth(const SynthOptions& opt) {
  const ModelSpec model = resolve_model(opt.model);
  const LabeledDataset ds = sample_dataset(model.config, opt.n, resolve_seed(opt.seed));
  emit(opt.out, [&](std::ostream& o) { write_dataset_csv(ds, o); });
  std::cerr << "theoretical_ece=" << format_double(theoretical_ece_tv(model.config)) << '\n';
  return 0;
}

struct ExperimentOptions {
  std::string models = "M1,M2,M3";
  ModelOptions custom;
  int replications = 500;
  Index n = 250;
  std::string estimators = "ECE_uniform,ECE_median,SKCE_b,SKCE_uq,SKCE_ul";
  std::string methods = "D_b,D_uq,D_ul,A_uq,A_l,C";
  std::string kernel = "exp(nu=median)";
  int bins_per_class = 10;
  int min_per_bin = 5;
  std::string resampling_bins = "uniform:10";
  std::string alpha_grid = "0.01:0.25:0.01";
  int boot = kDefaultBootstrapRounds;
  std::string p = "2", q = "2";
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;
  std::string second_out;
};

ExperimentConfig build_config(const ExperimentOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.custom.alpha.empty() || !opt.custom.pi.empty() || !opt.custom.beta.empty()) {
    cfg.models.push_back(resolve_model(opt.custom));
  }
  for (const auto& name : split_names(opt.models)) cfg.models.push_back(preset_model(parse_preset(name), opt.custom.m));
  cfg.replications = opt.replications;
  cfg.samples = opt.n;
  cfg.estimators = split_names(opt.estimators);
  cfg.methods = split_names(opt.methods);
  cfg.kernel = opt.kernel;
  cfg.bins_per_class = opt.bins_per_class;
  cfg.min_per_bin = opt.min_per_bin;
  cfg.resampling_binning = parse_binning(opt.resampling_bins);
  cfg.alpha_grid = parse_alpha_grid(opt.alpha_grid);
  cfg.n_boot = opt.boot;
  cfg.p = parse_norm_index(opt.p);
  cfg.q = parse_norm_index(opt.q);
  cfg.seed = resolve_seed(opt.seed);
  cfg.workers = opt.workers;
  cfg.validate();
  return cfg;
}

void add_experiment_flags(CLI::App* cmd, ExperimentOptions& opt) {
  cmd->add_option("--models", opt.models, "Comma-separated presets (M1,M2,M3); empty for custom only");
  cmd->add_option("--m", opt.custom.m, "Number of classes for presets")->check(CLI::PositiveNumber);
  cmd->add_option("--dirichlet", opt.custom.alpha, "Custom model: Dirichlet parameter list (or one value)");
  cmd->add_option("--pi", opt.custom.pi, "Custom model: mixture weight");
  cmd->add_option("--beta", opt.custom.beta, "Custom model: mixture label distribution");
  cmd->add_option("--R", opt.replications, "Replications per model")->check(CLI::PositiveNumber);
  cmd->add_option("--n", opt.n, "Samples per dataset");
  cmd->add_option("--kernel", opt.kernel, "Kernel, e.g. exp(nu=median)");
  cmd->add_option("--seed", opt.seed, "Master seed (falls back to CALIBKIT_SEED, then 0)");
  cmd->add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibkit: calibration errors and calibration tests for probabilistic classifiers"};
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate calibration errors of a dataset CSV");
  estimate->add_option("dataset", est.dataset, "CSV with header p1,...,pm,y")->required();
  estimate->add_flag("--skce-b", est.skce_b, "Biased SKCE estimator");
  estimate->add_flag("--skce-uq", est.skce_uq, "Unbiased quadratic SKCE estimator");
  estimate->add_flag("--skce-ul", est.skce_ul, "Unbiased linear SKCE estimator");
  estimate->add_flag("--ece", est.ece, "Histogram ECE (TV distance)");
  estimate->add_flag("--mmce", est.mmce, "Squared MMCE via the max-confidence view");
  estimate->add_option("--kernel", est.kernel, "Kernel, e.g. exp(nu=median) or gauss(nu=0.2)");
  estimate->add_option("--bins", est.bins, "uniform:<bins per class> or median:<min per bin>");
  estimate->add_option("--meantv-alpha", est.meantv_alpha, "Dirichlet parameter for nu=meantv");
  estimate->add_option("--out", est.out, "Output CSV ('-' for stdout)");

  TestOptions tst;
  auto* test = app.add_subcommand("test", "Run a calibration test on a dataset CSV");
  test->add_option("dataset", tst.dataset, "CSV with header p1,...,pm,y")->required();
  test->add_option("--method", tst.method, "D_b, D_uq, D_ul, A_uq, A_l or C")->required();
  test->add_option("--kernel", tst.kernel, "Kernel, e.g. exp(nu=median)");
  test->add_option("--bins", tst.bins, "Binning for method C");
  test->add_option("--meantv-alpha", tst.meantv_alpha, "Dirichlet parameter for nu=meantv");
  test->add_option("--alpha", tst.alpha, "Significance level");
  test->add_option("--boot", tst.boot, "Bootstrap rounds for A_uq and C")->check(CLI::PositiveNumber);
  test->add_option("--seed", tst.seed, "Seed (falls back to CALIBKIT_SEED, then 0)");
  test->add_option("--p", tst.p, "Norm index p for distribution-free bounds (1, 2, inf)");
  test->add_option("--q", tst.q, "Norm index q for distribution-free bounds (1, 2, inf)");
  test->add_option("--workers", tst.workers, "Threads for bootstrap rounds")->check(CLI::PositiveNumber);
  test->add_flag("--fail-on-reject", tst.fail_on_reject, "Exit with 1 when the test rejects");

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Sample a dataset from a Dirichlet-Categorical model");
  synth->add_option("preset", syn.model.preset, "M1, M2 or M3");
  synth->add_option("--alpha", syn.model.alpha, "Dirichlet parameter list (or one value repeated m times)");
  synth->add_option("--pi", syn.model.pi, "Mixture weight");
  synth->add_option("--beta", syn.model.beta, "Mixture label distribution");
  synth->add_option("--m", syn.model.m, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--n", syn.n, "Number of records");
  synth->add_option("--seed", syn.seed, "Seed (falls back to CALIBKIT_SEED, then 0)");
  synth->add_option("--out", syn.out, "Output CSV ('-' for stdout)");

  auto* experiment = app.add_subcommand("experiment", "Reproduce the synthetic experiments");
  experiment->require_subcommand(1);

  ExperimentOptions err_opt;
  err_opt.out = "errors.csv";
  err_opt.second_out = "summary.csv";
  auto* errors = experiment->add_subcommand("errors", "Distribution of calibration error estimates");
  add_experiment_flags(errors, err_opt);
  errors->add_option("--estimators", err_opt.estimators, "ECE_uniform,ECE_median,SKCE_b,SKCE_uq,SKCE_ul");
  errors->add_option("--bins-per-class", err_opt.bins_per_class, "Uniform binning resolution");
  errors->add_option("--min-per-bin", err_opt.min_per_bin, "Median-split minimum bin size");
  errors->add_option("--out", err_opt.out, "Estimates CSV ('-' for stdout)");
  errors->add_option("--summary", err_opt.second_out, "Summary CSV ('-' for stdout)");

  ExperimentOptions pv_opt;
  pv_opt.out = "pvalues.csv";
  pv_opt.second_out = "testerrors.csv";
  auto* pvalues = experiment->add_subcommand("pvalues", "P-values and empirical test errors");
  add_experiment_flags(pvalues, pv_opt);
  pvalues->add_option("--methods", pv_opt.methods, "D_b,D_uq,D_ul,A_uq,A_l,C");
  pvalues->add_option("--boot", pv_opt.boot, "Bootstrap rounds for A_uq and C")->check(CLI::PositiveNumber);
  pvalues->add_option("--resampling-bins", pv_opt.resampling_bins, "Binning for method C");
  pvalues->add_option("--alpha-grid", pv_opt.alpha_grid, "from:to:step or comma list");
  pvalues->add_option("--p", pv_opt.p, "Norm index p (1, 2, inf)");
  pvalues->add_option("--q", pv_opt.q, "Norm index q (1, 2, inf)");
  pvalues->add_option("--out", pv_opt.out, "P-value CSV ('-' for stdout)");
  pvalues->add_option("--testerrors", pv_opt.second_out, "Test error CSV ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*test) return run_test(tst);
    if (*synth) return run_synth(syn);
    if (*errors) {
      const auto result = run_error_experiment(build_config(err_opt));
      emit(err_opt.out, [&](std::ostream& o) { write_errors_csv(result.rows, o); });
      emit(err_opt.second_out, [&](std::ostream& o) { write_summary_csv(result.summary, o); });
      return 0;
    }
    if (*pvalues) {
      const auto result = run_pvalue_experiment(build_config(pv_opt));
      emit(pv_opt.out, [&](std::ostream& o) { write_pvalues_csv(result.rows, o); });
      emit(pv_opt.second_out, [&](std::ostream& o) { write_testerrors_csv(result.test_errors, o); });
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "calibkit: " << e.what() << '\n';
    if (e.kind() == ErrorKind::DegenerateBandwidth) {
      std::cerr << "hint: pass a fixed bandwidth, e.g. --kernel \"exp(nu=0.5)\", or nu=meantv with the "
                   "Dirichlet parameter\n";
    }
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "calibkit: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
