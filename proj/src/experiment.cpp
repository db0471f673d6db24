#include "calibkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>

#include "calibkit/numerics.hpp"
#include "calibkit/parallel.hpp"

namespace calibkit {

ModelSpec preset_model(ModelPreset preset, int class_count) {
  return {to_string(preset), expand(preset, class_count), static_cast<std::uint64_t>(preset) + 1};
}

std::uint64_t replicate_seed(std::uint64_t seed, const ModelSpec& model, int replicate) {
  return derive_seed(seed, (model.stream_tag << 32) | static_cast<std::uint32_t>(replicate));
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 25; ++i) grid.push_back(i / 100.0);
  return grid;
}

namespace {

const std::set<std::string> kEstimators{"ECE_uniform", "ECE_median", "SKCE_b", "SKCE_uq", "SKCE_ul"};

bool is_skce(const std::string& name) { return name.rfind("SKCE", 0) == 0; }

}  // namespace

void ExperimentConfig::validate() const {
  if (models.empty()) throw Error(ErrorKind::BadParameter, "no models selected");
  if (replications < 1) throw Error(ErrorKind::BadParameter, "replications must be >= 1");
  if (samples < 2) throw Error(ErrorKind::BadParameter, "samples per dataset must be >= 2");
  if (n_boot < 1) throw Error(ErrorKind::BadParameter, "bootstrap rounds must be >= 1");
  if (bins_per_class < 1 || min_per_bin < 1) throw Error(ErrorKind::BadParameter, "binning parameters must be >= 1");
  for (const auto& model : models) model.config.validate();
  for (const auto& e : estimators) {
    if (!kEstimators.count(e)) throw Error(ErrorKind::BadParameter, "unknown estimator '" + e + "'");
  }
  for (const auto& m : methods) parse_test_method(m);
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0 && alpha_grid[i] < 1.0)) {
      throw Error(ErrorKind::BadParameter, "significance levels must lie in (0, 1)");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw Error(ErrorKind::BadParameter, "significance grid must be sorted ascending");
    }
  }
  parse_kernel(kernel);
}

ErrorExperiment run_error_experiment(const ExperimentConfig& config) {
  config.validate();
  const KernelChoice kernel_choice = parse_kernel(config.kernel);
  const std::size_t R = static_cast<std::size_t>(config.replications);
  const std::size_t E = config.estimators.size();
  const bool needs_kernel =
      std::any_of(config.estimators.begin(), config.estimators.end(), [](const auto& e) { return is_skce(e); });

  // values[job][e]; job = model * R + replicate. The extra slot holds SKCE_uq for the ground truth.
  std::vector<std::vector<double>> values(config.models.size() * R, std::vector<double>(E + 1, 0.0));
  parallel_for(values.size(), config.workers, [&](std::size_t job) {
    const auto& model = config.models[job / R];
    const int replicate = static_cast<int>(job % R);
    RngStream rng(replicate_seed(config.seed, model, replicate), 0);
    const LabeledDataset ds = sample_dataset(model.config, config.samples, rng);
    std::optional<MatrixKernelSpec> kernel;
    if (needs_kernel) kernel = resolve_kernel(kernel_choice, ds, model.config.alpha);

    auto& slot = values[job];
    for (std::size_t e = 0; e < E; ++e) {
      const auto& name = config.estimators[e];
      if (name == "ECE_uniform") {
        slot[e] = ece_histogram(ds, UniformPerClass{config.bins_per_class}).value;
      } else if (name == "ECE_median") {
        slot[e] = ece_histogram(ds, MedianVarianceSplit{config.min_per_bin}).value;
      } else if (name == "SKCE_b") {
        slot[e] = skce_biased(*kernel, ds).value;
      } else if (name == "SKCE_uq") {
        slot[e] = skce_unbiased(*kernel, ds).value;
      } else if (name == "SKCE_ul") {
        slot[e] = skce_linear(*kernel, ds).value;
      }
    }
    if (needs_kernel) {
      const auto uq = std::find(config.estimators.begin(), config.estimators.end(), "SKCE_uq");
      slot[E] = uq != config.estimators.end() ? slot[static_cast<std::size_t>(uq - config.estimators.begin())]
                                               : skce_unbiased(*kernel, ds).value;
    }
  });

  ErrorExperiment out;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const auto& model = config.models[mi];
    std::vector<double> uq(R);
    for (std::size_t r = 0; r < R; ++r) uq[r] = values[mi * R + r][E];
    const double skce_truth = numerics::mean(uq);
    const double ece_truth = theoretical_ece_tv(model.config);

    for (std::size_t e = 0; e < E; ++e) {
      std::vector<double> column(R);
      for (std::size_t r = 0; r < R; ++r) {
        column[r] = values[mi * R + r][e];
        out.rows.push_back({model.name, config.estimators[e], static_cast<int>(r), column[r]});
      }
      const double mean = numerics::mean(column);
      const double se = R > 1 ? numerics::sample_std(column) / std::sqrt(static_cast<double>(R)) : 0.0;
      out.summary.push_back(
          {model.name, config.estimators[e], mean, se, is_skce(config.estimators[e]) ? skce_truth : ece_truth});
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
    return std::tie(a.model, a.estimator, a.replicate) < std::tie(b.model, b.estimator, b.replicate);
  });
  std::stable_sort(out.summary.begin(), out.summary.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.estimator) < std::tie(b.model, b.estimator);
  });
  return out;
}

double empirical_test_error(const std::vector<double>& pvalues, double alpha, bool calibrated) {
  if (pvalues.empty()) throw Error(ErrorKind::EmptyInput, "no p-values");
  std::size_t errors = 0;
  for (double p : pvalues) errors += calibrated ? (p <= alpha) : (p > alpha);
  return static_cast<double>(errors) / static_cast<double>(pvalues.size());
}

PValueExperiment run_pvalue_experiment(const ExperimentConfig& config) {
  config.validate();
  const KernelChoice kernel_choice = parse_kernel(config.kernel);
  const std::size_t R = static_cast<std::size_t>(config.replications);
  std::vector<TestMethod> methods;
  for (const auto& m : config.methods) methods.push_back(parse_test_method(m));
  const std::size_t M = methods.size();
  const bool needs_kernel = std::any_of(methods.begin(), methods.end(),
                                        [](TestMethod m) { return m != TestMethod::ConsistencyResampling; });

  std::vector<std::vector<double>> pvalues(config.models.size() * R, std::vector<double>(M, 1.0));
  parallel_for(pvalues.size(), config.workers, [&](std::size_t job) {
    const auto& model = config.models[job / R];
    const int replicate = static_cast<int>(job % R);
    const std::uint64_t base = replicate_seed(config.seed, model, replicate);
    RngStream rng(base, 0);
    const LabeledDataset ds = sample_dataset(model.config, config.samples, rng);
    std::optional<MatrixKernelSpec> kernel;
    if (needs_kernel) kernel = resolve_kernel(kernel_choice, ds, model.config.alpha);

    for (std::size_t i = 0; i < M; ++i) {
      switch (methods[i]) {
        case TestMethod::DistFreeBiased:
        case TestMethod::DistFreeUnbiased:
        case TestMethod::DistFreeLinear:
          pvalues[job][i] = test_distribution_free(methods[i], *kernel, ds, config.p, config.q).pvalue;
          break;
        case TestMethod::AsymptoticLinear:
          pvalues[job][i] = test_linear_asymptotic(*kernel, ds).pvalue;
          break;
        case TestMethod::AsymptoticQuadraticBootstrap:
          pvalues[job][i] = test_quadratic_bootstrap(*kernel, ds, config.n_boot, derive_seed(base, 1)).pvalue;
          break;
        case TestMethod::ConsistencyResampling:
          pvalues[job][i] =
              test_consistency_resampling(ds, config.resampling_binning, config.n_boot, derive_seed(base, 2)).pvalue;
          break;
      }
    }
  });

  PValueExperiment out;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const auto& model = config.models[mi];
    for (std::size_t i = 0; i < M; ++i) {
      std::vector<double> column(R);
      for (std::size_t r = 0; r < R; ++r) {
        column[r] = pvalues[mi * R + r][i];
        out.rows.push_back({model.name, config.methods[i], static_cast<int>(r), column[r]});
      }
      for (double alpha : config.alpha_grid) {
        out.test_errors.push_back(
            {model.name, config.methods[i], alpha, empirical_test_error(column, alpha, model.config.calibrated())});
      }
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const PValueRow& a, const PValueRow& b) {
    return std::tie(a.model, a.method, a.replicate) < std::tie(b.model, b.method, b.replicate);
  });
  std::stable_sort(out.test_errors.begin(), out.test_errors.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.method, a.alpha) < std::tie(b.model, b.method, b.alpha);
  });
  return out;
}

void write_errors_csv(const std::vector<ErrorRow>& rows, std::ostream& out) {
  out << "model,estimator,replicate,estimate\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.estimator << ',' << r.replicate << ',' << format_double(r.estimate) << '\n';
  }
}

void write_summary_csv(const std::vector<ErrorSummaryRow>& rows, std::ostream& out) {
  out << "model,estimator,mean,std_error,true_value\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.estimator << ',' << format_double(r.mean) << ',' << format_double(r.std_error) << ','
        << format_double(r.true_value) << '\n';
  }
}

void write_pvalues_csv(const std::vector<PValueRow>& rows, std::ostream& out) {
  out << "model,method,replicate,pvalue\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.method << ',' << r.replicate << ',' << format_double(r.pvalue) << '\n';
  }
}

void write_testerrors_csv(const std::vector<TestErrorRow>& rows, std::ostream& out) {
  out << "model,method,alpha,test_error\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.method << ',' << format_double(r.alpha) << ',' << format_double(r.test_error) << '\n';
  }
}

}  // namespace calibkit
