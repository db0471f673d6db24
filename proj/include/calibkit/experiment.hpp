#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "calibkit/estimators.hpp"
#include "calibkit/hypothesis.hpp"
#include "calibkit/kernel_grammar.hpp"
#include "calibkit/synth.hpp"

namespace calibkit {

/// A named generative model. `stream_tag` enters the per-replicate seed, so a
/// model's datasets do not depend on which other models run alongside it.
struct ModelSpec {
  std::string name;
  GenerativeConfig config;
  std::uint64_t stream_tag = 0;
};

ModelSpec preset_model(ModelPreset preset, int class_count = 10);

/// Replicate seed: derive_seed(seed, tag << 32 | replicate). The dataset is
/// drawn from RngStream(replicate_seed, 0); the A_uq bootstrap uses seed
/// derive_seed(replicate_seed, 1) and consistency resampling
/// derive_seed(replicate_seed, 2).
std::uint64_t replicate_seed(std::uint64_t seed, const ModelSpec& model, int replicate);

/// Default significance grid 0.01, 0.02, ..., 0.25.
std::vector<double> default_alpha_grid();

struct ExperimentConfig {
  std::vector<ModelSpec> models;
  int replications = 500;
  Index samples = 250;
  /// Error experiment: ECE_uniform, ECE_median, SKCE_b, SKCE_uq, SKCE_ul.
  std::vector<std::string> estimators{"ECE_uniform", "ECE_median", "SKCE_b", "SKCE_uq", "SKCE_ul"};
  /// P-value experiment: D_b, D_uq, D_ul, A_uq, A_l, C.
  std::vector<std::string> methods{"D_b", "D_uq", "D_ul", "A_uq", "A_l", "C"};
  std::string kernel = "exp(nu=median)";
  int bins_per_class = 10;
  int min_per_bin = 5;
  /// Binning used by consistency resampling.
  BinningSpec resampling_binning = UniformPerClass{10};
  std::vector<double> alpha_grid = default_alpha_grid();
  int n_boot = kDefaultBootstrapRounds;
  NormIndex p = NormIndex::Two;
  NormIndex q = NormIndex::Two;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct ErrorRow {
  std::string model;
  std::string estimator;
  int replicate;
  double estimate;
};

struct ErrorSummaryRow {
  std::string model;
  std::string estimator;
  double mean;
  double std_error;
  /// Closed-form ECE for ECE estimators; grand mean of SKCE_uq for SKCE ones.
  double true_value;
};

struct ErrorExperiment {
  std::vector<ErrorRow> rows;
  std::vector<ErrorSummaryRow> summary;
};

ErrorExperiment run_error_experiment(const ExperimentConfig& config);

struct PValueRow {
  std::string model;
  std::string method;
  int replicate;
  double pvalue;
};

struct TestErrorRow {
  std::string model;
  std::string method;
  double alpha;
  /// Fraction of p <= alpha for calibrated models, of p > alpha otherwise.
  double test_error;
};

struct PValueExperiment {
  std::vector<PValueRow> rows;
  std::vector<TestErrorRow> test_errors;
};

PValueExperiment run_pvalue_experiment(const ExperimentConfig& config);

/// Empirical test error of one cell.
double empirical_test_error(const std::vector<double>& pvalues, double alpha, bool calibrated);

void write_errors_csv(const std::vector<ErrorRow>& rows, std::ostream& out);
void write_summary_csv(const std::vector<ErrorSummaryRow>& rows, std::ostream& out);
void write_pvalues_csv(const std::vector<PValueRow>& rows, std::ostream& out);
void write_testerrors_csv(const std::vector<TestErrorRow>& rows, std::ostream& out);

}  // namespace calibkit
