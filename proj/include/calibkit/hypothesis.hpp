#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "calibkit/estimators.hpp"
#include "calibkit/kernels.hpp"

namespace calibkit {

/// Test labels follow the experiment naming: D_* distribution-free bounds,
/// A_* asymptotic approximations, C consistency resampling of the ECE.
enum class TestMethod {
  DistFreeBiased,                // D_b
  DistFreeUnbiased,              // D_uq
  DistFreeLinear,                // D_ul
  AsymptoticLinear,              // A_l
  AsymptoticQuadraticBootstrap,  // A_uq
  ConsistencyResampling,         // C
};

std::string to_string(TestMethod method);
TestMethod parse_test_method(const std::string& label);

struct TestResult {
  TestMethod method;
  double statistic;
  /// p-value approximation, or an upper bound for the distribution-free methods.
  double pvalue;
  /// Named numeric inputs and by-products (n, B_pq, sigma, n_boot, ...).
  std::map<std::string, double> params;
  std::optional<std::uint64_t> seed;
  std::string kernel;

  bool rejects(double alpha) const { return pvalue <= alpha; }
};

inline constexpr int kDefaultBootstrapRounds = 1000;

/// exp(-1/2 max{0, sqrt(n t / B) - 1}^2).
double pvalue_bound_biased(double t, Index n, double B);

/// exp(-floor(n/2) t^2 / (2 B^2)); 1 for t <= 0.
double pvalue_bound_unbiased(double t, Index n, double B);

/// Level-alpha rejection threshold. For DistFreeBiased the threshold applies
/// to sqrt(SKCE_b), the kernel calibration error itself; for the unbiased
/// methods it applies to the estimate directly.
double distfree_threshold(TestMethod method, double alpha, Index n, double B);

/// Distribution-free test: computes the estimator matching `method` and its
/// p-value bound with B_{p;q} from uniform_bound(k, p, q).
TestResult test_distribution_free(TestMethod method, const MatrixKernelSpec& k, const LabeledDataset& ds,
                                  NormIndex p = NormIndex::Two, NormIndex q = NormIndex::Two);

/// Normal approximation for SKCE_ul with the sample standard deviation of the
/// pair terms. A zero standard deviation yields p = 1 when the statistic is
/// <= 0 and p = 0 otherwise, flagged as params["degenerate_variance"] = 1.
TestResult test_linear_asymptotic(const MatrixKernelSpec& k, const LabeledDataset& ds);

/// Bootstrap of the degenerate U-statistic n * SKCE_uq. Round b draws its
/// resample from RngStream(seed, b); the result does not depend on `workers`.
TestResult test_quadratic_bootstrap(const MatrixKernelSpec& k, const LabeledDataset& ds,
                                    int n_boot = kDefaultBootstrapRounds, std::uint64_t seed = 0,
                                    int workers = 1);

/// Same bootstrap, starting from a precomputed h-matrix.
TestResult bootstrap_from_h_matrix(const Matrix& h, int n_boot, std::uint64_t seed, int workers = 1);

/// Consistency resampling: resample predictions, redraw each label from its
/// own prediction, recompute the histogram ECE. Round b uses RngStream(seed, b).
TestResult test_consistency_resampling(const LabeledDataset& ds, const BinningSpec& binning,
                                       int n_boot = kDefaultBootstrapRounds, std::uint64_t seed = 0,
                                       int workers = 1);

}  // namespace calibkit
