#include "calibkit/hypothesis.hpp"

#include <cmath>
#include <limits>

#include "calibkit/numerics.hpp"
#include "calibkit/parallel.hpp"
#include "calibkit/random.hpp"
#include "calibkit/synth.hpp"

namespace calibkit {

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::DistFreeBiased: return "D_b";
    case TestMethod::DistFreeUnbiased: return "D_uq";
    case TestMethod::DistFreeLinear: return "D_ul";
    case TestMethod::AsymptoticLinear: return "A_l";
    case TestMethod::AsymptoticQuadraticBootstrap: return "A_uq";
    case TestMethod::ConsistencyResampling: return "C";
  }
  return "?";
}

TestMethod parse_test_method(const std::string& label) {
  if (label == "D_b") return TestMethod::DistFreeBiased;
  if (label == "D_uq") return TestMethod::DistFreeUnbiased;
  if (label == "D_ul") return TestMethod::DistFreeLinear;
  if (label == "A_l") return TestMethod::AsymptoticLinear;
  if (label == "A_uq") return TestMethod::AsymptoticQuadraticBootstrap;
  if (label == "C") return TestMethod::ConsistencyResampling;
  throw Error(ErrorKind::BadParameter, "unknown test method '" + label + "' (expected D_b, D_uq, D_ul, A_l, A_uq or C)");
}

namespace {

void check_bound_inputs(Index n, double B, Index min_n) {
  if (n < min_n) throw Error(ErrorKind::BadParameter, "sample count too small for this bound");
  if (!(B > 0.0) || !std::isfinite(B)) throw Error(ErrorKind::BadParameter, "B must be positive and finite");
}

double norm_param(NormIndex p) {
  return p == NormIndex::Infinity ? std::numeric_limits<double>::infinity() : 1.0 / reciprocal(p);
}

}  // namespace

double pvalue_bound_biased(double t, Index n, double B) {
  check_bound_inputs(n, B, 1);
  if (!(t >= 0.0)) throw Error(ErrorKind::BadParameter, "the biased estimate is non-negative");
  const double excess = std::max(0.0, std::sqrt(static_cast<double>(n) * t / B) - 1.0);
  return std::exp(-0.5 * excess * excess);
}

double pvalue_bound_unbiased(double t, Index n, double B) {
  check_bound_inputs(n, B, 2);
  if (std::isnan(t)) throw Error(ErrorKind::BadParameter, "statistic is NaN");
  if (t <= 0.0) return 1.0;
  const double pairs = static_cast<double>(n / 2);
  return std::exp(-pairs * t * t / (2.0 * B * B));
}

double distfree_threshold(TestMethod method, double alpha, Index n, double B) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::BadParameter, "alpha must lie in (0, 1]");
  const double spread = std::sqrt(-2.0 * std::log(alpha));
  switch (method) {
    case TestMethod::DistFreeBiased:
      check_bound_inputs(n, B, 1);
      return std::sqrt(B / static_cast<double>(n)) * (1.0 + spread);
    case TestMethod::DistFreeUnbiased:
    case TestMethod::DistFreeLinear:
      check_bound_inputs(n, B, 2);
      return B / std::sqrt(static_cast<double>(n / 2)) * spread;
    default:
      throw Error(ErrorKind::BadParameter, "thresholds exist for distribution-free methods only");
  }
}

TestResult test_distribution_free(TestMethod method, const MatrixKernelSpec& k, const LabeledDataset& ds,
                                  NormIndex p, NormIndex q) {
  const KernelBound bound = uniform_bound(k, p, q);
  SkceEstimate estimate{};
  double pvalue = 1.0;
  switch (method) {
    case TestMethod::DistFreeBiased:
      estimate = skce_biased(k, ds);
      pvalue = pvalue_bound_biased(estimate.value, ds.size(), bound.B_pq);
      break;
    case TestMethod::DistFreeUnbiased:
      estimate = skce_unbiased(k, ds);
      pvalue = pvalue_bound_unbiased(estimate.value, ds.size(), bound.B_pq);
      break;
    case TestMethod::DistFreeLinear:
      estimate = skce_linear(k, ds);
      pvalue = pvalue_bound_unbiased(estimate.value, ds.size(), bound.B_pq);
      break;
    default:
      throw Error(ErrorKind::BadParameter, "not a distribution-free method: " + to_string(method));
  }
  TestResult result{method, estimate.value, pvalue, {}, std::nullopt, k.describe()};
  result.params["n"] = static_cast<double>(ds.size());
  result.params["p"] = norm_param(p);
  result.params["q"] = norm_param(q);
  result.params["K_pq"] = bound.K_pq;
  result.params["B_pq"] = bound.B_pq;
  return result;
}

TestResult test_linear_asymptotic(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const Index n = ds.size();
  if (n < 4) throw Error(ErrorKind::TooFewSamples, "the asymptotic linear test needs at least 4 records");
  const auto terms = linear_terms(k, ds);
  const double statistic = numerics::mean(terms);
  const double sigma = numerics::sample_std(terms);
  const double pairs = static_cast<double>(n / 2);

  TestResult result{TestMethod::AsymptoticLinear, statistic, 1.0, {}, std::nullopt, k.describe()};
  result.params["n"] = static_cast<double>(n);
  result.params["sigma"] = sigma;
  if (sigma == 0.0) {
    result.pvalue = statistic <= 0.0 ? 1.0 : 0.0;
    result.params["degenerate_variance"] = 1.0;
  } else {
    const double z = std::sqrt(pairs) * statistic / sigma;
    result.pvalue = numerics::normal_cdf(-z);
    result.params["z"] = z;
  }
  return result;
}

TestResult bootstrap_from_h_matrix(const Matrix& h, int n_boot, std::uint64_t seed, int workers) {
  const Index n = h.rows();
  if (n < 2 || h.cols() != n) throw Error(ErrorKind::TooFewSamples, "bootstrap needs a square h-matrix with n >= 2");
  if (n_boot < 1) throw Error(ErrorKind::BadParameter, "bootstrap needs at least one round");

  // n * SKCE_uq, summed in the same row order as skce_unbiased.
  double upper = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = i + 1; j < n; ++j) row += h(i, j);
    upper += row;
  }
  const double nn = static_cast<double>(n);
  const double statistic = nn * (2.0 * upper / (nn * (nn - 1.0)));

  // Doubly centered kernel h(i,j) - r_i - r_j + g, with r the row means.
  const Vector row_means = h.rowwise().mean();
  const double grand_mean = row_means.mean();
  Matrix centered = h;
  centered.colwise() -= row_means;
  centered.rowwise() -= row_means.transpose();
  centered.array() += grand_mean;
  const Vector centered_diagonal = centered.diagonal();

  // T = (2/n) sum_{i<j} centered(Z*_i, Z*_j) = (w^T C w - sum_k w_k C_kk) / n
  // with w the resampling multiplicities.
  std::vector<double> replicates(static_cast<std::size_t>(n_boot));
  parallel_for(replicates.size(), workers, [&](std::size_t b) {
    RngStream rng(seed, b);
    Vector counts = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) counts[static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)))] += 1.0;
    replicates[b] = (counts.dot(centered * counts) - counts.dot(centered_diagonal)) / nn;
  });

  std::size_t exceed = 0;
  for (double t : replicates) exceed += t >= statistic ? 1 : 0;

  TestResult result{TestMethod::AsymptoticQuadraticBootstrap, statistic,
                    (1.0 + static_cast<double>(exceed)) / (1.0 + n_boot), {}, seed, ""};
  result.params["n"] = nn;
  result.params["n_boot"] = n_boot;
  return result;
}

TestResult test_quadratic_bootstrap(const MatrixKernelSpec& k, const LabeledDataset& ds, int n_boot,
                                    std::uint64_t seed, int workers) {
  if (ds.size() < 2) throw Error(ErrorKind::TooFewSamples, "bootstrap test needs at least two records");
  if (n_boot < 1) throw Error(ErrorKind::BadParameter, "bootstrap needs at least one round");
  TestResult result = bootstrap_from_h_matrix(h_matrix(k, ds), n_boot, seed, workers);
  result.kernel = k.describe();
  return result;
}

TestResult test_consistency_resampling(const LabeledDataset& ds, const BinningSpec& binning, int n_boot,
                                       std::uint64_t seed, int workers) {
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "consistency resampling needs data");
  if (n_boot < 1) throw Error(ErrorKind::BadParameter, "resampling needs at least one round");
  const double statistic = ece_histogram(ds, binning).value;
  const Index n = ds.size();

  // Uniform bins depend only on the prediction, so a resampled record stays in
  // its source record's bin; median splits must be recomputed per round.
  const bool fixed_bins = std::holds_alternative<UniformPerClass>(binning);
  const BinAssignment source_bins = fixed_bins ? assign_bins(ds, binning) : BinAssignment{};

  std::vector<double> replicates(static_cast<std::size_t>(n_boot));
  parallel_for(replicates.size(), workers, [&](std::size_t b) {
    RngStream rng(seed, b);
    Matrix predictions(ds.class_count(), n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    BinAssignment bins{std::vector<Index>(static_cast<std::size_t>(n)), source_bins.bin_count};
    for (Index i = 0; i < n; ++i) {
      const auto source = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      predictions.col(i) = ds.prediction(source);
      labels[static_cast<std::size_t>(i)] = sample_categorical(predictions.col(i), rng);
      if (fixed_bins) bins.bin_of[static_cast<std::size_t>(i)] = source_bins.bin_of[static_cast<std::size_t>(source)];
    }
    const LabeledDataset resampled(std::move(predictions), std::move(labels));
    replicates[b] = fixed_bins ? ece_from_assignment(resampled, bins) : ece_histogram(resampled, binning).value;
  });

  std::size_t exceed = 0;
  for (double e : replicates) exceed += e >= statistic ? 1 : 0;

  TestResult result{TestMethod::ConsistencyResampling, statistic,
                    (1.0 + static_cast<double>(exceed)) / (1.0 + n_boot), {}, seed, describe(binning)};
  result.params["n"] = static_cast<double>(n);
  result.params["n_boot"] = n_boot;
  return result;
}

}  // namespace calibkit
