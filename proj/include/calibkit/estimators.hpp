#pragma once

#include <string>
#include <variant>
#include <vector>

#include "calibkit/core.hpp"
#include "calibkit/kernels.hpp"

namespace calibkit {

enum class SkceEstimator { Biased, UnbiasedQuadratic, UnbiasedLinear };

std::string to_string(SkceEstimator estimator);

struct SkceEstimate {
  double value;
  SkceEstimator estimator;
  Index n;
  std::string kernel;
};

/// h(a, b) = (e_{y_a} - g_a)^T k(g_a, g_b) (e_{y_b} - g_b).
double h_term(const MatrixKernelSpec& k, const PredictionRecord& a, const PredictionRecord& b);

/// Evaluates h for records of one dataset. Residuals (and A_i R for
/// explicit-matrix terms) are cached at construction, so each call costs one
/// distance evaluation per term plus O(m) work.
class PairTerms {
 public:
  PairTerms(const MatrixKernelSpec& k, const LabeledDataset& ds);

  double operator()(Index i, Index j) const;
  Index size() const noexcept { return residuals_.cols(); }

 private:
  const MatrixKernelSpec& kernel_;
  const LabeledDataset& data_;
  Matrix residuals_;
  std::vector<Matrix> transformed_;  // A_i R, empty for scaled identities
};

/// n^-2 sum_{i,j} h_ij.
SkceEstimate skce_biased(const MatrixKernelSpec& k, const LabeledDataset& ds);

/// (n choose 2)^-1 sum_{i<j} h_ij.
SkceEstimate skce_unbiased(const MatrixKernelSpec& k, const LabeledDataset& ds);

/// floor(n/2)^-1 sum_i h_{2i-1,2i} over consecutive pairs in dataset order.
SkceEstimate skce_linear(const MatrixKernelSpec& k, const LabeledDataset& ds);

/// The floor(n/2) terms h_{2i-1,2i}.
std::vector<double> linear_terms(const MatrixKernelSpec& k, const LabeledDataset& ds);

/// Full symmetric matrix [h_ij], including the diagonal.
Matrix h_matrix(const MatrixKernelSpec& k, const LabeledDataset& ds);

// ---------------------------------------------------------------------------
// Histogram ECE

/// Each class axis cut into `bins_per_class` equal intervals.
struct UniformPerClass {
  int bins_per_class;
};

/// Recursive split at the median of the highest-variance class while both
/// halves keep at least `min_per_bin` records.
struct MedianVarianceSplit {
  int min_per_bin;
};

using BinningSpec = std::variant<UniformPerClass, MedianVarianceSplit>;

std::string describe(const BinningSpec& binning);

/// Parses `uniform:<bins>` or `median:<min_per_bin>`.
BinningSpec parse_binning(const std::string& text);

using Bin = std::vector<Index>;

/// Disjoint bins covering every record index (0-based).
std::vector<Bin> partition(const LabeledDataset& ds, const BinningSpec& binning);

/// Bin index of every record plus the number of bins, in partition() order.
struct BinAssignment {
  std::vector<Index> bin_of;
  Index bin_count = 0;
};

BinAssignment assign_bins(const LabeledDataset& ds, const BinningSpec& binning);

/// Histogram ECE for a fixed assignment; empty bins contribute nothing.
double ece_from_assignment(const LabeledDataset& ds, const BinAssignment& bins);

struct EceEstimate {
  double value;
  BinningSpec binning;
  Index occupied_bins;
};

/// sum_bins |bin|/n * d_TV(mean prediction, label frequencies).
EceEstimate ece_histogram(const LabeledDataset& ds, const BinningSpec& binning);

// ---------------------------------------------------------------------------
// MMCE

/// Binary view (max confidence, 1 - max confidence) labelled 1 when the
/// argmax class (lowest index on ties) is correct and 2 otherwise.
LabeledDataset max_lens(const LabeledDataset& ds);

/// Unbiased squared MMCE: skce_unbiased of max_lens(ds) under (k / 2) I_2.
double mmce_squared(const ScalarKernelSpec& scalar, const LabeledDataset& ds);

}  // namespace calibkit
