#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calibkit/error.hpp"

namespace calibkit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest tolerated |sum - 1| for predictions read from external sources.
inline constexpr double kSimplexTolerance = 1e-6;
/// Entries below this are rejected; entries in [-kNegativeSlack, 0) are clamped to 0.
inline constexpr double kNegativeSlack = 1e-12;

/// A point on the probability simplex with at least two classes.
///
/// Construction validates the entries and renormalizes them to sum to one,
/// so every live instance satisfies the simplex invariants.
class SimplexVector {
 public:
  explicit SimplexVector(Vector values, double tol = kSimplexTolerance);

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// A prediction paired with its observed class; labels are 1-based.
struct PredictionRecord {
  SimplexVector prediction;
  int label;
};

/// Immutable validation set. Predictions are stored column-wise (m x n) in
/// ingestion order; the linear estimator depends on that order.
class LabeledDataset {
 public:
  /// Empty dataset over `class_count` classes.
  explicit LabeledDataset(int class_count);

  /// Takes ownership of already-normalized predictions. Rejects entries that
  /// are negative or columns whose sum is off by more than 1e-9.
  LabeledDataset(Matrix predictions, std::vector<int> labels);

  Index size() const noexcept { return static_cast<Index>(labels_.size()); }
  bool empty() const noexcept { return labels_.empty(); }
  int class_count() const noexcept { return class_count_; }

  auto prediction(Index i) const { return predictions_.col(i); }
  int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  PredictionRecord record(Index i) const;

  const Matrix& predictions() const noexcept { return predictions_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Records at the given positions, in the given order (duplicates allowed).
  LabeledDataset select(const std::vector<Index>& indices) const;

 private:
  Matrix predictions_;
  std::vector<int> labels_;
  int class_count_;
};

/// Unvalidated input row.
struct RawRecord {
  Vector prediction;
  int label;
};

/// Checks every row against the simplex and label contracts, clamps tiny
/// negative drift to zero and renormalizes. Row order is preserved.
LabeledDataset validate_dataset(const std::vector<RawRecord>& rows, int class_count,
                                double tol = kSimplexTolerance);

/// e_label - prediction.
template <typename Derived>
Vector residual(const Eigen::MatrixBase<Derived>& prediction, int label) {
  Vector r = -prediction;
  r[label - 1] += 1.0;
  return r;
}

inline Vector residual(const PredictionRecord& rec) {
  return residual(rec.prediction.values(), rec.label);
}

/// All residuals of a dataset, one column per record.
Matrix residuals(const LabeledDataset& ds);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& text);

LabeledDataset load_dataset_csv(std::istream& in);
LabeledDataset load_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const LabeledDataset& ds, std::ostream& out);
void write_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path);

}  // namespace calibkit
