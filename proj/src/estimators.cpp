#include "calibkit/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "calibkit/numerics.hpp"

namespace calibkit {

std::string to_string(SkceEstimator estimator) {
  switch (estimator) {
    case SkceEstimator::Biased: return "SKCE_b";
    case SkceEstimator::UnbiasedQuadratic: return "SKCE_uq";
    case SkceEstimator::UnbiasedLinear: return "SKCE_ul";
  }
  return "SKCE";
}

double h_term(const MatrixKernelSpec& k, const PredictionRecord& a, const PredictionRecord& b) {
  if (a.prediction.size() != b.prediction.size()) throw Error(ErrorKind::DimensionMismatch, "h_term");
  return k.quadform(residual(a), a.prediction, b.prediction, residual(b));
}

PairTerms::PairTerms(const MatrixKernelSpec& k, const LabeledDataset& ds)
    : kernel_(k), data_(ds), residuals_(residuals(ds)) {
  if (k.dimension() != ds.class_count()) {
    throw Error(ErrorKind::DimensionMismatch, "kernel dimension differs from class count");
  }
  transformed_.reserve(k.terms().size());
  for (const auto& term : k.terms()) {
    transformed_.push_back(term.is_scaled_identity() ? Matrix() : Matrix(term.matrix * residuals_));
  }
}

double PairTerms::operator()(Index i, Index j) const {
  const auto& terms = kernel_.terms();
  double total = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    const double phi = eval_scalar(term.scalar, data_.prediction(i), data_.prediction(j));
    const double form = term.is_scaled_identity()
                            ? term.identity_scale * residuals_.col(i).dot(residuals_.col(j))
                            : residuals_.col(i).dot(transformed_[t].col(j));
    total += phi * form;
  }
  return total;
}

namespace {

struct PairSums {
  double upper = 0.0;  // sum_{i<j} h_ij
  double diagonal = 0.0;
};

// Row-ordered accumulation; the result does not depend on anything but the data.
PairSums pair_sums(const PairTerms& h, bool with_diagonal) {
  PairSums sums;
  const Index n = h.size();
  for (Index i = 0; i < n; ++i) {
    if (with_diagonal) sums.diagonal += h(i, i);
    double row = 0.0;
    for (Index j = i + 1; j < n; ++j) row += h(i, j);
    sums.upper += row;
  }
  return sums;
}

}  // namespace

SkceEstimate skce_biased(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const Index n = ds.size();
  if (n < 1) throw Error(ErrorKind::EmptyDataset, "SKCE_b needs at least one record");
  const PairSums sums = pair_sums(PairTerms(k, ds), true);
  const double nn = static_cast<double>(n);
  const double value = std::max(0.0, (2.0 * sums.upper + sums.diagonal) / (nn * nn));
  return {value, SkceEstimator::Biased, n, k.describe()};
}

SkceEstimate skce_unbiased(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const Index n = ds.size();
  if (n < 2) throw Error(ErrorKind::TooFewSamples, "SKCE_uq needs at least two records");
  const PairSums sums = pair_sums(PairTerms(k, ds), false);
  const double nn = static_cast<double>(n);
  return {2.0 * sums.upper / (nn * (nn - 1.0)), SkceEstimator::UnbiasedQuadratic, n, k.describe()};
}

std::vector<double> linear_terms(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const Index n = ds.size();
  if (n < 2) throw Error(ErrorKind::TooFewSamples, "SKCE_ul needs at least two records");
  const PairTerms h(k, ds);
  std::vector<double> terms(static_cast<std::size_t>(n / 2));
  for (Index i = 0; i < n / 2; ++i) terms[static_cast<std::size_t>(i)] = h(2 * i, 2 * i + 1);
  return terms;
}

SkceEstimate skce_linear(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const auto terms = linear_terms(k, ds);
  return {numerics::mean(terms), SkceEstimator::UnbiasedLinear, ds.size(), k.describe()};
}

Matrix h_matrix(const MatrixKernelSpec& k, const LabeledDataset& ds) {
  const PairTerms h(k, ds);
  const Index n = ds.size();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    out(i, i) = h(i, i);
    for (Index j = i + 1; j < n; ++j) out(i, j) = out(j, i) = h(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string describe(const BinningSpec& binning) {
  if (const auto* u = std::get_if<UniformPerClass>(&binning)) {
    return "uniform:" + std::to_string(u->bins_per_class);
  }
  return "median:" + std::to_string(std::get<MedianVarianceSplit>(binning).min_per_bin);
}

BinningSpec parse_binning(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::BadParameter, "binning must look like uniform:<bins> or median:<min>, got '" + text + "'");
  }
  const std::string scheme = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
  if (ec != std::errc() || ptr != arg.data() + arg.size() || value < 1) {
    throw Error(ErrorKind::BadParameter, "binning parameter must be a positive integer, got '" + arg + "'");
  }
  if (scheme == "uniform") return UniformPerClass{value};
  if (scheme == "median") return MedianVarianceSplit{value};
  throw Error(ErrorKind::BadParameter, "unknown binning scheme '" + scheme + "'");
}

namespace {

std::vector<Bin> uniform_bins(const LabeledDataset& ds, int bins) {
  const int m = ds.class_count();
  // Sparse: only occupied cells of the bins^m grid are stored.
  std::map<std::vector<int>, Bin> cells;
  std::vector<int> key(static_cast<std::size_t>(m));
  for (Index j = 0; j < ds.size(); ++j) {
    for (int c = 0; c < m; ++c) {
      const int b = static_cast<int>(std::floor(bins * ds.predictions()(c, j)));
      key[static_cast<std::size_t>(c)] = std::clamp(b, 0, bins - 1);
    }
    cells[key].push_back(j);
  }
  std::vector<Bin> out;
  out.reserve(cells.size());
  for (auto& [k, members] : cells) out.push_back(std::move(members));
  return out;
}

std::vector<Bin> median_split_bins(const LabeledDataset& ds, int min_per_bin) {
  const int m = ds.class_count();
  std::vector<Bin> out;
  Bin all(static_cast<std::size_t>(ds.size()));
  for (Index j = 0; j < ds.size(); ++j) all[static_cast<std::size_t>(j)] = j;

  std::vector<Bin> stack;
  stack.push_back(std::move(all));
  std::vector<double> values;
  while (!stack.empty()) {
    Bin bin = std::move(stack.back());
    stack.pop_back();
    const double size = static_cast<double>(bin.size());

    int split_class = -1;
    double best_variance = -1.0;
    for (int c = 0; c < m && !bin.empty(); ++c) {
      double mu = 0.0;
      for (Index j : bin) mu += ds.predictions()(c, j);
      mu /= size;
      double var = 0.0;
      for (Index j : bin) {
        const double d = ds.predictions()(c, j) - mu;
        var += d * d;
      }
      var /= size;
      if (var > best_variance) {
        best_variance = var;
        split_class = c;
      }
    }

    Bin left, right;
    if (split_class >= 0) {
      values.clear();
      for (Index j : bin) values.push_back(ds.predictions()(split_class, j));
      const double cut = numerics::median(values);
      for (Index j : bin) (ds.predictions()(split_class, j) < cut ? left : right).push_back(j);
    }
    if (left.size() < static_cast<std::size_t>(min_per_bin) ||
        right.size() < static_cast<std::size_t>(min_per_bin)) {
      out.push_back(std::move(bin));
      continue;
    }
    // Right pushed first so the left half is emitted first.
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return out;
}

}  // namespace

std::vector<Bin> partition(const LabeledDataset& ds, const BinningSpec& binning) {
  if (const auto* u = std::get_if<UniformPerClass>(&binning)) {
    if (u->bins_per_class < 1) throw Error(ErrorKind::BadParameter, "bins_per_class must be >= 1");
    return uniform_bins(ds, u->bins_per_class);
  }
  const auto& split = std::get<MedianVarianceSplit>(binning);
  if (split.min_per_bin < 1) throw Error(ErrorKind::BadParameter, "min_per_bin must be >= 1");
  if (ds.empty()) return {};
  return median_split_bins(ds, split.min_per_bin);
}

BinAssignment assign_bins(const LabeledDataset& ds, const BinningSpec& binning) {
  const auto bins = partition(ds, binning);
  BinAssignment out{std::vector<Index>(static_cast<std::size_t>(ds.size())), static_cast<Index>(bins.size())};
  for (std::size_t b = 0; b < bins.size(); ++b) {
    for (Index j : bins[b]) out.bin_of[static_cast<std::size_t>(j)] = static_cast<Index>(b);
  }
  return out;
}

double ece_from_assignment(const LabeledDataset& ds, const BinAssignment& bins) {
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "ECE of an empty dataset is undefined");
  if (static_cast<Index>(bins.bin_of.size()) != ds.size()) {
    throw Error(ErrorKind::DimensionMismatch, "bin assignment does not match the dataset");
  }
  const int m = ds.class_count();
  Matrix prediction_sums = Matrix::Zero(m, bins.bin_count);
  Matrix label_counts = Matrix::Zero(m, bins.bin_count);
  std::vector<double> sizes(static_cast<std::size_t>(bins.bin_count), 0.0);
  for (Index j = 0; j < ds.size(); ++j) {
    const Index b = bins.bin_of[static_cast<std::size_t>(j)];
    prediction_sums.col(b) += ds.prediction(j);
    label_counts(ds.label(j) - 1, b) += 1.0;
    sizes[static_cast<std::size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(ds.size());
  double ece = 0.0;
  for (Index b = 0; b < bins.bin_count; ++b) {
    const double size = sizes[static_cast<std::size_t>(b)];
    if (size == 0.0) continue;
    ece += (size / n) * tv_distance(prediction_sums.col(b) / size, label_counts.col(b) / size);
  }
  return ece;
}

EceEstimate ece_histogram(const LabeledDataset& ds, const BinningSpec& binning) {
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "ECE of an empty dataset is undefined");
  const BinAssignment bins = assign_bins(ds, binning);
  return {ece_from_assignment(ds, bins), binning, bins.bin_count};
}

// ---------------------------------------------------------------------------

LabeledDataset max_lens(const LabeledDataset& ds) {
  Matrix binary(2, ds.size());
  std::vector<int> labels(static_cast<std::size_t>(ds.size()));
  for (Index j = 0; j < ds.size(); ++j) {
    Index top = 0;
    for (Index c = 1; c < ds.class_count(); ++c) {
      if (ds.predictions()(c, j) > ds.predictions()(top, j)) top = c;  // ties keep the lowest index
    }
    const double confidence = ds.predictions()(top, j);
    binary(0, j) = confidence;
    binary(1, j) = 1.0 - confidence;
    labels[static_cast<std::size_t>(j)] = (top + 1 == ds.label(j)) ? 1 : 2;
  }
  return LabeledDataset(std::move(binary), std::move(labels));
}

double mmce_squared(const ScalarKernelSpec& scalar, const LabeledDataset& ds) {
  if (ds.size() < 2) throw Error(ErrorKind::TooFewSamples, "MMCE needs at least two records");
  const auto kernel = MatrixKernelSpec::identity(scalar, 2, 0.5);
  return skce_unbiased(kernel, max_lens(ds)).value;
}

}  // namespace calibkit
