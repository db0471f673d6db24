#include "calibkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "calibkit/numerics.hpp"

namespace calibkit {

ScalarKernelSpec::ScalarKernelSpec(KernelFamily family, double bandwidth, BaseDistance distance)
    : family(family), bandwidth(bandwidth), distance(distance) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorKind::BadParameter, "kernel bandwidth must be positive and finite");
  }
}

std::string ScalarKernelSpec::describe() const {
  std::string s = family == KernelFamily::Exponential ? "exp" : "gauss";
  s += "(nu=" + format_double(bandwidth);
  if (distance == BaseDistance::Euclidean) s += ",dist=euclid";
  return s + ")";
}

MatrixKernelSpec::MatrixKernelSpec(int dimension, std::vector<KernelTerm> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
  if (dimension_ < 2) throw Error(ErrorKind::BadParameter, "kernel dimension must be at least 2");
  if (terms_.empty()) throw Error(ErrorKind::BadParameter, "kernel needs at least one term");
  for (auto& term : terms_) {
    if (term.is_scaled_identity()) {
      if (!(term.identity_scale >= 0.0) || !std::isfinite(term.identity_scale)) {
        throw Error(ErrorKind::BadParameter, "identity scale must be non-negative");
      }
      continue;
    }
    const Matrix& a = term.matrix;
    if (a.rows() != dimension_ || a.cols() != dimension_) {
      throw Error(ErrorKind::DimensionMismatch, "kernel matrix must be m x m");
    }
    if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::BadParameter, "kernel matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
      throw Error(ErrorKind::BadParameter, "kernel matrix is not positive semi-definite");
    }
    const double c = a(0, 0);
    const bool scaled_identity =
        (a.diagonal().array() == c).all() && (a - c * Matrix::Identity(dimension_, dimension_)).isZero(0.0);
    if (scaled_identity) {
      term.identity_scale = c;
      term.matrix.resize(0, 0);
    }
  }
}

bool MatrixKernelSpec::all_scaled_identity() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(), [](const KernelTerm& t) { return t.is_scaled_identity(); });
}

std::string MatrixKernelSpec::describe() const {
  std::string s;
  for (const auto& term : terms_) {
    if (!s.empty()) s += " + ";
    s += term.scalar.describe();
    if (term.is_scaled_identity()) {
      s += term.identity_scale == 1.0 ? "*identity" : "*" + format_double(term.identity_scale) + "identity";
    } else {
      s += "*matrix";
    }
  }
  return s;
}

double reciprocal(NormIndex p) noexcept {
  switch (p) {
    case NormIndex::One: return 1.0;
    case NormIndex::Two: return 0.5;
    case NormIndex::Infinity: return 0.0;
  }
  return 0.0;
}

std::string to_string(NormIndex p) {
  switch (p) {
    case NormIndex::One: return "1";
    case NormIndex::Two: return "2";
    case NormIndex::Infinity: return "inf";
  }
  return "?";
}

NormIndex parse_norm_index(const std::string& text) {
  if (text == "1") return NormIndex::One;
  if (text == "2") return NormIndex::Two;
  if (text == "inf" || text == "Inf" || text == "infinity") return NormIndex::Infinity;
  throw Error(ErrorKind::BadParameter, "norm index must be 1, 2 or inf, got '" + text + "'");
}

double bound_from_norm(NormIndex p, NormIndex q, double K_pq) {
  return std::exp2(1.0 + reciprocal(p) - reciprocal(q)) * K_pq;
}

namespace {

// Orders the indices by p value: 1 < 2 < inf.
bool p_le_q(NormIndex p, NormIndex q) {
  return static_cast<int>(p) <= static_cast<int>(q);
}

std::optional<double> induced_norm(const Matrix& a, NormIndex p, NormIndex q) {
  if (p == q) {
    switch (p) {
      case NormIndex::One: return a.cwiseAbs().colwise().sum().maxCoeff();
      case NormIndex::Infinity: return a.cwiseAbs().rowwise().sum().maxCoeff();
      case NormIndex::Two: {
        Eigen::JacobiSVD<Matrix> svd(a);
        return svd.singularValues()(0);
      }
    }
  }
  if (p == NormIndex::One && q == NormIndex::Infinity) return a.cwiseAbs().maxCoeff();
  if (p == NormIndex::One && q == NormIndex::Two) return a.colwise().norm().maxCoeff();
  if (p == NormIndex::Two && q == NormIndex::Infinity) return a.rowwise().norm().maxCoeff();
  return std::nullopt;
}

}  // namespace

KernelBound uniform_bound(const MatrixKernelSpec& spec, NormIndex p, NormIndex q) {
  if (spec.all_scaled_identity()) {
    // Every scalar factor equals its supremum 1 at s = t, so sup of the sum is the sum of scales.
    double phi_sup = 0.0;
    for (const auto& term : spec.terms()) phi_sup += term.identity_scale;
    const double K = p_le_q(p, q)
                         ? phi_sup
                         : std::pow(static_cast<double>(spec.dimension()), reciprocal(q) - reciprocal(p)) * phi_sup;
    return {p, q, K, bound_from_norm(p, q, K)};
  }
  if (spec.terms().size() == 1) {
    if (auto norm = induced_norm(spec.terms().front().matrix, p, q)) {
      return {p, q, *norm, bound_from_norm(p, q, *norm)};
    }
  }
  throw Error(ErrorKind::UnsupportedKernel,
              "no closed-form bound for this kernel with p=" + to_string(p) + ", q=" + to_string(q));
}

KernelBound uniform_bound(const MatrixKernelSpec& spec, NormIndex p, NormIndex q, double matrix_operator_norm) {
  if (spec.terms().size() != 1) {
    throw Error(ErrorKind::UnsupportedKernel, "a supplied operator norm applies to single-term kernels only");
  }
  if (!(matrix_operator_norm >= 0.0)) throw Error(ErrorKind::BadParameter, "operator norm must be >= 0");
  return {p, q, matrix_operator_norm, bound_from_norm(p, q, matrix_operator_norm)};
}

double median_heuristic(const LabeledDataset& ds, BaseDistance distance_kind) {
  const Index n = ds.size();
  if (n < 2) throw Error(ErrorKind::TooFewSamples, "median heuristic needs at least 2 predictions");
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      distances.push_back(distance(distance_kind, ds.prediction(i), ds.prediction(j)));
    }
  }
  const double nu = numerics::median(distances);
  if (!(nu > 0.0)) {
    throw Error(ErrorKind::DegenerateBandwidth,
                "median pairwise distance is 0; use a fixed bandwidth or the mean TV bandwidth");
  }
  return nu;
}

double mean_tv_bandwidth(const Vector& alpha) {
  const Index m = alpha.size();
  if (m < 2) throw Error(ErrorKind::BadParameter, "mean TV bandwidth needs at least 2 classes");
  if (!alpha.allFinite() || (alpha.array() <= 0.0).any()) {
    throw Error(ErrorKind::BadParameter, "Dirichlet parameters must be positive");
  }
  const double alpha0 = numerics::compensated_sum(std::span<const double>(alpha.data(), static_cast<std::size_t>(m)));

  // 2 B(a0, a0) / a0 * sum_i [B(a_i, a_i) B(a0 - a_i, a0 - a_i)]^{-1}, in log space.
  std::vector<double> log_terms(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double rest = alpha0 - alpha[i];
    if (!(rest > 0.0)) throw Error(ErrorKind::BadParameter, "alpha_0 - alpha_i must be positive");
    log_terms[static_cast<std::size_t>(i)] = -numerics::log_beta(alpha[i], alpha[i]) - numerics::log_beta(rest, rest);
  }
  const double peak = *std::max_element(log_terms.begin(), log_terms.end());
  double scaled = 0.0;
  for (double t : log_terms) scaled += std::exp(t - peak);
  const double log_sum = peak + std::log(scaled);
  return std::exp(std::log(2.0) + numerics::log_beta(alpha0, alpha0) - std::log(alpha0) + log_sum);
}

}  // namespace calibkit
