#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calibkit/core.hpp"

namespace calibkit {

enum class KernelFamily { Exponential, Gaussian };
enum class BaseDistance { TotalVariation, Euclidean };

/// Half the L1 distance between two probability vectors.
template <typename A, typename B>
double tv_distance(const Eigen::MatrixBase<A>& s, const Eigen::MatrixBase<B>& t) {
  if (s.size() != t.size()) throw Error(ErrorKind::DimensionMismatch, "tv_distance");
  return 0.5 * (s - t).template lpNorm<1>();
}

inline double tv_distance(const SimplexVector& s, const SimplexVector& t) {
  return tv_distance(s.values(), t.values());
}

template <typename A, typename B>
double distance(BaseDistance kind, const Eigen::MatrixBase<A>& s, const Eigen::MatrixBase<B>& t) {
  if (kind == BaseDistance::TotalVariation) return tv_distance(s, t);
  if (s.size() != t.size()) throw Error(ErrorKind::DimensionMismatch, "euclidean distance");
  return (s - t).norm();
}

/// Stationary scalar kernel k(s, t) = f(d(s, t) / bandwidth); sup |k| = 1.
struct ScalarKernelSpec {
  KernelFamily family;
  double bandwidth;
  BaseDistance distance;

  ScalarKernelSpec(KernelFamily family, double bandwidth,
                   BaseDistance distance = BaseDistance::TotalVariation);

  /// exp(-d / nu) or exp(-d^2 / nu^2).
  double of_distance(double d) const {
    const double r = d / bandwidth;
    return family == KernelFamily::Exponential ? std::exp(-r) : std::exp(-r * r);
  }

  std::string describe() const;
};

template <typename A, typename B>
double eval_scalar(const ScalarKernelSpec& spec, const Eigen::MatrixBase<A>& s,
                   const Eigen::MatrixBase<B>& t) {
  return spec.of_distance(distance(spec.distance, s, t));
}

inline double eval_scalar(const ScalarKernelSpec& spec, const SimplexVector& s, const SimplexVector& t) {
  return eval_scalar(spec, s.values(), t.values());
}

/// One scalar x matrix summand. An empty `matrix` means `identity_scale * I`.
struct KernelTerm {
  ScalarKernelSpec scalar;
  Matrix matrix;
  double identity_scale = 1.0;

  static KernelTerm scaled_identity(ScalarKernelSpec scalar, double scale = 1.0) {
    return {scalar, Matrix(), scale};
  }
  static KernelTerm with_matrix(ScalarKernelSpec scalar, Matrix matrix) {
    return {scalar, std::move(matrix), 0.0};
  }

  bool is_scaled_identity() const noexcept { return matrix.size() == 0; }
};

/// Matrix-valued kernel k(s, t) = sum_i k_i(s, t) A_i with every A_i
/// symmetric positive semi-definite.
class MatrixKernelSpec {
 public:
  /// Validates dimensions and positive semi-definiteness (eigenvalues >= -1e-10).
  /// Explicit matrices that are exactly c * I are stored as scaled identities.
  MatrixKernelSpec(int dimension, std::vector<KernelTerm> terms);

  static MatrixKernelSpec identity(ScalarKernelSpec scalar, int dimension, double scale = 1.0) {
    return MatrixKernelSpec(dimension, {KernelTerm::scaled_identity(scalar, scale)});
  }

  int dimension() const noexcept { return dimension_; }
  const std::vector<KernelTerm>& terms() const noexcept { return terms_; }
  bool all_scaled_identity() const noexcept;

  /// k(s, t) materialized as an m x m matrix.
  template <typename A, typename B>
  Matrix evaluate(const Eigen::MatrixBase<A>& s, const Eigen::MatrixBase<B>& t) const {
    check_dim(s.size());
    check_dim(t.size());
    Matrix k = Matrix::Zero(dimension_, dimension_);
    for (const auto& term : terms_) {
      const double phi = eval_scalar(term.scalar, s, t);
      if (term.is_scaled_identity()) {
        k.diagonal().array() += phi * term.identity_scale;
      } else {
        k += phi * term.matrix;
      }
    }
    return k;
  }

  /// u^T k(s, t) v, never forming k(s, t) for identity terms.
  template <typename U, typename S, typename T, typename V>
  double quadform(const Eigen::MatrixBase<U>& u, const Eigen::MatrixBase<S>& s,
                  const Eigen::MatrixBase<T>& t, const Eigen::MatrixBase<V>& v) const {
    check_dim(u.size());
    check_dim(s.size());
    check_dim(t.size());
    check_dim(v.size());
    double total = 0.0;
    for (const auto& term : terms_) {
      const double phi = eval_scalar(term.scalar, s, t);
      if (phi == 0.0) continue;
      const double form = term.is_scaled_identity() ? term.identity_scale * u.dot(v)
                                                    : u.dot(term.matrix * v);
      total += phi * form;
    }
    return total;
  }

  double quadform(const Vector& u, const SimplexVector& s, const SimplexVector& t, const Vector& v) const {
    return quadform(u, s.values(), t.values(), v);
  }

  std::string describe() const;

 private:
  void check_dim(Index size) const {
    if (size != dimension_) throw Error(ErrorKind::DimensionMismatch, "kernel dimension");
  }

  int dimension_;
  std::vector<KernelTerm> terms_;
};

/// Index of a vector norm used for induced matrix norms ||A||_{p;q}.
enum class NormIndex { One, Two, Infinity };

/// 1/p with 1/inf = 0.
double reciprocal(NormIndex p) noexcept;
std::string to_string(NormIndex p);
NormIndex parse_norm_index(const std::string& text);

/// Uniform bound on |h| used by the distribution-free tests.
struct KernelBound {
  NormIndex p;
  NormIndex q;
  double K_pq;
  double B_pq;
};

/// B_{p;q} = 2^(1 + 1/p - 1/q) K_{p;q}.
double bound_from_norm(NormIndex p, NormIndex q, double K_pq);

/// K_{p;q} = sup_{s,t} ||k(s,t)||_{p;q} for sums of scaled identities, or
/// for a single explicit term whose induced norm has a closed form
/// (p = q, p = 1, or p = 2 with q = inf). Anything else is UnsupportedKernel.
KernelBound uniform_bound(const MatrixKernelSpec& spec, NormIndex p, NormIndex q);

/// Single-term kernel with a caller-supplied ||A||_{p;q}.
KernelBound uniform_bound(const MatrixKernelSpec& spec, NormIndex p, NormIndex q,
                          double matrix_operator_norm);

/// Exact median of all n(n-1)/2 pairwise prediction distances.
double median_heuristic(const LabeledDataset& ds, BaseDistance distance = BaseDistance::TotalVariation);

/// E ||X - X'||_TV for X, X' i.i.d. Dirichlet(alpha).
double mean_tv_bandwidth(const Vector& alpha);

}  // namespace calibkit
