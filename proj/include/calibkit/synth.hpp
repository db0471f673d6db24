#pragma once

#include <cstdint>
#include <string>

#include "calibkit/core.hpp"
#include "calibkit/random.hpp"

namespace calibkit {

/// Predictions g ~ Dir(alpha); with probability pi the label is drawn from
/// Categorical(beta), otherwise from Categorical(g). Calibrated iff pi = 0.
struct GenerativeConfig {
  Vector alpha;
  double pi;
  Vector beta;

  /// Throws BadParameter unless alpha > 0, pi in [0, 1], beta on the simplex,
  /// and all three agree on m >= 2.
  void validate() const;

  int class_count() const noexcept { return static_cast<int>(alpha.size()); }
  bool calibrated() const noexcept { return pi == 0.0; }
};

enum class ModelPreset { M1, M2, M3 };

std::string to_string(ModelPreset preset);
ModelPreset parse_preset(const std::string& name);

/// alpha = (0.1, ..., 0.1); M1: pi = 0; M2: pi = 0.5, beta = e_1;
/// M3: pi = 1, beta = (1/m, ..., 1/m).
GenerativeConfig expand(ModelPreset preset, int class_count = 10);

/// Gamma(shape, 1) variate: Marsaglia-Tsang squeeze for shape >= 1, and the
/// boost Gamma(shape + 1) * U^(1/shape) below that.
double sample_gamma(double shape, RngStream& rng);

/// Dirichlet variate via normalized Gamma variates (normalized in log space,
/// so tiny shapes cannot underflow every coordinate).
SimplexVector sample_dirichlet(const Vector& alpha, RngStream& rng);
void sample_dirichlet_into(const Vector& alpha, RngStream& rng, Eigen::Ref<Vector> out);

/// Inverse CDF: the first class c with u < p_1 + ... + p_c (1-based).
int categorical_from_uniform(const Eigen::Ref<const Vector>& p, double u);
int sample_categorical(const Eigen::Ref<const Vector>& p, RngStream& rng);

LabeledDataset sample_dataset(const GenerativeConfig& cfg, Index n, RngStream& rng);

/// Same as sampling from RngStream(seed, 0).
LabeledDataset sample_dataset(const GenerativeConfig& cfg, Index n, std::uint64_t seed);

/// Closed-form ECE with respect to the TV distance:
/// pi * sum_i (beta_i I(beta_i; a_i, a0 - a_i) - a_i / a0 * I(beta_i; a_i + 1, a0 - a_i)).
double theoretical_ece_tv(const GenerativeConfig& cfg);

}  // namespace calibkit
