#include "calibkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "calibkit/numerics.hpp"

namespace calibkit {

void GenerativeConfig::validate() const {
  const Index m = alpha.size();
  if (m < 2) throw Error(ErrorKind::BadParameter, "generative model needs at least 2 classes");
  if (!alpha.allFinite() || (alpha.array() <= 0.0).any()) {
    throw Error(ErrorKind::BadParameter, "Dirichlet parameters must be positive");
  }
  if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorKind::BadParameter, "mixture weight must lie in [0, 1]");
  if (beta.size() != m) throw Error(ErrorKind::BadParameter, "beta must have the same length as alpha");
  if (!beta.allFinite() || (beta.array() < 0.0).any() || std::abs(beta.sum() - 1.0) > kSimplexTolerance) {
    throw Error(ErrorKind::BadParameter, "beta must lie on the probability simplex");
  }
}

std::string to_string(ModelPreset preset) {
  switch (preset) {
    case ModelPreset::M1: return "M1";
    case ModelPreset::M2: return "M2";
    case ModelPreset::M3: return "M3";
  }
  return "?";
}

ModelPreset parse_preset(const std::string& name) {
  if (name == "M1") return ModelPreset::M1;
  if (name == "M2") return ModelPreset::M2;
  if (name == "M3") return ModelPreset::M3;
  throw Error(ErrorKind::BadParameter, "unknown model preset '" + name + "' (expected M1, M2 or M3)");
}

GenerativeConfig expand(ModelPreset preset, int class_count) {
  if (class_count < 2) throw Error(ErrorKind::BadParameter, "presets need at least 2 classes");
  const Vector alpha = Vector::Constant(class_count, 0.1);
  switch (preset) {
    case ModelPreset::M1:
      return {alpha, 0.0, Vector::Constant(class_count, 1.0 / class_count)};
    case ModelPreset::M2:
      return {alpha, 0.5, Vector::Unit(class_count, 0)};
    case ModelPreset::M3:
      return {alpha, 1.0, Vector::Constant(class_count, 1.0 / class_count)};
  }
  throw Error(ErrorKind::BadParameter, "unknown preset");
}

namespace {

// ln of a Gamma(shape, 1) variate.
double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw Error(ErrorKind::BadParameter, "gamma shape must be positive");
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(rng.uniform_open()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

}  // namespace

double sample_gamma(double shape, RngStream& rng) { return std::exp(sample_log_gamma(shape, rng)); }

void sample_dirichlet_into(const Vector& alpha, RngStream& rng, Eigen::Ref<Vector> out) {
  if (out.size() != alpha.size()) throw Error(ErrorKind::DimensionMismatch, "Dirichlet output size");
  for (Index i = 0; i < alpha.size(); ++i) out[i] = sample_log_gamma(alpha[i], rng);
  const double peak = out.maxCoeff();
  out = (out.array() - peak).exp();
  out /= out.sum();
}

SimplexVector sample_dirichlet(const Vector& alpha, RngStream& rng) {
  if (alpha.size() < 2) throw Error(ErrorKind::BadParameter, "Dirichlet needs at least 2 parameters");
  Vector out(alpha.size());
  sample_dirichlet_into(alpha, rng, out);
  return SimplexVector(std::move(out));
}

int categorical_from_uniform(const Eigen::Ref<const Vector>& p, double u) {
  double cumulative = 0.0;
  int last_positive = 1;
  for (Index c = 0; c < p.size(); ++c) {
    if (p[c] <= 0.0) continue;
    cumulative += p[c];
    last_positive = static_cast<int>(c) + 1;
    if (u < cumulative) return last_positive;
  }
  // Rounding left u above the accumulated total.
  return last_positive;
}

int sample_categorical(const Eigen::Ref<const Vector>& p, RngStream& rng) {
  return categorical_from_uniform(p, rng.uniform());
}

LabeledDataset sample_dataset(const GenerativeConfig& cfg, Index n, RngStream& rng) {
  cfg.validate();
  if (n < 0) throw Error(ErrorKind::BadParameter, "sample count must be non-negative");
  const int m = cfg.class_count();
  Matrix predictions(m, n);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Vector g(m);
  for (Index j = 0; j < n; ++j) {
    sample_dirichlet_into(cfg.alpha, rng, g);
    predictions.col(j) = g;
    const bool from_beta = rng.uniform() < cfg.pi;
    labels[static_cast<std::size_t>(j)] = sample_categorical(from_beta ? cfg.beta : g, rng);
  }
  return LabeledDataset(std::move(predictions), std::move(labels));
}

LabeledDataset sample_dataset(const GenerativeConfig& cfg, Index n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return sample_dataset(cfg, n, rng);
}

double theoretical_ece_tv(const GenerativeConfig& cfg) {
  cfg.validate();
  if (cfg.pi == 0.0) return 0.0;
  const Index m = cfg.alpha.size();
  const double alpha0 = numerics::compensated_sum(std::span<const double>(cfg.alpha.data(), static_cast<std::size_t>(m)));
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double a = cfg.alpha[i];
    const double rest = alpha0 - a;
    if (!(rest > 0.0)) throw Error(ErrorKind::BadParameter, "alpha_0 - alpha_i must be positive");
    const double b = cfg.beta[i];
    total += b * numerics::reg_inc_beta(b, a, rest) - (a / alpha0) * numerics::reg_inc_beta(b, a + 1.0, rest);
  }
  return std::clamp(cfg.pi * total, 0.0, cfg.pi);
}

}  // namespace calibkit
