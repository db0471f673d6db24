#pragma once

#include <optional>
#include <string>

#include "calibkit/kernels.hpp"

namespace calibkit {

enum class BandwidthRule { Fixed, Median, MeanTv };

/// Parsed form of the kernel configuration strings accepted by the CLI:
///
///   exp(nu=0.5)            exponential kernel, fixed bandwidth
///   exp(nu=median)         bandwidth from the median heuristic on the data
///   exp(nu=meantv)         bandwidth E||X - X'||_TV of the Dirichlet model
///   gauss(nu=0.2)*identity Gaussian kernel (the identity factor is the default)
///   exp(nu=1,dist=euclid)*2identity
///
/// `nu=` may be omitted (`exp(median)`); `dist` is `tv` (default) or `euclid`.
struct KernelChoice {
  KernelFamily family = KernelFamily::Exponential;
  BandwidthRule rule = BandwidthRule::Median;
  double bandwidth = 0.0;  // used when rule == Fixed
  BaseDistance distance = BaseDistance::TotalVariation;
  double identity_scale = 1.0;
};

KernelChoice parse_kernel(const std::string& text);

/// Turns a choice into a concrete kernel for `ds`. The median rule inspects
/// the data; the mean-TV rule needs the Dirichlet parameter.
MatrixKernelSpec resolve_kernel(const KernelChoice& choice, const LabeledDataset& ds,
                                const std::optional<Vector>& dirichlet_alpha = std::nullopt);

}  // namespace calibkit
