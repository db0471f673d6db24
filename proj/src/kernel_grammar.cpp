#include "calibkit/kernel_grammar.hpp"

#include <cctype>
#include <charconv>

namespace calibkit {

namespace {

[[noreturn]] void bad_kernel(const std::string& text, const std::string& why) {
  throw Error(ErrorKind::BadParameter, "kernel '" + text + "': " + why);
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

std::optional<double> parse_positive(const std::string& s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(value > 0.0)) return std::nullopt;
  return value;
}

}  // namespace

KernelChoice parse_kernel(const std::string& raw) {
  const std::string text = strip_spaces(raw);
  KernelChoice choice;

  const auto open = text.find('(');
  const auto close = text.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    bad_kernel(raw, "expected family(arguments)");
  }
  const std::string family = text.substr(0, open);
  if (family == "exp") {
    choice.family = KernelFamily::Exponential;
  } else if (family == "gauss") {
    choice.family = KernelFamily::Gaussian;
  } else {
    bad_kernel(raw, "unknown family '" + family + "' (exp or gauss)");
  }

  bool have_bandwidth = false;
  std::string args = text.substr(open + 1, close - open - 1);
  std::size_t start = 0;
  while (start <= args.size() && !args.empty()) {
    const auto comma = args.find(',', start);
    std::string item = args.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::string key = "nu";
    std::string value = item;
    if (const auto eq = item.find('='); eq != std::string::npos) {
      key = item.substr(0, eq);
      value = item.substr(eq + 1);
    }
    if (key == "nu") {
      if (value == "median") {
        choice.rule = BandwidthRule::Median;
      } else if (value == "meantv") {
        choice.rule = BandwidthRule::MeanTv;
      } else if (auto nu = parse_positive(value)) {
        choice.rule = BandwidthRule::Fixed;
        choice.bandwidth = *nu;
      } else {
        bad_kernel(raw, "bandwidth must be a positive number, median or meantv");
      }
      have_bandwidth = true;
    } else if (key == "dist") {
      if (value == "tv") {
        choice.distance = BaseDistance::TotalVariation;
      } else if (value == "euclid") {
        choice.distance = BaseDistance::Euclidean;
      } else {
        bad_kernel(raw, "dist must be tv or euclid");
      }
    } else {
      bad_kernel(raw, "unknown argument '" + key + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!have_bandwidth) bad_kernel(raw, "missing bandwidth");

  std::string rest = text.substr(close + 1);
  if (!rest.empty()) {
    const std::string suffix = "identity";
    if (rest.front() != '*' || rest.size() < 1 + suffix.size() ||
        rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) != 0) {
      bad_kernel(raw, "only '*identity' or '*<scale>identity' may follow the scalar kernel");
    }
    const std::string scale = rest.substr(1, rest.size() - 1 - suffix.size());
    if (!scale.empty()) {
      auto c = parse_positive(scale);
      if (!c) bad_kernel(raw, "identity scale must be positive");
      choice.identity_scale = *c;
    }
  }
  return choice;
}

MatrixKernelSpec resolve_kernel(const KernelChoice& choice, const LabeledDataset& ds,
                                const std::optional<Vector>& dirichlet_alpha) {
  double nu = choice.bandwidth;
  switch (choice.rule) {
    case BandwidthRule::Fixed:
      break;
    case BandwidthRule::Median:
      nu = median_heuristic(ds, choice.distance);
      break;
    case BandwidthRule::MeanTv:
      if (!dirichlet_alpha) {
        throw Error(ErrorKind::BadParameter, "nu=meantv needs the Dirichlet parameter of the prediction model");
      }
      nu = mean_tv_bandwidth(*dirichlet_alpha);
      break;
  }
  return MatrixKernelSpec::identity(ScalarKernelSpec(choice.family, nu, choice.distance), ds.class_count(),
                                    choice.identity_scale);
}

}  // namespace calibkit
