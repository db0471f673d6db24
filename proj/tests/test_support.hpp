#pragma once

#include <random>
#include <vector>

#include "calibkit/calibkit.hpp"
#include "oracles.hpp"

namespace testing_support {

// Random predictions with occasional exact zeros and one-hots, labels uniform.
inline calibkit::LabeledDataset random_dataset(std::mt19937_64& gen, int m, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> label(1, m);
  calibkit::Matrix p(m, n);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int c = 0; c < m; ++c) {
      const double u = unit(gen);
      p(c, j) = u < 0.1 ? 0.0 : -std::log(u);
      sum += p(c, j);
    }
    if (sum == 0.0) p(0, j) = sum = 1.0;
    p.col(j) /= sum;
    y[static_cast<std::size_t>(j)] = label(gen);
  }
  return {p, y};
}

inline std::vector<reference::Record> to_records(const calibkit::LabeledDataset& ds) {
  std::vector<reference::Record> out;
  for (calibkit::Index j = 0; j < ds.size(); ++j) {
    reference::Vec p(static_cast<std::size_t>(ds.class_count()));
    for (int c = 0; c < ds.class_count(); ++c) p[static_cast<std::size_t>(c)] = ds.prediction(j)[c];
    out.push_back({p, ds.label(j)});
  }
  return out;
}

inline calibkit::LabeledDataset binary(std::initializer_list<std::pair<double, int>> rows) {
  calibkit::Matrix p(2, static_cast<calibkit::Index>(rows.size()));
  std::vector<int> y;
  calibkit::Index j = 0;
  for (const auto& [p1, label] : rows) {
    p(0, j) = p1;
    p(1, j) = 1.0 - p1;
    y.push_back(label);
    ++j;
  }
  return {p, y};
}

}  // namespace testing_support
