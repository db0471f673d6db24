#include <gtest/gtest.h>

#include <sstream>

#include "calibkit/experiment.hpp"
#include "calibkit/numerics.hpp"

using namespace calibkit;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no calibkit::Error thrown";
  return ErrorKind::BadParameter;
}

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.models = {preset_model(ModelPreset::M1), preset_model(ModelPreset::M2), preset_model(ModelPreset::M3)};
  config.replications = 6;
  config.samples = 40;
  config.n_boot = 50;
  config.seed = 11;
  return config;
}

template <typename Rows, typename Writer>
std::string to_csv(const Rows& rows, Writer write) {
  std::ostringstream out;
  write(rows, out);
  return out.str();
}

}  // namespace

TEST(Seeds, ReplicateSeedsDistinct) {
  const auto m1 = preset_model(ModelPreset::M1);
  const auto m2 = preset_model(ModelPreset::M2);
  EXPECT_NE(m1.stream_tag, m2.stream_tag);
  EXPECT_NE(replicate_seed(1, m1, 0), replicate_seed(1, m1, 1));
  EXPECT_NE(replicate_seed(1, m1, 0), replicate_seed(1, m2, 0));
  EXPECT_NE(replicate_seed(1, m1, 0), replicate_seed(2, m1, 0));
  EXPECT_EQ(replicate_seed(1, m1, 3), derive_seed(1, (m1.stream_tag << 32) | 3));
}

TEST(AlphaGrid, Default) {
  const auto grid = default_alpha_grid();
  ASSERT_EQ(grid.size(), 25u);
  EXPECT_EQ(grid.front(), 0.01);
  EXPECT_EQ(grid.back(), 0.25);
}

TEST(EmpiricalTestError, Examples) {
  const std::vector<double> p{0.01, 0.04, 0.05, 0.2, 0.9};
  EXPECT_EQ(empirical_test_error(p, 0.05, true), 0.6);
  EXPECT_EQ(empirical_test_error(p, 0.05, false), 0.4);
  EXPECT_EQ(empirical_test_error(p, 0.001, true), 0.0);
  EXPECT_EQ(kind_of([] { empirical_test_error({}, 0.05, true); }), ErrorKind::EmptyInput);
}

TEST(ExperimentConfig, Validation) {
  auto bad = [](auto mutate) {
    auto config = small_config();
    mutate(config);
    return kind_of([&] { config.validate(); });
  };
  EXPECT_EQ(bad([](auto& c) { c.models.clear(); }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.replications = 0; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.samples = 1; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.n_boot = 0; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.estimators = {"ECE_fancy"}; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.alpha_grid = {0.1, 0.05}; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.alpha_grid = {0.0}; }), ErrorKind::BadParameter);
  EXPECT_EQ(bad([](auto& c) { c.bins_per_class = 0; }), ErrorKind::BadParameter);
  EXPECT_NO_THROW(small_config().validate());
}

TEST(ErrorExperiment, ShapeAndInvariants) {
  const auto config = small_config();
  const auto result = run_error_experiment(config);
  EXPECT_EQ(result.rows.size(), config.models.size() * config.estimators.size() * config.replications);
  EXPECT_EQ(result.summary.size(), config.models.size() * config.estimators.size());
  for (const auto& row : result.rows) {
    EXPECT_TRUE(std::isfinite(row.estimate));
    if (row.estimator == "SKCE_b" || row.estimator.rfind("ECE", 0) == 0) EXPECT_GE(row.estimate, 0.0);
  }
  for (const auto& s : result.summary) {
    if (s.estimator.rfind("ECE", 0) == 0) {
      EXPECT_EQ(s.true_value, theoretical_ece_tv(expand(parse_preset(s.model))));
    }
    EXPECT_GE(s.std_error, 0.0);
  }
}

TEST(ErrorExperiment, SummaryMatchesRows) {
  const auto result = run_error_experiment(small_config());
  for (const auto& s : result.summary) {
    std::vector<double> column;
    for (const auto& r : result.rows) {
      if (r.model == s.model && r.estimator == s.estimator) column.push_back(r.estimate);
    }
    EXPECT_NEAR(s.mean, numerics::mean(column), 1e-15);
  }
}

TEST(ErrorExperiment, UnbiasedOnCalibratedModel) {
  auto config = small_config();
  config.models = {preset_model(ModelPreset::M1)};
  config.estimators = {"SKCE_uq", "SKCE_ul"};
  config.replications = 200;
  config.samples = 50;
  const auto result = run_error_experiment(config);
  for (const auto& s : result.summary) EXPECT_NEAR(s.mean, 0.0, 4 * s.std_error) << s.estimator;
}

TEST(ErrorExperiment, DatasetIndependentOfOtherModels) {
  auto both = small_config();
  auto only = small_config();
  only.models = {preset_model(ModelPreset::M2)};
  const auto a = run_error_experiment(both);
  const auto b = run_error_experiment(only);
  std::vector<ErrorRow> a_m2;
  for (const auto& r : a.rows) {
    if (r.model == "M2" && r.estimator.rfind("ECE", 0) == 0) a_m2.push_back(r);
  }
  std::vector<ErrorRow> b_m2;
  for (const auto& r : b.rows) {
    if (r.estimator.rfind("ECE", 0) == 0) b_m2.push_back(r);
  }
  ASSERT_EQ(a_m2.size(), b_m2.size());
  for (std::size_t i = 0; i < a_m2.size(); ++i) EXPECT_EQ(a_m2[i].estimate, b_m2[i].estimate);
}

TEST(PValueExperiment, ShapeAndRange) {
  const auto config = small_config();
  const auto result = run_pvalue_experiment(config);
  EXPECT_EQ(result.rows.size(), config.models.size() * config.methods.size() * config.replications);
  EXPECT_EQ(result.test_errors.size(), config.models.size() * config.methods.size() * config.alpha_grid.size());
  for (const auto& r : result.rows) {
    EXPECT_GE(r.pvalue, 0.0);
    EXPECT_LE(r.pvalue, 1.0);
  }
  for (const auto& t : result.test_errors) {
    EXPECT_GE(t.test_error, 0.0);
    EXPECT_LE(t.test_error, 1.0);
  }
}

TEST(PValueExperiment, TestErrorsMatchRows) {
  const auto result = run_pvalue_experiment(small_config());
  for (const auto& t : result.test_errors) {
    std::vector<double> column;
    for (const auto& r : result.rows) {
      if (r.model == t.model && r.method == t.method) column.push_back(r.pvalue);
    }
    EXPECT_EQ(t.test_error, empirical_test_error(column, t.alpha, t.model == "M1"));
  }
}

TEST(PValueExperiment, DistributionFreeNeverRejectsCalibrated) {
  auto config = small_config();
  config.models = {preset_model(ModelPreset::M1)};
  config.methods = {"D_b", "D_uq", "D_ul"};
  config.replications = 20;
  for (const auto& t : run_pvalue_experiment(config).test_errors) {
    if (t.alpha <= 0.05) EXPECT_EQ(t.test_error, 0.0) << t.method;
  }
}

TEST(Experiments, DeterministicAcrossWorkers) {
  auto config = small_config();
  const auto errors1 = run_error_experiment(config);
  const auto pvalues1 = run_pvalue_experiment(config);
  for (int workers : {2, 8}) {
    config.workers = workers;
    const auto errors = run_error_experiment(config);
    const auto pvalues = run_pvalue_experiment(config);
    EXPECT_EQ(to_csv(errors.rows, write_errors_csv), to_csv(errors1.rows, write_errors_csv));
    EXPECT_EQ(to_csv(errors.summary, write_summary_csv), to_csv(errors1.summary, write_summary_csv));
    EXPECT_EQ(to_csv(pvalues.rows, write_pvalues_csv), to_csv(pvalues1.rows, write_pvalues_csv));
    EXPECT_EQ(to_csv(pvalues.test_errors, write_testerrors_csv), to_csv(pvalues1.test_errors, write_testerrors_csv));
  }
}

TEST(Experiments, SeedChangesOutput) {
  auto config = small_config();
  const auto a = to_csv(run_error_experiment(config).rows, write_errors_csv);
  config.seed = 12;
  EXPECT_NE(to_csv(run_error_experiment(config).rows, write_errors_csv), a);
}

TEST(CsvWriters, Headers) {
  EXPECT_EQ(to_csv(std::vector<ErrorRow>{{"M1", "SKCE_b", 0, 0.5}}, write_errors_csv),
            "model,estimator,replicate,estimate\nM1,SKCE_b,0,0.5\n");
  EXPECT_EQ(to_csv(std::vector<ErrorSummaryRow>{{"M2", "ECE_uniform", 0.25, 0.01, 0.45}}, write_summary_csv),
            "model,estimator,mean,std_error,true_value\nM2,ECE_uniform,0.25,0.01,0.45\n");
  EXPECT_EQ(to_csv(std::vector<PValueRow>{{"M3", "A_l", 4, 0.125}}, write_pvalues_csv),
            "model,method,replicate,pvalue\nM3,A_l,4,0.125\n");
  EXPECT_EQ(to_csv(std::vector<TestErrorRow>{{"M1", "C", 0.05, 1.0}}, write_testerrors_csv),
            "model,method,alpha,test_error\nM1,C,0.05,1\n");
}
