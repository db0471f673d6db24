#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "calibkit/core.hpp"
#include "calibkit/synth.hpp"
#include "test_support.hpp"

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

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

LabeledDataset parse(const std::string& text) {
  std::istringstream in(text);
  return load_dataset_csv(in);
}

}  // namespace

TEST(SimplexVector, AcceptsAndNormalizes) {
  const SimplexVector s(vec({0.5, 0.5000001}));
  EXPECT_NEAR(s.values().sum(), 1.0, 1e-15);
  EXPECT_NEAR(s[0], 0.5 / 1.0000001, 1e-15);
}

TEST(SimplexVector, ClampsTinyNegatives) {
  const SimplexVector s(vec({-1e-13, 1.0}));
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 1.0);
}

TEST(SimplexVector, Rejections) {
  EXPECT_EQ(kind_of([] { SimplexVector(vec({0.7, 0.7})); }), ErrorKind::NotOnSimplex);
  EXPECT_EQ(kind_of([] { SimplexVector(vec({-0.1, 1.1})); }), ErrorKind::NotOnSimplex);
  EXPECT_EQ(kind_of([] { SimplexVector(vec({1.0})); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([] { SimplexVector(vec({std::nan(""), 1.0})); }), ErrorKind::NotOnSimplex);
}

TEST(ValidateDataset, Examples) {
  const auto one = validate_dataset({{vec({1.0, 0.0}), 1}}, 2);
  EXPECT_EQ(one.size(), 1);
  const auto drift = validate_dataset({{vec({0.5, 0.5000001}), 2}}, 2);
  EXPECT_NEAR(drift.prediction(0).sum(), 1.0, 1e-15);
  EXPECT_EQ(kind_of([] { validate_dataset({{vec({0.7, 0.7}), 1}}, 2); }), ErrorKind::NotOnSimplex);
}

TEST(ValidateDataset, Errors) {
  EXPECT_EQ(kind_of([] { validate_dataset({{vec({0.2, 0.3, 0.5}), 1}}, 2); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([] { validate_dataset({{vec({0.2, 0.8}), 3}}, 2); }), ErrorKind::BadLabel);
  EXPECT_EQ(kind_of([] { validate_dataset({{vec({0.2, 0.8}), 0}}, 2); }), ErrorKind::BadLabel);
}

TEST(ValidateDataset, PreservesOrder) {
  std::vector<RawRecord> rows;
  for (int i = 0; i < 30; ++i) rows.push_back({vec({i / 30.0, 1.0 - i / 30.0}), 1 + i % 2});
  const auto ds = validate_dataset(rows, 2);
  ASSERT_EQ(ds.size(), 30);
  for (int i = 0; i < 30; ++i) {
    EXPECT_EQ(ds.prediction(i)[0], i / 30.0);
    EXPECT_EQ(ds.label(i), 1 + i % 2);
  }
}

TEST(Residual, Examples) {
  EXPECT_EQ(residual(vec({1.0, 0.0, 0.0}), 1), vec({0.0, 0.0, 0.0}));
  EXPECT_TRUE(residual(vec({0.6, 0.4}), 1).isApprox(vec({0.4, -0.4}), 1e-15));
  EXPECT_TRUE(residual(vec({0.3, 0.7}), 2).isApprox(vec({-0.3, 0.3}), 1e-15));
}

TEST(Residual, SumsToZeroAndBounded) {
  std::mt19937_64 gen(1);
  const auto ds = testing_support::random_dataset(gen, 10, 200);
  const Matrix r = residuals(ds);
  for (Index j = 0; j < ds.size(); ++j) {
    EXPECT_NEAR(r.col(j).sum(), 0.0, 1e-12);
    EXPECT_LE(r.col(j).lpNorm<Eigen::Infinity>(), 1.0);
    EXPECT_TRUE(r.col(j).isApprox(residual(ds.record(j))));
  }
}

TEST(LabeledDataset, SelectAndRecord) {
  const auto ds = testing_support::binary({{0.1, 1}, {0.2, 2}, {0.3, 1}});
  const auto sub = ds.select({2, 0});
  ASSERT_EQ(sub.size(), 2);
  EXPECT_EQ(sub.prediction(0)[0], 0.3);
  EXPECT_EQ(sub.label(1), 1);
  EXPECT_EQ(ds.record(1).label, 2);
  EXPECT_EQ(ds.record(1).prediction[1], 0.8);
}

TEST(LoadCsv, Examples) {
  const auto ds = parse("p1,p2,y\n0.6,0.4,1\n");
  ASSERT_EQ(ds.size(), 1);
  EXPECT_EQ(ds.class_count(), 2);
  EXPECT_EQ(ds.prediction(0)[0], 0.6);
  EXPECT_EQ(kind_of([] { parse("p1,p2,y\n0.6,0.4,3\n"); }), ErrorKind::BadLabel);
}

TEST(LoadCsv, ToleratesBomCrlfAndBlankLines) {
  const auto ds = parse("\xEF\xBB\xBFp1,p2,y\r\n0.25,0.75,2\r\n\r\n0.5,0.5,1\r\n");
  ASSERT_EQ(ds.size(), 2);
  EXPECT_EQ(ds.label(0), 2);
  EXPECT_EQ(ds.label(1), 1);
}

TEST(LoadCsv, ParseErrors) {
  EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,y\n1,1\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("a,b,y\n0.5,0.5,1\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,p2,label\n0.5,0.5,1\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,p2,y\n0.5,0.5\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,p2,y\n0.5,abc,1\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,p2,y\n0.5,0.5,1.5\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("p1,p2,y\n0.9,0.5,1\n"); }), ErrorKind::NotOnSimplex);
}

TEST(LoadCsv, MissingFile) {
  EXPECT_EQ(kind_of([] { load_dataset_csv(std::filesystem::path("/nonexistent/file.csv")); }), ErrorKind::IoError);
}

TEST(LoadCsv, PreservesRowOrderForLargeFile) {
  const auto ds = sample_dataset(expand(ModelPreset::M1), 250, std::uint64_t{3});
  std::ostringstream out;
  write_dataset_csv(ds, out);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 250);
  EXPECT_EQ(back.class_count(), 10);
  EXPECT_EQ(back.labels(), ds.labels());
}

TEST(WriteCsv, EmptyAndSingle) {
  std::ostringstream empty;
  write_dataset_csv(LabeledDataset(3), empty);
  EXPECT_EQ(empty.str(), "p1,p2,p3,y\n");
  std::ostringstream one;
  write_dataset_csv(testing_support::binary({{0.6, 1}}), one);
  EXPECT_EQ(one.str(), "p1,p2,y\n0.6,0.4,1\n");
}

TEST(WriteCsv, RoundTripIsExact) {
  for (auto preset : {ModelPreset::M1, ModelPreset::M2, ModelPreset::M3}) {
    const auto ds = sample_dataset(expand(preset), 100, std::uint64_t{9});
    std::ostringstream out;
    write_dataset_csv(ds, out);
    const auto back = parse(out.str());
    ASSERT_EQ(back.size(), ds.size());
    EXPECT_LE((back.predictions() - ds.predictions()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(back.labels(), ds.labels());
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(0.45), "0.45");
  EXPECT_EQ(format_double(1.0), "1");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(CsvField, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("exp(nu=0.5)*identity"), "exp(nu=0.5)*identity");
  EXPECT_EQ(csv_field("exp(nu=1,dist=euclid)"), "\"exp(nu=1,dist=euclid)\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(ErrorKind, Names) {
  EXPECT_EQ(to_string(ErrorKind::DegenerateBandwidth), "DegenerateBandwidth");
  EXPECT_EQ(Error(ErrorKind::BadLabel, "x").kind(), ErrorKind::BadLabel);
}
