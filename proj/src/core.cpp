#include "calibkit/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace calibkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotOnSimplex: return "NotOnSimplex";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateBandwidth: return "DegenerateBandwidth";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::UnsupportedKernel: return "UnsupportedKernel";
  }
  return "Unknown";
}

namespace {

Vector normalized_on_simplex(Vector v, double tol) {
  if (v.size() < 2) {
    throw Error(ErrorKind::DimensionMismatch, "simplex vectors need at least 2 entries");
  }
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < -kNegativeSlack) {
      throw Error(ErrorKind::NotOnSimplex, "entry " + std::to_string(i + 1) + " is negative or not finite");
    }
    if (v[i] < 0.0) v[i] = 0.0;
  }
  const double sum = v.sum();
  if (std::abs(sum - 1.0) > tol) {
    throw Error(ErrorKind::NotOnSimplex, "entries sum to " + format_double(sum));
  }
  v /= sum;
  return v;
}

void check_label(int label, int m) {
  if (label < 1 || label > m) {
    throw Error(ErrorKind::BadLabel,
                "label " + std::to_string(label) + " outside 1.." + std::to_string(m));
  }
}

}  // namespace

SimplexVector::SimplexVector(Vector values, double tol)
    : values_(normalized_on_simplex(std::move(values), tol)) {}

LabeledDataset::LabeledDataset(int class_count) : predictions_(class_count, 0), class_count_(class_count) {
  if (class_count < 2) throw Error(ErrorKind::BadParameter, "class count must be at least 2");
}

LabeledDataset::LabeledDataset(Matrix predictions, std::vector<int> labels)
    : predictions_(std::move(predictions)),
      labels_(std::move(labels)),
      class_count_(static_cast<int>(predictions_.rows())) {
  if (class_count_ < 2) throw Error(ErrorKind::BadParameter, "class count must be at least 2");
  if (predictions_.cols() != size()) {
    throw Error(ErrorKind::DimensionMismatch, "prediction and label counts differ");
  }
  for (Index j = 0; j < predictions_.cols(); ++j) {
    if ((predictions_.col(j).array() < 0.0).any() ||
        std::abs(predictions_.col(j).sum() - 1.0) > 1e-9) {
      throw Error(ErrorKind::NotOnSimplex, "record " + std::to_string(j + 1));
    }
    check_label(labels_[static_cast<std::size_t>(j)], class_count_);
  }
}

PredictionRecord LabeledDataset::record(Index i) const {
  return {SimplexVector(predictions_.col(i)), label(i)};
}

LabeledDataset LabeledDataset::select(const std::vector<Index>& indices) const {
  Matrix preds(class_count_, static_cast<Index>(indices.size()));
  std::vector<int> labs(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    preds.col(static_cast<Index>(j)) = predictions_.col(indices[j]);
    labs[j] = label(indices[j]);
  }
  return LabeledDataset(std::move(preds), std::move(labs));
}

LabeledDataset validate_dataset(const std::vector<RawRecord>& rows, int class_count, double tol) {
  if (class_count < 2) throw Error(ErrorKind::BadParameter, "class count must be at least 2");
  Matrix preds(class_count, static_cast<Index>(rows.size()));
  std::vector<int> labels(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& row = rows[j];
    if (row.prediction.size() != class_count) {
      throw Error(ErrorKind::DimensionMismatch,
                  "row " + std::to_string(j + 1) + " has " + std::to_string(row.prediction.size()) +
                      " entries, expected " + std::to_string(class_count));
    }
    try {
      preds.col(static_cast<Index>(j)) = normalized_on_simplex(row.prediction, tol);
    } catch (const Error& e) {
      throw Error(e.kind(), "row " + std::to_string(j + 1) + ": " + e.what());
    }
    check_label(row.label, class_count);
    labels[j] = row.label;
  }
  return LabeledDataset(std::move(preds), std::move(labels));
}

Matrix residuals(const LabeledDataset& ds) {
  Matrix r = -ds.predictions();
  for (Index j = 0; j < ds.size(); ++j) r(ds.label(j) - 1, j) += 1.0;
  return r;
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

LabeledDataset load_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_commas(line);
  const int m = static_cast<int>(header.size()) - 1;
  if (m < 2) throw Error(ErrorKind::ParseError, "header needs p1,...,pm,y with m >= 2");
  for (int c = 0; c < m; ++c) {
    if (header[static_cast<std::size_t>(c)] != "p" + std::to_string(c + 1)) {
      throw Error(ErrorKind::ParseError, "header column " + std::to_string(c + 1) + " must be p" +
                                             std::to_string(c + 1));
    }
  }
  if (header.back() != "y") throw Error(ErrorKind::ParseError, "last header column must be y");

  std::vector<RawRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(header.size()));
    }
    RawRecord row{Vector(m), 0};
    for (int c = 0; c < m; ++c) row.prediction[c] = parse_number<double>(fields[static_cast<std::size_t>(c)], line_no);
    row.label = parse_number<int>(fields.back(), line_no);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "read failure");
  return validate_dataset(rows, m, kSimplexTolerance);
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return load_dataset_csv(in);
}

void write_dataset_csv(const LabeledDataset& ds, std::ostream& out) {
  const int m = ds.class_count();
  std::string buffer;
  for (int c = 1; c <= m; ++c) buffer += "p" + std::to_string(c) + ",";
  buffer += "y\n";
  for (Index j = 0; j < ds.size(); ++j) {
    for (int c = 0; c < m; ++c) {
      buffer += format_double(ds.predictions()(c, j));
      buffer += ',';
    }
    buffer += std::to_string(ds.label(j));
    buffer += '\n';
  }
  out << buffer;
  if (!out) throw Error(ErrorKind::IoError, "write failure");
}

void write_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write_dataset_csv(ds, out);
}

}  // namespace calibkit
