#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairrep/matrix.hpp"

namespace fairrep {

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> text;  // raw cell text, trimmed
  std::vector<double> number;     // parsed value when numeric, NaN otherwise
};

struct CsvOptions {
  bool has_header = true;
  std::vector<std::string> column_names;      // used when has_header is false
  std::string comment_prefix;                 // lines starting with it are skipped
  std::vector<std::string> missing_tokens{"", "?", "NA"};
  std::vector<std::string> force_categorical;
  std::vector<std::string> force_numeric;
};

// A rectangular table of typed columns. Rows loaded from a dedicated test
// file carry `from_test_file` so the fixed-test split can keep them apart.
struct RawTable {
  std::vector<Column> columns;
  std::vector<bool> missing_row;  // any cell in the row matched a missing token
  std::vector<bool> from_test_file;

  std::size_t rows() const { return missing_row.size(); }
  std::size_t cols() const { return columns.size(); }
  const Column& column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  // Appends rows of `other` (same column names in the same order) and re-infers kinds.
  void append(const RawTable& other);
};

RawTable parse_csv(const std::string& text, const CsvOptions& options = {});
RawTable load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void infer_kinds(RawTable& table, const CsvOptions& options = {});

namespace rule {

// Numeric column into labelled intervals: v < cuts[0] -> labels[0], ..., v >= cuts.back() -> labels.back().
struct Bin {
  std::string column;
  std::vector<double> cuts;
  std::vector<std::string> labels;
};

// v >= threshold -> 1, else 0. When `categorical` the result takes part in dummy coding.
struct Binarize {
  std::string column;
  double threshold = 0.0;
  bool categorical = false;
};

struct Remap {
  std::string column;
  std::vector<std::pair<std::string, std::string>> mapping;
  std::optional<std::string> fallback;  // applied to values not in `mapping`
};

enum class FilterOp { eq, ne, lt, le, gt, ge, between, in, not_in };

// Keeps rows satisfying the predicate.
struct Filter {
  std::string column;
  FilterOp op = FilterOp::eq;
  std::vector<std::string> values;  // eq/ne/in/not_in, and the bound for lt..ge
  double lo = 0.0;
  double hi = 0.0;
};

struct Drop {
  std::vector<std::string> columns;
};

struct Keep {
  std::vector<std::string> columns;
};

// One indicator per level for every categorical feature column present.
struct Dummy {};

struct Select {
  std::string label;
  std::vector<std::string> label_positive;
  std::string sensitive;
  std::vector<std::string> sensitive_positive;
};

}  // namespace rule

using Rule = std::variant<rule::Bin, rule::Binarize, rule::Remap, rule::Filter, rule::Drop, rule::Keep, rule::Dummy,
                          rule::Select>;

std::string describe(const Rule& r);

struct PreprocessSpec {
  std::string name;
  CsvOptions csv;
  std::vector<Rule> rules;
};

// Parses the TOML form (top-level csv options plus an array of [[rule]] tables).
PreprocessSpec parse_preprocess_spec(const std::string& toml_text);
PreprocessSpec load_preprocess_spec(const std::filesystem::path& path);
// Built-in specs: "adult", "compas".
PreprocessSpec builtin_preprocess_spec(const std::string& name);
std::string builtin_preprocess_toml(const std::string& name);

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> dropped_constant;
  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct Dataset {
  Matrix X;
  BinaryVector s;
  BinaryVector y;
  std::vector<Split> split;
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;

  std::size_t rows() const { return X.rows(); }
  std::size_t dim() const { return X.cols(); }
  std::vector<std::size_t> indices(Split which) const;
  std::size_t count(Split which) const;
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct PreprocessLog {
  std::size_t dropped_missing = 0;
  std::size_t dropped_by_filters = 0;
  std::vector<std::string> notes;
};

// Applies the rules in order. Rows with missing cells are dropped first.
// Rows coming from a test file are tagged Split::test, all others Split::train.
Dataset preprocess(const RawTable& table, const PreprocessSpec& spec, PreprocessLog* log = nullptr);

struct SplitScheme {
  enum class Kind { fixed_test, random };
  Kind kind = Kind::random;
  double test_fraction = 0.3;  // random only
  double val_fraction = 0.2;   // of the non-test rows
};

// fixed_test keeps the existing test tags and splits the rest; random draws a
// test part first. Validation size is floor(val_fraction * non-test rows).
Dataset split(Dataset data, const SplitScheme& scheme, std::uint64_t seed);

// Train-split statistics applied to every row; constant features are dropped.
Dataset standardize(Dataset data);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& data);
Dataset deserialize_dataset(const std::string& bytes);

inline constexpr std::uint8_t kDatasetCacheVersion = 1;

}  // namespace fairrep
