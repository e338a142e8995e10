#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fairrep/data.hpp"
#include "fairrep/error.hpp"

using namespace fairrep;

namespace {

PreprocessSpec spec_with(std::vector<Rule> rules) {
  PreprocessSpec s;
  s.name = "t";
  s.rules = std::move(rules);
  s.rules.push_back(rule::Select{"y", {"1"}, "s", {"1"}});
  s.rules.push_back(rule::Dummy{});
  return s;
}

std::vector<double> column_of(const Dataset& d, const std::string& name) {
  for (std::size_t k = 0; k < d.feature_names.size(); ++k) {
    if (d.feature_names[k] != name) continue;
    std::vector<double> out;
    for (std::size_t i = 0; i < d.rows(); ++i) out.push_back(d.X(i, k));
    return out;
  }
  ADD_FAILURE() << "no feature " << name;
  return {};
}

Dataset toy(std::size_t n) {
  Dataset d;
  d.X = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    d.X(i, 0) = static_cast<double>(i);
    d.X(i, 1) = 3.0;
    d.s.push_back(i % 2);
    d.y.push_back((i / 2) % 2);
    d.split.push_back(Split::train);
  }
  d.feature_names = {"a", "c"};
  return d;
}

}  // namespace

TEST(Csv, NumericTable) {
  const RawTable t = parse_csv("a,b\n1,2\n3,4\n");
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.column("b").kind, ColumnKind::numeric);
  EXPECT_EQ(t.column("b").number[1], 4.0);
}

TEST(Csv, MixedColumnIsCategorical) {
  const RawTable t = parse_csv("a,b\n1,x\n3,4\n");
  EXPECT_EQ(t.column("b").kind, ColumnKind::categorical);
  EXPECT_EQ(t.column("a").kind, ColumnKind::numeric);
}

TEST(Csv, QuotesCommentsMissing) {
  CsvOptions o;
  o.comment_prefix = "#";
  const RawTable t = parse_csv("# c\na,b\n\" x, y\",1\n\"q\"\"\",?\n\n", o);
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.column("a").text[0], " x, y");  // quoted text kept verbatim
  EXPECT_EQ(t.column("a").text[1], "q\"");
  EXPECT_FALSE(t.missing_row[0]);
  EXPECT_TRUE(t.missing_row[1]);
  EXPECT_EQ(t.column("b").kind, ColumnKind::numeric);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_csv("a,b\n1\n"), InputError);
  EXPECT_THROW(parse_csv("a\n\"open\n"), InputError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), InputError);
  try {
    load_csv("/nonexistent/file.csv");
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/file.csv"), std::string::npos);
  }
}

TEST(Csv, HeaderlessNeedsNames) {
  CsvOptions o;
  o.has_header = false;
  EXPECT_THROW(parse_csv("1,2\n", o), InputError);
  o.column_names = {"p", "q"};
  EXPECT_EQ(parse_csv("1,2\n", o).column("q").number[0], 2.0);
}

TEST(Preprocess, BinarizeThreshold) {
  const RawTable t = parse_csv("age,y,s\n69,0,0\n71,1,1\n70,1,0\n");
  const Dataset d = preprocess(t, spec_with({rule::Binarize{"age", 70, false}}));
  EXPECT_EQ(column_of(d, "age"), (std::vector<double>{0, 1, 1}));
}

TEST(Preprocess, DummyOneHot) {
  const RawTable t = parse_csv("c,y,s\nr,0,0\ng,1,1\nb,1,0\ng,0,1\n");
  const Dataset d = preprocess(t, spec_with({}));
  ASSERT_EQ(d.dim(), 3u);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"c=b", "c=g", "c=r"}));
  for (std::size_t i = 0; i < d.rows(); ++i) EXPECT_EQ(d.X(i, 0) + d.X(i, 1) + d.X(i, 2), 1.0);
}

TEST(Preprocess, BinRemapFilterDropKeep) {
  const RawTable t = parse_csv("v,r,k,y,s\n1,a,5,0,0\n5,b,6,1,1\n9,c,7,1,0\n12,a,8,0,1\n");
  PreprocessLog log;
  const Dataset d = preprocess(t,
                               spec_with({rule::Filter{"k", rule::FilterOp::le, {"7"}},
                                          rule::Bin{"v", {4, 8}, {"lo", "mid", "hi"}},
                                          rule::Remap{"r", {{"a", "A"}}, std::string("other")},
                                          rule::Keep{{"v", "r", "y", "s"}}}),
                               &log);
  EXPECT_EQ(log.dropped_by_filters, 1u);
  EXPECT_EQ(d.rows(), 3u);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"v=hi", "v=lo", "v=mid", "r=A", "r=other"}));
  EXPECT_EQ(column_of(d, "v=lo"), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(column_of(d, "r=A"), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(d.y, (BinaryVector{0, 1, 1}));
  EXPECT_EQ(d.s, (BinaryVector{0, 1, 0}));
}

TEST(Preprocess, MissingRowsDroppedFirst) {
  PreprocessLog log;
  const Dataset d = preprocess(parse_csv("x,y,s\n1,0,0\n?,1,1\n3,1,1\n"), spec_with({}), &log);
  EXPECT_EQ(log.dropped_missing, 1u);
  EXPECT_EQ(d.rows(), 2u);
}

TEST(Preprocess, Errors) {
  const RawTable t = parse_csv("x,y,s\n1,0,0\n2,1,1\n");
  EXPECT_THROW(preprocess(t, spec_with({rule::Drop{{"nope"}}})), InputError);
  PreprocessSpec no_select;
  EXPECT_THROW(preprocess(t, no_select), InputError);
  EXPECT_THROW(preprocess(t, spec_with({rule::Bin{"x", {1}, {"a"}}})), InputError);
}

TEST(PreprocessSpec, TomlRoundTrip) {
  const PreprocessSpec s = parse_preprocess_spec(R"(
name = "toy"
[csv]
comment_prefix = "#"
[[rule]]
kind = "binarize"
column = "age"
threshold = 70
[[rule]]
kind = "filter"
column = "k"
op = "between"
lo = -1
hi = 1
[[rule]]
kind = "select"
label = "y"
label_positive = ["1"]
sensitive = "s"
sensitive_positive = ["1"]
[[rule]]
kind = "dummy"
)");
  EXPECT_EQ(s.name, "toy");
  EXPECT_EQ(s.csv.comment_prefix, "#");
  ASSERT_EQ(s.rules.size(), 4u);
  EXPECT_EQ(std::get<rule::Binarize>(s.rules[0]).threshold, 70.0);
  EXPECT_EQ(std::get<rule::Filter>(s.rules[1]).hi, 1.0);
  EXPECT_THROW(parse_preprocess_spec("[[rule]]\nkind = \"explode\"\n"), InputError);
  EXPECT_THROW(parse_preprocess_spec("name = "), InputError);
}

TEST(PreprocessSpec, Builtins) {
  for (const char* name : {"adult", "compas"}) {
    const PreprocessSpec s = builtin_preprocess_spec(name);
    EXPECT_EQ(s.name, name);
    EXPECT_FALSE(s.rules.empty());
    EXPECT_EQ(parse_preprocess_spec(builtin_preprocess_toml(name)).rules.size(), s.rules.size());
  }
  EXPECT_THROW(builtin_preprocess_spec("mnist"), InputError);
}

TEST(Split, Sizes) {
  SplitScheme sc;
  sc.kind = SplitScheme::Kind::fixed_test;
  Dataset d = toy(12);
  d.split[10] = d.split[11] = Split::test;
  const Dataset out = split(d, sc, 1);
  EXPECT_EQ(out.count(Split::train), 8u);
  EXPECT_EQ(out.count(Split::val), 2u);
  EXPECT_EQ(split(d, sc, 1).split, out.split);
  sc.kind = SplitScheme::Kind::random;
  const Dataset r = split(toy(100), sc, 4);
  EXPECT_EQ(r.count(Split::test), 30u);
  EXPECT_EQ(r.count(Split::val), 14u);
}

TEST(Split, FixedTestKeepsTags) {
  Dataset d = toy(10);
  d.split[9] = d.split[8] = Split::test;
  SplitScheme sc;
  sc.kind = SplitScheme::Kind::fixed_test;
  const Dataset out = split(d, sc, 0);
  EXPECT_EQ(out.split[8], Split::test);
  EXPECT_EQ(out.split[9], Split::test);
  EXPECT_EQ(out.count(Split::val), 1u);
}

TEST(Standardize, DropsConstantAndCentres) {
  const Dataset d = standardize(toy(6));
  ASSERT_EQ(d.dim(), 1u);
  ASSERT_TRUE(d.standardization);
  EXPECT_EQ(d.standardization->dropped_constant, (std::vector<std::string>{"c"}));
  double mean = 0, var = 0;
  for (std::size_t i = 0; i < 6; ++i) mean += d.X(i, 0) / 6;
  for (std::size_t i = 0; i < 6; ++i) var += (d.X(i, 0) - mean) * (d.X(i, 0) - mean) / 6;
  EXPECT_NEAR(mean, 0, 1e-12);
  EXPECT_NEAR(var, 1, 1e-12);
}

TEST(Cache, RoundTripAndCorruption) {
  SplitScheme sc;
  const Dataset d = standardize(split(toy(40), sc, 2));
  const std::string bytes = serialize_dataset(d);
  EXPECT_EQ(deserialize_dataset(bytes), d);
  EXPECT_THROW(deserialize_dataset(bytes.substr(0, bytes.size() - 3)), InputError);
  EXPECT_THROW(deserialize_dataset(bytes + "x"), InputError);
  EXPECT_THROW(deserialize_dataset("XXXX" + bytes.substr(4)), InputError);
  const auto path = std::filesystem::temp_directory_path() / "fairrep_cache_test.bin";
  save_dataset(d, path);
  EXPECT_EQ(load_dataset(path), d);
  std::filesystem::remove(path);
}
