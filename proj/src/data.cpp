#include "fairrep/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "fairrep/error.hpp"
#include "fairrep/random.hpp"

namespace fairrep {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw InputError("unterminated quoted field on line " + std::to_string(line_no));
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

const Column& RawTable::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw InputError("no column named '" + name + "'");
}

bool RawTable::has_column(const std::string& name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
}

void infer_kinds(RawTable& table, const CsvOptions& options) {
  for (auto& col : table.columns) {
    bool numeric = true;
    col.number.assign(col.text.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < col.text.size(); ++i) {
      if (contains(options.missing_tokens, col.text[i])) continue;
      if (auto v = parse_number(col.text[i])) {
        col.number[i] = *v;
      } else {
        numeric = false;
      }
    }
    if (contains(options.force_categorical, col.name)) numeric = false;
    if (contains(options.force_numeric, col.name)) {
      if (!numeric) throw InputError("column '" + col.name + "' was forced numeric but has non-numeric cells");
      numeric = true;
    }
    col.kind = numeric ? ColumnKind::numeric : ColumnKind::categorical;
    if (!numeric) std::fill(col.number.begin(), col.number.end(), std::numeric_limits<double>::quiet_NaN());
  }
}

void RawTable::append(const RawTable& other) {
  if (other.cols() != cols()) {
    throw InputError("cannot append a table with " + std::to_string(other.cols()) + " columns to one with " +
                     std::to_string(cols()));
  }
  for (std::size_t j = 0; j < cols(); ++j) {
    if (columns[j].name != other.columns[j].name) {
      throw InputError("column mismatch on append: '" + columns[j].name + "' vs '" + other.columns[j].name + "'");
    }
    columns[j].text.insert(columns[j].text.end(), other.columns[j].text.begin(), other.columns[j].text.end());
  }
  missing_row.insert(missing_row.end(), other.missing_row.begin(), other.missing_row.end());
  from_test_file.insert(from_test_file.end(), other.from_test_file.begin(), other.from_test_file.end());
  infer_kinds(*this);
}

RawTable parse_csv(const std::string& text, const CsvOptions& options) {
  RawTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_names = false;
  if (!options.has_header) {
    if (options.column_names.empty()) throw InputError("CSV without header needs column names");
    for (const auto& n : options.column_names) table.columns.push_back(Column{.name = n});
    have_names = true;
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!options.comment_prefix.empty() && line.rfind(options.comment_prefix, 0) == 0) continue;
    auto cells = split_csv_line(line, line_no);
    if (!have_names) {
      for (auto& n : cells) table.columns.push_back(Column{.name = n});
      have_names = true;
      continue;
    }
    if (cells.size() != table.cols()) {
      throw InputError("ragged row on line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.cols()) + " fields, got " + std::to_string(cells.size()));
    }
    bool missing = false;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      missing = missing || contains(options.missing_tokens, cells[j]);
      table.columns[j].text.push_back(std::move(cells[j]));
    }
    table.missing_row.push_back(missing);
    table.from_test_file.push_back(false);
  }
  if (!have_names) throw InputError("CSV has no header row");
  infer_kinds(table, options);
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open CSV file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

// ---------------------------------------------------------------- preprocess

namespace {

struct WorkTable {
  std::vector<Column> cols;
  std::vector<bool> test;

  std::size_t rows() const { return test.size(); }

  Column& find(const std::string& name, const std::string& rule) {
    for (auto& c : cols) {
      if (c.name == name) return c;
    }
    throw InputError(rule + ": column '" + name + "' does not exist");
  }

  void keep_rows(const std::vector<bool>& keep) {
    for (auto& c : cols) {
      std::vector<std::string> t;
      std::vector<double> n;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) continue;
        t.push_back(std::move(c.text[i]));
        n.push_back(c.number[i]);
      }
      c.text = std::move(t);
      c.number = std::move(n);
    }
    std::vector<bool> tt;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) tt.push_back(test[i]);
    }
    test = std::move(tt);
  }
};

std::string format_number(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::ostringstream os;
  os << v;
  return os.str();
}

void apply(WorkTable& t, const rule::Bin& r) {
  const std::string what = describe(Rule{r});
  Column& c = t.find(r.column, what);
  if (c.kind != ColumnKind::numeric) throw InputError(what + ": column is not numeric");
  if (r.labels.size() != r.cuts.size() + 1) throw InputError(what + ": needs exactly cuts+1 labels");
  if (!std::is_sorted(r.cuts.begin(), r.cuts.end())) throw InputError(what + ": cuts must be ascending");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto k = static_cast<std::size_t>(std::upper_bound(r.cuts.begin(), r.cuts.end(), c.number[i]) - r.cuts.begin());
    c.text[i] = r.labels[k];
    c.number[i] = std::numeric_limits<double>::quiet_NaN();
  }
  c.kind = ColumnKind::categorical;
}

void apply(WorkTable& t, const rule::Binarize& r) {
  const std::string what = describe(Rule{r});
  Column& c = t.find(r.column, what);
  if (c.kind != ColumnKind::numeric) throw InputError(what + ": column is not numeric");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const bool on = c.number[i] >= r.threshold;
    c.text[i] = on ? "1" : "0";
    c.number[i] = r.categorical ? std::numeric_limits<double>::quiet_NaN() : (on ? 1.0 : 0.0);
  }
  c.kind = r.categorical ? ColumnKind::categorical : ColumnKind::numeric;
}

void apply(WorkTable& t, const rule::Remap& r) {
  const std::string what = describe(Rule{r});
  Column& c = t.find(r.column, what);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    bool hit = false;
    for (const auto& [from, to] : r.mapping) {
      if (c.text[i] == from) {
        c.text[i] = to;
        hit = true;
        break;
      }
    }
    if (!hit && r.fallback) c.text[i] = *r.fallback;
    c.number[i] = std::numeric_limits<double>::quiet_NaN();
  }
  c.kind = ColumnKind::categorical;
}

bool passes(const Column& c, std::size_t i, const rule::Filter& r, const std::string& what) {
  using rule::FilterOp;
  const std::string& text = c.text[i];
  const bool numeric = c.kind == ColumnKind::numeric;
  auto bound = [&]() {
    if (r.values.size() != 1) throw InputError(what + ": needs exactly one value");
    return r.values.front();
  };
  auto compare = [&](auto pred) {
    const std::string b = bound();
    if (numeric) {
      const auto v = parse_number(b);
      if (!v) throw InputError(what + ": bound '" + b + "' is not numeric");
      return pred(c.number[i], *v);
    }
    return pred(text, b);
  };
  auto equal = [&](const std::string& v) {
    if (numeric) {
      const auto x = parse_number(v);
      return x && c.number[i] == *x;
    }
    return text == v;
  };
  switch (r.op) {
    case FilterOp::eq: return equal(bound());
    case FilterOp::ne: return !equal(bound());
    case FilterOp::lt: return compare([](const auto& a, const auto& b) { return a < b; });
    case FilterOp::le: return compare([](const auto& a, const auto& b) { return a <= b; });
    case FilterOp::gt: return compare([](const auto& a, const auto& b) { return a > b; });
    case FilterOp::ge: return compare([](const auto& a, const auto& b) { return a >= b; });
    case FilterOp::between:
      if (!numeric) throw InputError(what + ": 'between' needs a numeric column");
      return c.number[i] >= r.lo && c.number[i] <= r.hi;
    case FilterOp::in: return std::any_of(r.values.begin(), r.values.end(), equal);
    case FilterOp::not_in: return std::none_of(r.values.begin(), r.values.end(), equal);
  }
  return true;
}

std::size_t apply(WorkTable& t, const rule::Filter& r) {
  const std::string what = describe(Rule{r});
  const Column& c = t.find(r.column, what);
  std::vector<bool> keep(t.rows());
  std::size_t removed = 0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    keep[i] = passes(c, i, r, what);
    removed += keep[i] ? 0 : 1;
  }
  t.keep_rows(keep);
  return removed;
}

void apply(WorkTable& t, const rule::Drop& r) {
  const std::string what = describe(Rule{r});
  for (const auto& name : r.columns) {
    t.find(name, what);
    std::erase_if(t.cols, [&](const Column& c) { return c.name == name; });
  }
}

void apply(WorkTable& t, const rule::Keep& r) {
  const std::string what = describe(Rule{r});
  std::vector<Column> kept;
  for (const auto& name : r.columns) kept.push_back(std::move(t.find(name, what)));
  t.cols = std::move(kept);
}

}  // namespace

std::string describe(const Rule& r) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, rule::Bin>) return "bin(" + x.column + ")";
        if constexpr (std::is_same_v<T, rule::Binarize>) return "binarize(" + x.column + ")";
        if constexpr (std::is_same_v<T, rule::Remap>) return "remap(" + x.column + ")";
        if constexpr (std::is_same_v<T, rule::Filter>) return "filter(" + x.column + ")";
        if constexpr (std::is_same_v<T, rule::Drop>) return "drop";
        if constexpr (std::is_same_v<T, rule::Keep>) return "keep";
        if constexpr (std::is_same_v<T, rule::Dummy>) return "dummy";
        if constexpr (std::is_same_v<T, rule::Select>) return "select(" + x.label + ", " + x.sensitive + ")";
      },
      r);
}

Dataset preprocess(const RawTable& table, const PreprocessSpec& spec, PreprocessLog* log) {
  PreprocessLog local;
  PreprocessLog& out_log = log ? *log : local;

  WorkTable t;
  std::vector<bool> complete(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    complete[i] = !table.missing_row[i];
    out_log.dropped_missing += complete[i] ? 0 : 1;
  }
  t.cols = table.columns;
  t.test = table.from_test_file;
  t.keep_rows(complete);
  // Kinds are re-inferred on complete rows: a column that was categorical only
  // because of missing tokens becomes numeric again.
  {
    RawTable tmp;
    tmp.columns = t.cols;
    infer_kinds(tmp, spec.csv);
    t.cols = std::move(tmp.columns);
  }

  // The label and sensitive columns are known up front so a dummy rule placed
  // before the select rule still leaves them alone.
  std::optional<rule::Select> select;
  for (const Rule& r : spec.rules) {
    if (const auto* s = std::get_if<rule::Select>(&r)) select = *s;
  }
  std::set<std::string> dummy_coded;

  for (const Rule& r : spec.rules) {
    if (const auto* s = std::get_if<rule::Select>(&r)) {
      t.find(s->label, describe(r));
      t.find(s->sensitive, describe(r));
      continue;
    }
    if (std::holds_alternative<rule::Dummy>(r)) {
      std::vector<Column> expanded;
      for (auto& c : t.cols) {
        const bool is_target = select && (c.name == select->label || c.name == select->sensitive);
        if (c.kind != ColumnKind::categorical || is_target) {
          expanded.push_back(std::move(c));
          continue;
        }
        std::set<std::string> levels(c.text.begin(), c.text.end());
        for (const auto& level : levels) {
          Column ind{.name = c.name + "=" + level, .kind = ColumnKind::numeric};
          ind.text.resize(c.text.size());
          ind.number.resize(c.text.size());
          for (std::size_t i = 0; i < c.text.size(); ++i) {
            ind.number[i] = c.text[i] == level ? 1.0 : 0.0;
            ind.text[i] = c.text[i] == level ? "1" : "0";
          }
          expanded.push_back(std::move(ind));
        }
        dummy_coded.insert(c.name);
      }
      t.cols = std::move(expanded);
      continue;
    }
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, rule::Filter>) {
            out_log.dropped_by_filters += apply(t, x);
          } else if constexpr (!std::is_same_v<T, rule::Select> && !std::is_same_v<T, rule::Dummy>) {
            apply(t, x);
          }
        },
        r);
  }

  if (!select) throw InputError("preprocess spec '" + spec.name + "' has no select rule (label and sensitive)");

  auto binary_of = [&](const std::string& name, const std::vector<std::string>& positive, const char* role) {
    const Column& c = t.find(name, std::string("select ") + role);
    BinaryVector v(t.rows());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const std::string key = c.kind == ColumnKind::numeric ? format_number(c.number[i]) : c.text[i];
      seen.insert(key);
      v[i] = contains(positive, key) || contains(positive, c.text[i]) ? 1 : 0;
    }
    if (positive.empty()) {
      if (seen.size() > 2) throw InputError(std::string(role) + " column '" + name + "' is not binary");
      // Two levels without an explicit positive: the larger one (lexicographic) is 1.
      for (std::size_t i = 0; i < t.rows(); ++i) {
        const std::string key = c.kind == ColumnKind::numeric ? format_number(c.number[i]) : c.text[i];
        v[i] = seen.size() == 2 && key == *seen.rbegin() ? 1 : 0;
      }
    }
    return v;
  };

  Dataset d;
  d.y = binary_of(select->label, select->label_positive, "label");
  d.s = binary_of(select->sensitive, select->sensitive_positive, "sensitive");

  std::vector<const Column*> features;
  for (const auto& c : t.cols) {
    if (c.name == select->label || c.name == select->sensitive) continue;
    if (c.kind == ColumnKind::categorical) {
      throw InputError("categorical column '" + c.name + "' is not dummy-coded (add a dummy rule)");
    }
    features.push_back(&c);
  }
  d.X = Matrix(t.rows(), features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    d.feature_names.push_back(features[j]->name);
    for (std::size_t i = 0; i < t.rows(); ++i) d.X(i, j) = features[j]->number[i];
  }
  d.split.resize(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) d.split[i] = t.test[i] ? Split::test : Split::train;
  if (!dummy_coded.empty()) {
    out_log.notes.push_back("dummy-coded " + std::to_string(dummy_coded.size()) + " categorical columns");
  }
  return d;
}

// ------------------------------------------------------------------- dataset

std::vector<std::size_t> Dataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

std::size_t Dataset::count(Split which) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), which));
}

void Dataset::validate() const {
  const std::size_t n = X.rows();
  if (s.size() != n || y.size() != n || split.size() != n) {
    throw ShapeError("dataset columns disagree on row count " + std::to_string(n));
  }
  if (!feature_names.empty() && feature_names.size() != X.cols()) {
    throw ShapeError("dataset has " + std::to_string(feature_names.size()) + " feature names for " +
                     std::to_string(X.cols()) + " features");
  }
}

Dataset split(Dataset data, const SplitScheme& scheme, std::uint64_t seed) {
  data.validate();
  Rng rng(derive_seed(seed, 0x5117));
  std::vector<std::size_t> pool;
  if (scheme.kind == SplitScheme::Kind::fixed_test) {
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.split[i] != Split::test) pool.push_back(i);
    }
  } else {
    if (!(scheme.test_fraction > 0 && scheme.test_fraction < 1)) {
      throw InputError("test fraction must be in (0, 1)");
    }
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::floor(scheme.test_fraction * static_cast<double>(all.size())));
    for (std::size_t k = 0; k < all.size(); ++k) {
      data.split[all[k]] = k < n_test ? Split::test : Split::train;
      if (k >= n_test) pool.push_back(all[k]);
    }
    std::sort(pool.begin(), pool.end());
  }
  if (!(scheme.val_fraction > 0 && scheme.val_fraction < 1)) throw InputError("validation fraction must be in (0, 1)");
  std::shuffle(pool.begin(), pool.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::floor(scheme.val_fraction * static_cast<double>(pool.size())));
  for (std::size_t k = 0; k < pool.size(); ++k) data.split[pool[k]] = k < n_val ? Split::val : Split::train;
  for (Split which : {Split::train, Split::val, Split::test}) {
    if (data.count(which) == 0) {
      static const char* names[] = {"train", "validation", "test"};
      throw InputError(std::string("split produced an empty ") + names[static_cast<int>(which)] + " part (n=" +
                       std::to_string(data.rows()) + ")");
    }
  }
  return data;
}

Dataset standardize(Dataset data) {
  data.validate();
  const auto train = data.indices(Split::train);
  if (train.empty()) throw InputError("standardize needs a nonempty train split");
  Standardization st;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    double mean = 0.0;
    for (std::size_t i : train) mean += data.X(i, j);
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (std::size_t i : train) var += (data.X(i, j) - mean) * (data.X(i, j) - mean);
    var /= static_cast<double>(train.size());
    const double sd = std::sqrt(var);
    const std::string name = j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j);
    if (!(sd > 1e-12)) {
      st.dropped_constant.push_back(name);
      continue;
    }
    keep.push_back(j);
    st.mean.push_back(mean);
    st.stddev.push_back(sd);
  }
  Matrix X(data.rows(), keep.size());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t j = keep[k];
    for (std::size_t i = 0; i < data.rows(); ++i) X(i, k) = (data.X(i, j) - st.mean[k]) / st.stddev[k];
    if (j < data.feature_names.size()) names.push_back(data.feature_names[j]);
  }
  data.X = std::move(X);
  data.feature_names = std::move(names);
  data.standardization = std::move(st);
  return data;
}

// --------------------------------------------------------------- binary cache

namespace {

static_assert(std::endian::native == std::endian::little, "dataset cache assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'R', 'D', 'S'};

template <typename T>
void put(std::string& out, const T& v) {
  const auto* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

void put_doubles(std::string& out, const std::vector<double>& v) {
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw InputError("dataset cache is truncated");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
  std::vector<double> get_doubles(std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return v;
  }
  std::vector<std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> v(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return v;
  }
};

}  // namespace

std::string serialize_dataset(const Dataset& data) {
  data.validate();
  std::string out(kMagic, 4);
  put(out, kDatasetCacheVersion);
  put(out, static_cast<std::uint64_t>(data.rows()));
  put(out, static_cast<std::uint64_t>(data.dim()));
  put(out, static_cast<std::uint8_t>(data.standardization ? 1 : 0));
  put(out, static_cast<std::uint64_t>(data.feature_names.size()));
  for (const auto& n : data.feature_names) put_string(out, n);
  put_doubles(out, data.X.values());
  out.append(reinterpret_cast<const char*>(data.s.data()), data.s.size());
  out.append(reinterpret_cast<const char*>(data.y.data()), data.y.size());
  for (Split sp : data.split) put(out, static_cast<std::uint8_t>(sp));
  if (data.standardization) {
    const auto& st = *data.standardization;
    put_doubles(out, st.mean);
    put_doubles(out, st.stddev);
    put(out, static_cast<std::uint64_t>(st.dropped_constant.size()));
    for (const auto& n : st.dropped_constant) put_string(out, n);
  }
  return out;
}

Dataset deserialize_dataset(const std::string& bytes) {
  Reader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw InputError("not a dataset cache (bad magic)");
  r.pos = 4;
  const auto version = r.get<std::uint8_t>();
  if (version != kDatasetCacheVersion) {
    throw InputError("dataset cache version " + std::to_string(version) + " is not supported");
  }
  const auto n = static_cast<std::size_t>(r.get<std::uint64_t>());
  const auto d = static_cast<std::size_t>(r.get<std::uint64_t>());
  const bool has_std = r.get<std::uint8_t>() != 0;
  Dataset out;
  const auto names = static_cast<std::size_t>(r.get<std::uint64_t>());
  for (std::size_t k = 0; k < names; ++k) out.feature_names.push_back(r.get_string());
  out.X = Matrix(n, d, r.get_doubles(n * d));
  out.s = r.get_bytes(n);
  out.y = r.get_bytes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = r.get<std::uint8_t>();
    if (v > 2) throw InputError("dataset cache has an invalid split tag");
    out.split.push_back(static_cast<Split>(v));
  }
  if (has_std) {
    Standardization st;
    st.mean = r.get_doubles(d);
    st.stddev = r.get_doubles(d);
    const auto k = static_cast<std::size_t>(r.get<std::uint64_t>());
    for (std::size_t i = 0; i < k; ++i) st.dropped_constant.push_back(r.get_string());
    out.standardization = std::move(st);
  }
  if (r.pos != bytes.size()) throw InputError("dataset cache has trailing bytes");
  out.validate();
  return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write dataset cache '" + path.string() + "'");
  const std::string bytes = serialize_dataset(data);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset cache '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_dataset(buf.str());
}

}  // namespace fairrep
