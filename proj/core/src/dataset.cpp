#include "macl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "macl/error.hpp"
#include "macl/random.hpp"

namespace macl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    for (std::string_view c : split_cells(line)) cells.emplace_back(c);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(path.string(), line_no, std::min(cells.size(), table.header.size()) + 1,
                       "expected " + std::to_string(table.header.size()) + " cells, found " +
                           std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ParseError(path.string(), 1, 0, "missing header");
  if (table.header.empty() || table.header[0] != "id") {
    throw ParseError(path.string(), 1, 1, "first header cell must be 'id'");
  }
  return table;
}

struct LabelTable {
  std::vector<std::string> ids;
  LabelVocabulary vocabulary;
  std::vector<LabelSet> labels;
  std::vector<std::size_t> lines;
};

LabelTable parse_labels(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  const std::string file = path.string();
  std::vector<std::string> names(t.header.begin() + 1, t.header.end());
  if (names.empty()) throw ParseError(file, 1, 0, "no label columns");
  if (names.size() > LabelSet::kMaxLabels) throw ParseError(file, 1, 0, "more than 64 label columns");
  LabelTable out;
  try {
    out.vocabulary = LabelVocabulary(std::move(names));
  } catch (const Error& e) {
    throw ParseError(file, 1, 0, e.what());
  }

  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.line_numbers[r];
    if (row[0].empty()) throw ParseError(file, line, 1, "empty id");
    if (!seen.insert(row[0]).second) throw ParseError(file, line, 1, "duplicate id '" + row[0] + "'");
    LabelSet s;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] == "1") {
        s.insert(c - 1);
      } else if (row[c] != "0") {
        throw ParseError(file, line, c + 1, "label cell must be 0 or 1, found '" + row[c] + "'");
      }
    }
    if (s.empty()) throw ParseError(file, line, 0, "empty label set at row " + std::to_string(line));
    out.ids.push_back(row[0]);
    out.labels.push_back(s);
    out.lines.push_back(line);
  }
  return out;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.vocabulary = vocabulary;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= size()) throw Error("subset index out of range");
    if (!ids.empty()) out.ids.push_back(ids[i]);
    out.labels.push_back(labels[i]);
    if (features.rows() > 0) out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Dataset load_labels(const std::filesystem::path& labels_path) {
  LabelTable lt = parse_labels(labels_path);
  Dataset ds;
  ds.ids = std::move(lt.ids);
  ds.vocabulary = std::move(lt.vocabulary);
  ds.labels = std::move(lt.labels);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& labels_path, const std::filesystem::path& features_path) {
  LabelTable lt = parse_labels(labels_path);
  Dataset ds;
  ds.ids = std::move(lt.ids);
  ds.vocabulary = std::move(lt.vocabulary);
  ds.labels = std::move(lt.labels);
  CsvTable ft = read_csv(features_path);
  const std::string file = features_path.string();
  const std::size_t dim = ft.header.size() - 1;
  if (dim == 0) throw ParseError(file, 1, 0, "no feature columns");

  std::unordered_map<std::string, std::size_t> feature_row;
  for (std::size_t r = 0; r < ft.rows.size(); ++r) {
    const std::string& id = ft.rows[r][0];
    if (id.empty()) throw ParseError(file, ft.line_numbers[r], 1, "empty id");
    if (!feature_row.emplace(id, r).second) throw ParseError(file, ft.line_numbers[r], 1, "duplicate id '" + id + "'");
  }

  ds.features.resize(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto it = feature_row.find(ds.ids[i]);
    if (it == feature_row.end()) {
      throw ParseError(labels_path.string(), lt.lines[i], 1, "id '" + ds.ids[i] + "' has no feature row");
    }
    const auto& row = ft.rows[it->second];
    for (std::size_t c = 1; c <= dim; ++c) {
      const std::string& cell = row[c];
      double value = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(value)) {
        throw ParseError(file, ft.line_numbers[it->second], c + 1, "invalid feature value '" + cell + "'");
      }
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) = value;
    }
    feature_row.erase(it);
  }
  if (!feature_row.empty()) {
    // Report the first orphan in file order.
    std::size_t first = ft.rows.size();
    for (const auto& [id, r] : feature_row) first = std::min(first, r);
    throw ParseError(file, ft.line_numbers[first], 1, "id '" + ft.rows[first][0] + "' has no label row");
  }
  return ds;
}

void write_labels_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "id";
  for (const auto& name : dataset.vocabulary.names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.ids.at(i);
    for (std::size_t j = 0; j < dataset.vocabulary.size(); ++j) out << ',' << (dataset.labels[i].contains(j) ? '1' : '0');
    out << '\n';
  }
}

void write_features_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "id";
  for (std::size_t c = 0; c < dataset.feature_dim(); ++c) out << ",f" << c;
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.ids.at(i);
    for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) out << ',' << dataset.features(static_cast<Eigen::Index>(i), c);
    out << '\n';
  }
}

SplitSpec make_splits(std::size_t sample_count, const SplitRatios& ratios, std::uint64_t seed) {
  if (sample_count < 3) throw Error("dataset smaller than 3 cannot be split");
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error("split ratios must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(sample_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);

  const auto floor_count = [&](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(sample_count) * ratio + 1e-9));
  };
  const std::size_t n_val = floor_count(ratios.val);
  const std::size_t n_test = floor_count(ratios.test);
  const std::size_t n_train = sample_count - n_val - n_test;

  SplitSpec s;
  s.seed = seed;
  s.ratios = ratios;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

}  // namespace macl
