#include "drocks/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

struct raw_row {
  std::string label;
  std::vector<double> values;
};

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<raw_row> read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::format_error, "cannot open " + path.string());
  std::vector<raw_row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 2) {
      throw error(errc::format_error,
                  path.string() + ":" + std::to_string(line_no) + ": expected label and values");
    }
    raw_row row;
    row.label = trim(fields[0]);
    row.values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      std::string t = trim(fields[i]);
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
      if (t == "nan" || t == "?" || (v && std::isnan(*v))) {
        throw error(errc::unsupported_dataset, path.string() + ":" + std::to_string(line_no) +
                                                   ": missing values are not supported");
      }
      if (!v || !std::isfinite(*v)) {
        throw error(errc::format_error, path.string() + ":" + std::to_string(line_no) +
                                            ": cannot parse value '" + fields[i] + "'");
      }
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw error(errc::format_error, path.string() + " contains no series");
  return rows;
}

bool label_less(const std::string& a, const std::string& b) {
  auto na = parse_double(a);
  auto nb = parse_double(b);
  if (na && nb) return *na < *nb || (*na == *nb && a < b);
  if (na != nb) return na.has_value();  // numeric labels first
  return a < b;
}

}  // namespace

dataset load_ucr(const std::filesystem::path& train_path, const std::filesystem::path& test_path) {
  auto train_rows = read_tsv(train_path);
  auto test_rows = read_tsv(test_path);

  const std::size_t len = train_rows.front().values.size();
  auto check_len = [&](const std::vector<raw_row>& rows, const std::filesystem::path& p) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].values.size() != len) {
        throw error(errc::format_error, p.string() + ": row " + std::to_string(i + 1) + " has " +
                                            std::to_string(rows[i].values.size()) +
                                            " values, expected " + std::to_string(len));
      }
    }
  };
  check_len(train_rows, train_path);
  check_len(test_rows, test_path);

  std::vector<std::string> labels;
  for (const auto& r : train_rows) labels.push_back(r.label);
  std::sort(labels.begin(), labels.end(), label_less);
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::map<std::string, int> code;
  for (std::size_t i = 0; i < labels.size(); ++i) code[labels[i]] = static_cast<int>(i);

  auto encode = [&](std::vector<raw_row>& rows, const std::filesystem::path& p) {
    std::vector<time_series> out;
    out.reserve(rows.size());
    for (auto& r : rows) {
      auto it = code.find(r.label);
      if (it == code.end()) {
        throw error(errc::format_error, p.string() + ": label '" + r.label +
                                            "' does not occur in the training split");
      }
      out.push_back({std::move(r.values), it->second});
    }
    return out;
  };

  dataset ds;
  ds.name = train_path.stem().string();
  if (auto pos = ds.name.rfind("_TRAIN"); pos != std::string::npos) ds.name.resize(pos);
  ds.train = encode(train_rows, train_path);
  ds.test = encode(test_rows, test_path);
  ds.class_count = static_cast<int>(labels.size());
  ds.series_length = len;
  ds.original_labels = std::move(labels);
  return ds;
}

dataset load_ucr_by_name(const std::filesystem::path& root, const std::string& name) {
  auto dir = root / name;
  return load_ucr(dir / (name + "_TRAIN.tsv"), dir / (name + "_TEST.tsv"));
}

std::vector<double> znormalize(std::span<const double> series) {
  std::vector<double> out(series.begin(), series.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-8) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  for (auto& v : out) v = (v - mean) / sd;
  return out;
}

void znormalize_in_place(dataset& ds) {
  for (auto* split : {&ds.train, &ds.test}) {
    for (auto& s : *split) s.values = znormalize(s.values);
  }
}

nlohmann::json manifest(const dataset& ds) {
  nlohmann::json mapping = nlohmann::json::object();
  for (std::size_t i = 0; i < ds.original_labels.size(); ++i) {
    mapping[ds.original_labels[i]] = i;
  }
  return {
      {"name", ds.name},
      {"series_length", ds.series_length},
      {"class_count", ds.class_count},
      {"train_size", ds.train.size()},
      {"test_size", ds.test.size()},
      {"label_mapping", mapping},
  };
}

partition partition_iid(const dataset& ds, std::size_t clients, std::uint64_t seed) {
  if (clients < 1) throw error(errc::invalid_config, "need at least one client");
  if (clients > ds.train.size()) {
    throw error(errc::invalid_config, std::to_string(clients) + " clients but only " +
                                          std::to_string(ds.train.size()) + " training series");
  }
  partition part;
  part.clients.resize(clients);

  auto deal = [&](const std::vector<time_series>& split, std::uint64_t stream,
                  std::vector<time_series> client_split::*member, bool warn) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
    for (std::size_t i = 0; i < split.size(); ++i) {
      by_class[static_cast<std::size_t>(split[i].label)].push_back(i);
    }
    std::size_t next = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto& idx = by_class[c];
      if (warn && idx.size() < clients) {
        part.warnings.push_back("class " + std::to_string(c) + " has " +
                                std::to_string(idx.size()) + " training series for " +
                                std::to_string(clients) + " clients");
      }
      rng gen(derive_seed({seed, stream, static_cast<std::uint64_t>(c)}));
      shuffle(idx.begin(), idx.end(), gen);
      for (auto i : idx) {
        (part.clients[next].*member).push_back(split[i]);
        next = (next + 1) % clients;
      }
    }
  };
  deal(ds.train, 0, &client_split::train, true);
  deal(ds.test, 1, &client_split::test, false);
  return part;
}

}  // namespace drocks
