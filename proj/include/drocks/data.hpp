#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "drocks/rocket.hpp"

namespace drocks {

struct dataset {
  std::string name;
  std::vector<time_series> train;
  std::vector<time_series> test;
  int class_count = 0;
  std::size_t series_length = 0;
  /// original_labels[c] is the label text that was encoded as c.
  std::vector<std::string> original_labels;
};

/// Reads a UCR TSV train/test pair: one series per line, label first, then
/// T tab-separated values. Labels are re-encoded to 0..C-1 in ascending order
/// of their numeric value (lexicographic when a label is not numeric).
dataset load_ucr(const std::filesystem::path& train_path, const std::filesystem::path& test_path);

/// Looks for <root>/<name>/<name>_TRAIN.tsv and _TEST.tsv.
dataset load_ucr_by_name(const std::filesystem::path& root, const std::string& name);

/// Zero mean, unit population standard deviation. Series whose deviation is
/// below 1e-8 map to all zeros.
std::vector<double> znormalize(std::span<const double> series);

void znormalize_in_place(dataset& ds);

nlohmann::json manifest(const dataset& ds);

struct client_split {
  std::vector<time_series> train;
  std::vector<time_series> test;
};

struct partition {
  std::vector<client_split> clients;
  std::vector<std::string> warnings;
};

/// Stratified deal: inside each class the samples are shuffled and handed
/// out round-robin, continuing from the client after the one that received
/// the last sample of the previous class. Train and test are split alike.
partition partition_iid(const dataset& ds, std::size_t clients, std::uint64_t seed);

}  // namespace drocks
