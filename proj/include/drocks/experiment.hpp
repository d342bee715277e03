#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drocks/baselines.hpp"
#include "drocks/federation.hpp"

namespace drocks {

enum class method_kind { drocks, frocks, fedavg_raw, fedavg_rocket };

std::string to_string(method_kind m);
method_kind method_from_string(const std::string& s);

/// Environment variable naming the directory that holds <name>/<name>_TRAIN.tsv.
inline constexpr const char* data_root_env = "DROCKS_DATA_ROOT";

struct experiment_config {
  std::string dataset;
  std::string data_root;   // empty: $DROCKS_DATA_ROOT
  std::string train_path;  // explicit paths win over dataset + data_root
  std::string test_path;
  method_kind method = method_kind::drocks;
  std::size_t kernels = 100;
  std::size_t clients = 4;
  std::size_t rounds = 100;
  topology topo = topology::ring;
  std::optional<dropout_schedule> dropout;
  std::size_t repeats = 5;
  std::uint64_t master_seed = 0;
  std::string out_dir = "results";
  train_config train;
  bool round_metrics = false;
  std::size_t threads = 0;  // 0: one per repeat, capped by hardware

  void validate() const;
};

/// Unknown keys are rejected so typos surface as InvalidConfig.
experiment_config config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const experiment_config& cfg);

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const experiment_config& cfg);

/// Seed used by repeat `index`: partitions and the federation both derive from it.
std::uint64_t repeat_seed(std::uint64_t master_seed, std::size_t index);

struct repeat_outcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  federation_result run;
  std::vector<std::string> partition_warnings;
};

struct experiment_summary {
  experiment_config config;
  std::string hash;
  dataset data;  // z-normalized
  std::vector<repeat_outcome> repeats;
};

dataset load_experiment_dataset(const experiment_config& cfg);

/// Runs one repeat without touching the filesystem.
repeat_outcome run_repeat(const experiment_config& cfg, const dataset& ds, std::size_t index);

/// Runs every repeat and writes results.csv, summary.json, manifest.json and
/// rounds_<i>.jsonl into cfg.out_dir. If a repeat fails, the completed rows
/// are still written next to a PARTIAL marker and the error is rethrown.
experiment_summary run_experiment(const experiment_config& cfg);

/// Rows in results.csv order.
std::string results_csv(const experiment_summary& s);
nlohmann::json summary_json(const experiment_summary& s);

enum class rank_metric { macro_f1, accuracy };

struct comparison {
  rank_metric metric = rank_metric::macro_f1;
  std::vector<std::string> datasets;          // intersection used for ranking
  std::map<std::string, double> mean_ranks;   // key: "<method>@K<kernels>"
  std::map<std::string, std::map<std::string, double>> scores;  // seed-averaged
};

/// Reads results.csv files and ranks methods on the datasets all of them share.
comparison compare(const std::vector<std::filesystem::path>& csv_paths, rank_metric metric);

}  // namespace drocks
