#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "drocks/data.hpp"
#include "drocks/linreg.hpp"
#include "drocks/metrics.hpp"
#include "drocks/rocket.hpp"

namespace drocks {

enum class topology { ring, random };

std::string to_string(topology t);
topology topology_from_string(const std::string& s);

struct dropout_schedule {
  std::size_t round = 0;  // first round (1-based) without the listed clients
  std::vector<std::size_t> clients;
};

/// Supplies `count` fresh kernel seeds for (client, round), none of which may
/// appear in `taken`. Tests use it to pin the kernels a client samples.
using seed_source = std::function<std::vector<kernel_seed>(
    std::size_t client, std::size_t round, std::size_t count, std::span<const kernel_seed> taken)>;

struct federation_config {
  std::size_t clients = 4;
  std::size_t kernels = 100;
  std::size_t max_rounds = 100;
  topology topo = topology::ring;
  std::optional<dropout_schedule> dropout;
  train_config train;
  std::uint64_t master_seed = 0;
  /// Evaluate each hop's model on the visited client's test split.
  bool round_metrics = false;
  seed_source fresh_seeds;  // empty: the default per-(client, round) stream

  /// p = floor(K / N)
  std::size_t handoff_size() const { return kernels / clients; }

  void validate() const;
};

/// The only thing that crosses the wire between two DROCKS clients.
/// `weights` holds one row per logit, each aligned with `kernel_seeds`.
struct handoff_message {
  std::size_t round = 0;
  std::size_t sender = 0;
  std::vector<kernel_seed> kernel_seeds;
  std::vector<std::vector<double>> weights;
  std::vector<double> intercepts;

  friend bool operator==(const handoff_message&, const handoff_message&) = default;
};

/// Canonical JSON:
/// {"intercepts":[f64...],"kernel_seeds":[u64...],"round":int,"sender":int,"weights":[[f64...]...]}
std::string encode_handoff(const handoff_message& msg);
handoff_message decode_handoff(std::string_view bytes);

/// True when both messages carry the same seed set and every aligned weight
/// satisfies |prev - cur| <= 1e-8 + 1e-5 * |cur|.
bool converged(const handoff_message& prev, const handoff_message& cur);

/// Ring: active clients in ascending id order. Random: a uniform permutation
/// of the active clients drawn from `round_order_seed`.
std::vector<std::size_t> visiting_order(topology topo, std::uint64_t round_order_seed,
                                        std::span<const std::size_t> active);

/// Successor of `current` in that round's order, wrapping at the end. A
/// current client that is not active is placed at its ring position.
std::size_t next_client(topology topo, std::uint64_t round_order_seed,
                        std::span<const std::size_t> active, std::size_t current);

/// Active set for `round` (1-based): configured dropouts leave from their
/// round onward.
std::vector<std::size_t> apply_dropout(const federation_config& cfg, std::size_t round,
                                       std::span<const std::size_t> active);

struct hop_log {
  std::size_t client = 0;
  std::size_t kernels_fitted = 0;
  std::vector<kernel_seed> selected_seeds;
  std::size_t bytes = 0;
  std::optional<metric_report> local_test;
};

struct round_log {
  std::size_t round = 0;
  std::vector<std::size_t> visiting_order;
  std::vector<hop_log> hops;
  std::size_t messages_sent = 0;
  std::size_t bytes_sent = 0;
  /// Seeds of the message emitted at the end of the round.
  std::vector<kernel_seed> handoff_seeds;
  bool converged = false;
};

nlohmann::json to_json(const round_log& log);

/// Builds the feature matrix a model expects from raw series.
using featurizer = std::function<feature_matrix(std::span<const time_series>)>;

featurizer rocket_featurizer(kernel_set kernels);
featurizer raw_featurizer();

struct federated_evaluation {
  std::vector<metric_report> per_client;
  double mean_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  metric_report pooled;
};

/// Scores `model` on every client's test split (dropped clients included).
/// Clients with an empty test split are left out of the mean.
federated_evaluation evaluate_on_clients(const linear_model& model, const featurizer& features,
                                         std::span<const client_split> clients, int class_count);

struct federation_result {
  linear_model model;
  kernel_set kernels;
  std::vector<round_log> rounds;
  bool converged = false;
  federated_evaluation evaluation;

  comm_report communication(const std::string& method) const;
};

/// Sequential ring / random-order training with top-p kernel handoff.
federation_result run_drocks(const federation_config& cfg, std::span<const client_split> clients,
                             int class_count);

/// Shared validation: equal series length everywhere, labels in range.
std::size_t check_client_data(std::span<const client_split> clients, int class_count);

}  // namespace drocks
