#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drocks/federation.hpp"

namespace drocks {

// ---- FROCKS ---------------------------------------------------------------

/// Client c (0-based) starts from seeds c*K .. c*K + K - 1.
std::vector<std::vector<kernel_seed>> frocks_initial_seeds(std::size_t clients, std::size_t kernels);

/// What one client sends to the server: its top-p seeds and their weights.
struct frocks_selection {
  std::vector<kernel_seed> seeds;
  std::vector<double> weights;
  double intercept = 0.0;
};

/// Union of all selections, sorted by seed. A seed reported by several
/// clients gets the mean of their weights; `contributions` counts them.
struct frocks_server_state {
  std::vector<kernel_seed> seeds;
  std::vector<double> weights;
  std::vector<std::size_t> contributions;
  double intercept = 0.0;

  friend bool operator==(const frocks_server_state&, const frocks_server_state&) = default;
};

frocks_server_state frocks_aggregate(std::span<const frocks_selection> selections);

/// Same seed set and every weight within 1e-8 + 1e-5 * |current|.
bool frocks_converged(const frocks_server_state& prev, const frocks_server_state& cur);

/// Binary only; a multiclass problem raises UnsupportedTask.
federation_result run_frocks(const federation_config& cfg, std::span<const client_split> clients,
                             int class_count);

// ---- FedAvg ---------------------------------------------------------------

enum class fedavg_variant { raw, rocket_shared };

std::string to_string(fedavg_variant v);

/// Sample-count weighted mean of the parameters: sum_i (n_i / sum n) * param_i.
linear_model fedavg_aggregate(std::span<const linear_model> models,
                              std::span<const std::size_t> sample_counts);

/// R rounds of local fits from the global model followed by weighted
/// averaging. The rocket_shared variant draws one kernel set from the master
/// seed and hands it to every client; raw trains on the series values.
federation_result run_fedavg(fedavg_variant variant, const federation_config& cfg,
                             std::span<const client_split> clients, int class_count);

}  // namespace drocks
