#include "drocks/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

constexpr std::uint64_t tag_shuffle = 0x73687566666c65ULL;
constexpr std::uint64_t tag_shared_kernels = 0x736861726564ULL;  // "shared"

std::vector<std::size_t> all_clients(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

train_config local_config(const federation_config& cfg, std::size_t client, std::size_t round) {
  train_config tc = cfg.train;
  tc.shuffle_seed = derive_seed({cfg.master_seed, tag_shuffle, client, round});
  return tc;
}

handoff_message selection_message(const frocks_selection& s, std::size_t round,
                                  std::size_t sender) {
  return {round, sender, s.seeds, {s.weights}, {s.intercept}};
}

}  // namespace

std::vector<std::vector<kernel_seed>> frocks_initial_seeds(std::size_t clients,
                                                           std::size_t kernels) {
  std::vector<std::vector<kernel_seed>> out(clients);
  for (std::size_t c = 0; c < clients; ++c) {
    out[c].resize(kernels);
    std::iota(out[c].begin(), out[c].end(), static_cast<kernel_seed>(c * kernels));
  }
  return out;
}

frocks_server_state frocks_aggregate(std::span<const frocks_selection> selections) {
  frocks_server_state state;
  if (selections.empty()) return state;
  const std::size_t p = selections.front().seeds.size();
  std::map<kernel_seed, std::vector<double>> reported;
  std::vector<double> intercepts;
  for (const auto& sel : selections) {
    if (sel.seeds.size() != p || sel.weights.size() != p) {
      throw error(errc::invalid_input, "clients reported different selection sizes");
    }
    for (std::size_t i = 0; i < p; ++i) reported[sel.seeds[i]].push_back(sel.weights[i]);
    intercepts.push_back(sel.intercept);
  }
  // Sorting the contributions makes the float sum independent of client order.
  auto mean = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  for (auto& [seed, ws] : reported) {
    state.seeds.push_back(seed);
    state.contributions.push_back(ws.size());
    state.weights.push_back(mean(ws));
  }
  state.intercept = mean(intercepts);
  return state;
}

bool frocks_converged(const frocks_server_state& prev, const frocks_server_state& cur) {
  if (prev.seeds != cur.seeds) return false;
  for (std::size_t i = 0; i < cur.weights.size(); ++i) {
    if (!(std::abs(prev.weights[i] - cur.weights[i]) <= 1e-8 + 1e-5 * std::abs(cur.weights[i]))) {
      return false;
    }
  }
  return true;
}

federation_result run_frocks(const federation_config& cfg, std::span<const client_split> clients,
                             int class_count) {
  cfg.validate();
  if (class_count != 2) {
    throw error(errc::unsupported_task, "FROCKS supports binary problems only, got " +
                                            std::to_string(class_count) + " classes");
  }
  if (clients.size() != cfg.clients) {
    throw error(errc::invalid_input, "client count does not match config");
  }
  const std::size_t series_len = check_client_data(clients, class_count);
  const std::size_t p = cfg.handoff_size();

  std::vector<kernel_set> kernels;
  std::vector<linear_model> models;
  for (const auto& seeds : frocks_initial_seeds(cfg.clients, cfg.kernels)) {
    kernels.push_back(generate_kernels(seeds, series_len));
    models.push_back(init_model(cfg.kernels, class_count));
  }

  federation_result result;
  std::optional<frocks_server_state> previous;
  frocks_server_state state;
  const auto everyone = all_clients(cfg.clients);

  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    round_log log;
    log.round = round;
    log.visiting_order = apply_dropout(cfg, round, everyone);

    std::vector<frocks_selection> selections;
    for (std::size_t c : log.visiting_order) {
      models[c] = fit(transform(clients[c].train, kernels[c]), std::move(models[c]),
                      local_config(cfg, c, round));
      auto top = select_top_p(models[c], kernels[c], std::min(p, kernels[c].size()));
      frocks_selection sel{seeds_of(top.kernels), top.weight_columns, top.intercepts[0]};

      hop_log hop;
      hop.client = c;
      hop.kernels_fitted = kernels[c].size();
      hop.selected_seeds = sel.seeds;
      hop.bytes = encode_handoff(selection_message(sel, round, c)).size();
      log.messages_sent += 1;
      log.bytes_sent += hop.bytes;
      log.hops.push_back(std::move(hop));
      selections.push_back(std::move(sel));
    }

    state = frocks_aggregate(selections);

    // Redistribution: every active client installs the global kernels and
    // their averaged weights ("0 otherwise" has nothing left to cover).
    kernel_set global = generate_kernels(state.seeds, series_len);
    linear_model global_model = init_model(global.size(), class_count);
    global_model.weights = state.weights;
    global_model.intercepts[0] = state.intercept;
    handoff_message broadcast{round, cfg.clients, state.seeds, {state.weights}, {state.intercept}};
    const std::size_t broadcast_bytes = encode_handoff(broadcast).size();
    for (std::size_t c : log.visiting_order) {
      kernels[c] = global;
      models[c] = global_model;
      log.messages_sent += 1;
      log.bytes_sent += broadcast_bytes;
    }

    log.handoff_seeds = state.seeds;
    log.converged = previous && frocks_converged(*previous, state);
    result.model = std::move(global_model);
    result.kernels = std::move(global);
    result.rounds.push_back(std::move(log));
    previous = state;
    if (result.rounds.back().converged) {
      result.converged = true;
      break;
    }
  }

  result.evaluation =
      evaluate_on_clients(result.model, rocket_featurizer(result.kernels), clients, class_count);
  return result;
}

std::string to_string(fedavg_variant v) {
  return v == fedavg_variant::raw ? "fedavg_raw" : "fedavg_rocket";
}

linear_model fedavg_aggregate(std::span<const linear_model> models,
                              std::span<const std::size_t> sample_counts) {
  if (models.empty() || models.size() != sample_counts.size()) {
    throw error(errc::invalid_input, "fedavg needs one sample count per model");
  }
  const std::size_t total = std::accumulate(sample_counts.begin(), sample_counts.end(),
                                            std::size_t{0});
  if (total == 0) throw error(errc::invalid_input, "fedavg over zero samples");
  linear_model out = models.front();
  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  std::fill(out.intercepts.begin(), out.intercepts.end(), 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    if (m.weights.size() != out.weights.size() || m.intercepts.size() != out.intercepts.size()) {
      throw error(errc::invalid_input, "fedavg over models of different shapes");
    }
    const double share = static_cast<double>(sample_counts[i]) / static_cast<double>(total);
    for (std::size_t j = 0; j < out.weights.size(); ++j) out.weights[j] += share * m.weights[j];
    for (std::size_t j = 0; j < out.intercepts.size(); ++j) {
      out.intercepts[j] += share * m.intercepts[j];
    }
  }
  return out;
}

federation_result run_fedavg(fedavg_variant variant, const federation_config& cfg,
                             std::span<const client_split> clients, int class_count) {
  cfg.validate();
  if (clients.size() != cfg.clients) {
    throw error(errc::invalid_input, "client count does not match config");
  }
  const std::size_t series_len = check_client_data(clients, class_count);

  featurizer features;
  kernel_set shared;
  std::size_t width = series_len;
  if (variant == fedavg_variant::rocket_shared) {
    rng gen(derive_seed({cfg.master_seed, tag_shared_kernels}));
    std::unordered_set<kernel_seed> used;
    std::vector<kernel_seed> seeds;
    while (seeds.size() < cfg.kernels) {
      auto s = gen.next_u64();
      if (used.insert(s).second) seeds.push_back(s);
    }
    shared = generate_kernels(seeds, series_len);
    features = rocket_featurizer(shared);
    width = shared.size();
  } else {
    features = raw_featurizer();
  }

  std::vector<feature_matrix> local;
  for (const auto& c : clients) local.push_back(features(c.train));

  federation_result result;
  linear_model global = init_model(width, class_count);
  const auto everyone = all_clients(cfg.clients);
  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    round_log log;
    log.round = round;
    log.visiting_order = apply_dropout(cfg, round, everyone);
    const std::size_t down_bytes = to_json(global).dump().size();

    std::vector<linear_model> updates;
    std::vector<std::size_t> counts;
    for (std::size_t c : log.visiting_order) {
      auto m = fit(local[c], global, local_config(cfg, c, round));
      hop_log hop;
      hop.client = c;
      hop.kernels_fitted = width;
      hop.bytes = to_json(m).dump().size();
      log.messages_sent += 2;
      log.bytes_sent += hop.bytes + down_bytes;
      log.hops.push_back(std::move(hop));
      updates.push_back(std::move(m));
      counts.push_back(local[c].rows());
    }
    if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) > 0) {
      global = fedavg_aggregate(updates, counts);
    }
    result.rounds.push_back(std::move(log));
  }

  result.model = global;
  result.kernels = std::move(shared);
  result.evaluation = evaluate_on_clients(result.model, features, clients, class_count);
  return result;
}

}  // namespace drocks
