#include "drocks/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

// Stream tags mixed into derive_seed so independent uses never collide.
constexpr std::uint64_t tag_fresh_kernels = 0x6b65726e656c73ULL;  // "kernels"
constexpr std::uint64_t tag_shuffle = 0x73687566666c65ULL;        // "shuffle"
constexpr std::uint64_t tag_topology = 0x746f706f6c6f6779ULL;     // "topology"

std::vector<kernel_seed> default_fresh_seeds(std::uint64_t master_seed, std::size_t client,
                                             std::size_t round, std::size_t count,
                                             std::span<const kernel_seed> taken) {
  rng gen(derive_seed({master_seed, tag_fresh_kernels, client, round}));
  std::unordered_set<kernel_seed> used(taken.begin(), taken.end());
  std::vector<kernel_seed> out;
  out.reserve(count);
  while (out.size() < count) {
    kernel_seed s = gen.next_u64();
    if (used.insert(s).second) out.push_back(s);
  }
  return out;
}

handoff_message to_message(const kernel_selection& sel, std::size_t round, std::size_t sender) {
  handoff_message msg;
  msg.round = round;
  msg.sender = sender;
  msg.kernel_seeds = seeds_of(sel.kernels);
  const std::size_t p = sel.kernels.size();
  const std::size_t logits = sel.intercepts.size();
  msg.weights.resize(logits);
  for (std::size_t c = 0; c < logits; ++c) {
    msg.weights[c].assign(sel.weight_columns.begin() + static_cast<std::ptrdiff_t>(c * p),
                          sel.weight_columns.begin() + static_cast<std::ptrdiff_t>((c + 1) * p));
  }
  msg.intercepts = sel.intercepts;
  return msg;
}

}  // namespace

std::string to_string(topology t) { return t == topology::ring ? "ring" : "random"; }

topology topology_from_string(const std::string& s) {
  if (s == "ring") return topology::ring;
  if (s == "random") return topology::random;
  throw error(errc::invalid_config, "unknown topology '" + s + "'");
}

void federation_config::validate() const {
  if (clients < 1) throw error(errc::invalid_config, "need at least one client");
  if (kernels < clients) {
    throw error(errc::invalid_config, "K = " + std::to_string(kernels) + " must be >= N = " +
                                          std::to_string(clients));
  }
  if (max_rounds < 1) throw error(errc::invalid_config, "max_rounds must be >= 1");
  if (dropout) {
    if (dropout->round < 1) throw error(errc::invalid_config, "dropout round must be >= 1");
    for (auto c : dropout->clients) {
      if (c >= clients) throw error(errc::invalid_config, "dropout names unknown client");
    }
    std::unordered_set<std::size_t> gone(dropout->clients.begin(), dropout->clients.end());
    if (gone.size() >= clients) throw error(errc::invalid_config, "dropout removes every client");
  }
  train.validate();
}

std::string encode_handoff(const handoff_message& msg) {
  nlohmann::json j = {
      {"round", msg.round},
      {"sender", msg.sender},
      {"kernel_seeds", msg.kernel_seeds},
      {"weights", msg.weights},
      {"intercepts", msg.intercepts},
  };
  return j.dump();
}

handoff_message decode_handoff(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::protocol_error, std::string("malformed handoff: ") + e.what());
  }
  handoff_message msg;
  try {
    msg.round = j.at("round").get<std::size_t>();
    msg.sender = j.at("sender").get<std::size_t>();
    msg.kernel_seeds = j.at("kernel_seeds").get<std::vector<kernel_seed>>();
    msg.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    msg.intercepts = j.at("intercepts").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::protocol_error, std::string("invalid handoff: ") + e.what());
  }
  if (msg.weights.empty() || msg.weights.size() != msg.intercepts.size()) {
    throw error(errc::protocol_error, "weight rows do not match intercepts");
  }
  for (const auto& row : msg.weights) {
    if (row.size() != msg.kernel_seeds.size()) {
      throw error(errc::protocol_error, "weight row length does not match seed count");
    }
  }
  std::unordered_set<kernel_seed> distinct(msg.kernel_seeds.begin(), msg.kernel_seeds.end());
  if (distinct.size() != msg.kernel_seeds.size()) {
    throw error(errc::protocol_error, "duplicate kernel seeds");
  }
  return msg;
}

bool converged(const handoff_message& prev, const handoff_message& cur) {
  if (prev.kernel_seeds.size() != cur.kernel_seeds.size() ||
      prev.weights.size() != cur.weights.size()) {
    return false;
  }
  std::unordered_map<kernel_seed, std::size_t> prev_pos;
  for (std::size_t i = 0; i < prev.kernel_seeds.size(); ++i) prev_pos[prev.kernel_seeds[i]] = i;
  for (std::size_t i = 0; i < cur.kernel_seeds.size(); ++i) {
    auto it = prev_pos.find(cur.kernel_seeds[i]);
    if (it == prev_pos.end()) return false;
    for (std::size_t c = 0; c < cur.weights.size(); ++c) {
      double now = cur.weights[c][i];
      double before = prev.weights[c][it->second];
      if (!(std::abs(before - now) <= 1e-8 + 1e-5 * std::abs(now))) return false;
    }
  }
  return true;
}

std::vector<std::size_t> visiting_order(topology topo, std::uint64_t round_order_seed,
                                        std::span<const std::size_t> active) {
  std::vector<std::size_t> order(active.begin(), active.end());
  std::sort(order.begin(), order.end());
  if (topo == topology::random) {
    rng gen(round_order_seed);
    shuffle(order.begin(), order.end(), gen);
  }
  return order;
}

std::size_t next_client(topology topo, std::uint64_t round_order_seed,
                        std::span<const std::size_t> active, std::size_t current) {
  if (active.empty()) throw error(errc::invalid_input, "no active clients");
  auto order = visiting_order(topo, round_order_seed, active);
  auto it = std::find(order.begin(), order.end(), current);
  if (it != order.end()) {
    ++it;
    return it == order.end() ? order.front() : *it;
  }
  // Departed client: hand to the next active id on the ring.
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  auto up = std::upper_bound(sorted.begin(), sorted.end(), current);
  return up == sorted.end() ? sorted.front() : *up;
}

std::vector<std::size_t> apply_dropout(const federation_config& cfg, std::size_t round,
                                       std::span<const std::size_t> active) {
  std::vector<std::size_t> out(active.begin(), active.end());
  if (!cfg.dropout || round < cfg.dropout->round) return out;
  const auto& gone = cfg.dropout->clients;
  std::erase_if(out, [&](std::size_t c) {
    return std::find(gone.begin(), gone.end(), c) != gone.end();
  });
  if (out.empty()) throw error(errc::invalid_config, "dropout removes every active client");
  return out;
}

nlohmann::json to_json(const round_log& log) {
  nlohmann::json hops = nlohmann::json::array();
  for (const auto& h : log.hops) {
    nlohmann::json jh = {
        {"client", h.client},
        {"kernels_fitted", h.kernels_fitted},
        {"selected_seeds", h.selected_seeds},
        {"bytes", h.bytes},
    };
    if (h.local_test) {
      jh["test_accuracy"] = h.local_test->accuracy;
      jh["test_macro_f1"] = h.local_test->macro_f1;
    }
    hops.push_back(std::move(jh));
  }
  return {
      {"round", log.round},
      {"visiting_order", log.visiting_order},
      {"hops", std::move(hops)},
      {"messages_sent", log.messages_sent},
      {"bytes_sent", log.bytes_sent},
      {"handoff_seeds", log.handoff_seeds},
      {"converged", log.converged},
  };
}

featurizer rocket_featurizer(kernel_set kernels) {
  return [ks = std::move(kernels)](std::span<const time_series> series) {
    return transform(series, ks);
  };
}

featurizer raw_featurizer() {
  return [](std::span<const time_series> series) {
    const std::size_t len = series.empty() ? 0 : series.front().values.size();
    feature_matrix out(series.size(), len);
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series[i].values.size() != len) {
        throw error(errc::invalid_input, "raw features need equal-length series");
      }
      std::copy(series[i].values.begin(), series[i].values.end(), out.row(i).begin());
      out.labels()[i] = series[i].label;
    }
    return out;
  };
}

federated_evaluation evaluate_on_clients(const linear_model& model, const featurizer& features,
                                         std::span<const client_split> clients, int class_count) {
  federated_evaluation ev;
  std::vector<label_t> all_truth, all_pred;
  std::size_t scored = 0;
  for (const auto& c : clients) {
    if (c.test.empty()) continue;
    auto fm = features(c.test);
    auto pred = predict(fm, model);
    auto rep = evaluate(fm.labels(), pred, class_count);
    ev.mean_accuracy += rep.accuracy;
    ev.mean_macro_f1 += rep.macro_f1;
    ++scored;
    all_truth.insert(all_truth.end(), fm.labels().begin(), fm.labels().end());
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    ev.per_client.push_back(std::move(rep));
  }
  if (scored == 0) throw error(errc::invalid_input, "no client has test data");
  ev.mean_accuracy /= static_cast<double>(scored);
  ev.mean_macro_f1 /= static_cast<double>(scored);
  ev.pooled = evaluate(all_truth, all_pred, class_count);
  return ev;
}

comm_report federation_result::communication(const std::string& method) const {
  comm_report r;
  r.method = method;
  for (const auto& log : rounds) {
    r.messages_per_round.push_back(log.messages_sent);
    r.bytes_per_round.push_back(log.bytes_sent);
  }
  return r;
}

std::size_t check_client_data(std::span<const client_split> clients, int class_count) {
  if (clients.empty()) throw error(errc::invalid_input, "no clients");
  std::optional<std::size_t> len;
  bool any_train = false;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    for (const auto* split : {&clients[i].train, &clients[i].test}) {
      for (const auto& s : *split) {
        if (!len) len = s.values.size();
        if (s.values.size() != *len) {
          throw error(errc::invalid_input, "client " + std::to_string(i) +
                                               " holds a series of length " +
                                               std::to_string(s.values.size()) + ", expected " +
                                               std::to_string(*len));
        }
        if (s.label < 0 || s.label >= class_count) {
          throw error(errc::invalid_input, "client " + std::to_string(i) + " has label " +
                                               std::to_string(s.label) + " outside 0.." +
                                               std::to_string(class_count - 1));
        }
      }
    }
    any_train = any_train || !clients[i].train.empty();
  }
  if (!len || !any_train) throw error(errc::invalid_input, "clients hold no training data");
  return *len;
}

federation_result run_drocks(const federation_config& cfg, std::span<const client_split> clients,
                             int class_count) {
  cfg.validate();
  if (clients.size() != cfg.clients) {
    throw error(errc::invalid_input, "config names " + std::to_string(cfg.clients) +
                                         " clients but data has " +
                                         std::to_string(clients.size()));
  }
  const std::size_t series_len = check_client_data(clients, class_count);
  const std::size_t K = cfg.kernels;
  const std::size_t p = cfg.handoff_size();

  auto draw_fresh = [&](std::size_t client, std::size_t round, std::size_t count,
                        std::span<const kernel_seed> taken) {
    auto seeds = cfg.fresh_seeds ? cfg.fresh_seeds(client, round, count, taken)
                                 : default_fresh_seeds(cfg.master_seed, client, round, count, taken);
    std::unordered_set<kernel_seed> seen(taken.begin(), taken.end());
    for (auto s : seeds) {
      if (!seen.insert(s).second) throw error(errc::invalid_input, "seed source repeated a seed");
    }
    if (seeds.size() != count) throw error(errc::invalid_input, "seed source returned wrong count");
    return seeds;
  };

  std::vector<std::size_t> everyone(cfg.clients);
  std::iota(everyone.begin(), everyone.end(), 0);

  federation_result result;
  const std::size_t logits = init_model(1, class_count).logit_count();

  // Round 0 stands for the initialization: the first visited client starts
  // from p sampled kernels and an all-zero model.
  auto first_order =
      visiting_order(cfg.topo, derive_seed({cfg.master_seed, tag_topology, 1}),
                     apply_dropout(cfg, 1, everyone));
  handoff_message incoming;
  incoming.round = 0;
  incoming.sender = first_order.front();
  incoming.kernel_seeds = draw_fresh(first_order.front(), 0, p, {});
  incoming.weights.assign(logits, std::vector<double>(p, 0.0));
  incoming.intercepts.assign(logits, 0.0);

  std::optional<handoff_message> previous_round_end;
  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    round_log log;
    log.round = round;
    auto active = apply_dropout(cfg, round, everyone);
    log.visiting_order =
        visiting_order(cfg.topo, derive_seed({cfg.master_seed, tag_topology, round}), active);

    for (std::size_t client : log.visiting_order) {
      const auto& local = clients[client];
      auto fresh = draw_fresh(client, round, K - p, incoming.kernel_seeds);

      std::vector<kernel_seed> seeds = incoming.kernel_seeds;
      seeds.insert(seeds.end(), fresh.begin(), fresh.end());
      kernel_set kernels = generate_kernels(seeds, series_len);

      // Received columns keep their weights; fresh kernels start at zero.
      linear_model model = init_model(K, class_count);
      for (std::size_t c = 0; c < logits; ++c) {
        for (std::size_t j = 0; j < p; ++j) model.weight(c, j) = incoming.weights[c][j];
        model.intercepts[c] = incoming.intercepts[c];
      }

      train_config tc = cfg.train;
      tc.shuffle_seed = derive_seed({cfg.master_seed, tag_shuffle, client, round});
      model = fit(transform(local.train, kernels), std::move(model), tc);

      handoff_message out = to_message(select_top_p(model, kernels, p), round, client);

      hop_log hop;
      hop.client = client;
      hop.kernels_fitted = kernels.size();
      hop.selected_seeds = out.kernel_seeds;
      hop.bytes = encode_handoff(out).size();
      if (cfg.round_metrics && !local.test.empty()) {
        auto fm = transform(local.test, kernels);
        hop.local_test = evaluate(fm.labels(), predict(fm, model), class_count);
      }
      log.messages_sent += 1;
      log.bytes_sent += hop.bytes;
      log.hops.push_back(std::move(hop));

      result.model = std::move(model);
      result.kernels = std::move(kernels);
      incoming = std::move(out);
    }

    log.handoff_seeds = incoming.kernel_seeds;
    log.converged = previous_round_end && converged(*previous_round_end, incoming);
    result.rounds.push_back(std::move(log));
    previous_round_end = incoming;
    if (result.rounds.back().converged) {
      result.converged = true;
      break;
    }
  }

  result.evaluation =
      evaluate_on_clients(result.model, rocket_featurizer(result.kernels), clients, class_count);
  return result;
}

}  // namespace drocks
