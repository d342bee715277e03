#include "drocks/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct mean_std {
  double mean = 0.0;
  double std = 0.0;
};

// Population standard deviation over the repeats.
mean_std summarize(const std::vector<double>& v) {
  mean_std r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(v.size()));
  return r;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string to_string(method_kind m) {
  switch (m) {
    case method_kind::drocks: return "drocks";
    case method_kind::frocks: return "frocks";
    case method_kind::fedavg_raw: return "fedavg_raw";
    case method_kind::fedavg_rocket: return "fedavg_rocket";
  }
  return "unknown";
}

method_kind method_from_string(const std::string& s) {
  for (auto m : {method_kind::drocks, method_kind::frocks, method_kind::fedavg_raw,
                 method_kind::fedavg_rocket}) {
    if (to_string(m) == s) return m;
  }
  throw error(errc::invalid_config, "unknown method '" + s + "'");
}

void experiment_config::validate() const {
  if (dataset.empty() && (train_path.empty() || test_path.empty())) {
    throw error(errc::invalid_config, "config needs 'dataset' or both 'train'/'test' paths");
  }
  if (repeats < 1) throw error(errc::invalid_config, "repeats must be >= 1");
  federation_config fc;
  fc.clients = clients;
  fc.kernels = method == method_kind::fedavg_raw ? std::max(kernels, clients) : kernels;
  fc.max_rounds = rounds;
  fc.dropout = dropout;
  fc.train = train;
  fc.validate();
}

experiment_config config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "dataset", "data_root", "train", "test", "method", "kernels", "clients", "rounds",
      "topology", "dropout", "repeats", "master_seed", "out", "learning_rate", "batch_size",
      "local_epochs", "round_metrics", "threads"};
  if (!j.is_object()) throw error(errc::invalid_config, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw error(errc::invalid_config, "unknown config key '" + key + "'");
  }
  experiment_config c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    c.data_root = j.value("data_root", c.data_root);
    c.train_path = j.value("train", c.train_path);
    c.test_path = j.value("test", c.test_path);
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    c.kernels = j.value("kernels", c.kernels);
    c.clients = j.value("clients", c.clients);
    c.rounds = j.value("rounds", c.rounds);
    if (j.contains("topology")) c.topo = topology_from_string(j.at("topology").get<std::string>());
    if (j.contains("dropout") && !j.at("dropout").is_null()) {
      dropout_schedule d;
      d.round = j.at("dropout").at("round").get<std::size_t>();
      d.clients = j.at("dropout").at("clients").get<std::vector<std::size_t>>();
      c.dropout = d;
    }
    c.repeats = j.value("repeats", c.repeats);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.out_dir = j.value("out", c.out_dir);
    c.train.learning_rate = j.value("learning_rate", c.train.learning_rate);
    c.train.batch_size = j.value("batch_size", c.train.batch_size);
    c.train.local_epochs = j.value("local_epochs", c.train.local_epochs);
    c.round_metrics = j.value("round_metrics", c.round_metrics);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_config, std::string("bad config value: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const experiment_config& c) {
  nlohmann::json j = {
      {"dataset", c.dataset},
      {"data_root", c.data_root},
      {"train", c.train_path},
      {"test", c.test_path},
      {"method", to_string(c.method)},
      {"kernels", c.kernels},
      {"clients", c.clients},
      {"rounds", c.rounds},
      {"topology", to_string(c.topo)},
      {"dropout", nullptr},
      {"repeats", c.repeats},
      {"master_seed", c.master_seed},
      {"out", c.out_dir},
      {"learning_rate", c.train.learning_rate},
      {"batch_size", c.train.batch_size},
      {"local_epochs", c.train.local_epochs},
      {"round_metrics", c.round_metrics},
      {"threads", c.threads},
  };
  if (c.dropout) j["dropout"] = {{"round", c.dropout->round}, {"clients", c.dropout->clients}};
  return j;
}

std::string config_hash(const experiment_config& cfg) {
  auto j = to_json(cfg);
  // Output location and thread count do not change the results.
  j.erase("out");
  j.erase("threads");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t repeat_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed({master_seed, static_cast<std::uint64_t>(index)});
}

dataset load_experiment_dataset(const experiment_config& cfg) {
  dataset ds;
  if (!cfg.train_path.empty() && !cfg.test_path.empty()) {
    ds = load_ucr(cfg.train_path, cfg.test_path);
  } else {
    std::string root = cfg.data_root;
    if (root.empty()) {
      const char* env = std::getenv(data_root_env);
      if (!env) {
        throw error(errc::invalid_config,
                    std::string("no data_root in config and ") + data_root_env + " is unset");
      }
      root = env;
    }
    ds = load_ucr_by_name(root, cfg.dataset);
  }
  if (!cfg.dataset.empty()) ds.name = cfg.dataset;
  znormalize_in_place(ds);
  return ds;
}

repeat_outcome run_repeat(const experiment_config& cfg, const dataset& ds, std::size_t index) {
  repeat_outcome out;
  out.index = index;
  out.seed = repeat_seed(cfg.master_seed, index);
  auto part = partition_iid(ds, cfg.clients, out.seed);
  out.partition_warnings = part.warnings;

  federation_config fc;
  fc.clients = cfg.clients;
  fc.kernels = cfg.kernels;
  fc.max_rounds = cfg.rounds;
  fc.topo = cfg.topo;
  fc.dropout = cfg.dropout;
  fc.train = cfg.train;
  fc.master_seed = out.seed;
  fc.round_metrics = cfg.round_metrics;

  switch (cfg.method) {
    case method_kind::drocks:
      out.run = run_drocks(fc, part.clients, ds.class_count);
      break;
    case method_kind::frocks:
      out.run = run_frocks(fc, part.clients, ds.class_count);
      break;
    case method_kind::fedavg_raw:
      fc.kernels = std::max(fc.kernels, fc.clients);
      out.run = run_fedavg(fedavg_variant::raw, fc, part.clients, ds.class_count);
      break;
    case method_kind::fedavg_rocket:
      out.run = run_fedavg(fedavg_variant::rocket_shared, fc, part.clients, ds.class_count);
      break;
  }
  return out;
}

std::string results_csv(const experiment_summary& s) {
  std::ostringstream out;
  out << "# config_hash=" << s.hash << " master_seed=" << s.config.master_seed << "\n";
  out << "dataset,method,K,seed,accuracy,macro_f1\n";
  for (const auto& r : s.repeats) {
    out << s.data.name << ',' << to_string(s.config.method) << ',' << s.config.kernels << ','
        << r.seed << ',' << format_double(r.run.evaluation.mean_accuracy) << ','
        << format_double(r.run.evaluation.mean_macro_f1) << '\n';
  }
  return out.str();
}

nlohmann::json summary_json(const experiment_summary& s) {
  std::vector<double> acc, f1, pooled_acc, pooled_f1;
  nlohmann::json per_repeat = nlohmann::json::array();
  for (const auto& r : s.repeats) {
    const auto& ev = r.run.evaluation;
    acc.push_back(ev.mean_accuracy);
    f1.push_back(ev.mean_macro_f1);
    pooled_acc.push_back(ev.pooled.accuracy);
    pooled_f1.push_back(ev.pooled.macro_f1);
    std::vector<std::vector<kernel_seed>> handoffs;
    for (const auto& log : r.run.rounds) handoffs.push_back(log.handoff_seeds);
    auto comm = r.run.communication(to_string(s.config.method));
    per_repeat.push_back({
        {"index", r.index},
        {"seed", r.seed},
        {"accuracy", ev.mean_accuracy},
        {"macro_f1", ev.mean_macro_f1},
        {"pooled_accuracy", ev.pooled.accuracy},
        {"pooled_macro_f1", ev.pooled.macro_f1},
        {"rounds_run", r.run.rounds.size()},
        {"converged", r.run.converged},
        {"messages", comm.total_messages()},
        {"bytes", comm.total_bytes()},
        {"messages_per_round", comm.messages_per_round},
        {"bytes_per_round", comm.bytes_per_round},
        {"survival_vs_first_round",
         survival_fraction(handoffs, survival_baseline::first_round)},
        {"survival_vs_previous_round",
         survival_fraction(handoffs, survival_baseline::previous_round)},
        {"partition_warnings", r.partition_warnings},
    });
  }
  auto ms = [](const std::vector<double>& v) {
    auto r = summarize(v);
    return nlohmann::json{{"mean", r.mean}, {"std", r.std}};
  };
  return {
      {"config_hash", s.hash},
      {"master_seed", s.config.master_seed},
      {"config", to_json(s.config)},
      {"dataset", s.data.name},
      {"method", to_string(s.config.method)},
      {"kernels", s.config.kernels},
      {"clients", s.config.clients},
      {"accuracy", ms(acc)},
      {"macro_f1", ms(f1)},
      {"pooled_accuracy", ms(pooled_acc)},
      {"pooled_macro_f1", ms(pooled_f1)},
      {"repeats", per_repeat},
  };
}

experiment_summary run_experiment(const experiment_config& cfg) {
  cfg.validate();
  experiment_summary s;
  s.config = cfg;
  s.hash = config_hash(cfg);
  s.data = load_experiment_dataset(cfg);
  if (cfg.method == method_kind::frocks && s.data.class_count != 2) {
    throw error(errc::invalid_config, "multiclass unsupported: frocks needs a binary dataset, '" +
                                          s.data.name + "' has " +
                                          std::to_string(s.data.class_count) + " classes");
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::remove(out_dir / "PARTIAL");

  std::size_t workers = cfg.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.repeats);

  std::vector<std::optional<repeat_outcome>> done(cfg.repeats);
  std::exception_ptr failure;
  std::size_t failed_index = cfg.repeats;
  for (std::size_t start = 0; start < cfg.repeats; start += workers) {
    std::vector<std::future<repeat_outcome>> batch;
    for (std::size_t i = start; i < std::min(cfg.repeats, start + workers); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return run_repeat(cfg, s.data, i); }));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) {
      try {
        done[start + k] = batch[k].get();
      } catch (...) {
        if (!failure) {
          failure = std::current_exception();
          failed_index = start + k;
        }
      }
    }
    if (failure) break;
  }
  // Rows stay in repeat order no matter which thread finished first.
  for (auto& d : done) {
    if (d) s.repeats.push_back(std::move(*d));
  }

  const std::string header = "# config_hash=" + s.hash +
                             " master_seed=" + std::to_string(cfg.master_seed) + "\n";
  write_file(out_dir / "results.csv", results_csv(s));
  write_file(out_dir / "summary.json", summary_json(s).dump(2) + "\n");
  auto man = manifest(s.data);
  man["config_hash"] = s.hash;
  man["master_seed"] = cfg.master_seed;
  man["method"] = to_string(cfg.method);
  write_file(out_dir / "manifest.json", man.dump(2) + "\n");
  for (const auto& r : s.repeats) {
    std::string lines = header;
    for (const auto& log : r.run.rounds) lines += to_json(log).dump() + "\n";
    write_file(out_dir / ("rounds_" + std::to_string(r.index) + ".jsonl"), lines);
  }

  if (failure) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    write_file(out_dir / "PARTIAL", "repeat " + std::to_string(failed_index) + " failed: " + what +
                                        "\ncompleted repeats: " +
                                        std::to_string(s.repeats.size()) + "\n");
    std::rethrow_exception(failure);
  }
  return s;
}

comparison compare(const std::vector<std::filesystem::path>& csv_paths, rank_metric metric) {
  comparison out;
  out.metric = metric;
  // key -> dataset -> scores over seeds
  std::map<std::string, std::map<std::string, std::vector<double>>> raw;
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw error(errc::invalid_input, "cannot open " + path.string());
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
      if (line.empty() || line.front() == '#') continue;
      if (!header_seen) {
        if (line != "dataset,method,K,seed,accuracy,macro_f1") {
          throw error(errc::format_error, path.string() + ": unexpected CSV header");
        }
        header_seen = true;
        continue;
      }
      auto cols = split(line, ',');
      if (cols.size() != 6) throw error(errc::format_error, path.string() + ": bad row '" + line + "'");
      double v = std::stod(metric == rank_metric::macro_f1 ? cols[5] : cols[4]);
      raw[cols[1] + "@K" + cols[2]][cols[0]].push_back(v);
    }
  }
  if (raw.empty()) throw error(errc::invalid_input, "no result rows");

  std::set<std::string> shared;
  bool first = true;
  for (const auto& [key, by_ds] : raw) {
    std::set<std::string> here;
    for (const auto& [ds, _] : by_ds) here.insert(ds);
    if (first) {
      shared = here;
      first = false;
    } else {
      std::set<std::string> both;
      std::set_intersection(shared.begin(), shared.end(), here.begin(), here.end(),
                            std::inserter(both, both.begin()));
      shared = both;
    }
  }
  if (shared.empty()) throw error(errc::invalid_input, "methods share no dataset");
  out.datasets.assign(shared.begin(), shared.end());
  for (const auto& [key, by_ds] : raw) {
    for (const auto& ds : shared) out.scores[key][ds] = summarize(by_ds.at(ds)).mean;
  }
  out.mean_ranks = mean_ranks(out.scores);
  return out;
}

}  // namespace drocks
