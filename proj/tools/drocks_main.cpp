// drocks: run federated ROCKET experiments on UCR datasets and compare results.
//
//   drocks run --config exp.json [--method drocks --kernels 100 ...]
//   drocks compare a/results.csv b/results.csv --metric f1

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "drocks/error.hpp"
#include "drocks/experiment.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_dataset = 3;

int exit_code_for(drocks::errc code) {
  switch (code) {
    case drocks::errc::invalid_config:
    case drocks::errc::unsupported_task:
      return exit_config;
    case drocks::errc::format_error:
    case drocks::errc::unsupported_dataset:
      return exit_dataset;
    default:
      return exit_failure;
  }
}

std::vector<std::size_t> parse_ids(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    auto item = s.substr(start, end - start);
    if (!item.empty()) {
      try {
        out.push_back(std::stoul(item));
      } catch (const std::exception&) {
        throw drocks::error(drocks::errc::invalid_config, "bad client id '" + item + "'");
      }
    }
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized federated time-series classification with ROCKET features"};
  app.require_subcommand(1);

  std::string config_path, method, topo, drop_clients, out_dir, dataset, data_root;
  std::size_t kernels = 0, clients = 0, rounds = 0, drop_round = 0, repeats = 0, batch = 0,
              epochs = 0, threads = 0;
  std::uint64_t seed = 0;
  double lr = 0.0;

  auto* run = app.add_subcommand("run", "Run one experiment (all repeats)");
  run->add_option("--config", config_path, "JSON experiment config");
  run->add_option("--dataset", dataset, "Dataset name under the data root");
  run->add_option("--data-root", data_root, "Directory with <name>/<name>_TRAIN.tsv");
  run->add_option("--method", method, "drocks | frocks | fedavg_raw | fedavg_rocket");
  run->add_option("--kernels", kernels, "Kernels per client (K)");
  run->add_option("--clients", clients, "Number of clients (N)");
  run->add_option("--rounds", rounds, "Maximum rounds (R)");
  run->add_option("--topology", topo, "ring | random");
  run->add_option("--drop-round", drop_round, "Round from which --drop-clients leave");
  run->add_option("--drop-clients", drop_clients, "Comma-separated client ids to drop");
  run->add_option("--repeats", repeats, "Number of seeds to repeat over");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--batch-size", batch, "Mini-batch size");
  run->add_option("--epochs", epochs, "Local epochs per visit");
  run->add_option("--lr", lr, "Adam learning rate");
  run->add_option("--threads", threads, "Parallel repeats (0 = auto)");
  run->add_option("--out", out_dir, "Output directory");

  std::vector<std::string> csvs;
  std::string metric = "f1";
  auto* cmp = app.add_subcommand("compare", "Mean ranks across result CSVs");
  cmp->add_option("csv", csvs, "results.csv files")->required();
  cmp->add_option("--metric", metric, "f1 | acc")->check(CLI::IsMember({"f1", "acc"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) {
      nlohmann::json j = nlohmann::json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw drocks::error(drocks::errc::invalid_config, "cannot read " + config_path);
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw drocks::error(drocks::errc::invalid_config, e.what());
        }
      }
      auto cfg = drocks::config_from_json(j);
      if (run->count("--dataset")) cfg.dataset = dataset;
      if (run->count("--data-root")) cfg.data_root = data_root;
      if (run->count("--method")) cfg.method = drocks::method_from_string(method);
      if (run->count("--kernels")) cfg.kernels = kernels;
      if (run->count("--clients")) cfg.clients = clients;
      if (run->count("--rounds")) cfg.rounds = rounds;
      if (run->count("--topology")) cfg.topo = drocks::topology_from_string(topo);
      if (run->count("--drop-round") || run->count("--drop-clients")) {
        drocks::dropout_schedule d = cfg.dropout.value_or(drocks::dropout_schedule{});
        if (run->count("--drop-round")) d.round = drop_round;
        if (run->count("--drop-clients")) d.clients = parse_ids(drop_clients);
        cfg.dropout = d;
      }
      if (run->count("--repeats")) cfg.repeats = repeats;
      if (run->count("--seed")) cfg.master_seed = seed;
      if (run->count("--batch-size")) cfg.train.batch_size = batch;
      if (run->count("--epochs")) cfg.train.local_epochs = epochs;
      if (run->count("--lr")) cfg.train.learning_rate = lr;
      if (run->count("--threads")) cfg.threads = threads;
      if (run->count("--out")) cfg.out_dir = out_dir;

      drocks::experiment_summary s;
      try {
        s = drocks::run_experiment(cfg);
      } catch (const drocks::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
      }
      auto summary = drocks::summary_json(s);
      std::cout << s.data.name << " " << drocks::to_string(cfg.method) << " K=" << cfg.kernels
                << " N=" << cfg.clients << ": macro-F1 " << summary["macro_f1"]["mean"].get<double>()
                << " +- " << summary["macro_f1"]["std"].get<double>() << ", accuracy "
                << summary["accuracy"]["mean"].get<double>() << " +- "
                << summary["accuracy"]["std"].get<double>() << " (" << s.repeats.size()
                << " repeats, results in " << cfg.out_dir << ")\n";
      return exit_ok;
    }

    std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
    auto result = drocks::compare(paths, metric == "acc" ? drocks::rank_metric::accuracy
                                                         : drocks::rank_metric::macro_f1);
    nlohmann::json j = {
        {"metric", metric},
        {"datasets", result.datasets},
        {"mean_ranks", result.mean_ranks},
        {"scores", result.scores},
    };
    std::cout << j.dump(2) << "\n";
    return exit_ok;
  } catch (const drocks::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (*cmp && e.code() == drocks::errc::invalid_input) return exit_config;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}
