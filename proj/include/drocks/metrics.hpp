#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "drocks/rocket.hpp"

namespace drocks {

struct metric_report {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::size_t> support;
};

/// Per-class F1 is 0 when precision + recall is 0; macro-F1 averages over all
/// `class_count` classes, including ones absent from both vectors.
metric_report evaluate(std::span<const label_t> truth, std::span<const label_t> predicted,
                       int class_count);

double macro_f1(std::span<const label_t> truth, std::span<const label_t> predicted,
                int class_count);

double accuracy(std::span<const label_t> truth, std::span<const label_t> predicted);

/// scores[method][dataset]. Every method must be scored on every dataset that
/// any method covers. Higher is better; ties share the average rank.
std::map<std::string, double> mean_ranks(
    const std::map<std::string, std::map<std::string, double>>& scores);

enum class survival_baseline { first_round, previous_round };

/// For each round, the fraction of the end-of-round handoff seeds that were
/// present in the reference round's handoff. Round 1 is 1.0.
std::vector<double> survival_fraction(std::span<const std::vector<kernel_seed>> handoff_seeds,
                                      survival_baseline baseline = survival_baseline::first_round);

struct comm_report {
  std::string method;
  std::vector<std::size_t> messages_per_round;
  std::vector<std::size_t> bytes_per_round;

  std::size_t total_messages() const;
  std::size_t total_bytes() const;
};

}  // namespace drocks
