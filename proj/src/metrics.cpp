#include "drocks/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "drocks/error.hpp"

namespace drocks {

metric_report evaluate(std::span<const label_t> truth, std::span<const label_t> predicted,
                       int class_count) {
  if (truth.empty()) throw error(errc::invalid_input, "no predictions to score");
  if (truth.size() != predicted.size()) {
    throw error(errc::invalid_input, "truth and prediction lengths differ");
  }
  if (class_count < 1) throw error(errc::invalid_input, "class_count must be positive");
  const auto classes = static_cast<std::size_t>(class_count);
  std::vector<std::size_t> tp(classes, 0), pred_count(classes, 0), true_count(classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto t = truth[i];
    auto p = predicted[i];
    if (t < 0 || t >= class_count || p < 0 || p >= class_count) {
      throw error(errc::invalid_input, "label outside 0.." + std::to_string(class_count - 1));
    }
    ++true_count[static_cast<std::size_t>(t)];
    ++pred_count[static_cast<std::size_t>(p)];
    if (t == p) {
      ++tp[static_cast<std::size_t>(t)];
      ++correct;
    }
  }
  metric_report r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  r.support = true_count;
  r.per_class_f1.resize(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    // 2PR/(P+R) = 2TP / (predicted + actual), and 0 when there is neither.
    std::size_t denom = pred_count[c] + true_count[c];
    r.per_class_f1[c] =
        denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  r.macro_f1 = std::accumulate(r.per_class_f1.begin(), r.per_class_f1.end(), 0.0) /
               static_cast<double>(classes);
  return r;
}

double macro_f1(std::span<const label_t> truth, std::span<const label_t> predicted,
                int class_count) {
  return evaluate(truth, predicted, class_count).macro_f1;
}

double accuracy(std::span<const label_t> truth, std::span<const label_t> predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw error(errc::invalid_input, "accuracy needs equal, non-empty inputs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::map<std::string, double> mean_ranks(
    const std::map<std::string, std::map<std::string, double>>& scores) {
  if (scores.empty()) throw error(errc::invalid_input, "no methods to rank");
  std::set<std::string> datasets;
  for (const auto& [method, by_ds] : scores) {
    for (const auto& [ds, _] : by_ds) datasets.insert(ds);
  }
  if (datasets.empty()) throw error(errc::invalid_input, "no datasets to rank");
  for (const auto& [method, by_ds] : scores) {
    for (const auto& ds : datasets) {
      if (!by_ds.contains(ds)) {
        throw error(errc::invalid_input, "method '" + method + "' has no score on '" + ds + "'");
      }
    }
  }

  std::map<std::string, double> total;
  for (const auto& [method, _] : scores) total[method] = 0.0;
  for (const auto& ds : datasets) {
    std::vector<std::pair<double, std::string>> row;
    for (const auto& [method, by_ds] : scores) row.emplace_back(by_ds.at(ds), method);
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < row.size();) {
      std::size_t j = i;
      while (j < row.size() && row[j].first == row[i].first) ++j;
      // positions i..j-1 (0-based) share the mean of ranks i+1..j
      double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for (std::size_t k = i; k < j; ++k) total[row[k].second] += rank;
      i = j;
    }
  }
  for (auto& [_, t] : total) t /= static_cast<double>(datasets.size());
  return total;
}

std::vector<double> survival_fraction(std::span<const std::vector<kernel_seed>> handoff_seeds,
                                      survival_baseline baseline) {
  std::vector<double> out;
  out.reserve(handoff_seeds.size());
  for (std::size_t r = 0; r < handoff_seeds.size(); ++r) {
    if (r == 0) {
      out.push_back(1.0);
      continue;
    }
    const auto& ref = baseline == survival_baseline::first_round ? handoff_seeds.front()
                                                                 : handoff_seeds[r - 1];
    std::unordered_set<kernel_seed> ref_set(ref.begin(), ref.end());
    const auto& cur = handoff_seeds[r];
    if (cur.empty()) {
      out.push_back(0.0);
      continue;
    }
    auto kept = std::count_if(cur.begin(), cur.end(),
                              [&](kernel_seed s) { return ref_set.contains(s); });
    out.push_back(static_cast<double>(kept) / static_cast<double>(cur.size()));
  }
  return out;
}

std::size_t comm_report::total_messages() const {
  return std::accumulate(messages_per_round.begin(), messages_per_round.end(), std::size_t{0});
}

std::size_t comm_report::total_bytes() const {
  return std::accumulate(bytes_per_round.begin(), bytes_per_round.end(), std::size_t{0});
}

}  // namespace drocks
