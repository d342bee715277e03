#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "drocks/rocket.hpp"

namespace drocks {

enum class task_kind { binary, multiclass };

/// Logistic regression over K features. Binary problems use one sigmoid
/// logit (C_eff = 1); multiclass problems use C softmax logits (C_eff = C).
/// Weights are stored row-major, one row of K entries per logit.
struct linear_model {
  task_kind task = task_kind::binary;
  int class_count = 2;
  std::size_t feature_count = 0;
  std::vector<double> weights;
  std::vector<double> intercepts;

  std::size_t logit_count() const { return intercepts.size(); }
  std::size_t parameter_count() const { return weights.size() + intercepts.size(); }

  double& weight(std::size_t logit, std::size_t feature) {
    return weights[logit * feature_count + feature];
  }
  double weight(std::size_t logit, std::size_t feature) const {
    return weights[logit * feature_count + feature];
  }

  friend bool operator==(const linear_model&, const linear_model&) = default;
};

struct train_config {
  double learning_rate = 1e-3;
  std::size_t batch_size = 4;
  std::size_t local_epochs = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

linear_model init_model(std::size_t feature_count, int class_count);

/// Mean cross-entropy over the selected rows and its exact gradient.
struct loss_and_gradient {
  double loss = 0.0;
  std::vector<double> weight_grad;     // same layout as linear_model::weights
  std::vector<double> intercept_grad;  // one per logit
};

loss_and_gradient cross_entropy(const feature_matrix& features, std::span<const std::size_t> rows,
                                const linear_model& model);

/// Mean cross-entropy over every row.
double training_loss(const feature_matrix& features, const linear_model& model);

/// Mini-batch Adam on cross-entropy, starting from `model` (warm start).
/// Each epoch visits the rows in an order drawn from cfg.shuffle_seed and the
/// epoch index. Optimizer moments start at zero on every call.
linear_model fit(const feature_matrix& features, linear_model model, const train_config& cfg);

/// M x C row-major class probabilities. For a binary model row i is (1 - p, p).
std::vector<double> predict_proba(const feature_matrix& features, const linear_model& model);

std::vector<label_t> predict(const feature_matrix& features, const linear_model& model);

/// score_k = sum over logits of weight(c, k)^2.
std::vector<double> kernel_importance(const linear_model& model);

/// The p most important kernels with their weight columns. `weight_columns`
/// is C_eff x p row-major aligned with `kernels`; `positions` are the source
/// columns in the model.
struct kernel_selection {
  kernel_set kernels;
  std::vector<std::size_t> positions;
  std::vector<double> weight_columns;
  std::vector<double> intercepts;
};

/// Sorted by importance descending; equal scores go to the smaller seed first.
kernel_selection select_top_p(const linear_model& model, const kernel_set& kernels, std::size_t p);

nlohmann::json to_json(const linear_model& model);
linear_model model_from_json(const nlohmann::json& j);

}  // namespace drocks
