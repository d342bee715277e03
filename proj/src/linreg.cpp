#include "drocks/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drocks/error.hpp"
#include "drocks/rng.hpp"

namespace drocks {

namespace {

void check_width(const feature_matrix& features, const linear_model& model) {
  if (features.cols() != model.feature_count) {
    throw error(errc::invalid_input, "feature width " + std::to_string(features.cols()) +
                                         " does not match model width " +
                                         std::to_string(model.feature_count));
  }
}

void check_labels(const feature_matrix& features, const linear_model& model) {
  for (auto y : features.labels()) {
    if (y < 0 || y >= model.class_count) {
      throw error(errc::invalid_input, "label " + std::to_string(y) + " outside 0.." +
                                           std::to_string(model.class_count - 1));
    }
  }
}

void logits_of(std::span<const double> x, const linear_model& model, std::span<double> z) {
  const std::size_t k = model.feature_count;
  for (std::size_t c = 0; c < model.logit_count(); ++c) {
    const double* w = model.weights.data() + c * k;
    double acc = model.intercepts[c];
    for (std::size_t j = 0; j < k; ++j) acc += w[j] * x[j];
    z[c] = acc;
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// In-place softmax; returns log-sum-exp of the input.
double softmax(std::span<double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : z) v /= s;
  return m + std::log(s);
}

}  // namespace

void train_config::validate() const {
  if (!(learning_rate > 0.0)) throw error(errc::invalid_config, "learning_rate must be > 0");
  if (batch_size < 1) throw error(errc::invalid_config, "batch_size must be >= 1");
}

linear_model init_model(std::size_t feature_count, int class_count) {
  if (feature_count < 1) throw error(errc::invalid_input, "model needs at least one feature");
  if (class_count < 2) throw error(errc::invalid_input, "model needs at least two classes");
  linear_model m;
  m.class_count = class_count;
  m.task = class_count == 2 ? task_kind::binary : task_kind::multiclass;
  m.feature_count = feature_count;
  std::size_t logits = class_count == 2 ? 1 : static_cast<std::size_t>(class_count);
  m.weights.assign(logits * feature_count, 0.0);
  m.intercepts.assign(logits, 0.0);
  return m;
}

loss_and_gradient cross_entropy(const feature_matrix& features, std::span<const std::size_t> rows,
                                const linear_model& model) {
  check_width(features, model);
  const std::size_t k = model.feature_count;
  const std::size_t logits = model.logit_count();
  loss_and_gradient out;
  out.weight_grad.assign(model.weights.size(), 0.0);
  out.intercept_grad.assign(logits, 0.0);
  if (rows.empty()) return out;

  std::vector<double> z(logits);
  for (auto r : rows) {
    auto x = features.row(r);
    const label_t y = features.labels()[r];
    logits_of(x, model, z);
    if (model.task == task_kind::binary) {
      const double t = y == 1 ? 1.0 : 0.0;
      // -[t log s(z) + (1 - t) log(1 - s(z))] = softplus(z) - t z
      out.loss += softplus(z[0]) - t * z[0];
      z[0] = sigmoid(z[0]) - t;
    } else {
      const auto yi = static_cast<std::size_t>(y);
      const double target_logit = z[yi];
      out.loss += softmax(z) - target_logit;
      z[yi] -= 1.0;
    }
    for (std::size_t c = 0; c < logits; ++c) {
      double* g = out.weight_grad.data() + c * k;
      for (std::size_t j = 0; j < k; ++j) g[j] += z[c] * x[j];
      out.intercept_grad[c] += z[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (auto& g : out.weight_grad) g *= inv;
  for (auto& g : out.intercept_grad) g *= inv;
  return out;
}

double training_loss(const feature_matrix& features, const linear_model& model) {
  std::vector<std::size_t> all(features.rows());
  std::iota(all.begin(), all.end(), 0);
  return cross_entropy(features, all, model).loss;
}

linear_model fit(const feature_matrix& features, linear_model model, const train_config& cfg) {
  cfg.validate();
  check_width(features, model);
  check_labels(features, model);
  if (cfg.local_epochs == 0 || features.rows() == 0) return model;

  std::vector<double> m_w(model.weights.size(), 0.0), v_w(model.weights.size(), 0.0);
  std::vector<double> m_b(model.intercepts.size(), 0.0), v_b(model.intercepts.size(), 0.0);
  std::vector<std::size_t> order(features.rows());
  std::uint64_t step = 0;

  auto adam = [&](std::vector<double>& param, std::vector<double>& m, std::vector<double>& v,
                  const std::vector<double>& grad, double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng gen(derive_seed({cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)}));
    shuffle(order.begin(), order.end(), gen);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t e = std::min(order.size(), b + cfg.batch_size);
      auto g = cross_entropy(features, std::span(order).subspan(b, e - b), model);
      ++step;
      double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      adam(model.weights, m_w, v_w, g.weight_grad, bc1, bc2);
      adam(model.intercepts, m_b, v_b, g.intercept_grad, bc1, bc2);
    }
  }
  return model;
}

std::vector<double> predict_proba(const feature_matrix& features, const linear_model& model) {
  check_width(features, model);
  const std::size_t classes = static_cast<std::size_t>(model.class_count);
  std::vector<double> out(features.rows() * classes);
  std::vector<double> z(model.logit_count());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    logits_of(features.row(r), model, z);
    double* p = out.data() + r * classes;
    if (model.task == task_kind::binary) {
      double s = sigmoid(z[0]);
      p[0] = 1.0 - s;
      p[1] = s;
    } else {
      softmax(z);
      std::copy(z.begin(), z.end(), p);
    }
  }
  return out;
}

std::vector<label_t> predict(const feature_matrix& features, const linear_model& model) {
  auto proba = predict_proba(features, model);
  const std::size_t classes = static_cast<std::size_t>(model.class_count);
  std::vector<label_t> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    auto first = proba.begin() + static_cast<std::ptrdiff_t>(r * classes);
    out[r] = static_cast<label_t>(
        std::max_element(first, first + static_cast<std::ptrdiff_t>(classes)) - first);
  }
  return out;
}

std::vector<double> kernel_importance(const linear_model& model) {
  std::vector<double> scores(model.feature_count, 0.0);
  for (std::size_t c = 0; c < model.logit_count(); ++c) {
    for (std::size_t j = 0; j < model.feature_count; ++j) {
      double w = model.weight(c, j);
      scores[j] += w * w;
    }
  }
  return scores;
}

kernel_selection select_top_p(const linear_model& model, const kernel_set& kernels,
                              std::size_t p) {
  if (kernels.size() != model.feature_count) {
    throw error(errc::invalid_input, "kernel count does not match model width");
  }
  if (p < 1 || p > kernels.size()) {
    throw error(errc::invalid_input, "p = " + std::to_string(p) + " outside 1.." +
                                         std::to_string(kernels.size()));
  }
  auto scores = kernel_importance(model);
  std::vector<std::size_t> idx(kernels.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return kernels[a].seed < kernels[b].seed;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(p), idx.end(), better);
  idx.resize(p);

  kernel_selection sel;
  sel.positions = idx;
  sel.intercepts = model.intercepts;
  sel.weight_columns.resize(model.logit_count() * p);
  for (std::size_t i = 0; i < p; ++i) {
    sel.kernels.push_back(kernels[idx[i]]);
    for (std::size_t c = 0; c < model.logit_count(); ++c) {
      sel.weight_columns[c * p + i] = model.weight(c, idx[i]);
    }
  }
  return sel;
}

nlohmann::json to_json(const linear_model& model) {
  return {
      {"task", model.task == task_kind::binary ? "binary" : "multiclass"},
      {"class_count", model.class_count},
      {"feature_count", model.feature_count},
      {"weights", model.weights},
      {"intercepts", model.intercepts},
  };
}

linear_model model_from_json(const nlohmann::json& j) {
  try {
    linear_model m;
    auto task = j.at("task").get<std::string>();
    if (task != "binary" && task != "multiclass") {
      throw error(errc::invalid_input, "unknown task '" + task + "'");
    }
    m.task = task == "binary" ? task_kind::binary : task_kind::multiclass;
    m.class_count = j.at("class_count").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercepts = j.at("intercepts").get<std::vector<double>>();
    std::size_t logits = m.task == task_kind::binary ? 1 : static_cast<std::size_t>(m.class_count);
    if (m.intercepts.size() != logits || m.weights.size() % logits != 0) {
      throw error(errc::invalid_input, "model arrays have inconsistent shapes");
    }
    m.feature_count = j.contains("feature_count") ? j.at("feature_count").get<std::size_t>()
                                                  : m.weights.size() / logits;
    if (m.feature_count * logits != m.weights.size()) {
      throw error(errc::invalid_input, "feature_count does not match weights");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_input, std::string("bad model json: ") + e.what());
  }
}

}  // namespace drocks
