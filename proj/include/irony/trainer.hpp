// Mini-batch training: inverse-frequency class weights, weighted
// cross-entropy, global-norm gradient clipping, Adam, stratified validation
// split, early stopping on validation macro-F1 with best-checkpoint restore.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "irony/eval.hpp"
#include "irony/model.hpp"
#include "irony/rng.hpp"
#include "irony/tensor.hpp"

namespace irony {

// w_c = N / (C * count_c): inverse frequency, scaled so the example-weighted
// mean over the training set is exactly 1.
inline std::vector<double> class_weights(const std::vector<int>& labels, std::size_t C) {
  std::vector<long long> counts(C, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= C)
      throw std::invalid_argument("class_weights: label " + std::to_string(y) +
                                  " out of range for C=" + std::to_string(C));
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < C; ++c)
    if (counts[c] == 0)
      throw std::invalid_argument("class_weights: class " + std::to_string(c) +
                                  " absent from the training labels");
  std::vector<double> w(C);
  double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < C; ++c) w[c] = n / (static_cast<double>(C) * counts[c]);
  return w;
}

// -w_y * log(max(p_y, 1e-12)) on plain probability vectors.
template <typename T>
double weighted_ce(const std::vector<T>& p, int y, const std::vector<double>& w) {
  double py = std::max(static_cast<double>(p[static_cast<std::size_t>(y)]), 1e-12);
  return -w[static_cast<std::size_t>(y)] * std::log(py);
}

// Same loss as a tape node, for training graphs.
template <typename T>
typename Tape<T>::Var example_loss(Tape<T>& tape, typename Tape<T>::Var probs, int y, T weight) {
  auto py = tape.slice(probs, static_cast<std::size_t>(y), {1});
  return tape.scale(tape.log_(py), -weight);
}

// Scales every gradient by max_norm/g when the global norm g across all
// tensors exceeds max_norm. Returns the pre-clip norm.
template <typename T>
double clip_global_norm(const std::vector<Tensor<T>*>& params, double max_norm = 1.0) {
  double sq = 0;
  for (auto* p : params) {
    if (!p->requires_grad) continue;
    for (T g : p->grad) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    T s = static_cast<T>(max_norm / norm);
    for (auto* p : params) {
      if (!p->requires_grad) continue;
      for (T& g : p->grad) g *= s;
    }
  }
  return norm;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;  // first/second moments, parallel to the param list
  long long t = 0;

  explicit AdamState(const std::vector<Tensor<T>*>& params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (auto* p : params) {
      m.emplace_back(p->size(), T(0));
      v.emplace_back(p->size(), T(0));
    }
  }
};

// Standard bias-corrected Adam; tensors without requires_grad are skipped
// entirely (frozen embeddings never move).
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, AdamState<T>& state, const AdamConfig& cfg) {
  ++state.t;
  double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<T>& p = *params[pi];
    if (!p.requires_grad) continue;
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      double g = static_cast<double>(p.grad[i]);
      double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
      double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      double update = cfg.lr * (mi / b1t) / (std::sqrt(vi / b2t) + cfg.eps);
      p.data[i] = static_cast<T>(static_cast<double>(p.data[i]) - update);
    }
  }
}

struct TrainConfig {
  std::size_t batch_size = 32;
  double clip_norm = 1.0;
  AdamConfig adam;
  int max_epochs = 50;
  int patience = 5;  // stop when this many consecutive epochs fail to improve val F1
  std::uint64_t seed = 1;
  double val_fraction = 0.1;
};

struct TrainExample {
  std::vector<int> ids;  // encoded units
  int label = 0;
};

struct TrainResult {
  std::vector<std::string> log_lines;  // epoch<TAB>train_loss<TAB>val_acc<TAB>val_f1
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_f1 = -1.0;
  double best_val_acc = 0.0;
};

// Trains in place; the model ends at its best-validation-F1 parameters.
// Results depend only on the seed, not on dataset order: examples are
// canonically re-ordered before the stratified split and every shuffle draws
// from a seeded generator.
template <typename T>
TrainResult train(ModelParams<T>& model, const std::vector<TrainExample>& examples,
                  const TrainConfig& cfg, std::ostream* log_out = nullptr) {
  if (examples.empty()) throw std::invalid_argument("train: empty dataset");
  std::size_t C = model.cfg.num_classes;

  // canonical order: by encoded sequence then label
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (examples[a].ids != examples[b].ids) return examples[a].ids < examples[b].ids;
    return examples[a].label < examples[b].label;
  });

  Pcg32 rng(cfg.seed, 0x7a17);

  // stratified split, at least one training example per observed class
  std::vector<std::vector<std::size_t>> by_class(C);
  for (std::size_t ix : order) {
    int y = examples[ix].label;
    if (y < 0 || static_cast<std::size_t>(y) >= C)
      throw std::invalid_argument("train: label " + std::to_string(y) + " out of range");
    by_class[static_cast<std::size_t>(y)].push_back(ix);
  }
  std::vector<std::size_t> train_ix, val_ix;
  for (std::size_t c = 0; c < C; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    rng.shuffle(members);
    std::size_t n_val = static_cast<std::size_t>(
        static_cast<double>(members.size()) * cfg.val_fraction);
    if (members.size() - n_val < 1) n_val = members.size() - 1;
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_val ? val_ix : train_ix).push_back(members[i]);
  }
  if (train_ix.empty()) throw std::invalid_argument("train: no training examples after split");

  std::vector<int> train_labels;
  train_labels.reserve(train_ix.size());
  for (std::size_t ix : train_ix) train_labels.push_back(examples[ix].label);
  std::vector<double> weights = class_weights(train_labels, C);

  std::vector<Tensor<T>*> params = model.trainable();
  std::vector<Tensor<T>*> all = model.all_tensors();
  AdamState<T> adam(params);

  TrainResult result;
  std::vector<std::vector<T>> best_snapshot;
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(train_ix);
    double loss_sum = 0;
    for (std::size_t start = 0; start < train_ix.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(train_ix.size(), start + cfg.batch_size);
      for (auto* p : params) p->zero_grad();
      Tape<T> tape;
      typename Tape<T>::Var batch_loss{};
      bool first = true;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const TrainExample& ex = examples[train_ix[bi]];
        ForwardVars<T> f = model_forward(tape, model, ex.ids, /*train=*/true, &rng);
        auto l = example_loss(tape, f.probs, ex.label,
                              static_cast<T>(weights[static_cast<std::size_t>(ex.label)]));
        batch_loss = first ? l : tape.add(batch_loss, l);
        first = false;
      }
      batch_loss = tape.scale(batch_loss, T(1) / static_cast<T>(stop - start));
      double lv = static_cast<double>(tape.value_scalar(batch_loss));
      loss_sum += lv * static_cast<double>(stop - start);
      tape.backward(batch_loss);
      clip_global_norm(params, cfg.clip_norm);
      adam_step(params, adam, cfg.adam);
    }
    double train_loss = loss_sum / static_cast<double>(train_ix.size());

    // validation pass (falls back to the training set when no split exists)
    const std::vector<std::size_t>& eval_ix = val_ix.empty() ? train_ix : val_ix;
    std::vector<int> y_true, y_pred;
    y_true.reserve(eval_ix.size());
    y_pred.reserve(eval_ix.size());
    for (std::size_t ix : eval_ix) {
      y_true.push_back(examples[ix].label);
      y_pred.push_back(predict(model, examples[ix].ids).label);
    }
    Metrics me = metrics(confusion(y_true, y_pred, C));

    char line[128];
    std::snprintf(line, sizeof line, "%d\t%.6f\t%.4f\t%.4f", epoch, train_loss, me.accuracy,
                  me.macro_f1);
    result.log_lines.emplace_back(line);
    if (log_out) (*log_out) << line << "\n";
    result.epochs_run = epoch;

    if (me.macro_f1 > result.best_val_f1) {
      result.best_val_f1 = me.macro_f1;
      result.best_val_acc = me.accuracy;
      result.best_epoch = epoch;
      bad_epochs = 0;
      best_snapshot.clear();
      for (auto* p : all) best_snapshot.push_back(p->data);
    } else {
      // patience = consecutive non-improving epochs tolerated before the run
      // ends; 0 ends it at the first non-improving epoch.
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  if (!best_snapshot.empty())
    for (std::size_t i = 0; i < all.size(); ++i) all[i]->data = best_snapshot[i];
  return result;
}

}  // namespace irony
