// Linear baselines: TF-IDF bag-of-words and embedding-centroid (N-BOW)
// features, classified by a one-vs-rest linear SVM trained with a
// deterministic Pegasos-style subgradient method.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "irony/embeddings.hpp"
#include "irony/rng.hpp"

namespace irony {

// index:value pairs, strictly increasing index
using SparseVec = std::vector<std::pair<int, double>>;

inline SparseVec to_sparse(const std::vector<float>& dense) {
  SparseVec out;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0f) out.emplace_back(static_cast<int>(i), static_cast<double>(dense[i]));
  return out;
}

struct TfidfModel {
  std::map<std::string, int> vocab;  // ordered, so feature indices are reproducible
  std::vector<double> idf;
  long long doc_count = 0;

  std::size_t num_features() const { return idf.size(); }
};

// tf = raw in-document count; idf = ln((1+N)/(1+df)) + 1 (smoothed, always
// positive). Vectors are deliberately not normalized.
inline TfidfModel tfidf_fit(const std::vector<std::vector<std::string>>& docs) {
  if (docs.empty()) throw std::invalid_argument("tfidf_fit: empty corpus");
  TfidfModel model;
  model.doc_count = static_cast<long long>(docs.size());
  std::map<std::string, long long> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& t : uniq) ++df[t];
  }
  model.idf.reserve(df.size());
  for (const auto& [term, d] : df) {
    model.vocab.emplace(term, static_cast<int>(model.idf.size()));
    model.idf.push_back(std::log((1.0 + static_cast<double>(model.doc_count)) /
                                 (1.0 + static_cast<double>(d))) +
                        1.0);
  }
  return model;
}

// Unknown terms contribute nothing; an empty document is the zero vector.
inline SparseVec tfidf_transform(const TfidfModel& model, const std::vector<std::string>& doc) {
  std::map<int, double> counts;
  for (const auto& t : doc) {
    auto it = model.vocab.find(t);
    if (it != model.vocab.end()) counts[it->second] += 1.0;
  }
  SparseVec out;
  out.reserve(counts.size());
  for (const auto& [ix, tf] : counts)
    out.emplace_back(ix, tf * model.idf[static_cast<std::size_t>(ix)]);
  return out;
}

struct LinearSvm {
  std::vector<std::vector<double>> weights;  // [C][F], one-vs-rest rows
  std::vector<double> bias;                  // [C]
  double c_reg = 0.6;

  std::vector<double> decision(const SparseVec& x) const {
    std::vector<double> scores(bias);
    for (std::size_t c = 0; c < weights.size(); ++c)
      for (const auto& [ix, v] : x) scores[c] += weights[c][static_cast<std::size_t>(ix)] * v;
    return scores;
  }

  int predict(const SparseVec& x) const {
    std::vector<double> s = decision(x);
    int best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
      if (s[c] > s[best]) best = static_cast<int>(c);
    return best;
  }
};

// Binary hinge objective piece for one example: max(0, 1 - z*(w.x + b)).
// Subgradient wrt w is -z*x when the margin is violated, else 0. Templated
// double math keeps it finite-difference checkable away from the kink.
inline double hinge_loss(const std::vector<double>& w, double b, const SparseVec& x, int z,
                         std::vector<double>* g_w = nullptr, double* g_b = nullptr) {
  double score = b;
  for (const auto& [ix, v] : x) score += w[static_cast<std::size_t>(ix)] * v;
  double margin = static_cast<double>(z) * score;
  if (margin >= 1.0) return 0.0;
  if (g_w)
    for (const auto& [ix, v] : x) (*g_w)[static_cast<std::size_t>(ix)] -= z * v;
  if (g_b) *g_b -= z;
  return 1.0 - margin;
}

// One-vs-rest linear SVM minimizing (1/2)||w||^2 + C * sum hinge per class
// (equivalently lambda/2 ||w||^2 + mean hinge with lambda = 1/(n*C)), via
// Pegasos subgradient steps eta_t = 1/(lambda*t) over seed-shuffled epochs.
// The bias is unregularized and follows its own 1/t schedule.
inline LinearSvm svm_train(const std::vector<SparseVec>& X, const std::vector<int>& y,
                           std::size_t num_features, double c_reg = 0.6, int epochs = 100,
                           std::uint64_t seed = 1) {
  if (X.size() != y.size())
    throw std::invalid_argument("svm_train: " + std::to_string(X.size()) + " feature rows vs " +
                                std::to_string(y.size()) + " labels");
  if (X.empty()) throw std::invalid_argument("svm_train: empty training set");
  int max_label = 0;
  for (int v : y) max_label = std::max(max_label, v);
  std::size_t C = static_cast<std::size_t>(max_label) + 1;
  std::vector<long long> counts(C, 0);
  for (int v : y) {
    if (v < 0) throw std::invalid_argument("svm_train: negative label");
    ++counts[static_cast<std::size_t>(v)];
  }
  std::size_t present = 0;
  for (long long c : counts) present += c > 0;
  if (present < 2) throw std::invalid_argument("svm_train: need at least 2 classes, got " +
                                               std::to_string(present));

  LinearSvm svm;
  svm.c_reg = c_reg;
  svm.weights.assign(C, std::vector<double>(num_features, 0.0));
  svm.bias.assign(C, 0.0);

  double n = static_cast<double>(X.size());
  double lambda = 1.0 / (n * c_reg);

  for (std::size_t c = 0; c < C; ++c) {
    Pcg32 rng(seed, 0x5f00 + c);
    std::vector<std::size_t> order(X.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto& w = svm.weights[c];
    double& b = svm.bias[c];
    long long t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t ix : order) {
        ++t;
        double eta = 1.0 / (lambda * static_cast<double>(t));
        int z = y[ix] == static_cast<int>(c) ? 1 : -1;
        double score = b;
        for (const auto& [fi, v] : X[ix]) score += w[static_cast<std::size_t>(fi)] * v;
        double shrink = 1.0 - 1.0 / static_cast<double>(t);  // = 1 - eta*lambda
        for (auto& wv : w) wv *= shrink;
        if (static_cast<double>(z) * score < 1.0) {
          for (const auto& [fi, v] : X[ix]) w[static_cast<std::size_t>(fi)] += eta * z * v;
          b += static_cast<double>(z) / static_cast<double>(t);
        }
      }
    }
  }
  return svm;
}

}  // namespace irony
