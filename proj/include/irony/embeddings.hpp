// Skip-gram word embeddings trained with negative sampling, their text
// serialization, and bag-of-embedding (centroid) document features.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "irony/rng.hpp"

namespace irony {

struct EmbeddingTable {
  std::vector<std::string> words;             // index -> word
  std::unordered_map<std::string, int> index; // word -> index
  std::vector<float> vectors;                 // row-major [V x dim]
  std::size_t dim = 0;

  std::size_t size() const { return words.size(); }

  int find(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }

  const float* row(std::size_t i) const { return vectors.data() + i * dim; }
  float* row(std::size_t i) { return vectors.data() + i * dim; }

  void add(const std::string& w, const std::vector<float>& vec) {
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim)
      throw std::invalid_argument("embedding row for '" + w + "' has dimension " +
                                  std::to_string(vec.size()) + ", table has " +
                                  std::to_string(dim));
    if (index.count(w)) throw std::invalid_argument("duplicate word '" + w + "'");
    index.emplace(w, static_cast<int>(words.size()));
    words.push_back(w);
    vectors.insert(vectors.end(), vec.begin(), vec.end());
  }
};

struct SkipgramConfig {
  std::size_t dim = 300;
  int negative_samples = 5;
  int min_count = 20;
  int window = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

// Loss and gradients for one (center, context, negatives) training pair:
//   l = -log sigma(u_o.v_c) - sum_k log sigma(-u_k.v_c)
// Templated so the gradient can be finite-difference checked in 64-bit.
// Null gradient pointers skip the corresponding accumulation.
template <typename T>
T sgns_pair_loss(const std::vector<T>& v_c, const std::vector<T>& u_o,
                 const std::vector<std::vector<T>>& u_negs, std::vector<T>* g_vc = nullptr,
                 std::vector<T>* g_uo = nullptr, std::vector<std::vector<T>>* g_negs = nullptr) {
  std::size_t d = v_c.size();
  auto dot = [d](const std::vector<T>& a, const std::vector<T>& b) {
    T s = T(0);
    for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  };
  auto sigmoid = [](T x) {
    return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
  };
  auto log_sigmoid = [](T x) {
    // -log(1+e^{-x}) computed without overflow for large |x|
    return x >= T(0) ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  };

  T s_o = dot(v_c, u_o);
  T loss = -log_sigmoid(s_o);
  T coef_o = sigmoid(s_o) - T(1);  // d loss / d s_o
  if (g_uo)
    for (std::size_t i = 0; i < d; ++i) (*g_uo)[i] += coef_o * v_c[i];
  if (g_vc)
    for (std::size_t i = 0; i < d; ++i) (*g_vc)[i] += coef_o * u_o[i];

  for (std::size_t k = 0; k < u_negs.size(); ++k) {
    T s_k = dot(v_c, u_negs[k]);
    loss -= log_sigmoid(-s_k);
    T coef_k = sigmoid(s_k);  // d loss / d s_k
    if (g_negs)
      for (std::size_t i = 0; i < d; ++i) (*g_negs)[k][i] += coef_k * v_c[i];
    if (g_vc)
      for (std::size_t i = 0; i < d; ++i) (*g_vc)[i] += coef_k * u_negs[k][i];
  }
  return loss;
}

// Trains skip-gram vectors over tokenized sentences. Single-threaded and
// bit-reproducible for a fixed seed. Vocabulary keeps words with
// count >= min_count, ordered by count (descending) then word (ascending).
inline EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& sentences,
                                     const SkipgramConfig& cfg) {
  std::unordered_map<std::string, long long> counts;
  long long total_tokens = 0;
  for (const auto& s : sentences)
    for (const auto& w : s) {
      ++counts[w];
      ++total_tokens;
    }

  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [w, c] : counts)
    if (c >= cfg.min_count) kept.emplace_back(w, c);
  if (kept.empty())
    throw std::runtime_error("skip-gram vocabulary is empty after min_count=" +
                             std::to_string(cfg.min_count) + " filtering");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::size_t v = kept.size(), d = cfg.dim;
  EmbeddingTable table;
  table.dim = d;
  table.words.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    table.words.push_back(kept[i].first);
    table.index.emplace(kept[i].first, static_cast<int>(i));
  }

  Pcg32 rng(cfg.seed, 0x5eed);
  table.vectors.resize(v * d);
  for (auto& x : table.vectors)
    x = static_cast<float>(rng.uniform(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d)));
  std::vector<float> out_vectors(v * d, 0.0f);  // context-side vectors, discarded after training

  // Cumulative unigram^(3/4) table for negative sampling.
  std::vector<double> cum(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    acc += std::pow(static_cast<double>(kept[i].second), 0.75);
    cum[i] = acc;
  }
  auto sample_negative = [&]() -> std::size_t {
    double u = rng.uniform() * acc;
    return static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  };

  // Sentences re-expressed as vocabulary ids, dropping filtered words.
  std::vector<std::vector<int>> ids;
  ids.reserve(sentences.size());
  long long train_tokens = 0;
  for (const auto& s : sentences) {
    std::vector<int> row;
    for (const auto& w : s) {
      int ix = table.find(w);
      if (ix >= 0) row.push_back(ix);
    }
    train_tokens += static_cast<long long>(row.size());
    if (!row.empty()) ids.push_back(std::move(row));
  }

  const double lr0 = cfg.learning_rate;
  const long long schedule_total = std::max<long long>(1, train_tokens * cfg.epochs);
  long long processed = 0;
  std::vector<float> vc_delta(d);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sent : ids) {
      for (std::size_t i = 0; i < sent.size(); ++i, ++processed) {
        double lr = lr0 * (1.0 - static_cast<double>(processed) / static_cast<double>(schedule_total));
        lr = std::max(lr, lr0 * 1e-4);
        std::size_t span = 1 + rng.bounded(static_cast<std::uint32_t>(cfg.window));
        std::size_t lo = i >= span ? i - span : 0;
        std::size_t hi = std::min(sent.size() - 1, i + span);
        int center = sent[i];
        float* v_c = table.row(static_cast<std::size_t>(center));
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          int context = sent[j];
          std::fill(vc_delta.begin(), vc_delta.end(), 0.0f);
          // positive pair, label 1
          {
            float* u_o = out_vectors.data() + static_cast<std::size_t>(context) * d;
            double s = 0.0;
            for (std::size_t x = 0; x < d; ++x) s += static_cast<double>(v_c[x]) * u_o[x];
            double g = 1.0 / (1.0 + std::exp(-s)) - 1.0;
            for (std::size_t x = 0; x < d; ++x) {
              vc_delta[x] += static_cast<float>(g) * u_o[x];
              u_o[x] -= static_cast<float>(lr * g) * v_c[x];
            }
          }
          // sampled negatives, label 0
          for (int k = 0; k < cfg.negative_samples; ++k) {
            std::size_t neg = sample_negative();
            int attempts = 0;
            while (static_cast<int>(neg) == context && ++attempts < 16) neg = sample_negative();
            if (static_cast<int>(neg) == context) continue;
            float* u_k = out_vectors.data() + neg * d;
            double s = 0.0;
            for (std::size_t x = 0; x < d; ++x) s += static_cast<double>(v_c[x]) * u_k[x];
            double g = 1.0 / (1.0 + std::exp(-s));
            for (std::size_t x = 0; x < d; ++x) {
              vc_delta[x] += static_cast<float>(g) * u_k[x];
              u_k[x] -= static_cast<float>(lr * g) * v_c[x];
            }
          }
          for (std::size_t x = 0; x < d; ++x) v_c[x] -= static_cast<float>(lr) * vc_delta[x];
        }
      }
    }
  }
  return table;
}

// Text format: header "V D", then one `word v1 .. vD` line per word.
// Values print with enough digits to reload bit-for-bit.
inline void save_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << " " << table.dim << "\n";
  char buf[48];
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string& w = table.words[i];
    if (w.find_first_of(" \t\n\r") != std::string::npos)
      throw std::invalid_argument("cannot save word containing whitespace: '" + w + "'");
    out << w;
    const float* r = table.row(i);
    for (std::size_t jx = 0; jx < table.dim; ++jx) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(r[jx]));
      out << buf;
    }
    out << "\n";
  }
}

inline void save_embeddings_file(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_embeddings(table, out);
}

inline EmbeddingTable load_embeddings(std::istream& in, const std::string& name = "embeddings") {
  auto fail = [&name](std::size_t line, const std::string& what) -> void {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t v = 0, d = 0;
  {
    std::size_t pos = 0;
    try {
      v = std::stoul(line, &pos);
      std::size_t pos2 = 0;
      d = std::stoul(line.substr(pos), &pos2);
      if (line.find_first_not_of(" \t", pos + pos2) != std::string::npos)
        fail(1, "malformed header '" + line + "'");
    } catch (const std::logic_error&) {
      fail(1, "malformed header '" + line + "'");
    }
  }
  EmbeddingTable table;
  table.dim = d;
  table.words.reserve(v);
  table.vectors.reserve(v * d);
  std::vector<float> row(d);
  for (std::size_t i = 0; i < v; ++i) {
    ++line_no;
    if (!std::getline(in, line)) fail(line_no, "expected " + std::to_string(v) +
                                               " rows, file ends after " + std::to_string(i));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) fail(line_no, "malformed row '" + line + "'");
    std::string word = line.substr(0, sp);
    const char* p = line.c_str() + sp;
    char* end = nullptr;
    for (std::size_t jx = 0; jx < d; ++jx) {
      float val = std::strtof(p, &end);
      if (end == p) fail(line_no, "row has fewer than " + std::to_string(d) + " values");
      row[jx] = val;
      p = end;
    }
    while (*p == ' ' || *p == '\t') ++p;
    if (*p != '\0') fail(line_no, "row has more than " + std::to_string(d) + " values");
    try {
      table.add(word, row);
    } catch (const std::invalid_argument& e) {
      fail(line_no, e.what());
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) fail(line_no, "unexpected content after " + std::to_string(v) + " rows");
  }
  return table;
}

inline EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_embeddings(in, path);
}

// Mean of the vectors of in-vocabulary tokens; zero vector when none match.
// Vectors are deliberately NOT length-normalized at any point.
inline std::vector<float> nbow_centroid(const std::vector<std::string>& tokens,
                                        const EmbeddingTable& table) {
  std::vector<float> acc(table.dim, 0.0f);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    int ix = table.find(t);
    if (ix < 0) continue;
    const float* r = table.row(static_cast<std::size_t>(ix));
    for (std::size_t jx = 0; jx < table.dim; ++jx) acc[jx] += r[jx];
    ++n;
  }
  if (n > 0)
    for (auto& x : acc) x /= static_cast<float>(n);
  return acc;
}

inline double cosine(const float* a, const float* b, std::size_t d) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  double denom = std::sqrt(na) * std::sqrt(nb);
  return denom > 0 ? dot / denom : 0.0;
}

}  // namespace irony
