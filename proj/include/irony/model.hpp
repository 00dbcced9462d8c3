// The classifier: embedding -> 2-layer bidirectional LSTM -> per-position
// attention pooling -> softmax. One template instantiation per float width;
// one set of parameters per level (word tokens or characters).
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "irony/embeddings.hpp"
#include "irony/rng.hpp"
#include "irony/tensor.hpp"

namespace irony {

template <typename T>
struct LstmCellParams {
  // Gates stacked i,f,o,g: W is [4L x (in+L)] applied to [x; h_prev], b is [4L].
  Tensor<T> W;
  Tensor<T> b;
  std::size_t in_dim = 0;
  std::size_t hidden = 0;

  void init(std::size_t in, std::size_t l, Pcg32& rng, double lo = -0.05, double hi = 0.05) {
    in_dim = in;
    hidden = l;
    W = Tensor<T>({4 * l, in + l}, true);
    b = Tensor<T>({4 * l}, true);
    W.fill_uniform(rng, lo, hi);
  }
};

template <typename T>
struct BiLstmLayerParams {
  LstmCellParams<T> fwd, bwd;
  void init(std::size_t in, std::size_t l, Pcg32& rng) {
    fwd.init(in, l, rng);
    bwd.init(in, l, rng);
  }
};

template <typename T>
struct AttentionParams {
  Tensor<T> W_h;  // [2L]: scores each position's annotation down to a scalar
  Tensor<T> b_h;  // [1]
  void init(std::size_t two_l, Pcg32& rng) {
    W_h = Tensor<T>({two_l}, true);
    b_h = Tensor<T>({1}, true);
    W_h.fill_uniform(rng, -0.05, 0.05);
  }
};

template <typename T>
struct OutputParams {
  Tensor<T> W;  // [C x 2L]
  Tensor<T> b;  // [C]
  void init(std::size_t c, std::size_t two_l, Pcg32& rng) {
    W = Tensor<T>({c, two_l}, true);
    b = Tensor<T>({c}, true);
    W.fill_uniform(rng, -0.05, 0.05);
  }
};

// One LSTM step. x, h_prev, c_prev are 1-D vars; returns (h_t, c_t).
template <typename T>
std::pair<typename Tape<T>::Var, typename Tape<T>::Var> lstm_cell(
    Tape<T>& tape, typename Tape<T>::Var x, typename Tape<T>::Var h_prev,
    typename Tape<T>::Var c_prev, LstmCellParams<T>& p) {
  using Var = typename Tape<T>::Var;
  std::size_t l = p.hidden;
  if (tape.shape(x)[0] != p.in_dim)
    throw std::invalid_argument("lstm_cell: input dim " + std::to_string(tape.shape(x)[0]) +
                                " does not match cell input dim " + std::to_string(p.in_dim));
  Var xh = tape.concat({x, h_prev}, 0);
  Var z = tape.add(tape.matmul(tape.leaf(p.W), xh), tape.leaf(p.b));
  Var i = tape.sigmoid_(tape.slice(z, 0 * l, {l}));
  Var f = tape.sigmoid_(tape.slice(z, 1 * l, {l}));
  Var o = tape.sigmoid_(tape.slice(z, 2 * l, {l}));
  Var g = tape.tanh_(tape.slice(z, 3 * l, {l}));
  Var c_t = tape.add(tape.mul(f, c_prev), tape.mul(i, g));
  Var h_t = tape.mul(o, tape.tanh_(c_t));
  return {h_t, c_t};
}

// One bidirectional layer over a sequence of 1-D input vars; output rows are
// [forward_h ; backward_h] per position.
template <typename T>
std::vector<typename Tape<T>::Var> bilstm_layer(Tape<T>& tape,
                                                const std::vector<typename Tape<T>::Var>& xs,
                                                BiLstmLayerParams<T>& p) {
  using Var = typename Tape<T>::Var;
  std::size_t n = xs.size();
  std::size_t l = p.fwd.hidden;
  std::vector<Var> fh(n), bh(n);
  Var h = tape.constant({l}, std::vector<T>(l, T(0)));
  Var c = tape.constant({l}, std::vector<T>(l, T(0)));
  for (std::size_t t = 0; t < n; ++t) {
    auto [h2, c2] = lstm_cell(tape, xs[t], h, c, p.fwd);
    fh[t] = h2;
    h = h2;
    c = c2;
  }
  h = tape.constant({l}, std::vector<T>(l, T(0)));
  c = tape.constant({l}, std::vector<T>(l, T(0)));
  for (std::size_t t = n; t-- > 0;) {
    auto [h2, c2] = lstm_cell(tape, xs[t], h, c, p.bwd);
    bh[t] = h2;
    h = h2;
    c = c2;
  }
  std::vector<Var> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = tape.concat({fh[t], bh[t]}, 0);
  return out;
}

template <typename T>
struct AttentionVars {
  typename Tape<T>::Var a;  // [T] weights
  typename Tape<T>::Var r;  // [2L] pooled representation
};

// Per-position scalar score tanh(W_h . h_i + b_h), softmax over positions,
// weights applied back onto the annotations: r = sum_i a_i h_i.
template <typename T>
AttentionVars<T> attention(Tape<T>& tape, typename Tape<T>::Var H, AttentionParams<T>& p) {
  using Var = typename Tape<T>::Var;
  Var e = tape.tanh_(tape.add(tape.matmul(H, tape.leaf(p.W_h)), tape.leaf(p.b_h)));
  Var a = tape.softmax(e);
  Var r = tape.matmul(a, H);  // [T] x [T,2L] -> [2L]
  return {a, r};
}

// softmax(W r + b) as a var of length C.
template <typename T>
typename Tape<T>::Var output_layer(Tape<T>& tape, typename Tape<T>::Var r, OutputParams<T>& p) {
  return tape.softmax(tape.add(tape.matmul(tape.leaf(p.W), r), tape.leaf(p.b)));
}

struct ModelConfig {
  std::size_t emb_dim = 300;
  std::size_t hidden = 150;       // per direction
  std::size_t num_classes = 2;
  double noise_sigma = 0.05;      // additive Gaussian on embeddings, train only
  double emb_dropout = 0.1;       // inverted dropout on embeddings, train only
  double lstm_dropout = 0.2;      // inverted dropout between the two layers
  std::size_t max_len = 50;       // inputs truncated beyond this
  bool freeze_embedding = true;
  std::uint64_t seed = 1;

  static ModelConfig word_defaults() { return ModelConfig{}; }
  static ModelConfig char_defaults() {
    ModelConfig c;
    c.emb_dim = 25;
    c.noise_sigma = 0.0;
    c.emb_dropout = 0.0;
    c.max_len = 280;
    c.freeze_embedding = false;
    return c;
  }
};

inline constexpr const char* kUnkToken = "<unk>";

template <typename T>
struct ModelParams {
  ModelConfig cfg;
  std::vector<std::string> vocab;                 // index -> unit (word or character)
  std::unordered_map<std::string, int> vocab_index;
  int unk = 0;
  Tensor<T> embedding;                            // [V x emb_dim]
  BiLstmLayerParams<T> layer1, layer2;
  AttentionParams<T> attn;
  OutputParams<T> out;

  // Everything Adam updates; the embedding only when it is not frozen.
  std::vector<Tensor<T>*> trainable() {
    std::vector<Tensor<T>*> ps;
    if (!cfg.freeze_embedding) ps.push_back(&embedding);
    for (auto* lp : {&layer1, &layer2}) {
      ps.push_back(&lp->fwd.W);
      ps.push_back(&lp->fwd.b);
      ps.push_back(&lp->bwd.W);
      ps.push_back(&lp->bwd.b);
    }
    ps.push_back(&attn.W_h);
    ps.push_back(&attn.b_h);
    ps.push_back(&out.W);
    ps.push_back(&out.b);
    return ps;
  }

  std::vector<Tensor<T>*> all_tensors() {
    std::vector<Tensor<T>*> ps = {&embedding};
    for (auto* lp : {&layer1, &layer2}) {
      ps.push_back(&lp->fwd.W);
      ps.push_back(&lp->fwd.b);
      ps.push_back(&lp->bwd.W);
      ps.push_back(&lp->bwd.b);
    }
    ps.push_back(&attn.W_h);
    ps.push_back(&attn.b_h);
    ps.push_back(&out.W);
    ps.push_back(&out.b);
    return ps;
  }

  // Map units to embedding rows, unknown -> <unk>, truncated to max_len.
  std::vector<int> encode(const std::vector<std::string>& units) const {
    std::vector<int> ids;
    ids.reserve(std::min(units.size(), cfg.max_len));
    for (const auto& u : units) {
      if (ids.size() >= cfg.max_len) break;
      auto it = vocab_index.find(u);
      ids.push_back(it == vocab_index.end() ? unk : it->second);
    }
    return ids;
  }

  void init_layers(Pcg32& rng) {
    layer1.init(cfg.emb_dim, cfg.hidden, rng);
    layer2.init(2 * cfg.hidden, cfg.hidden, rng);
    attn.init(2 * cfg.hidden, rng);
    out.init(cfg.num_classes, 2 * cfg.hidden, rng);
  }
};

// Word-level model: vocabulary and vectors come from a pretrained table and
// stay frozen; unknown words share an all-zero row that never moves.
template <typename T>
ModelParams<T> make_word_model(const EmbeddingTable& table, ModelConfig cfg) {
  cfg.emb_dim = table.dim;
  ModelParams<T> m;
  m.cfg = cfg;
  m.vocab = table.words;
  m.vocab_index = table.index;
  m.vocab.push_back(kUnkToken);
  m.unk = static_cast<int>(m.vocab.size()) - 1;
  m.vocab_index.emplace(kUnkToken, m.unk);
  m.embedding = Tensor<T>({m.vocab.size(), cfg.emb_dim}, !cfg.freeze_embedding);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table.dim; ++j)
      m.embedding.data[i * table.dim + j] = static_cast<T>(table.vectors[i * table.dim + j]);
  // <unk> row stays zero
  Pcg32 rng(cfg.seed, 0x90de1);
  m.init_layers(rng);
  return m;
}

// Character-level model: embeddings are learned from scratch over the
// character inventory (plus a shared unknown-character row).
template <typename T>
ModelParams<T> make_char_model(const std::vector<std::string>& charset, ModelConfig cfg) {
  ModelParams<T> m;
  m.cfg = cfg;
  m.vocab = charset;
  for (std::size_t i = 0; i < charset.size(); ++i)
    m.vocab_index.emplace(charset[i], static_cast<int>(i));
  m.vocab.push_back("<unk-char>");
  m.unk = static_cast<int>(m.vocab.size()) - 1;
  m.vocab_index.emplace("<unk-char>", m.unk);
  m.embedding = Tensor<T>({m.vocab.size(), cfg.emb_dim}, !cfg.freeze_embedding);
  Pcg32 rng(cfg.seed, 0x90de1);
  m.embedding.fill_uniform(rng, -0.05, 0.05);
  m.init_layers(rng);
  return m;
}

template <typename T>
struct ForwardVars {
  typename Tape<T>::Var probs;  // [C]
  typename Tape<T>::Var attn;   // [T]
};

// Builds the full graph for one example on the caller's tape. Train mode
// adds Gaussian noise to the embedded sequence, applies embedding dropout,
// then dropout between the BiLSTM layers; eval mode is deterministic.
template <typename T>
ForwardVars<T> model_forward(Tape<T>& tape, ModelParams<T>& m, const std::vector<int>& ids,
                             bool train = false, Pcg32* rng = nullptr) {
  using Var = typename Tape<T>::Var;
  if (ids.empty()) throw std::invalid_argument("model_forward: empty input sequence");
  if (train && (m.cfg.noise_sigma > 0 || m.cfg.emb_dropout > 0 || m.cfg.lstm_dropout > 0) && !rng)
    throw std::invalid_argument("model_forward: train mode with regularizers needs an RNG");

  std::vector<int> cut = ids;
  if (cut.size() > m.cfg.max_len) cut.resize(m.cfg.max_len);
  std::size_t n = cut.size();
  std::size_t d = m.cfg.emb_dim;

  Var x = tape.embed(m.embedding, cut);
  if (train && m.cfg.noise_sigma > 0) {
    std::vector<T> noise(n * d);
    for (auto& v : noise) v = static_cast<T>(rng->normal(0.0, m.cfg.noise_sigma));
    x = tape.add(x, tape.constant({n, d}, std::move(noise)));
  }
  auto dropout = [&](Var v, double p) {
    if (!train || p <= 0) return v;
    const auto& sh = tape.shape(v);
    std::vector<T> mask(Tensor<T>::count(sh));
    T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (auto& mv : mask) mv = rng->uniform() < p ? T(0) : keep_scale;
    return tape.mul(v, tape.constant(sh, std::move(mask)));
  };
  x = dropout(x, m.cfg.emb_dropout);

  std::vector<Var> xs(n);
  for (std::size_t t = 0; t < n; ++t) xs[t] = tape.row(x, t);
  std::vector<Var> h1 = bilstm_layer(tape, xs, m.layer1);
  if (train && m.cfg.lstm_dropout > 0)
    for (auto& h : h1) h = dropout(h, m.cfg.lstm_dropout);
  std::vector<Var> h2 = bilstm_layer(tape, h1, m.layer2);

  Var H = tape.stack_rows(h2);
  AttentionVars<T> att = attention(tape, H, m.attn);
  Var probs = output_layer(tape, att.r, m.out);
  return {probs, att.a};
}

template <typename T>
struct Prediction {
  std::vector<T> probs;
  std::vector<T> attn;
  int label = 0;
};

// Deterministic eval-mode forward; tape is local and discarded.
template <typename T>
Prediction<T> predict(ModelParams<T>& m, const std::vector<int>& ids) {
  Tape<T> tape;
  ForwardVars<T> f = model_forward(tape, m, ids, /*train=*/false);
  Prediction<T> p;
  p.probs = tape.value(f.probs);
  p.attn = tape.value(f.attn);
  p.label = 0;
  for (std::size_t c = 1; c < p.probs.size(); ++c)
    if (p.probs[c] > p.probs[p.label]) p.label = static_cast<int>(c);
  return p;
}

// ---- checkpoint persistence -----------------------------------------------
//
// Two files: `<path>` is a key=value manifest including the vocabulary (one
// escaped unit per line after a `vocab:` marker), `<path>.bin` holds every
// tensor as little-endian 32-bit floats in manifest-declared order. An
// FNV-1a hash of the vocabulary ties the pair together.

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t vocab_hash(const std::vector<std::string>& vocab) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& w : vocab) {
    h = fnv1a64(w, h);
    h ^= 0x0a;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string escape_unit(const std::string& u) {
  std::string out;
  for (char c : u) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string unescape_unit(const std::string& u) {
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != '\\' || i + 1 >= u.size()) {
      out += u[i];
      continue;
    }
    switch (u[++i]) {
      case '\\': out += '\\'; break;
      case 's': out += ' '; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += u[i];
    }
  }
  return out;
}

namespace detail {

inline void write_f32_le(std::ofstream& out, const std::vector<float>& vals) {
  for (float f : vals) {
    std::uint32_t bits;
    static_assert(sizeof bits == sizeof f);
    __builtin_memcpy(&bits, &f, sizeof bits);
    unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                          static_cast<unsigned char>((bits >> 8) & 0xff),
                          static_cast<unsigned char>((bits >> 16) & 0xff),
                          static_cast<unsigned char>((bits >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
}

inline std::vector<float> read_f32_le(std::ifstream& in, std::size_t n, const std::string& path) {
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw std::runtime_error(path + ": blob truncated, wanted " + std::to_string(n * 4) +
                             " bytes");
  std::vector<float> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                         (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                         (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                         (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    __builtin_memcpy(&vals[i], &bits, sizeof bits);
  }
  return vals;
}

}  // namespace detail

template <typename T>
void save_checkpoint(ModelParams<T>& m, const std::string& path,
                     const std::string& level = "word") {
  std::ofstream mf(path);
  if (!mf) throw std::runtime_error("cannot open " + path + " for writing");
  std::string blob_path = path + ".bin";
  char buf[64];
  mf << "format=bilstm-attn-checkpoint-1\n";
  mf << "level=" << level << "\n";
  mf << "emb_dim=" << m.cfg.emb_dim << "\n";
  mf << "hidden=" << m.cfg.hidden << "\n";
  mf << "classes=" << m.cfg.num_classes << "\n";
  mf << "max_len=" << m.cfg.max_len << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", m.cfg.noise_sigma);
  mf << "noise_sigma=" << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", m.cfg.emb_dropout);
  mf << "emb_dropout=" << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", m.cfg.lstm_dropout);
  mf << "lstm_dropout=" << buf << "\n";
  mf << "frozen=" << (m.cfg.freeze_embedding ? 1 : 0) << "\n";
  mf << "seed=" << m.cfg.seed << "\n";
  mf << "vocab_size=" << m.vocab.size() << "\n";
  mf << "vocab_hash=" << vocab_hash(m.vocab) << "\n";
  std::size_t total = 0;
  for (auto* t : m.all_tensors()) total += t->size();
  mf << "values=" << total << "\n";
  mf << "vocab:\n";
  for (const auto& w : m.vocab) mf << escape_unit(w) << "\n";
  if (!mf) throw std::runtime_error("write failed for " + path);

  std::ofstream bf(blob_path, std::ios::binary);
  if (!bf) throw std::runtime_error("cannot open " + blob_path + " for writing");
  for (auto* t : m.all_tensors()) {
    std::vector<float> vals(t->data.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<float>(t->data[i]);
    detail::write_f32_le(bf, vals);
  }
  if (!bf) throw std::runtime_error("write failed for " + blob_path);
}

template <typename T>
ModelParams<T> load_checkpoint(const std::string& path, std::string* level_out = nullptr) {
  std::ifstream mf(path);
  if (!mf) throw std::runtime_error("cannot open " + path);
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  bool in_vocab = false;
  std::vector<std::string> vocab;
  while (std::getline(mf, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_vocab) {
      vocab.push_back(unescape_unit(line));
      continue;
    }
    if (line == "vocab:") {
      in_vocab = true;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error(path + ": manifest missing key '" + k + "'");
    return it->second;
  };
  if (need("format") != "bilstm-attn-checkpoint-1")
    throw std::runtime_error(path + ": unrecognized format '" + kv["format"] + "'");
  if (level_out) *level_out = need("level");

  ModelConfig cfg;
  cfg.emb_dim = std::stoul(need("emb_dim"));
  cfg.hidden = std::stoul(need("hidden"));
  cfg.num_classes = std::stoul(need("classes"));
  cfg.max_len = std::stoul(need("max_len"));
  cfg.noise_sigma = std::stod(need("noise_sigma"));
  cfg.emb_dropout = std::stod(need("emb_dropout"));
  cfg.lstm_dropout = std::stod(need("lstm_dropout"));
  cfg.freeze_embedding = need("frozen") == "1";
  cfg.seed = std::stoull(need("seed"));

  std::size_t vs = std::stoul(need("vocab_size"));
  if (vocab.size() != vs)
    throw std::runtime_error(path + ": manifest declares " + std::to_string(vs) +
                             " vocabulary entries, found " + std::to_string(vocab.size()));
  std::uint64_t declared_hash = std::stoull(need("vocab_hash"));
  if (vocab_hash(vocab) != declared_hash)
    throw std::runtime_error(path + ": vocabulary hash mismatch (file corrupt or edited)");

  ModelParams<T> m;
  m.cfg = cfg;
  m.vocab = vocab;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    m.vocab_index.emplace(vocab[i], static_cast<int>(i));
  auto unk_it = m.vocab_index.find(kUnkToken);
  if (unk_it == m.vocab_index.end()) unk_it = m.vocab_index.find("<unk-char>");
  if (unk_it == m.vocab_index.end())
    throw std::runtime_error(path + ": vocabulary has no unknown-unit entry");
  m.unk = unk_it->second;

  m.embedding = Tensor<T>({vocab.size(), cfg.emb_dim}, !cfg.freeze_embedding);
  std::size_t l = cfg.hidden;
  m.layer1.fwd.in_dim = cfg.emb_dim;
  m.layer1.fwd.hidden = l;
  m.layer1.bwd = m.layer1.fwd;
  m.layer2.fwd.in_dim = 2 * l;
  m.layer2.fwd.hidden = l;
  m.layer2.bwd = m.layer2.fwd;
  m.layer1.fwd.W = Tensor<T>({4 * l, cfg.emb_dim + l}, true);
  m.layer1.fwd.b = Tensor<T>({4 * l}, true);
  m.layer1.bwd.W = Tensor<T>({4 * l, cfg.emb_dim + l}, true);
  m.layer1.bwd.b = Tensor<T>({4 * l}, true);
  m.layer2.fwd.W = Tensor<T>({4 * l, 2 * l + l}, true);
  m.layer2.fwd.b = Tensor<T>({4 * l}, true);
  m.layer2.bwd.W = Tensor<T>({4 * l, 2 * l + l}, true);
  m.layer2.bwd.b = Tensor<T>({4 * l}, true);
  m.attn.W_h = Tensor<T>({2 * l}, true);
  m.attn.b_h = Tensor<T>({1}, true);
  m.out.W = Tensor<T>({cfg.num_classes, 2 * l}, true);
  m.out.b = Tensor<T>({cfg.num_classes}, true);

  std::size_t total = 0;
  for (auto* t : m.all_tensors()) total += t->size();
  std::size_t declared = std::stoul(need("values"));
  if (total != declared)
    throw std::runtime_error(path + ": manifest declares " + std::to_string(declared) +
                             " values, shapes imply " + std::to_string(total));

  std::string blob_path = path + ".bin";
  std::ifstream bf(blob_path, std::ios::binary);
  if (!bf) throw std::runtime_error("cannot open " + blob_path);
  for (auto* t : m.all_tensors()) {
    std::vector<float> vals = detail::read_f32_le(bf, t->size(), blob_path);
    for (std::size_t i = 0; i < vals.size(); ++i) t->data[i] = static_cast<T>(vals[i]);
  }
  char extra;
  if (bf.read(&extra, 1))
    throw std::runtime_error(blob_path + ": trailing bytes beyond declared tensors");
  return m;
}

}  // namespace irony
