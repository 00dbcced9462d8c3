// Command-line front end: every pipeline stage reads and writes plain files,
// so stages can run, be inspected, and be re-run independently.
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irony/baselines.hpp"
#include "irony/config.hpp"
#include "irony/dataset.hpp"
#include "irony/embeddings.hpp"
#include "irony/ensemble.hpp"
#include "irony/eval.hpp"
#include "irony/model.hpp"
#include "irony/textproc.hpp"
#include "irony/trainer.hpp"
#include "irony/viz.hpp"

namespace {

using namespace irony;

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::size_t task_classes(const std::string& task) {
  if (task == "a") return 2;
  if (task == "b") return 4;
  throw std::runtime_error("unknown task '" + task + "' (expected a or b)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

// Units the sequence models consume: whitespace tokens for the word level,
// UTF-8 characters of the same text for the character level.
std::vector<std::string> text_units(const std::string& level, const std::string& text) {
  return level == "char" ? split_utf8_chars(text) : split_ws(text);
}

struct HyperParams {
  ModelConfig model;
  TrainConfig train;
  SkipgramConfig skipgram;
  bool max_len_set = false;

  void load_config(const std::string& path) {
    if (path.empty()) return;
    Config cfg = Config::parse_file(path);
    model.hidden = static_cast<std::size_t>(cfg.get_int("hidden", static_cast<long>(model.hidden)));
    model.noise_sigma = cfg.get_double("noise_sigma", model.noise_sigma);
    model.emb_dropout = cfg.get_double("emb_dropout", model.emb_dropout);
    model.lstm_dropout = cfg.get_double("lstm_dropout", model.lstm_dropout);
    max_len_set = cfg.has("max_len");
    model.max_len = static_cast<std::size_t>(cfg.get_int("max_len", static_cast<long>(model.max_len)));
    train.batch_size = static_cast<std::size_t>(
        cfg.get_int("batch_size", static_cast<long>(train.batch_size)));
    train.clip_norm = cfg.get_double("clip_norm", train.clip_norm);
    train.adam.lr = cfg.get_double("lr", train.adam.lr);
    train.adam.beta1 = cfg.get_double("beta1", train.adam.beta1);
    train.adam.beta2 = cfg.get_double("beta2", train.adam.beta2);
    train.adam.eps = cfg.get_double("adam_eps", train.adam.eps);
    train.max_epochs = static_cast<int>(cfg.get_int("max_epochs", train.max_epochs));
    train.patience = static_cast<int>(cfg.get_int("patience", train.patience));
    train.val_fraction = cfg.get_double("val_fraction", train.val_fraction);
    skipgram.dim = static_cast<std::size_t>(cfg.get_int("embed_dim", static_cast<long>(skipgram.dim)));
    skipgram.window = static_cast<int>(cfg.get_int("window", skipgram.window));
    skipgram.negative_samples =
        static_cast<int>(cfg.get_int("negatives", skipgram.negative_samples));
    skipgram.min_count = static_cast<int>(cfg.get_int("min_count", skipgram.min_count));
    skipgram.epochs = static_cast<int>(cfg.get_int("embed_epochs", skipgram.epochs));
    skipgram.learning_rate = cfg.get_double("embed_lr", skipgram.learning_rate);
  }
};

int cmd_stats_build(const std::string& input, const std::string& output) {
  auto in = open_in(input);
  CorpusStats stats = build_corpus_stats(in);
  auto out = open_out(output);
  save_corpus_stats(stats, out);
  std::cout << "wrote " << stats.vocab_size() << " unigrams, " << stats.bigram.size()
            << " bigrams to " << output << "\n";
  return 0;
}

int cmd_preprocess(const std::string& stats_path, const std::string& input,
                   const std::string& output, const std::string& format,
                   const NormalizeOptions& opt, std::size_t classes) {
  CorpusStats stats = load_corpus_stats_file(stats_path);
  auto out = open_out(output);
  if (format == "lines") {
    auto in = open_in(input);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out << preprocess_line(line, stats, opt) << "\n";
    }
  } else {  // tsv: id [label] text, text column replaced by its processed form
    Dataset ds = load_dataset_file(input, classes, LabelMode::Auto);
    for (const auto& ex : ds.examples) {
      out << ex.id << '\t';
      if (ex.has_label) out << ex.label << '\t';
      out << preprocess_line(ex.text, stats, opt) << "\n";
    }
  }
  std::cout << "wrote " << output << "\n";
  return 0;
}

int cmd_embed_train(const std::string& input, const std::string& output,
                    const SkipgramConfig& cfg) {
  auto in = open_in(input);
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (!toks.empty()) sentences.push_back(std::move(toks));
  }
  EmbeddingTable table = train_skipgram(sentences, cfg);
  save_embeddings_file(table, output);
  std::cout << "trained " << table.size() << " x " << table.dim << " embeddings to " << output
            << "\n";
  return 0;
}

int cmd_train(const std::string& level, const std::string& data_path,
              const std::string& emb_path, const std::string& output, std::size_t classes,
              HyperParams hp, long expect_dim, std::uint64_t seed) {
  Dataset ds = load_dataset_file(data_path, classes, LabelMode::Required);
  if (ds.examples.empty()) throw std::runtime_error(data_path + ": no training examples");
  canonical_sort(ds);

  hp.model.num_classes = classes;
  hp.model.seed = seed;
  hp.train.seed = seed;

  ModelParams<float> model;
  if (level == "word") {
    if (emb_path.empty())
      throw std::runtime_error("train --level word needs --embeddings");
    EmbeddingTable table = load_embeddings_file(emb_path);
    if (expect_dim > 0 && static_cast<std::size_t>(expect_dim) != table.dim)
      throw std::runtime_error("embedding dimension mismatch: config says " +
                               std::to_string(expect_dim) + ", " + emb_path + " has " +
                               std::to_string(table.dim));
    ModelConfig mc = hp.model;
    mc.freeze_embedding = true;  // pretrained word vectors are never fine-tuned
    model = make_word_model<float>(table, mc);
  } else {
    ModelConfig mc = ModelConfig::char_defaults();
    mc.hidden = hp.model.hidden;
    mc.lstm_dropout = hp.model.lstm_dropout;
    mc.num_classes = classes;
    mc.seed = seed;
    if (hp.max_len_set) mc.max_len = hp.model.max_len;
    if (expect_dim > 0) mc.emb_dim = static_cast<std::size_t>(expect_dim);
    std::set<std::string> inventory;
    for (const auto& ex : ds.examples)
      for (const auto& c : split_utf8_chars(ex.text)) inventory.insert(c);
    std::vector<std::string> charset(inventory.begin(), inventory.end());
    model = make_char_model<float>(charset, mc);
  }

  std::vector<TrainExample> examples;
  examples.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) {
    TrainExample te;
    te.ids = model.encode(text_units(level, ex.text));
    if (te.ids.empty()) te.ids.push_back(model.unk);
    te.label = ex.label;
    examples.push_back(std::move(te));
  }

  auto log = open_out(output + ".log");
  TrainResult r = train(model, examples, hp.train, &log);
  save_checkpoint(model, output, level);
  std::cout << "trained " << level << " model: " << r.epochs_run << " epochs, best val F1 "
            << r.best_val_f1 << " (epoch " << r.best_epoch << "); checkpoint " << output
            << ", log " << output << ".log\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& output, std::size_t classes) {
  std::string level;
  ModelParams<float> model = load_checkpoint<float>(model_path, &level);
  if (model.cfg.num_classes != classes)
    throw std::runtime_error(model_path + " was trained for " +
                             std::to_string(model.cfg.num_classes) + " classes, task needs " +
                             std::to_string(classes));
  Dataset ds = load_dataset_file(data_path, classes, LabelMode::Auto);
  PosteriorFile pf;
  for (const auto& ex : ds.examples) {
    std::vector<int> ids = model.encode(text_units(level, ex.text));
    if (ids.empty()) ids.push_back(model.unk);
    Prediction<float> p = predict(model, ids);
    pf.ids.push_back(ex.id);
    pf.rows.emplace_back(p.probs.begin(), p.probs.end());
  }
  auto out = open_out(output);
  save_posteriors(pf, out);
  std::cout << "wrote " << pf.ids.size() << " posteriors to " << output << "\n";
  return 0;
}

int cmd_ensemble(const std::string& mode, const std::vector<std::string>& inputs,
                 const std::string& output) {
  if (inputs.empty()) throw std::runtime_error("ensemble needs at least one --inputs file");
  std::vector<PosteriorFile> files;
  for (const auto& p : inputs) files.push_back(load_posteriors_file(p));
  const PosteriorFile& first = files[0];
  std::vector<std::map<std::string, std::size_t>> index(files.size());
  for (std::size_t f = 1; f < files.size(); ++f) {
    for (std::size_t i = 0; i < files[f].ids.size(); ++i) index[f][files[f].ids[i]] = i;
    if (files[f].ids.size() != first.ids.size())
      throw std::runtime_error(inputs[f] + " has " + std::to_string(files[f].ids.size()) +
                               " rows, " + inputs[0] + " has " +
                               std::to_string(first.ids.size()));
  }
  auto out = open_out(output);
  for (std::size_t i = 0; i < first.ids.size(); ++i) {
    const std::string& id = first.ids[i];
    std::vector<ProbVector> posts;
    posts.push_back(first.rows[i]);
    for (std::size_t f = 1; f < files.size(); ++f) {
      auto it = index[f].find(id);
      if (it == index[f].end())
        throw std::runtime_error(inputs[f] + " is missing example id '" + id + "'");
      posts.push_back(files[f].rows[it->second]);
    }
    int label;
    if (mode == "ua") {
      label = unweighted_average(posts).first;
    } else {
      std::vector<int> votes;
      for (const auto& p : posts) votes.push_back(argmax_lowest(p));
      label = majority_vote(votes, posts);
    }
    out << id << '\t' << label << "\n";
  }
  std::cout << "wrote " << first.ids.size() << " ensembled predictions to " << output << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path,
                 std::size_t classes) {
  Dataset gold = load_dataset_file(gold_path, classes, LabelMode::Required);
  std::map<std::string, int> pred;
  {
    auto in = open_in(pred_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw std::runtime_error(pred_path + ":" + std::to_string(line_no) +
                                 ": expected id<TAB>label or id<TAB>probabilities");
      std::string id = line.substr(0, tab);
      std::string rest = line.substr(tab + 1);
      int label;
      if (rest.find(' ') == std::string::npos && rest.find('.') == std::string::npos) {
        if (!detail::parse_label(rest, classes, &label))
          throw std::runtime_error(pred_path + ":" + std::to_string(line_no) + ": label '" +
                                   rest + "' is not an integer in [0, " +
                                   std::to_string(classes) + ")");
      } else {
        std::istringstream ps(rest);
        ProbVector probs;
        double v;
        while (ps >> v) probs.push_back(v);
        if (probs.size() != classes)
          throw std::runtime_error(pred_path + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(classes) + " probabilities");
        label = argmax_lowest(probs);
      }
      pred[id] = label;
    }
  }
  std::vector<int> y_true, y_pred;
  for (const auto& ex : gold.examples) {
    auto it = pred.find(ex.id);
    if (it == pred.end())
      throw std::runtime_error(pred_path + ": no prediction for example id '" + ex.id + "'");
    y_true.push_back(ex.label);
    y_pred.push_back(it->second);
  }
  Metrics me = metrics(confusion(y_true, y_pred, classes));
  std::cout << format_report(me);
  return 0;
}

int cmd_attention_html(const std::string& model_path, const std::string& data_path,
                       const std::string& output, std::size_t classes, std::size_t limit) {
  std::string level;
  ModelParams<float> model = load_checkpoint<float>(model_path, &level);
  Dataset ds = load_dataset_file(data_path, classes, LabelMode::Auto);
  std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;
  for (const auto& ex : ds.examples) {
    if (limit > 0 && rows.size() >= limit) break;
    std::vector<std::string> units = text_units(level, ex.text);
    if (units.size() > model.cfg.max_len) units.resize(model.cfg.max_len);
    if (units.empty()) continue;
    Prediction<float> p = predict(model, model.encode(units));
    rows.emplace_back(units, std::vector<double>(p.attn.begin(), p.attn.end()));
  }
  auto out = open_out(output);
  attention_html(rows, out);
  std::cout << "wrote " << rows.size() << " heat maps to " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irony-detection pipeline: preprocessing, embeddings, BiLSTM+attention "
               "classifiers, ensembling, evaluation"};
  app.require_subcommand(1);

  std::string task = "a";
  std::uint64_t seed = 1;
  std::string config_path;
  app.add_option("--task", task, "task: a (binary) or b (4-class)")
      ->check(CLI::IsMember({"a", "b"}));
  app.add_option("--seed", seed, "seed for every random choice");
  app.add_option("--config", config_path, "key=value hyper-parameter file");

  // stats-build
  auto* sb = app.add_subcommand("stats-build", "count unigrams/bigrams from raw text lines");
  std::string sb_in, sb_out;
  sb->add_option("--input", sb_in, "raw text, one document per line")->required();
  sb->add_option("--output", sb_out, "statistics file to write")->required();

  // preprocess
  auto* pp = app.add_subcommand("preprocess", "tokenize and normalize tweets");
  std::string pp_stats, pp_in, pp_out, pp_format = "lines";
  NormalizeOptions pp_opt;
  bool pp_no_spell = false, pp_no_seg = false;
  pp->add_option("--stats", pp_stats, "statistics file from stats-build")->required();
  pp->add_option("--input", pp_in, "input text or TSV")->required();
  pp->add_option("--output", pp_out, "processed output")->required();
  pp->add_option("--format", pp_format, "lines (plain text) or tsv (id/label kept)")
      ->check(CLI::IsMember({"lines", "tsv"}));
  pp->add_flag("--no-spell", pp_no_spell, "disable spell correction");
  pp->add_flag("--no-hashtag-segmentation", pp_no_seg, "keep hashtag bodies unsplit");
  pp->add_flag("--bigram-spell", pp_opt.bigram_spell_context,
               "rank spelling candidates with bigram context");
  pp->add_flag("--bigram-segmentation", pp_opt.bigram_segmentation,
               "segment hashtags with bigram transitions");

  // embed-train
  auto* et = app.add_subcommand("embed-train", "train skip-gram embeddings");
  std::string et_in, et_out;
  long et_dim = -1, et_window = -1, et_neg = -1, et_min = -1, et_epochs = -1;
  double et_lr = -1;
  et->add_option("--input", et_in, "preprocessed text, one sentence per line")->required();
  et->add_option("--output", et_out, "embedding file to write")->required();
  et->add_option("--dim", et_dim, "vector dimension");
  et->add_option("--window", et_window, "context window");
  et->add_option("--negatives", et_neg, "negative samples per pair");
  et->add_option("--min-count", et_min, "minimum word count");
  et->add_option("--epochs", et_epochs, "training epochs");
  et->add_option("--lr", et_lr, "initial learning rate");

  // train
  auto* tr = app.add_subcommand("train", "train a word- or char-level classifier");
  std::string tr_level, tr_data, tr_emb, tr_out;
  long tr_dim = -1, tr_hidden = -1, tr_epochs = -1, tr_patience = -1, tr_batch = -1;
  double tr_lr = -1, tr_val = -1;
  tr->add_option("--level", tr_level, "word or char")->required()
      ->check(CLI::IsMember({"word", "char"}));
  tr->add_option("--data", tr_data, "labeled TSV with preprocessed text")->required();
  tr->add_option("--embeddings", tr_emb, "pretrained embedding file (word level)");
  tr->add_option("--output", tr_out, "checkpoint path to write")->required();
  tr->add_option("--emb-dim", tr_dim, "expected embedding dimension");
  tr->add_option("--hidden", tr_hidden, "LSTM size per direction");
  tr->add_option("--max-epochs", tr_epochs, "epoch cap");
  tr->add_option("--patience", tr_patience, "early-stopping patience");
  tr->add_option("--batch-size", tr_batch, "mini-batch size");
  tr->add_option("--lr", tr_lr, "Adam learning rate");
  tr->add_option("--val-fraction", tr_val, "validation split fraction");

  // predict
  auto* pr = app.add_subcommand("predict", "write per-example class posteriors");
  std::string pr_model, pr_data, pr_out;
  pr->add_option("--model", pr_model, "checkpoint path")->required();
  pr->add_option("--data", pr_data, "TSV with preprocessed text")->required();
  pr->add_option("--output", pr_out, "posterior file to write")->required();

  // ensemble
  auto* en = app.add_subcommand("ensemble", "combine posterior files");
  std::string en_mode = "ua", en_out;
  std::vector<std::string> en_inputs;
  en->add_option("--mode", en_mode, "ua (average) or mv (majority vote)")
      ->check(CLI::IsMember({"ua", "mv"}));
  en->add_option("--inputs", en_inputs, "posterior files")->required()->expected(-1);
  en->add_option("--output", en_out, "prediction file to write")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score predictions against gold labels");
  std::string ev_pred, ev_gold;
  ev->add_option("--pred", ev_pred, "prediction or posterior file")->required();
  ev->add_option("--gold", ev_gold, "labeled TSV")->required();

  // attention-html
  auto* ah = app.add_subcommand("attention-html", "export attention heat maps");
  std::string ah_model, ah_data, ah_out;
  long ah_limit = 0;
  ah->add_option("--model", ah_model, "checkpoint path")->required();
  ah->add_option("--data", ah_data, "TSV with preprocessed text")->required();
  ah->add_option("--output", ah_out, "HTML file to write")->required();
  ah->add_option("--limit", ah_limit, "max examples (0 = all)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::size_t classes = task_classes(task);
    HyperParams hp;
    hp.load_config(config_path);
    hp.skipgram.seed = seed;

    if (sb->parsed()) return cmd_stats_build(sb_in, sb_out);
    if (pp->parsed()) {
      pp_opt.spell_correction = !pp_no_spell;
      pp_opt.segment_hashtags = !pp_no_seg;
      return cmd_preprocess(pp_stats, pp_in, pp_out, pp_format, pp_opt, classes);
    }
    if (et->parsed()) {
      SkipgramConfig cfg = hp.skipgram;
      if (et_dim > 0) cfg.dim = static_cast<std::size_t>(et_dim);
      if (et_window > 0) cfg.window = static_cast<int>(et_window);
      if (et_neg > 0) cfg.negative_samples = static_cast<int>(et_neg);
      if (et_min > 0) cfg.min_count = static_cast<int>(et_min);
      if (et_epochs > 0) cfg.epochs = static_cast<int>(et_epochs);
      if (et_lr > 0) cfg.learning_rate = et_lr;
      return cmd_embed_train(et_in, et_out, cfg);
    }
    if (tr->parsed()) {
      if (tr_hidden > 0) hp.model.hidden = static_cast<std::size_t>(tr_hidden);
      if (tr_epochs > 0) hp.train.max_epochs = static_cast<int>(tr_epochs);
      if (tr_patience >= 0) hp.train.patience = static_cast<int>(tr_patience);
      if (tr_batch > 0) hp.train.batch_size = static_cast<std::size_t>(tr_batch);
      if (tr_lr > 0) hp.train.adam.lr = tr_lr;
      if (tr_val > 0) hp.train.val_fraction = tr_val;
      return cmd_train(tr_level, tr_data, tr_emb, tr_out, classes, hp, tr_dim, seed);
    }
    if (pr->parsed()) return cmd_predict(pr_model, pr_data, pr_out, classes);
    if (en->parsed()) return cmd_ensemble(en_mode, en_inputs, en_out);
    if (ev->parsed()) return cmd_evaluate(ev_pred, ev_gold, classes);
    if (ah->parsed())
      return cmd_attention_html(ah_model, ah_data, ah_out, classes,
                                static_cast<std::size_t>(ah_limit));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
