// Twitter-aware text processing: tokenization, tag annotation, Viterbi word
// segmentation for hashtags and unigram spell correction, all driven by
// corpus word statistics.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace irony {

// ---------------------------------------------------------------------------
// Token model

enum class TokenKind { Word, TagOpen, TagClose, TagStandalone };

struct AnnotatedToken {
  TokenKind kind = TokenKind::Word;
  std::string surface;  // lowercase; empty for tag tokens
  std::string tag;      // tag name; empty for plain words

  static AnnotatedToken word(std::string s) { return {TokenKind::Word, std::move(s), {}}; }
  static AnnotatedToken standalone(std::string t) { return {TokenKind::TagStandalone, {}, std::move(t)}; }
  static AnnotatedToken open(std::string t) { return {TokenKind::TagOpen, {}, std::move(t)}; }
  static AnnotatedToken close(std::string t) { return {TokenKind::TagClose, {}, std::move(t)}; }

  // Rendering used everywhere downstream: tags become <name> / </name>.
  std::string render() const {
    switch (kind) {
      case TokenKind::Word: return surface;
      case TokenKind::TagClose: return "</" + tag + ">";
      default: return "<" + tag + ">";
    }
  }

  bool operator==(const AnnotatedToken&) const = default;
};

using TokenSeq = std::vector<AnnotatedToken>;

inline std::string render(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += seq[i].render();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus statistics

struct CorpusStats {
  std::unordered_map<std::string, std::int64_t> unigram;
  std::map<std::pair<std::string, std::string>, std::int64_t> bigram;
  std::int64_t total_unigrams = 0;

  std::int64_t count(const std::string& w) const {
    auto it = unigram.find(w);
    return it == unigram.end() ? 0 : it->second;
  }

  std::int64_t bigram_count(const std::string& a, const std::string& b) const {
    auto it = bigram.find({a, b});
    return it == bigram.end() ? 0 : it->second;
  }

  bool contains(const std::string& w) const { return unigram.count(w) > 0; }

  std::size_t vocab_size() const { return unigram.size(); }

  // log P(w) for a known word; length-penalized smoothing for unknown
  // chunks: log(10 / (total * 10^len)), the classic segmentation prior
  // that discourages splits into unseen fragments.
  double log_prob(const std::string& w) const {
    double total = static_cast<double>(std::max<std::int64_t>(total_unigrams, 1));
    auto it = unigram.find(w);
    if (it != unigram.end() && it->second > 0)
      return std::log(static_cast<double>(it->second) / total);
    return std::log(10.0) - std::log(total) - static_cast<double>(w.size()) * std::log(10.0);
  }
};

// ---------------------------------------------------------------------------
// Lowercasing (ASCII; non-ASCII bytes pass through untouched)

inline std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline bool is_all_alpha(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return false;
  return true;
}

inline bool is_all_upper_word(const std::string& s) {
  if (s.size() < 2) return false;
  for (char c : s)
    if (c < 'A' || c > 'Z') return false;
  return true;
}

// ---------------------------------------------------------------------------
// Emoticon lexicon: surface -> sentiment tag

inline const std::vector<std::pair<std::string, std::string>>& emoticon_lexicon() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {":)", "happy"},   {":-)", "happy"},  {"(:", "happy"},   {":]", "happy"},
      {"=)", "happy"},   {"^_^", "happy"},  {":')", "happy"},  {"\\o/", "happy"},
      {":o)", "happy"},  {":(", "sad"},     {":-(", "sad"},    {"):", "sad"},
      {":[", "sad"},     {":'(", "sad"},    {"=(", "sad"},     {";(", "sad"},
      {":D", "laugh"},   {":-D", "laugh"},  {"=D", "laugh"},   {"xD", "laugh"},
      {"XD", "laugh"},   {":'D", "laugh"},  {";)", "wink"},    {";-)", "wink"},
      {";]", "wink"},    {":/", "annoyed"}, {":-/", "annoyed"},{":\\", "annoyed"},
      {">:(", "annoyed"},{"-_-", "annoyed"},{":O", "surprised"},{":-O", "surprised"},
      {":o", "surprised"},{"o_O", "surprised"},{"O_o", "surprised"},{"<3", "heart"},
      {":*", "kiss"},    {":-*", "kiss"},   {":P", "tongue"},  {":-P", "tongue"},
      {":p", "tongue"},  {"=P", "tongue"},  {"xP", "tongue"},
  };
  return table;
}

inline std::optional<std::string> emoticon_tag(const std::string& tok) {
  for (const auto& [surf, tag] : emoticon_lexicon())
    if (surf == tok) return tag;
  return std::nullopt;
}

// All tag names the normalizer can emit.
inline const std::vector<std::string>& tag_vocabulary() {
  static const std::vector<std::string> tags = {
      "hashtag", "allcaps", "emphasis", "repeated", "elongated", "date",
      "time",    "url",     "user",     "email",    "money",     "number",
      "censored", "happy",  "sad",      "laugh",    "wink",      "annoyed",
      "surprised", "heart", "kiss",     "tongue"};
  return tags;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace detail {

enum class PatKind { Url, Email, User, Hashtag, Censored, Emphasized, Date, Time, Money, Number, Word, PunctRun };

struct Pattern {
  PatKind kind;
  std::regex re;
  bool word_boundary;  // reject the match if the next char is alphanumeric
};

inline const std::vector<Pattern>& token_patterns() {
  static const std::string month =
      "(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|Jun(?:e)?|Jul(?:y)?|"
      "Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)";
  static const std::string day = "[0-9]{1,2}(?:st|nd|rd|th)?";
  static const std::vector<Pattern> pats = [] {
    auto rx = [](const std::string& s) {
      return std::regex(s, std::regex::ECMAScript | std::regex::optimize);
    };
    std::vector<Pattern> v;
    v.push_back({PatKind::Url, rx(R"((?:https?://|www\.)[^\s]+)"), false});
    v.push_back({PatKind::Email, rx(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"), true});
    v.push_back({PatKind::User, rx(R"(@[A-Za-z0-9_]+)"), true});
    v.push_back({PatKind::Hashtag, rx(R"(#[A-Za-z0-9_]+)"), true});
    v.push_back({PatKind::Censored, rx(R"([A-Za-z][A-Za-z*]*\*[A-Za-z*]*)"), true});
    v.push_back({PatKind::Emphasized, rx(R"(\*[A-Za-z]+(?:[-'][A-Za-z]+)*\*)"), false});
    // "May 21, 2017", "April 23rd", "21 May 2017", "07/11/2011", "2011-07-11"
    v.push_back({PatKind::Date,
                 rx(month + R"(\.? )" + day + R"((?:,? [0-9]{4})?)"
                    "|" + day + " " + month + R"((?:,? [0-9]{4})?)"
                    R"(|[0-9]{1,2}/[0-9]{1,2}/[0-9]{2,4}|[0-9]{4}-[0-9]{2}-[0-9]{2})"),
                 true});
    // "4:30pm", "11:00 am", "16:45"
    v.push_back({PatKind::Time, rx(R"([0-9]{1,2}:[0-9]{2}(?::[0-9]{2})? ?(?:[AaPp]\.?[Mm]\.?)?)"), true});
    // "$10", "50(euro)", "25mil"; pound/euro signs appear as UTF-8 byte
    // sequences because std::regex has no unicode escapes
    v.push_back({PatKind::Money,
                 rx("\\$ ?[0-9]+(?:[.,][0-9]+)*"
                    "|\xc2\xa3 ?[0-9]+(?:[.,][0-9]+)*"
                    "|\xe2\x82\xac ?[0-9]+(?:[.,][0-9]+)*"
                    "|[0-9]+(?:[.,][0-9]+)* ?"
                    "(?:\\$|\xc2\xa3|\xe2\x82\xac|mil(?:lion)?|dollars?|euros?|pounds?)"),
                 true});
    v.push_back({PatKind::Number, rx(R"([0-9]+(?:[.,][0-9]+)*)"), true});
    v.push_back({PatKind::Word, rx(R"([A-Za-z]+(?:['\x60-][A-Za-z]+)*)"), true});
    v.push_back({PatKind::PunctRun, rx(R"([!?]+|\.{2,})"), false});
    return v;
  }();
  return pats;
}

// Longest emoticon match at position i, or 0.
inline std::size_t match_emoticon(const std::string& text, std::size_t i) {
  std::size_t best = 0;
  for (const auto& [surf, tag] : emoticon_lexicon()) {
    (void)tag;
    if (surf.size() > best && text.compare(i, surf.size(), surf) == 0) {
      // emoticons ending in a letter must not eat into a following word
      char last = surf.back();
      std::size_t end = i + surf.size();
      bool alpha_tail = (last == 'D' || last == 'P' || last == 'p' || last == 'O' ||
                         last == 'o' || last == '3');
      if (alpha_tail && end < text.size() && std::isalnum(static_cast<unsigned char>(text[end])))
        continue;
      best = surf.size();
    }
  }
  return best;
}

inline std::size_t utf8_char_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace detail

// Splits a UTF-8 string into one-code-point strings (the character model's
// input unit). Malformed lead bytes pass through as single bytes.
inline std::vector<std::string> split_utf8_chars(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = detail::utf8_char_len(static_cast<unsigned char>(text[i]));
    len = std::min(len, text.size() - i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

// Splits raw tweet text into tokens, keeping multi-word expressions (dates,
// times, money), Twitter markup, emoticons, censored and emphasized words
// intact as single tokens. Never fails; unknown bytes come out as one-char
// tokens.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  const auto& pats = detail::token_patterns();
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::size_t elen = detail::match_emoticon(text, i); elen > 0) {
      out.push_back(text.substr(i, elen));
      i += elen;
      continue;
    }
    bool matched = false;
    for (const auto& pat : pats) {
      std::smatch m;
      std::string::const_iterator begin = text.begin() + static_cast<std::ptrdiff_t>(i);
      if (std::regex_search(begin, text.end(), m, pat.re,
                            std::regex_constants::match_continuous)) {
        std::size_t len = static_cast<std::size_t>(m.length(0));
        std::size_t end = i + len;
        if (pat.word_boundary && end < text.size() &&
            std::isalnum(static_cast<unsigned char>(text[end])))
          continue;
        out.push_back(text.substr(i, len));
        i = end;
        matched = true;
        break;
      }
    }
    if (!matched) {
      std::size_t len = detail::utf8_char_len(c);
      out.push_back(text.substr(i, std::min(len, text.size() - i)));
      i += len;
    }
  }
  return out;
}

namespace detail {

// Full-token classification used by the normalizer; mirrors the tokenizer's
// pattern set.
inline std::optional<PatKind> classify(const std::string& tok) {
  for (const auto& pat : token_patterns()) {
    if (std::regex_match(tok, pat.re)) return pat.kind;
  }
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Viterbi word segmentation

// Best split of `compound` under the unigram objective: maximize
// sum of log P(w_i). DP over split positions; every prefix length is a
// candidate, unseen chunks are scored by the length-penalized prior.
// With use_bigrams the transition score becomes log P(w_i | w_{i-1}) where a
// bigram count exists, falling back to the unigram score otherwise; the DP
// state then carries the previous word's start position.
inline std::vector<std::string> segment_word(const std::string& compound,
                                             const CorpusStats& stats,
                                             bool use_bigrams = false) {
  const std::size_t n = compound.size();
  if (n == 0) return {};
  const double neg_inf = -1e300;

  if (!use_bigrams) {
    std::vector<double> best(n + 1, neg_inf);
    std::vector<std::size_t> back(n + 1, 0);
    best[0] = 0.0;
    for (std::size_t end = 1; end <= n; ++end) {
      for (std::size_t start = 0; start < end; ++start) {
        if (best[start] == neg_inf) continue;
        double s = best[start] + stats.log_prob(compound.substr(start, end - start));
        if (s > best[end]) {
          best[end] = s;
          back[end] = start;
        }
      }
    }
    std::vector<std::string> words;
    for (std::size_t end = n; end > 0; end = back[end])
      words.push_back(compound.substr(back[end], end - back[end]));
    std::reverse(words.begin(), words.end());
    return words;
  }

  // state: (end, start of last word) -> score
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(n + 1, neg_inf));
  std::vector<std::vector<std::size_t>> back(n + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t end = 1; end <= n; ++end)
    best[end][0] = stats.log_prob(compound.substr(0, end));
  for (std::size_t end = 2; end <= n; ++end) {
    for (std::size_t start = 1; start < end; ++start) {
      std::string word = compound.substr(start, end - start);
      for (std::size_t prev = 0; prev < start; ++prev) {
        if (best[start][prev] == neg_inf) continue;
        std::string prev_word = compound.substr(prev, start - prev);
        double trans;
        std::int64_t bc = stats.bigram_count(prev_word, word);
        if (bc > 0 && stats.count(prev_word) > 0)
          trans = std::log(static_cast<double>(bc) /
                           static_cast<double>(stats.count(prev_word)));
        else
          trans = stats.log_prob(word);
        double s = best[start][prev] + trans;
        if (s > best[end][start]) {
          best[end][start] = s;
          back[end][start] = prev;
        }
      }
    }
  }
  double top = neg_inf;
  std::size_t top_start = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (best[n][start] > top) {
      top = best[n][start];
      top_start = start;
    }
  }
  std::vector<std::string> words;
  std::size_t end = n, start = top_start;
  while (true) {
    words.push_back(compound.substr(start, end - start));
    if (start == 0) break;
    std::size_t prev = back[end][start];
    end = start;
    start = prev;
  }
  std::reverse(words.begin(), words.end());
  return words;
}

// Total segmentation score of `words` under the same objective; exposed so
// tests can cross-check against exhaustive enumeration.
inline double segmentation_score(const std::vector<std::string>& words,
                                 const CorpusStats& stats) {
  double s = 0.0;
  for (const auto& w : words) s += stats.log_prob(w);
  return s;
}

// ---------------------------------------------------------------------------
// Spell correction

namespace detail {

inline void gen_edits1(const std::string& w, std::vector<std::string>& out) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyz";
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i)  // deletes
    out.push_back(w.substr(0, i) + w.substr(i + 1));
  for (std::size_t i = 0; i + 1 < n; ++i) {  // transposes
    std::string t = w;
    std::swap(t[i], t[i + 1]);
    out.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < n; ++i)  // replaces
    for (const char* a = alphabet; *a; ++a) {
      if (w[i] == *a) continue;
      std::string t = w;
      t[i] = *a;
      out.push_back(std::move(t));
    }
  for (std::size_t i = 0; i <= n; ++i)  // inserts
    for (const char* a = alphabet; *a; ++a)
      out.push_back(w.substr(0, i) + *a + w.substr(i));
}

}  // namespace detail

// In-vocabulary words are fixed points. Otherwise returns the candidate
// within Damerau-Levenshtein distance <= 2 with the highest unigram count,
// breaking count ties lexicographically; the word itself if no candidate
// exists. When `prev` is given and use_bigram_context is set, candidates are
// ranked by add-one smoothed P(cand | prev) instead of the unigram count.
inline std::string spell_correct(const std::string& word, const CorpusStats& stats,
                                 const std::string& prev = "",
                                 bool use_bigram_context = false) {
  if (word.empty() || stats.contains(word)) return word;

  std::vector<std::string> e1;
  detail::gen_edits1(word, e1);
  std::unordered_set<std::string> candidates;
  for (const auto& c : e1)
    if (stats.contains(c)) candidates.insert(c);
  {
    std::unordered_set<std::string> seen(e1.begin(), e1.end());
    std::vector<std::string> e2;
    for (const auto& c : e1) {
      e2.clear();
      detail::gen_edits1(c, e2);
      for (auto& c2 : e2)
        if (seen.insert(c2).second && stats.contains(c2)) candidates.insert(c2);
    }
  }
  if (candidates.empty()) return word;

  std::string best;
  double best_score = -1.0;
  for (const auto& cand : candidates) {
    double score;
    if (use_bigram_context && !prev.empty()) {
      double num = static_cast<double>(stats.bigram_count(prev, cand)) + 1.0;
      double den = static_cast<double>(stats.count(prev)) +
                   static_cast<double>(stats.vocab_size());
      score = (num / den) * static_cast<double>(stats.count(cand));
    } else {
      score = static_cast<double>(stats.count(cand));
    }
    if (score > best_score || (score == best_score && cand < best)) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Corpus statistics construction and file format

// Counts tokenized, lowercased tokens per line; bigrams over adjacent tokens
// within a line. Tokens with internal whitespace (multi-word expressions) are
// skipped so the line-oriented stats format stays unambiguous.
inline CorpusStats build_corpus_stats(std::istream& in) {
  CorpusStats stats;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> toks = tokenize(line);
    std::string prev;
    for (const auto& raw : toks) {
      if (raw.find_first_of(" \t") != std::string::npos) {
        prev.clear();
        continue;
      }
      std::string w = to_lower(raw);
      stats.unigram[w] += 1;
      stats.total_unigrams += 1;
      if (!prev.empty()) stats.bigram[{prev, w}] += 1;
      prev = w;
    }
  }
  return stats;
}

inline CorpusStats build_corpus_stats(const std::vector<std::string>& lines) {
  std::stringstream ss;
  for (const auto& l : lines) ss << l << '\n';
  return build_corpus_stats(ss);
}

// Stats file: "word<TAB>count" lines, a blank line, then
// "word1 word2<TAB>count" lines. UTF-8, sorted for reproducible output.
inline void save_corpus_stats(const CorpusStats& stats, std::ostream& out) {
  std::map<std::string, std::int64_t> sorted(stats.unigram.begin(), stats.unigram.end());
  for (const auto& [w, c] : sorted) out << w << '\t' << c << '\n';
  out << '\n';
  for (const auto& [pair, c] : stats.bigram)
    out << pair.first << ' ' << pair.second << '\t' << c << '\n';
}

inline void save_corpus_stats(const CorpusStats& stats, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open stats file for writing: " + path);
  save_corpus_stats(stats, f);
}

inline CorpusStats load_corpus_stats(std::istream& in, const std::string& name = "<stream>") {
  CorpusStats stats;
  std::string line;
  std::size_t lineno = 0;
  bool in_bigrams = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      in_bigrams = true;
      continue;
    }
    std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": missing count field");
    std::string key = line.substr(0, tab);
    std::int64_t count;
    try {
      count = std::stoll(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": bad count");
    }
    if (count < 0)
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": negative count");
    if (!in_bigrams) {
      stats.unigram[key] += count;
      stats.total_unigrams += count;
    } else {
      std::size_t sp = key.find(' ');
      if (sp == std::string::npos)
        throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                 ": bigram line needs two words");
      stats.bigram[{key.substr(0, sp), key.substr(sp + 1)}] += count;
    }
  }
  return stats;
}

inline CorpusStats load_corpus_stats_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open stats file: " + path);
  return load_corpus_stats(f, path);
}

// ---------------------------------------------------------------------------
// Normalization

namespace detail {

inline bool has_elongation(const std::string& w) {
  std::size_t run = 1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    run = (w[i] == w[i - 1]) ? run + 1 : 1;
    if (run >= 3 && std::isalpha(static_cast<unsigned char>(w[i]))) return true;
  }
  return false;
}

// Collapse character runs down to at most max_run repeats.
inline std::string collapse_elongation(const std::string& w, std::size_t max_run = 2) {
  std::string out;
  std::size_t run = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    run = (i > 0 && w[i] == w[i - 1]) ? run + 1 : 1;
    if (run <= max_run) out += w[i];
  }
  return out;
}

inline bool is_punct_run(const std::string& tok) {
  if (tok.size() < 2) return false;
  for (char c : tok)
    if (c != '!' && c != '?' && c != '.') return false;
  return true;
}

}  // namespace detail

// Resolves an elongated word: runs trimmed to two repeats, then to one,
// whichever hits the vocabulary first; otherwise edit-distance correction on
// the two-repeat form.
inline std::string resolve_elongated(const std::string& low, const CorpusStats& stats,
                                     bool spell, const std::string& prev = "",
                                     bool bigram_context = false) {
  std::string two = detail::collapse_elongation(low, 2);
  if (stats.contains(two)) return two;
  std::string one = detail::collapse_elongation(low, 1);
  if (stats.contains(one)) return one;
  if (spell && is_all_alpha(two)) return spell_correct(two, stats, prev, bigram_context);
  return two;
}

struct NormalizeOptions {
  bool spell_correction = true;        // plain words and collapsed elongations
  bool segment_hashtags = true;
  bool bigram_spell_context = false;   // rank candidates by P(cand | prev)
  bool bigram_segmentation = false;
};

// Turns raw tokens into the annotated sequence: dates/times/urls/users/
// emails/money/numbers are replaced by a standalone tag; allcaps, emphasis,
// elongated, repeated-punctuation and censored words are lowercased/collapsed
// and post-annotated; hashtags are segmented and wrapped; emoticons map to
// sentiment tags; remaining words are lowercased and spell-corrected.
inline TokenSeq normalize(const std::vector<std::string>& tokens, const CorpusStats& stats,
                          const NormalizeOptions& opt = {}) {
  TokenSeq out;
  std::string prev_word;  // last emitted plain word, for bigram spell context

  auto emit_word = [&](std::string w) {
    prev_word = w;
    out.push_back(AnnotatedToken::word(std::move(w)));
  };

  for (const auto& tok : tokens) {
    if (auto tag = emoticon_tag(tok)) {
      out.push_back(AnnotatedToken::standalone(*tag));
      prev_word.clear();
      continue;
    }
    auto kind = detail::classify(tok);
    if (kind) {
      switch (*kind) {
        case detail::PatKind::Url:
          out.push_back(AnnotatedToken::standalone("url"));
          prev_word.clear();
          continue;
        case detail::PatKind::Email:
          out.push_back(AnnotatedToken::standalone("email"));
          prev_word.clear();
          continue;
        case detail::PatKind::User:
          out.push_back(AnnotatedToken::standalone("user"));
          prev_word.clear();
          continue;
        case detail::PatKind::Date:
          out.push_back(AnnotatedToken::standalone("date"));
          prev_word.clear();
          continue;
        case detail::PatKind::Time:
          out.push_back(AnnotatedToken::standalone("time"));
          prev_word.clear();
          continue;
        case detail::PatKind::Money:
          out.push_back(AnnotatedToken::standalone("money"));
          prev_word.clear();
          continue;
        case detail::PatKind::Number:
          out.push_back(AnnotatedToken::standalone("number"));
          prev_word.clear();
          continue;
        case detail::PatKind::Hashtag: {
          std::string body = to_lower(tok.substr(1));
          out.push_back(AnnotatedToken::open("hashtag"));
          if (opt.segment_hashtags) {
            for (auto& w : segment_word(body, stats, opt.bigram_segmentation))
              out.push_back(AnnotatedToken::word(std::move(w)));
          } else {
            out.push_back(AnnotatedToken::word(std::move(body)));
          }
          out.push_back(AnnotatedToken::close("hashtag"));
          prev_word.clear();
          continue;
        }
        case detail::PatKind::Emphasized: {
          std::string inner = to_lower(tok.substr(1, tok.size() - 2));
          emit_word(std::move(inner));
          out.push_back(AnnotatedToken::standalone("emphasis"));
          continue;
        }
        case detail::PatKind::Censored:
          emit_word(to_lower(tok));
          out.push_back(AnnotatedToken::standalone("censored"));
          continue;
        default:
          break;  // Word / PunctRun handled below
      }
    }
    if (detail::is_punct_run(tok)) {
      out.push_back(AnnotatedToken::word(std::string(1, tok[0])));
      out.push_back(AnnotatedToken::standalone("repeated"));
      prev_word.clear();
      continue;
    }
    if (is_all_upper_word(tok)) {
      std::string low = to_lower(tok);
      if (detail::has_elongation(low)) {
        emit_word(resolve_elongated(low, stats, opt.spell_correction, prev_word,
                                    opt.bigram_spell_context));
        out.push_back(AnnotatedToken::standalone("elongated"));
      } else {
        emit_word(std::move(low));
      }
      out.push_back(AnnotatedToken::standalone("allcaps"));
      continue;
    }
    std::string low = to_lower(tok);
    if (detail::has_elongation(low)) {
      emit_word(resolve_elongated(low, stats, opt.spell_correction, prev_word,
                                  opt.bigram_spell_context));
      out.push_back(AnnotatedToken::standalone("elongated"));
      continue;
    }
    if (opt.spell_correction && is_all_alpha(low))
      low = spell_correct(low, stats, prev_word, opt.bigram_spell_context);
    emit_word(std::move(low));
  }
  return out;
}

// tokenize + normalize + render, the whole pipeline for one line.
inline std::string preprocess_line(const std::string& raw, const CorpusStats& stats,
                                   const NormalizeOptions& opt = {}) {
  return render(normalize(tokenize(raw), stats, opt));
}

}  // namespace irony
