// Posterior combination across independently trained models: unweighted
// probability averaging and majority voting, plus the text interchange
// format that lets separate processes exchange posteriors.
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irony {

using ProbVector = std::vector<double>;

inline int argmax_lowest(const ProbVector& p) {
  int best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = static_cast<int>(c);
  return best;
}

// Averaged-probability entries closer than this are treated as tied. Summing
// the same class totals in different orders can move a mean by a few ulp;
// genuinely tied classes must still resolve by class id, not by the
// accumulation order, while any real probability gap dwarfs this margin.
inline constexpr double kMeanTieTol = 1e-9;

inline int argmax_lowest_tol(const ProbVector& p, double tol) {
  double top = *std::max_element(p.begin(), p.end());
  for (std::size_t c = 0; c < p.size(); ++c)
    if (p[c] >= top - tol) return static_cast<int>(c);
  return 0;
}

// Elementwise mean of the posteriors; predicted class is the argmax of the
// mean, ties resolved to the lowest class id.
inline std::pair<int, ProbVector> unweighted_average(const std::vector<ProbVector>& posteriors) {
  if (posteriors.empty()) throw std::invalid_argument("unweighted_average: no posteriors");
  std::size_t C = posteriors[0].size();
  ProbVector mean(C, 0.0);
  for (const auto& p : posteriors) {
    if (p.size() != C)
      throw std::invalid_argument("unweighted_average: posterior length " +
                                  std::to_string(p.size()) + " does not match " +
                                  std::to_string(C));
    for (std::size_t c = 0; c < C; ++c) mean[c] += p[c];
  }
  for (auto& v : mean) v /= static_cast<double>(posteriors.size());
  return {argmax_lowest_tol(mean, kMeanTieTol), mean};
}

// Picks the class with the most votes. A voting tie is resolved by averaging
// the models' posteriors and taking the argmax restricted to the tied
// classes (lowest id if still equal).
inline int majority_vote(const std::vector<int>& predictions,
                         const std::vector<ProbVector>& posteriors) {
  if (predictions.empty()) throw std::invalid_argument("majority_vote: no predictions");
  if (predictions.size() != posteriors.size())
    throw std::invalid_argument("majority_vote: " + std::to_string(predictions.size()) +
                                " predictions vs " + std::to_string(posteriors.size()) +
                                " posteriors");
  std::size_t C = posteriors[0].size();
  std::vector<int> votes(C, 0);
  for (int pr : predictions) {
    if (pr < 0 || static_cast<std::size_t>(pr) >= C)
      throw std::invalid_argument("majority_vote: prediction " + std::to_string(pr) +
                                  " out of range");
    ++votes[static_cast<std::size_t>(pr)];
  }
  int top = *std::max_element(votes.begin(), votes.end());
  std::vector<std::size_t> tied;
  for (std::size_t c = 0; c < C; ++c)
    if (votes[c] == top) tied.push_back(c);
  if (tied.size() == 1) return static_cast<int>(tied[0]);

  ProbVector mean = unweighted_average(posteriors).second;
  double top_mean = mean[tied[0]];
  for (std::size_t c : tied) top_mean = std::max(top_mean, mean[c]);
  for (std::size_t c : tied)
    if (mean[c] >= top_mean - kMeanTieTol) return static_cast<int>(c);
  return static_cast<int>(tied[0]);
}

// ---- posterior interchange -------------------------------------------------
// One line per example: id<TAB>p_0 p_1 ... p_{C-1}

struct PosteriorFile {
  std::vector<std::string> ids;
  std::vector<ProbVector> rows;
};

inline void save_posteriors(const PosteriorFile& pf, std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < pf.ids.size(); ++i) {
    out << pf.ids[i];
    out << '\t';
    for (std::size_t c = 0; c < pf.rows[i].size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", pf.rows[i][c]);
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
}

inline PosteriorFile load_posteriors(std::istream& in, const std::string& name = "posteriors") {
  PosteriorFile pf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": expected id<TAB>probabilities");
    pf.ids.push_back(line.substr(0, tab));
    ProbVector row;
    const char* p = line.c_str() + tab + 1;
    char* end = nullptr;
    while (*p) {
      double v = std::strtod(p, &end);
      if (end == p) break;
      row.push_back(v);
      p = end;
      while (*p == ' ') ++p;
    }
    if (row.empty())
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": no probabilities");
    if (*p != '\0')
      throw std::runtime_error(name + ":" + std::to_string(line_no) +
                               ": trailing garbage '" + std::string(p) + "'");
    if (!pf.rows.empty() && row.size() != pf.rows[0].size())
      throw std::runtime_error(name + ":" + std::to_string(line_no) + ": row has " +
                               std::to_string(row.size()) + " probabilities, expected " +
                               std::to_string(pf.rows[0].size()));
    pf.rows.push_back(std::move(row));
  }
  return pf;
}

inline PosteriorFile load_posteriors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_posteriors(in, path);
}

}  // namespace irony
