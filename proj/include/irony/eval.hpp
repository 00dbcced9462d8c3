// Confusion matrices and the four reported columns: accuracy, precision,
// recall, F1 — per class, macro-averaged, and for the positive class.
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace irony {

struct ConfusionMatrix {
  std::size_t C = 0;
  std::vector<long long> m;  // row-major, m[true * C + pred]

  long long& at(std::size_t t, std::size_t p) { return m[t * C + p]; }
  long long at(std::size_t t, std::size_t p) const { return m[t * C + p]; }

  long long total() const {
    long long s = 0;
    for (long long v : m) s += v;
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 std::size_t C) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("confusion: " + std::to_string(y_true.size()) +
                                " true labels vs " + std::to_string(y_pred.size()) +
                                " predictions");
  ConfusionMatrix cm;
  cm.C = C;
  cm.m.assign(C * C, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i], p = y_pred[i];
    if (t < 0 || static_cast<std::size_t>(t) >= C || p < 0 || static_cast<std::size_t>(p) >= C)
      throw std::invalid_argument("confusion: label out of range at example " +
                                  std::to_string(i));
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

struct Metrics {
  double accuracy = 0;
  std::vector<double> precision, recall, f1;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  double positive_f1 = 0;  // F1 of class 1 — the binary-task convention
};

// Division by an empty denominator (class never predicted / never present)
// yields 0 for that class rather than an error.
inline Metrics metrics(const ConfusionMatrix& cm) {
  std::size_t C = cm.C;
  if (C == 0 || cm.total() == 0) throw std::invalid_argument("metrics: empty confusion matrix");
  Metrics out;
  out.precision.resize(C);
  out.recall.resize(C);
  out.f1.resize(C);
  long long trace = 0;
  for (std::size_t c = 0; c < C; ++c) {
    trace += cm.at(c, c);
    long long col = 0, row = 0;
    for (std::size_t t = 0; t < C; ++t) col += cm.at(t, c);
    for (std::size_t p = 0; p < C; ++p) row += cm.at(c, p);
    double prec = col > 0 ? static_cast<double>(cm.at(c, c)) / static_cast<double>(col) : 0.0;
    double rec = row > 0 ? static_cast<double>(cm.at(c, c)) / static_cast<double>(row) : 0.0;
    double f = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    out.precision[c] = prec;
    out.recall[c] = rec;
    out.f1[c] = f;
    out.macro_precision += prec / static_cast<double>(C);
    out.macro_recall += rec / static_cast<double>(C);
    out.macro_f1 += f / static_cast<double>(C);
  }
  out.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());
  out.positive_f1 = C >= 2 ? out.f1[1] : out.f1[0];
  return out;
}

// Text table in the column order Acc, Prec, Rec, F1; macro and
// positive-class rows carry the (global) accuracy.
inline std::string format_report(const Metrics& me) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s\n", "", "Acc", "Prec", "Rec", "F1");
  out += buf;
  for (std::size_t c = 0; c < me.f1.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%-10s %8s %8.4f %8.4f %8.4f\n",
                  ("class " + std::to_string(c)).c_str(), "-", me.precision[c], me.recall[c],
                  me.f1[c]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f %8.4f %8.4f\n", "macro", me.accuracy,
                me.macro_precision, me.macro_recall, me.macro_f1);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f %8.4f %8.4f\n", "positive", me.accuracy,
                me.f1.size() >= 2 ? me.precision[1] : me.precision[0],
                me.f1.size() >= 2 ? me.recall[1] : me.recall[0], me.positive_f1);
  out += buf;
  return out;
}

}  // namespace irony
