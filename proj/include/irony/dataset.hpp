// Tweet dataset ingestion: TSV lines `id<TAB>label<TAB>text` (labeled) or
// `id<TAB>text` (unlabeled), tolerant of CRLF, with line-numbered errors.
#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irony {

struct Example {
  std::string id;
  int label = -1;
  bool has_label = false;
  std::string text;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t num_classes = 2;
};

enum class LabelMode {
  Required,  // id<TAB>label<TAB>text
  None,      // id<TAB>text — tabs in the text are preserved
  Auto,      // labeled when the second field parses as an in-range integer
};

namespace detail {

inline bool parse_label(const std::string& s, std::size_t C, int* out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  int v;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::logic_error&) {
    return false;
  }
  if (pos != s.size()) return false;
  if (v < 0 || static_cast<std::size_t>(v) >= C) return false;
  *out = v;
  return true;
}

}  // namespace detail

inline Dataset load_dataset(std::istream& in, std::size_t num_classes,
                            LabelMode mode = LabelMode::Auto,
                            const std::string& name = "dataset") {
  auto fail = [&name](std::size_t line, const std::string& what) -> void {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
  };
  Dataset ds;
  ds.num_classes = num_classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    if (t1 == std::string::npos || t1 == 0)
      fail(line_no, "expected at least id<TAB>text, got '" + line + "'");
    Example ex;
    ex.id = line.substr(0, t1);
    std::string rest = line.substr(t1 + 1);
    std::size_t t2 = rest.find('\t');
    std::string second = t2 == std::string::npos ? rest : rest.substr(0, t2);

    if (mode == LabelMode::Required) {
      if (t2 == std::string::npos) fail(line_no, "expected id<TAB>label<TAB>text");
      if (!detail::parse_label(second, num_classes, &ex.label))
        fail(line_no, "label '" + second + "' is not an integer in [0, " +
                          std::to_string(num_classes) + ")");
      ex.has_label = true;
      ex.text = rest.substr(t2 + 1);
    } else if (mode == LabelMode::None) {
      ex.text = rest;
    } else {  // Auto
      int lab;
      if (t2 != std::string::npos && detail::parse_label(second, num_classes, &lab)) {
        ex.label = lab;
        ex.has_label = true;
        ex.text = rest.substr(t2 + 1);
      } else {
        ex.text = rest;
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

inline Dataset load_dataset_file(const std::string& path, std::size_t num_classes,
                                 LabelMode mode = LabelMode::Auto) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_dataset(in, num_classes, mode, path);
}

// Canonical (id, text) ordering so downstream results never depend on the
// file's row order.
inline void canonical_sort(Dataset& ds) {
  std::sort(ds.examples.begin(), ds.examples.end(), [](const Example& a, const Example& b) {
    if (a.id != b.id) return a.id < b.id;
    return a.text < b.text;
  });
}

}  // namespace irony
