// Attention heat-map export: tokens rendered as HTML spans whose highlight
// opacity is the token's attention weight relative to the maximum.
#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irony {

inline std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// One example as a div of spans. Opacity is a_i / max(a) so the strongest
// token is fully saturated regardless of sequence length; the tooltip keeps
// the raw weight to 4 decimals.
inline std::string attention_spans(const std::vector<std::string>& tokens,
                                   const std::vector<double>& weights) {
  if (tokens.size() != weights.size())
    throw std::invalid_argument("attention_spans: " + std::to_string(tokens.size()) +
                                " tokens vs " + std::to_string(weights.size()) + " weights");
  if (tokens.empty()) throw std::invalid_argument("attention_spans: empty sequence");
  double mx = *std::max_element(weights.begin(), weights.end());
  std::string out = "<div class=\"ex\">";
  char buf[96];
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double op = mx > 0 ? weights[i] / mx : 0.0;
    std::snprintf(buf, sizeof buf,
                  "<span class=\"tok\" style=\"background:rgba(217,86,28,%.6f)\" title=\"%.4f\">",
                  op, weights[i]);
    out += buf;
    out += html_escape(tokens[i]);
    out += "</span> ";
  }
  out += "</div>\n";
  return out;
}

inline const char* attention_css() {
  return "body{font-family:sans-serif;margin:2em;line-height:2.2}"
         ".ex{margin-bottom:0.8em}"
         ".tok{padding:2px 4px;border-radius:3px;margin-right:2px}";
}

// Self-contained page for one or more (tokens, weights) rows.
inline void attention_html(const std::vector<std::pair<std::vector<std::string>,
                                                       std::vector<double>>>& rows,
                           std::ostream& out) {
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
      << "<title>attention weights</title><style>" << attention_css()
      << "</style></head>\n<body>\n";
  for (const auto& [tokens, weights] : rows) out << attention_spans(tokens, weights);
  out << "</body></html>\n";
}

inline void attention_html(const std::vector<std::string>& tokens,
                           const std::vector<double>& weights, std::ostream& out) {
  attention_html({{tokens, weights}}, out);
}

}  // namespace irony
