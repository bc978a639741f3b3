#pragma once

#include <string>
#include <tuple>

#include "paraudit/errors.hpp"

namespace paraudit {

enum class ReasoningEffort { low, high };

inline std::string to_string(ReasoningEffort e) {
  return e == ReasoningEffort::low ? "low" : "high";
}

inline ReasoningEffort effort_from_string(const std::string& s) {
  if (s == "low") return ReasoningEffort::low;
  if (s == "high") return ReasoningEffort::high;
  throw ParseError("unknown reasoning effort: " + s);
}

// One audit column: provider x model x reasoning effort.
struct ModelCell {
  std::string provider;
  std::string model;
  ReasoningEffort effort = ReasoningEffort::low;

  std::string key() const {
    return provider + "/" + model + "/" + to_string(effort);
  }

  friend bool operator==(const ModelCell& a, const ModelCell& b) {
    return std::tie(a.provider, a.model, a.effort) ==
           std::tie(b.provider, b.model, b.effort);
  }
  friend bool operator<(const ModelCell& a, const ModelCell& b) {
    return std::tie(a.provider, a.model, a.effort) <
           std::tie(b.provider, b.model, b.effort);
  }
};

// Parses "provider/model/effort" (model itself may not contain '/').
inline ModelCell parse_cell(const std::string& spec) {
  auto first = spec.find('/');
  auto last = spec.rfind('/');
  if (first == std::string::npos || first == last)
    throw ParseError("cell spec must be provider/model/effort: " + spec);
  ModelCell cell;
  cell.provider = spec.substr(0, first);
  cell.model = spec.substr(first + 1, last - first - 1);
  cell.effort = effort_from_string(spec.substr(last + 1));
  if (cell.provider.empty() || cell.model.empty())
    throw ParseError("cell spec has empty provider or model: " + spec);
  return cell;
}

}  // namespace paraudit
