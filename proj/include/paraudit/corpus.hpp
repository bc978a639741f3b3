#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraudit/errors.hpp"

namespace paraudit {

enum class ParaphraseAxis {
  synonym_swap,
  structural_rewrite,
  modifier_substitution,
  region_language,
  specificity_ladder,
};

inline constexpr ParaphraseAxis kAllAxes[] = {
    ParaphraseAxis::synonym_swap,        ParaphraseAxis::structural_rewrite,
    ParaphraseAxis::modifier_substitution, ParaphraseAxis::region_language,
    ParaphraseAxis::specificity_ladder,
};

inline std::string to_string(ParaphraseAxis axis) {
  switch (axis) {
    case ParaphraseAxis::synonym_swap: return "synonym_swap";
    case ParaphraseAxis::structural_rewrite: return "structural_rewrite";
    case ParaphraseAxis::modifier_substitution: return "modifier_substitution";
    case ParaphraseAxis::region_language: return "region_language";
    case ParaphraseAxis::specificity_ladder: return "specificity_ladder";
  }
  throw ValidationError("unreachable axis value");
}

inline ParaphraseAxis axis_from_string(const std::string& s) {
  for (ParaphraseAxis a : kAllAxes)
    if (to_string(a) == s) return a;
  throw ParseError("unknown paraphrase axis: " + s);
}

enum class AxisClass { cosmetic, constraint_adding };

inline std::string to_string(AxisClass c) {
  return c == AxisClass::cosmetic ? "cosmetic" : "constraint_adding";
}

// Fixed 2/3 split: synonym swap and structural rewrite keep the intent's
// buyer segment; the other three axes shift it.
inline AxisClass axis_class(ParaphraseAxis axis) {
  switch (axis) {
    case ParaphraseAxis::synonym_swap:
    case ParaphraseAxis::structural_rewrite:
      return AxisClass::cosmetic;
    case ParaphraseAxis::modifier_substitution:
    case ParaphraseAxis::region_language:
    case ParaphraseAxis::specificity_ladder:
      return AxisClass::constraint_adding;
  }
  throw ValidationError("unreachable axis value");
}

struct BasePrompt {
  std::string id;
  std::string text;
  std::string sector;
  std::string family;
  std::optional<int> ladder_rung;  // 0 when the base anchors a ladder

  // Bootstrap cluster key.
  std::string cluster_key() const { return sector + "|" + family; }

  friend bool operator==(const BasePrompt&, const BasePrompt&) = default;
};

struct ParaphraseVariant {
  std::string id;
  std::string base_id;
  ParaphraseAxis axis = ParaphraseAxis::synonym_swap;
  std::string text;
  std::optional<int> ladder_rung;  // present iff axis == specificity_ladder

  friend bool operator==(const ParaphraseVariant&, const ParaphraseVariant&) = default;
};

struct Corpus {
  std::vector<BasePrompt> bases;
  std::vector<ParaphraseVariant> variants;

  const BasePrompt* find_base(const std::string& id) const {
    for (const auto& b : bases)
      if (b.id == id) return &b;
    return nullptr;
  }

  // surface form id -> owning base prompt id (bases map to themselves)
  std::map<std::string, std::string> surface_to_base() const {
    std::map<std::string, std::string> m;
    for (const auto& b : bases) m[b.id] = b.id;
    for (const auto& v : variants) m[v.id] = v.base_id;
    return m;
  }

  std::vector<std::string> surface_form_ids() const {
    std::vector<std::string> ids;
    ids.reserve(bases.size() + variants.size());
    for (const auto& b : bases) ids.push_back(b.id);
    for (const auto& v : variants) ids.push_back(v.id);
    return ids;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Unordered paraphrase pair, stored canonically by sorted surface id.
struct PairSpec {
  std::string surface_a_id;
  std::string surface_b_id;
  ParaphraseAxis axis = ParaphraseAxis::synonym_swap;
  std::string base_id;

  friend bool operator==(const PairSpec&, const PairSpec&) = default;
  friend bool operator<(const PairSpec& x, const PairSpec& y) {
    return std::tie(x.base_id, x.axis, x.surface_a_id, x.surface_b_id) <
           std::tie(y.base_id, y.axis, y.surface_a_id, y.surface_b_id);
  }
};

namespace detail {

inline void require_fields(const nlohmann::json& j, const std::set<std::string>& required,
                           const std::set<std::string>& optional, const std::string& where) {
  for (const auto& f : required)
    if (!j.contains(f))
      throw ParseError("record " + where + ": missing field '" + f + "'");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!required.contains(it.key()) && !optional.contains(it.key()))
      throw ParseError("record " + where + ": unknown field '" + it.key() + "'");
}

}  // namespace detail

// Validates every corpus invariant; throws ValidationError naming the
// offending record id. `require_variants` is relaxed for rerun-baseline
// prompt lists, which are bases with no paraphrase expansion.
inline void validate_corpus(const Corpus& corpus, bool require_variants = true) {
  std::set<std::string> ids;
  for (const auto& b : corpus.bases) {
    if (b.text.empty())
      throw ValidationError("base '" + b.id + "': empty text");
    if (b.sector.empty() || b.family.empty())
      throw ValidationError("base '" + b.id + "': empty (sector, family) cluster key");
    if (b.ladder_rung && *b.ladder_rung < 0)
      throw ValidationError("base '" + b.id + "': negative ladder_rung");
    if (!ids.insert(b.id).second)
      throw ValidationError("duplicate id '" + b.id + "'");
  }
  std::map<std::string, std::set<std::string>> sibling_texts;
  for (const auto& b : corpus.bases) sibling_texts[b.id].insert(b.text);
  std::set<std::string> bases_with_variants;
  for (const auto& v : corpus.variants) {
    if (v.text.empty())
      throw ValidationError("variant '" + v.id + "': empty text");
    if (!ids.insert(v.id).second)
      throw ValidationError("duplicate id '" + v.id + "'");
    if (corpus.find_base(v.base_id) == nullptr)
      throw ValidationError("variant '" + v.id + "': dangling base_id '" + v.base_id + "'");
    bool is_ladder = v.axis == ParaphraseAxis::specificity_ladder;
    if (is_ladder != v.ladder_rung.has_value())
      throw ValidationError("variant '" + v.id +
                            "': ladder_rung present iff axis is specificity_ladder");
    if (!sibling_texts[v.base_id].insert(v.text).second)
      throw ValidationError("variant '" + v.id +
                            "': text duplicates a sibling surface form");
    bases_with_variants.insert(v.base_id);
  }
  if (require_variants)
    for (const auto& b : corpus.bases)
      if (!bases_with_variants.contains(b.id))
        throw ValidationError("base '" + b.id + "': no paraphrase variants");
}

inline Corpus parse_corpus(std::istream& in, bool require_variants = true) {
  Corpus corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string where = j.value("id", "line " + std::to_string(lineno));
    const std::string kind = j.value("kind", "");
    if (kind == "base") {
      detail::require_fields(j, {"kind", "id", "text", "sector", "family"},
                             {"ladder_rung"}, where);
      BasePrompt b;
      b.id = j.at("id").get<std::string>();
      b.text = j.at("text").get<std::string>();
      b.sector = j.at("sector").get<std::string>();
      b.family = j.at("family").get<std::string>();
      if (j.contains("ladder_rung")) b.ladder_rung = j.at("ladder_rung").get<int>();
      corpus.bases.push_back(std::move(b));
    } else if (kind == "variant") {
      detail::require_fields(j, {"kind", "id", "base_id", "axis", "text"},
                             {"ladder_rung"}, where);
      ParaphraseVariant v;
      v.id = j.at("id").get<std::string>();
      v.base_id = j.at("base_id").get<std::string>();
      v.axis = axis_from_string(j.at("axis").get<std::string>());
      v.text = j.at("text").get<std::string>();
      if (j.contains("ladder_rung")) v.ladder_rung = j.at("ladder_rung").get<int>();
      corpus.variants.push_back(std::move(v));
    } else {
      throw ParseError("record " + where + ": kind must be 'base' or 'variant'");
    }
  }
  validate_corpus(corpus, require_variants);
  return corpus;
}

inline Corpus load_corpus(const std::string& path, bool require_variants = true) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  return parse_corpus(in, require_variants);
}

inline void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& b : corpus.bases) {
    nlohmann::ordered_json j{{"kind", "base"}, {"id", b.id}, {"text", b.text},
                             {"sector", b.sector}, {"family", b.family}};
    if (b.ladder_rung) j["ladder_rung"] = *b.ladder_rung;
    out << j.dump() << "\n";
  }
  for (const auto& v : corpus.variants) {
    nlohmann::ordered_json j{{"kind", "variant"}, {"id", v.id}, {"base_id", v.base_id},
                             {"axis", to_string(v.axis)}, {"text", v.text}};
    if (v.ladder_rung) j["ladder_rung"] = *v.ladder_rung;
    out << j.dump() << "\n";
  }
}

// Enumerates all unordered paraphrase pairs sharing a base prompt within an
// axis group. The base prompt joins every axis group as the axis-neutral
// anchor, so (base, variant) pairs exist on each axis the base has variants
// on and (variant, variant) pairs exist within an axis. All ladder rung
// pairs are enumerated, not just adjacent rungs.
inline std::vector<PairSpec> enumerate_paraphrase_pairs(
    const Corpus& corpus, std::optional<AxisClass> pool = std::nullopt) {
  std::vector<PairSpec> pairs;
  for (const auto& base : corpus.bases) {
    for (ParaphraseAxis axis : kAllAxes) {
      if (pool && axis_class(axis) != *pool) continue;
      std::vector<std::string> members{base.id};
      for (const auto& v : corpus.variants)
        if (v.base_id == base.id && v.axis == axis) members.push_back(v.id);
      if (members.size() < 2) continue;
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          PairSpec p;
          p.surface_a_id = std::min(members[i], members[j]);
          p.surface_b_id = std::max(members[i], members[j]);
          p.axis = axis;
          p.base_id = base.id;
          pairs.push_back(std::move(p));
        }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace paraudit
