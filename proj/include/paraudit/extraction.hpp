#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraudit/canonicalize.hpp"
#include "paraudit/detail/rng.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/run.hpp"

namespace paraudit {

// Ordered lattice: collapsing duplicate raw names keeps the maximum.
enum class Sentiment { negative = 0, neutral = 1, conditional = 2, recommended = 3 };

inline std::string to_string(Sentiment s) {
  switch (s) {
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
    case Sentiment::conditional: return "conditional";
    case Sentiment::recommended: return "recommended";
  }
  return "?";
}

inline Sentiment sentiment_from_string(const std::string& s) {
  if (s == "negative") return Sentiment::negative;
  if (s == "neutral") return Sentiment::neutral;
  if (s == "conditional") return Sentiment::conditional;
  if (s == "recommended") return Sentiment::recommended;
  throw ParseError("unknown sentiment: " + s);
}

struct JudgeVerdict {
  std::string judge_id;
  std::vector<std::pair<std::string, Sentiment>> brands;  // raw, uncanonicalized
  bool valid = true;
};

struct ExtractionResult {
  std::string run_id;
  std::vector<JudgeVerdict> per_judge;  // exactly two when valid
  std::set<std::string> consensus_mentions;
  std::set<std::string> consensus_recommended;
  std::optional<double> cross_judge_jaccard_mentions;
  std::optional<double> cross_judge_jaccard_recommended;
  bool valid = true;
};

// Canonicalize a verdict's raw names; duplicates collapse to the strongest
// sentiment. Rejected tokens (stoplist, too short, empty) drop out.
inline std::map<std::string, Sentiment> collapse_verdict(const JudgeVerdict& verdict,
                                                         const BrandNormalizer& normalizer) {
  std::map<std::string, Sentiment> collapsed;
  for (const auto& [raw, sentiment] : verdict.brands) {
    CanonicalBrand c = normalizer.canonical_brand(raw);
    if (!c.accepted()) continue;
    auto [it, inserted] = collapsed.emplace(c.token, sentiment);
    if (!inserted && sentiment > it->second) it->second = sentiment;
  }
  return collapsed;
}

namespace detail {

inline std::optional<double> set_jaccard(const std::set<std::string>& a,
                                         const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return std::nullopt;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.contains(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace detail

inline ExtractionResult consensus_intersect(const std::string& run_id,
                                            const JudgeVerdict& a, const JudgeVerdict& b,
                                            const BrandNormalizer& normalizer) {
  ExtractionResult result;
  result.run_id = run_id;
  result.per_judge = {a, b};
  if (!a.valid || !b.valid) {
    result.valid = false;
    return result;
  }
  auto ca = collapse_verdict(a, normalizer);
  auto cb = collapse_verdict(b, normalizer);
  std::set<std::string> mentions_a, mentions_b, rec_a, rec_b;
  for (const auto& [t, s] : ca) {
    mentions_a.insert(t);
    if (s == Sentiment::recommended) rec_a.insert(t);
  }
  for (const auto& [t, s] : cb) {
    mentions_b.insert(t);
    if (s == Sentiment::recommended) rec_b.insert(t);
  }
  for (const auto& t : mentions_a)
    if (mentions_b.contains(t)) result.consensus_mentions.insert(t);
  for (const auto& t : rec_a)
    if (rec_b.contains(t)) result.consensus_recommended.insert(t);
  result.cross_judge_jaccard_mentions = detail::set_jaccard(mentions_a, mentions_b);
  result.cross_judge_jaccard_recommended = detail::set_jaccard(rec_a, rec_b);
  return result;
}

enum class AgreementLayer { mentions, recommended };

struct AgreementSummary {
  double mean = 0.0;
  int defined = 0;
  int undefined = 0;
};

inline AgreementSummary cross_judge_agreement(const std::vector<ExtractionResult>& results,
                                              AgreementLayer layer) {
  if (results.empty()) throw ValidationError("cross_judge_agreement: no results");
  AgreementSummary summary;
  double total = 0.0;
  for (const auto& r : results) {
    const auto& v = layer == AgreementLayer::mentions ? r.cross_judge_jaccard_mentions
                                                      : r.cross_judge_jaccard_recommended;
    if (v) {
      total += *v;
      ++summary.defined;
    } else {
      ++summary.undefined;
    }
  }
  if (summary.defined == 0)
    throw ValidationError("cross_judge_agreement: all runs undefined on this layer");
  summary.mean = total / summary.defined;
  return summary;
}

// ---------------------------------------------------------------------------
// Judge adapters
// ---------------------------------------------------------------------------

class JudgeAdapter {
 public:
  virtual ~JudgeAdapter() = default;
  virtual std::string judge_id() const = 0;
  virtual JudgeVerdict judge(const std::string& run_id,
                             const std::string& completion_text) = 0;
};

inline JudgeVerdict judge_completion(JudgeAdapter& judge, const std::string& run_id,
                                     const std::string& completion_text) {
  if (completion_text.empty())
    throw ValidationError("judge_completion: empty completion text");
  return judge.judge(run_id, completion_text);
}

// Inverts the synthetic completion template exactly. A completion stating it
// cannot recommend yields an empty valid verdict; anything off-template is
// flagged invalid.
class TemplateJudge : public JudgeAdapter {
 public:
  explicit TemplateJudge(std::string id = "template-judge") : id_(std::move(id)) {}

  std::string judge_id() const override { return id_; }

  JudgeVerdict judge(const std::string&, const std::string& completion_text) override {
    JudgeVerdict verdict;
    verdict.judge_id = id_;
    static const std::string kMarker = "I recommend: ";
    auto pos = completion_text.find(kMarker);
    if (pos == std::string::npos) {
      if (completion_text.find("cannot recommend") != std::string::npos) return verdict;
      verdict.valid = false;
      return verdict;
    }
    auto start = pos + kMarker.size();
    auto end = completion_text.find('.', start);
    if (end == std::string::npos) {
      verdict.valid = false;
      return verdict;
    }
    std::string list = completion_text.substr(start, end - start);
    std::size_t item_start = 0;
    while (item_start <= list.size()) {
      auto comma = list.find(", ", item_start);
      std::string item = list.substr(
          item_start, comma == std::string::npos ? std::string::npos : comma - item_start);
      if (!item.empty()) verdict.brands.emplace_back(item, Sentiment::recommended);
      if (comma == std::string::npos) break;
      item_start = comma + 2;
    }
    return verdict;
  }

 private:
  std::string id_;
};

// Template judge with seeded binomial thinning: each extracted brand is
// independently dropped with the configured disagreement rate. Deterministic
// per (seed, judge id, run id).
class DisagreementJudge : public JudgeAdapter {
 public:
  DisagreementJudge(std::string id, double disagreement_rate, std::uint64_t seed)
      : inner_(id), id_(std::move(id)), rate_(disagreement_rate), seed_(seed) {
    if (rate_ < 0.0 || rate_ > 1.0)
      throw ValidationError("disagreement rate must be in [0,1]");
  }

  std::string judge_id() const override { return id_; }

  JudgeVerdict judge(const std::string& run_id, const std::string& completion_text) override {
    JudgeVerdict verdict = inner_.judge(run_id, completion_text);
    if (!verdict.valid || rate_ == 0.0) return verdict;
    auto rng = detail::StreamRng(seed_).mix(id_).mix(run_id).engine();
    std::vector<std::pair<std::string, Sentiment>> kept;
    for (auto& entry : verdict.brands)
      if (detail::uniform01(rng) >= rate_) kept.push_back(std::move(entry));
    verdict.brands = std::move(kept);
    return verdict;
  }

 private:
  TemplateJudge inner_;
  std::string id_;
  double rate_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Extraction pipeline + persistence
// ---------------------------------------------------------------------------

struct ExtractionBatch {
  std::vector<ExtractionResult> results;  // valid results only
  int failed_runs = 0;                    // runs with status != ok
  int invalid_judgements = 0;             // runs with an unparseable verdict
};

// Judges every ok run with both judges and intersects. Failed runs and
// invalid verdicts are excluded and counted for disclosure.
inline ExtractionBatch extract_runs(const std::vector<RunRecord>& records,
                                    JudgeAdapter& judge_a, JudgeAdapter& judge_b,
                                    const BrandNormalizer& normalizer) {
  ExtractionBatch batch;
  for (const auto& record : records) {
    if (record.status != RunStatus::ok) {
      ++batch.failed_runs;
      continue;
    }
    JudgeVerdict va = judge_completion(judge_a, record.run_id, record.completion_text);
    JudgeVerdict vb = judge_completion(judge_b, record.run_id, record.completion_text);
    ExtractionResult result = consensus_intersect(record.run_id, va, vb, normalizer);
    if (!result.valid) {
      ++batch.invalid_judgements;
      continue;
    }
    batch.results.push_back(std::move(result));
  }
  return batch;
}

inline nlohmann::ordered_json extraction_to_json(const ExtractionResult& r) {
  nlohmann::ordered_json per_judge = nlohmann::ordered_json::array();
  for (const auto& v : r.per_judge) {
    nlohmann::ordered_json brands = nlohmann::ordered_json::array();
    for (const auto& [raw, s] : v.brands) brands.push_back({raw, to_string(s)});
    per_judge.push_back({{"judge_id", v.judge_id}, {"brands", brands}, {"valid", v.valid}});
  }
  nlohmann::ordered_json j{
      {"run_id", r.run_id},
      {"per_judge", per_judge},
      {"consensus_mentions", r.consensus_mentions},
      {"consensus_recommended", r.consensus_recommended},
      {"cross_judge_jaccard_mentions",
       r.cross_judge_jaccard_mentions ? nlohmann::ordered_json(*r.cross_judge_jaccard_mentions)
                                      : nlohmann::ordered_json(nullptr)},
      {"cross_judge_jaccard_recommended",
       r.cross_judge_jaccard_recommended
           ? nlohmann::ordered_json(*r.cross_judge_jaccard_recommended)
           : nlohmann::ordered_json(nullptr)},
      {"valid", r.valid}};
  return j;
}

inline ExtractionResult extraction_from_json(const nlohmann::json& j) {
  ExtractionResult r;
  r.run_id = j.at("run_id").get<std::string>();
  for (const auto& vj : j.at("per_judge")) {
    JudgeVerdict v;
    v.judge_id = vj.at("judge_id").get<std::string>();
    for (const auto& bj : vj.at("brands"))
      v.brands.emplace_back(bj.at(0).get<std::string>(),
                            sentiment_from_string(bj.at(1).get<std::string>()));
    v.valid = vj.value("valid", true);
    r.per_judge.push_back(std::move(v));
  }
  for (const auto& t : j.at("consensus_mentions")) r.consensus_mentions.insert(t.get<std::string>());
  for (const auto& t : j.at("consensus_recommended"))
    r.consensus_recommended.insert(t.get<std::string>());
  if (!j.at("cross_judge_jaccard_mentions").is_null())
    r.cross_judge_jaccard_mentions = j.at("cross_judge_jaccard_mentions").get<double>();
  if (!j.at("cross_judge_jaccard_recommended").is_null())
    r.cross_judge_jaccard_recommended = j.at("cross_judge_jaccard_recommended").get<double>();
  r.valid = j.value("valid", true);
  return r;
}

inline void save_extractions(const ExtractionBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ExecutionError("cannot write extractions file: " + path);
  nlohmann::ordered_json header{{"kind", "extractions"},
                                {"failed_runs", batch.failed_runs},
                                {"invalid_judgements", batch.invalid_judgements}};
  out << header.dump() << "\n";
  for (const auto& r : batch.results) out << extraction_to_json(r).dump() << "\n";
}

inline ExtractionBatch load_extractions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open extractions file: " + path);
  ExtractionBatch batch;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (!header_seen) {
      if (j.value("kind", "") != "extractions")
        throw ParseError("extractions file missing header line");
      batch.failed_runs = j.value("failed_runs", 0);
      batch.invalid_judgements = j.value("invalid_judgements", 0);
      header_seen = true;
      continue;
    }
    batch.results.push_back(extraction_from_json(j));
  }
  if (!header_seen) throw ParseError("empty extractions file: " + path);
  return batch;
}

}  // namespace paraudit
