#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paraudit/canonicalize.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/detail/rng.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/extraction.hpp"
#include "paraudit/model_cell.hpp"
#include "paraudit/run.hpp"

namespace paraudit {

enum class Signal { completion_mentions, recommended_slot, retrieved_etld1 };

inline std::string to_string(Signal s) {
  switch (s) {
    case Signal::completion_mentions: return "completion_mentions";
    case Signal::recommended_slot: return "recommended_slot";
    case Signal::retrieved_etld1: return "retrieved_etld1";
  }
  return "?";
}

inline constexpr Signal kAllSignals[] = {
    Signal::completion_mentions, Signal::recommended_slot, Signal::retrieved_etld1};

// |A∩B| / |A∪B|; undefined iff both sets empty.
inline std::optional<double> jaccard(const std::set<std::string>& a,
                                     const std::set<std::string>& b) {
  return detail::set_jaccard(a, b);
}

// ---------------------------------------------------------------------------
// Analysis snapshot: ok runs joined with their extraction results, with the
// three signal sets precomputed.
// ---------------------------------------------------------------------------

struct AnalysisRun {
  std::string run_id;
  std::string surface_form_id;
  ModelCell cell;
  std::set<std::string> mentions;
  std::set<std::string> recommended;
  std::set<std::string> domains;

  const std::set<std::string>& signal_set(Signal s) const {
    switch (s) {
      case Signal::completion_mentions: return mentions;
      case Signal::recommended_slot: return recommended;
      case Signal::retrieved_etld1: return domains;
    }
    return mentions;
  }
};

struct AnalysisStore {
  std::vector<AnalysisRun> runs;
  int failed_runs = 0;
  int invalid_judgements = 0;
  int unextracted_runs = 0;   // ok runs with no extraction record
  int citation_url_errors = 0;
  std::string first_started;
  std::string last_finished;

  std::vector<const AnalysisRun*> runs_for(const std::string& surface_form_id,
                                           const ModelCell& cell) const {
    std::vector<const AnalysisRun*> out;
    for (const auto& r : runs)
      if (r.surface_form_id == surface_form_id && r.cell == cell) out.push_back(&r);
    return out;
  }

  std::vector<ModelCell> cells() const {
    std::set<ModelCell> seen;
    for (const auto& r : runs) seen.insert(r.cell);
    return {seen.begin(), seen.end()};
  }

  std::set<std::string> surface_forms() const {
    std::set<std::string> out;
    for (const auto& r : runs) out.insert(r.surface_form_id);
    return out;
  }
};

inline AnalysisStore build_analysis_store(const std::vector<RunRecord>& records,
                                          const ExtractionBatch& extractions,
                                          const PublicSuffixList& psl) {
  std::map<std::string, const ExtractionResult*> by_run;
  for (const auto& e : extractions.results)
    if (e.valid) by_run[e.run_id] = &e;
  AnalysisStore store;
  store.failed_runs = extractions.failed_runs;
  store.invalid_judgements = extractions.invalid_judgements;
  for (const auto& record : records) {
    if (record.status != RunStatus::ok) continue;
    if (!store.first_started.empty()) {
      store.first_started = std::min(store.first_started, record.started_at);
      store.last_finished = std::max(store.last_finished, record.finished_at);
    } else {
      store.first_started = record.started_at;
      store.last_finished = record.finished_at;
    }
    auto it = by_run.find(record.run_id);
    if (it == by_run.end()) {
      ++store.unextracted_runs;
      continue;
    }
    AnalysisRun run;
    run.run_id = record.run_id;
    run.surface_form_id = record.surface_form_id;
    run.cell = record.cell;
    run.mentions = it->second->consensus_mentions;
    run.recommended = it->second->consensus_recommended;
    for (const auto& url : record.citations) {
      try {
        run.domains.insert(psl.canonical_domain(url));
      } catch (const ValidationError&) {
        ++store.citation_url_errors;
      }
    }
    store.runs.push_back(std::move(run));
  }
  return store;
}

// ---------------------------------------------------------------------------
// Pooled estimates
// ---------------------------------------------------------------------------

struct JaccardEstimate {
  double mean = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  long n_pairs = 0;
  long n_prompt_units = 0;
  long n_clusters = 0;
  long excluded_undefined = 0;
};

struct RerunStability {
  std::map<std::string, double> per_prompt;  // surface form -> mean pair Jaccard
  double cell_mean = 0.0;
  long n_pairs = 0;
  long excluded_undefined = 0;
  int skipped_prompts = 0;  // prompts with < 2 ok runs
};

// Mean Jaccard over all C(n,2) within-cell run pairs per prompt, then the
// unweighted mean over prompts.
inline RerunStability rerun_stability(const AnalysisStore& store, const ModelCell& cell,
                                      Signal signal) {
  RerunStability result;
  std::map<std::string, std::vector<const AnalysisRun*>> by_prompt;
  for (const auto& r : store.runs)
    if (r.cell == cell) by_prompt[r.surface_form_id].push_back(&r);
  for (const auto& [prompt, runs] : by_prompt) {
    if (runs.size() < 2) {
      ++result.skipped_prompts;
      continue;
    }
    double total = 0.0;
    long defined = 0;
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        auto v = jaccard(runs[i]->signal_set(signal), runs[j]->signal_set(signal));
        if (v) {
          total += *v;
          ++defined;
        } else {
          ++result.excluded_undefined;
        }
      }
    if (defined == 0) {
      ++result.skipped_prompts;
      continue;
    }
    result.per_prompt[prompt] = total / static_cast<double>(defined);
    result.n_pairs += defined;
  }
  if (result.per_prompt.empty())
    throw ValidationError("rerun_stability: no prompt with >= 2 runs in cell " + cell.key());
  double sum = 0.0;
  for (const auto& [_, v] : result.per_prompt) sum += v;
  result.cell_mean = sum / static_cast<double>(result.per_prompt.size());
  return result;
}

struct PoolJaccard {
  std::map<std::string, double> per_base;  // base prompt -> mean over its pairs
  double pool_mean = 0.0;
  long n_run_pairs = 0;
  long n_pair_specs = 0;  // paraphrase pairs contributing
  long excluded_undefined = 0;
};

// Three-level unweighted hierarchy: run pairs (within the same cell only)
// -> paraphrase-pair mean across cells -> base-prompt mean -> pool mean.
inline PoolJaccard paraphrase_pool_jaccard(const AnalysisStore& store,
                                           const std::vector<PairSpec>& pairs,
                                           const std::vector<ModelCell>& cells,
                                           Signal signal = Signal::recommended_slot) {
  if (pairs.empty()) throw ValidationError("paraphrase_pool_jaccard: empty pair list");
  PoolJaccard result;
  std::map<std::string, std::vector<double>> base_pair_means;
  for (const auto& pair : pairs) {
    std::vector<double> cell_means;
    for (const auto& cell : cells) {
      auto runs_a = store.runs_for(pair.surface_a_id, cell);
      auto runs_b = store.runs_for(pair.surface_b_id, cell);
      if (runs_a.empty() || runs_b.empty()) continue;
      double total = 0.0;
      long defined = 0;
      for (const auto* a : runs_a)
        for (const auto* b : runs_b) {
          auto v = jaccard(a->signal_set(signal), b->signal_set(signal));
          if (v) {
            total += *v;
            ++defined;
          } else {
            ++result.excluded_undefined;
          }
        }
      if (defined > 0) {
        cell_means.push_back(total / static_cast<double>(defined));
        result.n_run_pairs += defined;
      }
    }
    if (cell_means.empty()) continue;
    double pair_mean = 0.0;
    for (double v : cell_means) pair_mean += v;
    base_pair_means[pair.base_id].push_back(pair_mean /
                                            static_cast<double>(cell_means.size()));
    ++result.n_pair_specs;
  }
  if (base_pair_means.empty())
    throw ValidationError("paraphrase_pool_jaccard: no pair has runs on both sides");
  double pool_total = 0.0;
  for (const auto& [base, values] : base_pair_means) {
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    result.per_base[base] = m;
    pool_total += m;
  }
  result.pool_mean = pool_total / static_cast<double>(result.per_base.size());
  return result;
}

// Nearest-rank percentile over a sorted sample.
inline double percentile_nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of empty sample");
  auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  if (rank == 0) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

// Percentile CI from resampling cluster blocks with replacement: each
// iteration draws the original number of clusters and recomputes the
// unweighted mean over all values carried by the chosen clusters.
// Deterministic for a fixed seed.
inline std::pair<double, double> clustered_bootstrap(
    const std::vector<std::pair<double, std::string>>& values, int iterations = 1000,
    std::uint64_t seed = 0) {
  std::map<std::string, std::vector<double>> clusters;
  for (const auto& [v, key] : values) clusters[key].push_back(v);
  if (clusters.size() < 2)
    throw ValidationError("clustered_bootstrap: need >= 2 distinct clusters");
  std::vector<const std::vector<double>*> blocks;
  blocks.reserve(clusters.size());
  for (const auto& [_, block] : clusters) blocks.push_back(&block);

  auto rng = detail::StreamRng(seed).mix("clustered_bootstrap").engine();
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    double total = 0.0;
    long count = 0;
    for (std::size_t c = 0; c < blocks.size(); ++c) {
      std::size_t pick = static_cast<std::size_t>(detail::uniform01(rng) *
                                                  static_cast<double>(blocks.size()));
      if (pick >= blocks.size()) pick = blocks.size() - 1;
      for (double v : *blocks[pick]) {
        total += v;
        ++count;
      }
    }
    means.push_back(total / static_cast<double>(count));
  }
  std::sort(means.begin(), means.end());
  return {percentile_nearest_rank(means, 0.025), percentile_nearest_rank(means, 0.975)};
}

// Wilson score interval, clamped to [0,1].
inline std::pair<double, double> wilson_interval(long successes, long trials,
                                                 double z = 1.96) {
  if (trials < 1) throw ValidationError("wilson_interval: n must be >= 1");
  if (successes < 0 || successes > trials)
    throw ValidationError("wilson_interval: k must be in [0, n]");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Equal-sized-set conversions: per-list overlap 2J/(1+J), turnover 1-2J/(1+J).
inline double overlap_from_jaccard(double j) { return 2.0 * j / (1.0 + j); }
inline double turnover_from_jaccard(double j) { return 1.0 - overlap_from_jaccard(j); }

struct CrossProviderAnchor {
  std::map<std::string, double> per_prompt;
  double mean = 0.0;
  long n_pairs = 0;
  long excluded_undefined = 0;
};

// Per prompt: every run on an a-provider cell paired with every run on a
// b-provider cell, averaged; then the unweighted prompt mean.
inline CrossProviderAnchor cross_provider_anchor(const AnalysisStore& store,
                                                 const std::string& provider_a,
                                                 const std::string& provider_b,
                                                 Signal signal) {
  CrossProviderAnchor result;
  std::map<std::string, std::pair<std::vector<const AnalysisRun*>,
                                  std::vector<const AnalysisRun*>>> by_prompt;
  for (const auto& r : store.runs) {
    if (r.cell.provider == provider_a) by_prompt[r.surface_form_id].first.push_back(&r);
    if (r.cell.provider == provider_b) by_prompt[r.surface_form_id].second.push_back(&r);
  }
  for (const auto& [prompt, sides] : by_prompt) {
    if (sides.first.empty() || sides.second.empty()) continue;
    double total = 0.0;
    long defined = 0;
    for (const auto* a : sides.first)
      for (const auto* b : sides.second) {
        auto v = jaccard(a->signal_set(signal), b->signal_set(signal));
        if (v) {
          total += *v;
          ++defined;
        } else {
          ++result.excluded_undefined;
        }
      }
    if (defined == 0) continue;
    result.per_prompt[prompt] = total / static_cast<double>(defined);
    result.n_pairs += defined;
  }
  if (result.per_prompt.empty())
    throw ValidationError("cross_provider_anchor: no prompt covered on both providers");
  double sum = 0.0;
  for (const auto& [_, v] : result.per_prompt) sum += v;
  result.mean = sum / static_cast<double>(result.per_prompt.size());
  return result;
}

struct EffortDelta {
  double low_value = 0.0;
  double high_value = 0.0;
  double delta = 0.0;          // high - low rerun stability
  double pairing_jaccard = 0.0;  // same-prompt low x high cross-effort pairing
  long n_pairing_pairs = 0;
  long excluded_undefined = 0;
};

// Rerun-stability delta between the provider's low and high effort cells,
// plus the same-prompt low x high pairing Jaccard (all cross-effort run
// pairs per prompt within the same model, prompt-averaged).
inline EffortDelta effort_delta(const AnalysisStore& store, const std::string& provider,
                                Signal signal) {
  std::set<ModelCell> low_cells, high_cells;
  for (const auto& r : store.runs) {
    if (r.cell.provider != provider) continue;
    (r.cell.effort == ReasoningEffort::low ? low_cells : high_cells).insert(r.cell);
  }
  if (low_cells.empty() || high_cells.empty())
    throw ValidationError("effort_delta: provider '" + provider +
                          "' is missing a low or high effort cell");
  auto effort_mean = [&](const std::set<ModelCell>& cells) {
    double total = 0.0;
    for (const auto& cell : cells) total += rerun_stability(store, cell, signal).cell_mean;
    return total / static_cast<double>(cells.size());
  };
  EffortDelta result;
  result.low_value = effort_mean(low_cells);
  result.high_value = effort_mean(high_cells);
  result.delta = result.high_value - result.low_value;

  // prompt -> model -> runs per effort
  std::map<std::string, std::map<std::string, std::pair<std::vector<const AnalysisRun*>,
                                                        std::vector<const AnalysisRun*>>>>
      grouped;
  for (const auto& r : store.runs) {
    if (r.cell.provider != provider) continue;
    auto& sides = grouped[r.surface_form_id][r.cell.model];
    (r.cell.effort == ReasoningEffort::low ? sides.first : sides.second).push_back(&r);
  }
  std::vector<double> prompt_means;
  for (const auto& [prompt, by_model] : grouped) {
    double total = 0.0;
    long defined = 0;
    for (const auto& [model, sides] : by_model)
      for (const auto* a : sides.first)
        for (const auto* b : sides.second) {
          auto v = jaccard(a->signal_set(signal), b->signal_set(signal));
          if (v) {
            total += *v;
            ++defined;
          } else {
            ++result.excluded_undefined;
          }
        }
    if (defined == 0) continue;
    prompt_means.push_back(total / static_cast<double>(defined));
    result.n_pairing_pairs += defined;
  }
  if (!prompt_means.empty()) {
    double sum = 0.0;
    for (double v : prompt_means) sum += v;
    result.pairing_jaccard = sum / static_cast<double>(prompt_means.size());
  }
  return result;
}

}  // namespace paraudit
