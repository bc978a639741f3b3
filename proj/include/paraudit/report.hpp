#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraudit/canonicalize.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/extraction.hpp"
#include "paraudit/stats.hpp"

namespace paraudit {

enum class Verdict { paraphrase_dominated, noise_dominated, indeterminate };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::paraphrase_dominated: return "paraphrase_dominated";
    case Verdict::noise_dominated: return "noise_dominated";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

// Three-case rule against the conservative end of the rerun range: the
// paraphrase CI must clear the rerun lower bound entirely to call either
// direction.
inline Verdict verdict(std::pair<double, double> rerun_range,
                       const JaccardEstimate& paraphrase_estimate) {
  double ci_low = paraphrase_estimate.ci_low.value_or(paraphrase_estimate.mean);
  double ci_high = paraphrase_estimate.ci_high.value_or(paraphrase_estimate.mean);
  if (ci_high < rerun_range.first) return Verdict::paraphrase_dominated;
  if (ci_low > rerun_range.first) return Verdict::noise_dominated;
  return Verdict::indeterminate;
}

struct SummaryRow {
  std::string name;
  Signal signal = Signal::recommended_slot;
  std::string cell_or_pool;
  JaccardEstimate estimate;
};

struct ReportConfig {
  std::uint64_t bootstrap_seed = 0;
  int bootstrap_iterations = 1000;
  std::string store_path;
  std::string corpus_path;
  std::uint64_t stoplist_hash = 0;
};

struct AuditReport {
  // signal -> cell key -> prompt-averaged mean (absent cells omitted)
  std::map<std::string, std::map<std::string, double>> rerun_table;
  std::vector<std::string> cell_keys;  // column order
  std::optional<std::pair<double, double>> rerun_range;  // recommended slot, min/max
  std::vector<SummaryRow> summary_rows;
  Verdict verdict_value = Verdict::indeterminate;
  bool verdict_available = false;

  // diagnostics
  int failed_runs = 0;
  int invalid_judgements = 0;
  int unextracted_runs = 0;
  int citation_url_errors = 0;
  long undefined_pairs_excluded = 0;
  std::optional<double> cross_judge_agreement_mentions;
  std::optional<double> cross_judge_agreement_recommended;
  bool day_span_warning = false;
  std::string first_started;
  std::string last_finished;
  std::vector<std::string> notes;
  ReportConfig config;
};

namespace detail {

inline std::optional<std::time_t> parse_iso8601(const std::string& ts) {
  std::tm tm{};
  int ms = 0;
  if (std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms) < 6)
    return std::nullopt;
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return timegm(&tm);
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// Builds the full report from an analysis snapshot. Every number in the
// artifacts traces back to a field set here.
inline AuditReport render_report(const std::vector<RunRecord>& records_in,
                                 const ExtractionBatch& extractions_in, const Corpus& corpus,
                                 const PublicSuffixList& psl, const ReportConfig& config) {
  if (records_in.empty()) throw ValidationError("render_report: empty run store");
  // Concurrent execution appends records in scheduling order; sort so every
  // float accumulation happens in one canonical order and the artifacts are
  // byte-identical for identical inputs.
  std::vector<RunRecord> records = records_in;
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
  ExtractionBatch extractions = extractions_in;
  std::sort(extractions.results.begin(), extractions.results.end(),
            [](const ExtractionResult& a, const ExtractionResult& b) {
              return a.run_id < b.run_id;
            });
  AnalysisStore store = build_analysis_store(records, extractions, psl);

  // corpus/store mismatch check
  auto surface_to_base = corpus.surface_to_base();
  for (const auto& r : store.runs)
    if (!surface_to_base.contains(r.surface_form_id))
      throw ValidationError("run store references unknown surface form '" +
                            r.surface_form_id + "'");
  auto cluster_of = [&](const std::string& surface) {
    const BasePrompt* base = corpus.find_base(surface_to_base.at(surface));
    return base ? base->cluster_key() : std::string("unclustered");
  };

  AuditReport report;
  report.config = config;
  report.failed_runs = store.failed_runs;
  report.invalid_judgements = store.invalid_judgements;
  report.unextracted_runs = store.unextracted_runs;
  report.citation_url_errors = store.citation_url_errors;
  report.first_started = store.first_started;
  report.last_finished = store.last_finished;

  auto started = detail::parse_iso8601(store.first_started);
  auto finished = detail::parse_iso8601(store.last_finished);
  if (started && finished && *finished - *started > 24 * 3600) {
    report.day_span_warning = true;
    report.notes.push_back("run store spans more than 24 hours; same-day rerun "
                           "comparability is not guaranteed");
  }

  if (!extractions.results.empty()) {
    report.cross_judge_agreement_mentions =
        cross_judge_agreement(extractions.results, AgreementLayer::mentions).mean;
    try {
      report.cross_judge_agreement_recommended =
          cross_judge_agreement(extractions.results, AgreementLayer::recommended).mean;
    } catch (const ValidationError&) {
      // all runs undefined on the recommended layer
    }
  }

  auto cells = store.cells();
  for (const auto& cell : cells) report.cell_keys.push_back(cell.key());

  auto maybe_ci = [&](JaccardEstimate& est,
                      const std::vector<std::pair<double, std::string>>& values) {
    std::set<std::string> distinct;
    for (const auto& [_, k] : values) distinct.insert(k);
    est.n_clusters = static_cast<long>(distinct.size());
    if (distinct.size() >= 2) {
      auto [lo, hi] = clustered_bootstrap(values, config.bootstrap_iterations,
                                          config.bootstrap_seed);
      est.ci_low = lo;
      est.ci_high = hi;
    }
  };

  // Rerun table + per-cell summary rows.
  double rerun_low = 1.0, rerun_high = 0.0;
  bool have_rerun = false;
  for (Signal signal : kAllSignals) {
    for (const auto& cell : cells) {
      RerunStability rs;
      try {
        rs = rerun_stability(store, cell, signal);
      } catch (const ValidationError&) {
        continue;
      }
      report.rerun_table[to_string(signal)][cell.key()] = rs.cell_mean;
      report.undefined_pairs_excluded += rs.excluded_undefined;
      if (signal == Signal::recommended_slot) {
        have_rerun = true;
        rerun_low = std::min(rerun_low, rs.cell_mean);
        rerun_high = std::max(rerun_high, rs.cell_mean);
        JaccardEstimate est;
        est.mean = rs.cell_mean;
        est.n_pairs = rs.n_pairs;
        est.n_prompt_units = static_cast<long>(rs.per_prompt.size());
        est.excluded_undefined = rs.excluded_undefined;
        std::vector<std::pair<double, std::string>> values;
        for (const auto& [prompt, v] : rs.per_prompt)
          values.emplace_back(v, cluster_of(prompt));
        maybe_ci(est, values);
        report.summary_rows.push_back(
            {"within_cell_rerun", Signal::recommended_slot, cell.key(), est});
      }
    }
  }
  if (have_rerun) report.rerun_range = {rerun_low, rerun_high};

  // Cross-provider anchors over every provider pair present.
  std::set<std::string> providers;
  for (const auto& cell : cells) providers.insert(cell.provider);
  std::vector<std::string> provider_list(providers.begin(), providers.end());
  for (std::size_t i = 0; i < provider_list.size(); ++i)
    for (std::size_t j = i + 1; j < provider_list.size(); ++j) {
      try {
        auto anchor = cross_provider_anchor(store, provider_list[i], provider_list[j],
                                            Signal::recommended_slot);
        JaccardEstimate est;
        est.mean = anchor.mean;
        est.n_pairs = anchor.n_pairs;
        est.n_prompt_units = static_cast<long>(anchor.per_prompt.size());
        est.excluded_undefined = anchor.excluded_undefined;
        std::vector<std::pair<double, std::string>> values;
        for (const auto& [prompt, v] : anchor.per_prompt)
          values.emplace_back(v, cluster_of(prompt));
        maybe_ci(est, values);
        report.summary_rows.push_back({"cross_provider_rerun", Signal::recommended_slot,
                                       provider_list[i] + "x" + provider_list[j], est});
        report.undefined_pairs_excluded += anchor.excluded_undefined;
      } catch (const ValidationError&) {
      }
    }

  // Within-provider effort pairings.
  for (const auto& provider : provider_list) {
    try {
      auto ed = effort_delta(store, provider, Signal::recommended_slot);
      JaccardEstimate est;
      est.mean = ed.pairing_jaccard;
      est.n_pairs = ed.n_pairing_pairs;
      est.excluded_undefined = ed.excluded_undefined;
      report.summary_rows.push_back(
          {"within_provider_effort_pairing", Signal::recommended_slot, provider, est});
      JaccardEstimate delta_est;
      delta_est.mean = ed.delta;
      report.summary_rows.push_back(
          {"effort_delta", Signal::recommended_slot, provider, delta_est});
      report.undefined_pairs_excluded += ed.excluded_undefined;
    } catch (const ValidationError&) {
    }
  }

  // Paraphrase pools and per-axis subsets.
  auto pool_row = [&](const std::string& name, const std::vector<PairSpec>& pairs)
      -> std::optional<JaccardEstimate> {
    if (pairs.empty()) return std::nullopt;
    PoolJaccard pool;
    try {
      pool = paraphrase_pool_jaccard(store, pairs, cells);
    } catch (const ValidationError&) {
      return std::nullopt;
    }
    JaccardEstimate est;
    est.mean = pool.pool_mean;
    est.n_pairs = pool.n_run_pairs;
    est.n_prompt_units = static_cast<long>(pool.per_base.size());
    est.excluded_undefined = pool.excluded_undefined;
    std::vector<std::pair<double, std::string>> values;
    for (const auto& [base, v] : pool.per_base) values.emplace_back(v, cluster_of(base));
    maybe_ci(est, values);
    report.summary_rows.push_back({name, Signal::recommended_slot, name, est});
    report.undefined_pairs_excluded += pool.excluded_undefined;
    return est;
  };

  auto cosmetic_est =
      pool_row("cosmetic_pool", enumerate_paraphrase_pairs(corpus, AxisClass::cosmetic));
  auto constraint_est = pool_row("constraint_adding_pool",
                                 enumerate_paraphrase_pairs(corpus, AxisClass::constraint_adding));
  auto all_pairs = enumerate_paraphrase_pairs(corpus);
  auto overall_est = pool_row("paraphrase_pool_all", all_pairs);
  for (ParaphraseAxis axis : kAllAxes) {
    std::vector<PairSpec> axis_pairs;
    for (const auto& p : all_pairs)
      if (p.axis == axis) axis_pairs.push_back(p);
    pool_row("axis_" + to_string(axis), axis_pairs);
  }

  if (!cosmetic_est && !constraint_est && !overall_est)
    report.notes.push_back("no paraphrase pairs with runs in the store; "
                           "paraphrase rows absent");

  // Verdict on the recommendation slot: the cosmetic pool is the primary
  // comparison, falling back to the overall paraphrase pool.
  auto paraphrase_est = cosmetic_est ? cosmetic_est : overall_est;
  if (report.rerun_range && paraphrase_est) {
    report.verdict_value = verdict(*report.rerun_range, *paraphrase_est);
    report.verdict_available = true;
  } else {
    report.notes.push_back("verdict indeterminate: rerun baseline or paraphrase "
                           "pool missing from the store");
  }

  report.notes.push_back("turnover figures are derived exactly as 1 - 2J/(1+J) "
                         "from the Jaccard mean; externally quoted turnover ranges "
                         "computed by other conventions will not match");
  return report;
}

// ---------------------------------------------------------------------------
// Artifact rendering. JSON is the master artifact; markdown and CSV render
// the same values with fixed 6-decimal formatting.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const AuditReport& r) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.summary_rows) {
    nlohmann::ordered_json j{
        {"name", row.name},
        {"signal", to_string(row.signal)},
        {"cell", row.cell_or_pool},
        {"mean", row.estimate.mean},
        {"ci_low", row.estimate.ci_low ? nlohmann::ordered_json(*row.estimate.ci_low)
                                       : nlohmann::ordered_json(nullptr)},
        {"ci_high", row.estimate.ci_high ? nlohmann::ordered_json(*row.estimate.ci_high)
                                         : nlohmann::ordered_json(nullptr)},
        {"n_pairs", row.estimate.n_pairs},
        {"n_prompt_units", row.estimate.n_prompt_units},
        {"n_clusters", row.estimate.n_clusters},
        {"excluded_undefined", row.estimate.excluded_undefined},
        {"turnover", turnover_from_jaccard(row.estimate.mean)},
    };
    rows.push_back(std::move(j));
  }
  nlohmann::ordered_json j{
      {"rerun_table", r.rerun_table},
      {"cell_keys", r.cell_keys},
      {"rerun_range_recommended_slot",
       r.rerun_range ? nlohmann::ordered_json({r.rerun_range->first, r.rerun_range->second})
                     : nlohmann::ordered_json(nullptr)},
      {"summary_rows", rows},
      {"verdict", r.verdict_available ? nlohmann::ordered_json(to_string(r.verdict_value))
                                      : nlohmann::ordered_json(nullptr)},
      {"diagnostics",
       {{"failed_runs", r.failed_runs},
        {"invalid_judgements", r.invalid_judgements},
        {"unextracted_runs", r.unextracted_runs},
        {"citation_url_errors", r.citation_url_errors},
        {"undefined_pairs_excluded", r.undefined_pairs_excluded},
        {"cross_judge_agreement_mentions",
         r.cross_judge_agreement_mentions
             ? nlohmann::ordered_json(*r.cross_judge_agreement_mentions)
             : nlohmann::ordered_json(nullptr)},
        {"cross_judge_agreement_recommended",
         r.cross_judge_agreement_recommended
             ? nlohmann::ordered_json(*r.cross_judge_agreement_recommended)
             : nlohmann::ordered_json(nullptr)},
        {"day_span_warning", r.day_span_warning},
        {"first_started", r.first_started},
        {"last_finished", r.last_finished},
        {"notes", r.notes}}},
      {"config",
       {{"bootstrap_seed", r.config.bootstrap_seed},
        {"bootstrap_iterations", r.config.bootstrap_iterations},
        {"store_path", r.config.store_path},
        {"corpus_path", r.config.corpus_path},
        {"stoplist_hash", r.config.stoplist_hash}}},
  };
  return j;
}

inline std::string report_to_csv(const AuditReport& r) {
  std::string out = "name,signal,cell,mean,ci_low,ci_high,n_pairs,n_clusters,excluded\n";
  for (const auto& row : r.summary_rows) {
    out += row.name + "," + to_string(row.signal) + "," + row.cell_or_pool + "," +
           detail::fmt(row.estimate.mean) + ",";
    out += (row.estimate.ci_low ? detail::fmt(*row.estimate.ci_low) : "") + std::string(",");
    out += (row.estimate.ci_high ? detail::fmt(*row.estimate.ci_high) : "") + std::string(",");
    out += std::to_string(row.estimate.n_pairs) + "," +
           std::to_string(row.estimate.n_clusters) + "," +
           std::to_string(row.estimate.excluded_undefined) + "\n";
  }
  return out;
}

inline std::string report_to_markdown(const AuditReport& r) {
  std::string md = "# Paraphrase stability audit\n\n## Rerun baseline\n\n";
  md += "| Signal |";
  for (const auto& key : r.cell_keys) md += " " + key + " |";
  md += "\n|---|";
  for (std::size_t i = 0; i < r.cell_keys.size(); ++i) md += "---|";
  md += "\n";
  for (Signal signal : kAllSignals) {
    md += "| " + to_string(signal) + " |";
    auto it = r.rerun_table.find(to_string(signal));
    for (const auto& key : r.cell_keys) {
      if (it != r.rerun_table.end() && it->second.contains(key))
        md += " " + detail::fmt(it->second.at(key)) + " |";
      else
        md += " - |";
    }
    md += "\n";
  }
  md += "\n## Summary\n\n";
  md += "| Condition | Signal | Cell/Pool | Mean | 95% CI | Turnover | Pairs |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& row : r.summary_rows) {
    std::string ci = row.estimate.ci_low && row.estimate.ci_high
                         ? "[" + detail::fmt(*row.estimate.ci_low) + ", " +
                               detail::fmt(*row.estimate.ci_high) + "]"
                         : "-";
    md += "| " + row.name + " | " + to_string(row.signal) + " | " + row.cell_or_pool +
          " | " + detail::fmt(row.estimate.mean) + " | " + ci + " | " +
          detail::fmt(turnover_from_jaccard(row.estimate.mean)) + " | " +
          std::to_string(row.estimate.n_pairs) + " |\n";
  }
  md += "\n## Verdict\n\n";
  md += r.verdict_available ? to_string(r.verdict_value) : std::string("unavailable");
  md += "\n\n## Diagnostics\n\n";
  md += "- failed runs excluded: " + std::to_string(r.failed_runs) + "\n";
  md += "- invalid judgements excluded: " + std::to_string(r.invalid_judgements) + "\n";
  md += "- unextracted runs: " + std::to_string(r.unextracted_runs) + "\n";
  md += "- citation URL errors: " + std::to_string(r.citation_url_errors) + "\n";
  md += "- undefined pairs excluded: " + std::to_string(r.undefined_pairs_excluded) + "\n";
  if (r.cross_judge_agreement_mentions)
    md += "- cross-judge agreement (mentions): " +
          detail::fmt(*r.cross_judge_agreement_mentions) + "\n";
  if (r.cross_judge_agreement_recommended)
    md += "- cross-judge agreement (recommended): " +
          detail::fmt(*r.cross_judge_agreement_recommended) + "\n";
  md += "- day-span warning: " + std::string(r.day_span_warning ? "yes" : "no") + "\n";
  md += "- bootstrap: " + std::to_string(r.config.bootstrap_iterations) +
        " iterations, seed " + std::to_string(r.config.bootstrap_seed) +
        ", percentile CI over (sector, family) cluster blocks\n";
  md += "- stoplist hash: " + std::to_string(r.config.stoplist_hash) + "\n";
  for (const auto& note : r.notes) md += "- note: " + note + "\n";
  return md;
}

inline void write_report_artifacts(const AuditReport& report, const std::string& dir,
                                   const std::set<std::string>& formats) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw ExecutionError("cannot write report artifact: " + dir + "/" + name);
    out << content;
  };
  if (formats.contains("json")) write("report.json", report_to_json(report).dump(2) + "\n");
  if (formats.contains("csv")) write("report.csv", report_to_csv(report));
  if (formats.contains("md")) write("report.md", report_to_markdown(report));
}

}  // namespace paraudit
