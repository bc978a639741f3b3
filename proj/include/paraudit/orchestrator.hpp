#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "paraudit/adapter.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/run.hpp"

namespace paraudit {

namespace detail {

inline std::string make_run_id(const std::string& surface_form_id, const ModelCell& cell,
                               int repeat_index) {
  return surface_form_id + ":" + cell.key() + ":r" + std::to_string(repeat_index);
}

// Prompts outer, repeats middle, cells inner: consecutive entries differ in
// cell whenever more than one cell is planned.
inline void append_interleaved(RunPlan& plan, const std::vector<std::string>& surfaces,
                               const std::vector<ModelCell>& cells, int n) {
  for (const auto& surface : surfaces)
    for (int r = 0; r < n; ++r)
      for (const auto& cell : cells)
        plan.entries.push_back({make_run_id(surface, cell, r), surface, cell, r});
}

inline void check_plan_inputs(std::size_t n_surfaces, const std::vector<ModelCell>& cells,
                              int n) {
  if (n < 2) throw ValidationError("n must be >= 2: a single run yields no pairs");
  if (n_surfaces == 0) throw ValidationError("no surface forms to plan");
  if (cells.empty()) throw ValidationError("no model cells to plan");
  std::set<std::string> keys;
  for (const auto& c : cells)
    if (!keys.insert(c.key()).second)
      throw ValidationError("duplicate model cell in plan: " + c.key());
}

}  // namespace detail

inline RunPlan build_rerun_plan(const std::vector<std::string>& surface_forms,
                                const std::vector<ModelCell>& cells, int n) {
  detail::check_plan_inputs(surface_forms.size(), cells, n);
  RunPlan plan;
  plan.plan_kind = PlanKind::rerun_baseline;
  plan.entries.reserve(surface_forms.size() * cells.size() * static_cast<std::size_t>(n));
  detail::append_interleaved(plan, surface_forms, cells, n);
  return plan;
}

inline RunPlan build_paraphrase_plan(const Corpus& corpus,
                                     const std::vector<ModelCell>& cells, int n) {
  auto surfaces = corpus.surface_form_ids();
  detail::check_plan_inputs(surfaces.size(), cells, n);
  RunPlan plan;
  plan.plan_kind = PlanKind::paraphrase_grid;
  for (const auto& cell : cells)
    if (cell.effort == ReasoningEffort::high && cell.model.find("sonnet") != std::string::npos)
      plan.warnings.push_back("paraphrase grid includes " + cell.key() +
                              "; the reference grid omits sonnet/high");
  plan.entries.reserve(surfaces.size() * cells.size() * static_cast<std::size_t>(n));
  detail::append_interleaved(plan, surfaces, cells, n);
  return plan;
}

struct ExecutionConfig {
  int max_in_flight_per_provider = 4;
  int max_attempts = 5;
  std::chrono::milliseconds backoff_initial{1000};
  std::chrono::milliseconds backoff_max{60000};
};

struct ExecutionSummary {
  int ok = 0;
  int failed = 0;
  int skipped = 0;
};

// Executes every plan entry not already present in the store. Workers are
// partitioned per provider so in-flight requests per provider never exceed
// the configured bound; completed records pass through a single store
// writer. Transient adapter errors are retried with exponential backoff up
// to max_attempts, then recorded as failed.
inline ExecutionSummary execute_plan(const RunPlan& plan, ProviderAdapter& adapter,
                                     RunStore& store,
                                     const ExecutionConfig& config = {}) {
  std::set<std::string> done = store.run_ids();
  std::map<std::string, std::vector<const PlanEntry*>> per_provider;
  ExecutionSummary summary;
  for (const auto& e : plan.entries) {
    if (done.contains(e.run_id)) {
      ++summary.skipped;
      continue;
    }
    per_provider[e.cell.provider].push_back(&e);
  }

  std::mutex write_mutex;
  std::atomic<bool> aborted{false};
  std::exception_ptr abort_error;

  auto run_entry = [&](const PlanEntry& entry) {
    int attempts = 0;
    std::chrono::milliseconds backoff = config.backoff_initial;
    std::string started = iso8601_now();
    while (true) {
      ++attempts;
      try {
        RunRecord record = adapter.complete(entry);
        record.run_id = entry.run_id;
        if (record.started_at.empty()) record.started_at = started;
        if (record.finished_at.empty()) record.finished_at = iso8601_now();
        record.provider_meta["attempts"] = std::to_string(attempts);
        return record;
      } catch (const TransientAdapterError& e) {
        if (attempts >= config.max_attempts) {
          RunRecord record;
          record.run_id = entry.run_id;
          record.surface_form_id = entry.surface_form_id;
          record.cell = entry.cell;
          record.started_at = started;
          record.finished_at = iso8601_now();
          record.status = RunStatus::failed;
          record.failure_reason = e.what();
          record.provider_meta["attempts"] = std::to_string(attempts);
          return record;
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, config.backoff_max);
      } catch (const std::exception& e) {
        RunRecord record;
        record.run_id = entry.run_id;
        record.surface_form_id = entry.surface_form_id;
        record.cell = entry.cell;
        record.started_at = started;
        record.finished_at = iso8601_now();
        record.status = RunStatus::failed;
        record.failure_reason = e.what();
        record.provider_meta["attempts"] = std::to_string(attempts);
        return record;
      }
    }
  };

  std::vector<std::thread> workers;
  for (auto& [provider, entries] : per_provider) {
    std::size_t n_workers = std::min<std::size_t>(
        entries.size(), static_cast<std::size_t>(std::max(1, config.max_in_flight_per_provider)));
    auto next = std::make_shared<std::atomic<std::size_t>>(0);
    auto* entry_list = &entries;
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, entry_list, next]() {
        while (!aborted.load()) {
          std::size_t i = next->fetch_add(1);
          if (i >= entry_list->size()) break;
          RunRecord record = run_entry(*(*entry_list)[i]);
          std::lock_guard<std::mutex> lock(write_mutex);
          if (aborted.load()) break;
          try {
            store.append(record);
          } catch (...) {
            abort_error = std::current_exception();
            aborted.store(true);
            break;
          }
          if (record.status == RunStatus::ok)
            ++summary.ok;
          else
            ++summary.failed;
        }
      });
    }
  }
  for (auto& t : workers) t.join();
  if (abort_error) std::rethrow_exception(abort_error);
  return summary;
}

}  // namespace paraudit
