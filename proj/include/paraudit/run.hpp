#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraudit/errors.hpp"
#include "paraudit/model_cell.hpp"

namespace paraudit {

enum class PlanKind { rerun_baseline, paraphrase_grid };

inline std::string to_string(PlanKind k) {
  return k == PlanKind::rerun_baseline ? "rerun_baseline" : "paraphrase_grid";
}

inline PlanKind plan_kind_from_string(const std::string& s) {
  if (s == "rerun_baseline") return PlanKind::rerun_baseline;
  if (s == "paraphrase_grid") return PlanKind::paraphrase_grid;
  throw ParseError("unknown plan kind: " + s);
}

struct PlanEntry {
  std::string run_id;
  std::string surface_form_id;
  ModelCell cell;
  int repeat_index = 0;
};

struct RunPlan {
  PlanKind plan_kind = PlanKind::rerun_baseline;
  std::vector<PlanEntry> entries;
  std::vector<std::string> warnings;
};

enum class RunStatus { ok, failed };

struct RunRecord {
  std::string run_id;
  std::string surface_form_id;
  ModelCell cell;
  std::string started_at;
  std::string finished_at;
  std::string completion_text;
  std::vector<std::string> citations;
  RunStatus status = RunStatus::ok;
  std::string failure_reason;  // set iff status == failed
  std::map<std::string, std::string> provider_meta;

  // Everything except the wall-clock fields; resumability compares on this.
  bool same_payload(const RunRecord& other) const {
    return run_id == other.run_id && surface_form_id == other.surface_form_id &&
           cell == other.cell && completion_text == other.completion_text &&
           citations == other.citations && status == other.status &&
           failure_reason == other.failure_reason;
  }
};

inline nlohmann::ordered_json cell_to_json(const ModelCell& cell) {
  return {{"provider", cell.provider},
          {"model", cell.model},
          {"effort", to_string(cell.effort)}};
}

inline ModelCell cell_from_json(const nlohmann::json& j) {
  ModelCell cell;
  cell.provider = j.at("provider").get<std::string>();
  cell.model = j.at("model").get<std::string>();
  cell.effort = effort_from_string(j.at("effort").get<std::string>());
  return cell;
}

inline nlohmann::ordered_json record_to_json(const RunRecord& r) {
  nlohmann::ordered_json j{
      {"run_id", r.run_id},
      {"surface_form_id", r.surface_form_id},
      {"cell", cell_to_json(r.cell)},
      {"started_at", r.started_at},
      {"finished_at", r.finished_at},
      {"completion_text", r.completion_text},
      {"citations", r.citations},
      {"status", r.status == RunStatus::ok ? "ok" : "failed"},
  };
  if (r.status == RunStatus::failed) j["failure_reason"] = r.failure_reason;
  j["provider_meta"] = r.provider_meta;
  return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.surface_form_id = j.at("surface_form_id").get<std::string>();
  r.cell = cell_from_json(j.at("cell"));
  r.started_at = j.value("started_at", "");
  r.finished_at = j.value("finished_at", "");
  r.completion_text = j.value("completion_text", "");
  if (j.contains("citations")) r.citations = j.at("citations").get<std::vector<std::string>>();
  std::string status = j.value("status", "ok");
  r.status = status == "ok" ? RunStatus::ok : RunStatus::failed;
  r.failure_reason = j.value("failure_reason", "");
  if (j.contains("provider_meta"))
    r.provider_meta = j.at("provider_meta").get<std::map<std::string, std::string>>();
  if (r.status == RunStatus::ok && r.completion_text.empty())
    throw ValidationError("run '" + r.run_id + "': ok status with empty completion");
  return r;
}

inline void save_plan(const RunPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ExecutionError("cannot write plan file: " + path);
  nlohmann::ordered_json header{{"kind", "plan"},
                                {"plan_kind", to_string(plan.plan_kind)},
                                {"warnings", plan.warnings}};
  out << header.dump() << "\n";
  for (const auto& e : plan.entries) {
    nlohmann::ordered_json j{{"run_id", e.run_id},
                             {"surface_form_id", e.surface_form_id},
                             {"cell", cell_to_json(e.cell)},
                             {"repeat_index", e.repeat_index}};
    out << j.dump() << "\n";
  }
}

inline RunPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file: " + path);
  RunPlan plan;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (!header_seen) {
      if (j.value("kind", "") != "plan") throw ParseError("plan file missing header line");
      plan.plan_kind = plan_kind_from_string(j.at("plan_kind").get<std::string>());
      if (j.contains("warnings"))
        plan.warnings = j.at("warnings").get<std::vector<std::string>>();
      header_seen = true;
      continue;
    }
    PlanEntry e;
    e.run_id = j.at("run_id").get<std::string>();
    e.surface_form_id = j.at("surface_form_id").get<std::string>();
    e.cell = cell_from_json(j.at("cell"));
    e.repeat_index = j.at("repeat_index").get<int>();
    plan.entries.push_back(std::move(e));
  }
  if (!header_seen) throw ParseError("empty plan file: " + path);
  return plan;
}

// Append-only newline-delimited JSON store of RunRecords. Single-writer:
// the orchestrator serializes appends through one instance.
class RunStore {
 public:
  explicit RunStore(std::string path) : path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  std::vector<RunRecord> load() const {
    std::vector<RunRecord> records;
    std::ifstream in(path_);
    if (!in) return records;  // absent store reads as empty
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        records.push_back(record_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path_ + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return records;
  }

  std::set<std::string> run_ids() const {
    std::set<std::string> ids;
    for (const auto& r : load()) ids.insert(r.run_id);
    return ids;
  }

  void append(const RunRecord& record) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ExecutionError("cannot append to run store: " + path_);
    out << record_to_json(record).dump() << "\n";
    out.flush();
    if (!out) throw ExecutionError("write failed on run store: " + path_);
  }

 private:
  std::string path_;
};

inline std::string iso8601_now() {
  using namespace std::chrono;
  auto now = system_clock::now();
  auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
  std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms.count()));
  return buf;
}

}  // namespace paraudit
