#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraudit/adapter.hpp"
#include "paraudit/detail/rng.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/run.hpp"

namespace paraudit {

using WeightedUrn = std::vector<std::pair<std::string, double>>;

// Per (surface form, cell) brand urn and retrieval-domain urn.
struct WorldSlot {
  WeightedUrn brands;
  int draw_count = 1;
  WeightedUrn domains;
  int cite_count = 0;
};

// Deterministic offline world: every completion is a pure function of
// (seed, surface form, cell, repeat index).
struct SyntheticWorldConfig {
  std::uint64_t seed = 0;
  double judge_disagreement_rate = 0.0;
  std::map<std::string, WorldSlot> slots;  // keyed by slot_key()

  static std::string slot_key(const std::string& surface_form_id, const ModelCell& cell) {
    return surface_form_id + "\x1f" + cell.key();
  }

  void add_slot(const std::string& surface_form_id, const ModelCell& cell, WorldSlot slot) {
    slots[slot_key(surface_form_id, cell)] = std::move(slot);
  }

  const WorldSlot& slot(const std::string& surface_form_id, const ModelCell& cell) const {
    auto it = slots.find(slot_key(surface_form_id, cell));
    if (it == slots.end())
      throw ValidationError("synthetic world has no entry for (" + surface_form_id +
                            ", " + cell.key() + ")");
    return it->second;
  }

  void validate() const {
    if (judge_disagreement_rate < 0.0 || judge_disagreement_rate > 1.0)
      throw ValidationError("judge_disagreement_rate must be in [0,1]");
    for (const auto& [key, slot] : slots) {
      if (slot.draw_count < 1)
        throw ValidationError("world slot '" + key + "': draw count must be >= 1");
      if (slot.brands.empty())
        throw ValidationError("world slot '" + key + "': empty brand urn");
      for (const auto& [name, w] : slot.brands)
        if (w <= 0.0)
          throw ValidationError("world slot '" + key + "': non-positive weight for " + name);
      for (const auto& [name, w] : slot.domains)
        if (w <= 0.0)
          throw ValidationError("world slot '" + key + "': non-positive weight for " + name);
    }
  }
};

namespace detail {

inline nlohmann::ordered_json urn_to_json(const WeightedUrn& urn) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [name, w] : urn) arr.push_back({name, w});
  return arr;
}

inline WeightedUrn urn_from_json(const nlohmann::json& arr) {
  WeightedUrn urn;
  for (const auto& e : arr)
    urn.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
  return urn;
}

}  // namespace detail

inline void save_world(const SyntheticWorldConfig& world, const std::string& path) {
  nlohmann::ordered_json j{{"seed", world.seed},
                           {"judge_disagreement_rate", world.judge_disagreement_rate},
                           {"entries", nlohmann::ordered_json::array()}};
  for (const auto& [key, slot] : world.slots) {
    auto sep = key.find('\x1f');
    nlohmann::ordered_json e{{"surface_form_id", key.substr(0, sep)},
                             {"cell", cell_to_json(parse_cell(key.substr(sep + 1)))},
                             {"brands", detail::urn_to_json(slot.brands)},
                             {"k", slot.draw_count},
                             {"domains", detail::urn_to_json(slot.domains)},
                             {"cite_count", slot.cite_count}};
    j["entries"].push_back(std::move(e));
  }
  std::ofstream out(path);
  if (!out) throw ExecutionError("cannot write world file: " + path);
  out << j.dump(2) << "\n";
}

inline SyntheticWorldConfig load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open world file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("world file " + path + ": " + e.what());
  }
  SyntheticWorldConfig world;
  world.seed = j.at("seed").get<std::uint64_t>();
  world.judge_disagreement_rate = j.value("judge_disagreement_rate", 0.0);
  for (const auto& e : j.at("entries")) {
    WorldSlot slot;
    slot.brands = detail::urn_from_json(e.at("brands"));
    slot.draw_count = e.at("k").get<int>();
    if (e.contains("domains")) slot.domains = detail::urn_from_json(e.at("domains"));
    slot.cite_count = e.value("cite_count", 0);
    world.add_slot(e.at("surface_form_id").get<std::string>(),
                   cell_from_json(e.at("cell")), std::move(slot));
  }
  world.validate();
  return world;
}

inline constexpr const char* kSyntheticEpoch = "1970-01-01T00:00:00.000Z";

// Pure completion function. Brands are drawn without replacement by weight;
// the completion embeds them in a fixed sentence template the template
// judge inverts exactly.
inline RunRecord synthetic_complete(const SyntheticWorldConfig& world,
                                    const std::string& surface_form_id,
                                    const ModelCell& cell, int repeat_index) {
  const WorldSlot& slot = world.slot(surface_form_id, cell);
  auto rng = detail::StreamRng(world.seed)
                 .mix(surface_form_id)
                 .mix(cell.key())
                 .mix(static_cast<std::uint64_t>(repeat_index))
                 .engine();
  auto brands = detail::weighted_sample_without_replacement(
      slot.brands, static_cast<std::size_t>(slot.draw_count), rng);
  auto domains = detail::weighted_sample_without_replacement(
      slot.domains, static_cast<std::size_t>(slot.cite_count), rng);

  RunRecord record;
  record.run_id = surface_form_id + ":" + cell.key() + ":r" + std::to_string(repeat_index);
  record.surface_form_id = surface_form_id;
  record.cell = cell;
  record.started_at = kSyntheticEpoch;
  record.finished_at = kSyntheticEpoch;
  std::string text = "Based on my research, I recommend: ";
  for (std::size_t i = 0; i < brands.size(); ++i) {
    if (i) text += ", ";
    text += brands[i];
  }
  text += ".";
  for (const auto& b : brands)
    text += " " + b + " is a solid option for this use case.";
  record.completion_text = std::move(text);
  for (const auto& d : domains) record.citations.push_back("https://" + d + "/");
  record.status = RunStatus::ok;
  record.provider_meta["adapter"] = "synthetic";
  return record;
}

class SyntheticAdapter : public ProviderAdapter {
 public:
  explicit SyntheticAdapter(SyntheticWorldConfig world) : world_(std::move(world)) {
    world_.validate();
  }

  RunRecord complete(const PlanEntry& entry) override {
    RunRecord r = synthetic_complete(world_, entry.surface_form_id, entry.cell,
                                     entry.repeat_index);
    r.run_id = entry.run_id;
    return r;
  }

  const SyntheticWorldConfig& world() const { return world_; }

 private:
  SyntheticWorldConfig world_;
};

}  // namespace paraudit
