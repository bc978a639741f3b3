#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "paraudit/adapter.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/model_cell.hpp"
#include "paraudit/synthetic.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("paraudit_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline paraudit::ModelCell cell(const std::string& provider, const std::string& model,
                                paraudit::ReasoningEffort effort) {
  return {provider, model, effort};
}

// n_bases base prompts, one variant per axis each (5 variants per base),
// sectors/families cycling so several bases share a cluster.
inline paraudit::Corpus make_grid_corpus(int n_bases) {
  paraudit::Corpus corpus;
  for (int i = 0; i < n_bases; ++i) {
    paraudit::BasePrompt base;
    base.id = "base-" + std::to_string(i);
    base.text = "best product " + std::to_string(i);
    base.sector = "sector-" + std::to_string(i % 3);
    base.family = "family-" + std::to_string(i % 4);
    corpus.bases.push_back(base);
    int v = 0;
    for (paraudit::ParaphraseAxis axis : paraudit::kAllAxes) {
      paraudit::ParaphraseVariant variant;
      variant.id = base.id + "-v" + std::to_string(v++);
      variant.base_id = base.id;
      variant.axis = axis;
      variant.text = base.text + " variant " + paraudit::to_string(axis);
      if (axis == paraudit::ParaphraseAxis::specificity_ladder) variant.ladder_rung = 1;
      corpus.variants.push_back(variant);
    }
  }
  return corpus;
}

// Same uniform urn for every (surface, cell) slot.
inline paraudit::SyntheticWorldConfig make_uniform_world(
    std::uint64_t seed, const std::vector<std::string>& surfaces,
    const std::vector<paraudit::ModelCell>& cells,
    const std::vector<std::string>& brands, int k, double disagreement = 0.0) {
  paraudit::SyntheticWorldConfig world;
  world.seed = seed;
  world.judge_disagreement_rate = disagreement;
  paraudit::WorldSlot slot;
  for (const auto& b : brands) slot.brands.emplace_back(b, 1.0);
  slot.draw_count = k;
  slot.domains = {{"example.com", 1.0}, {"review-site.co.uk", 1.0}};
  slot.cite_count = 1;
  for (const auto& s : surfaces)
    for (const auto& c : cells) world.add_slot(s, c, slot);
  return world;
}

// Counts adapter invocations; used to assert resume behavior.
class CountingAdapter : public paraudit::ProviderAdapter {
 public:
  explicit CountingAdapter(paraudit::ProviderAdapter& inner) : inner_(inner) {}
  paraudit::RunRecord complete(const paraudit::PlanEntry& entry) override {
    ++calls_;
    return inner_.complete(entry);
  }
  int calls() const { return calls_; }

 private:
  paraudit::ProviderAdapter& inner_;
  int calls_ = 0;
};

}  // namespace testutil
