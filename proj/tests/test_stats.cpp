#include <doctest.h>

#include <cmath>
#include <random>

#include "paraudit/stats.hpp"
#include "test_util.hpp"

using namespace paraudit;

namespace {

AnalysisRun make_run(const std::string& surface, const ModelCell& cell, int idx,
                     std::set<std::string> recommended) {
  AnalysisRun r;
  r.run_id = surface + ":" + cell.key() + ":r" + std::to_string(idx);
  r.surface_form_id = surface;
  r.cell = cell;
  r.mentions = recommended;
  r.recommended = std::move(recommended);
  return r;
}

const ModelCell kCellA = {"openai", "mini", ReasoningEffort::low};
const ModelCell kCellAHigh = {"openai", "mini", ReasoningEffort::high};
const ModelCell kCellB = {"anthropic", "sonnet", ReasoningEffort::low};

}  // namespace

TEST_CASE("jaccard basics") {
  CHECK(*jaccard({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / 3.0));
  CHECK(*jaccard({"a", "b"}, {"a", "b"}) == doctest::Approx(1.0));
  CHECK(*jaccard({"a"}, {}) == doctest::Approx(0.0));
  CHECK_FALSE(jaccard({}, {}).has_value());
}

TEST_CASE("jaccard matches a brute-force counting oracle on a 6-element universe") {
  const std::vector<std::string> universe = {"u0", "u1", "u2", "u3", "u4", "u5"};
  for (unsigned ma = 0; ma < 64; ++ma) {
    for (unsigned mb = 0; mb < 64; ++mb) {
      std::set<std::string> a, b;
      for (int i = 0; i < 6; ++i) {
        if (ma & (1u << i)) a.insert(universe[i]);
        if (mb & (1u << i)) b.insert(universe[i]);
      }
      // oracle: count membership element by element
      int inter = 0, uni = 0;
      for (const auto& u : universe) {
        bool ina = a.contains(u), inb = b.contains(u);
        inter += ina && inb;
        uni += ina || inb;
      }
      auto v = jaccard(a, b);
      if (uni == 0) {
        CHECK_FALSE(v.has_value());
      } else {
        CHECK(*v == static_cast<double>(inter) / uni);
        // symmetry and bounds
        CHECK(*jaccard(b, a) == *v);
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
      }
    }
  }
}

TEST_CASE("wilson interval half-widths") {
  auto [lo1, hi1] = wilson_interval(15, 30);
  double half1 = (hi1 - lo1) / 2.0;
  CHECK(half1 >= 0.166);
  CHECK(half1 <= 0.170);
  auto [lo2, hi2] = wilson_interval(10, 20);
  double half2 = (hi2 - lo2) / 2.0;
  CHECK(half2 >= 0.199);
  CHECK(half2 <= 0.203);
  auto [lo3, hi3] = wilson_interval(0, 10);
  CHECK(lo3 == 0.0);
  CHECK(hi3 > 0.0);
  auto [lo4, hi4] = wilson_interval(10, 10);
  CHECK(hi4 == 1.0);
  CHECK_THROWS_AS(wilson_interval(1, 0), ValidationError);
  CHECK_THROWS_AS(wilson_interval(5, 3), ValidationError);
  CHECK_THROWS_AS(wilson_interval(-1, 3), ValidationError);
}

TEST_CASE("overlap and turnover conversions") {
  CHECK(overlap_from_jaccard(0.288) == doctest::Approx(0.447).epsilon(0.003));
  CHECK(turnover_from_jaccard(0.288) == doctest::Approx(0.553).epsilon(0.003));
  CHECK(overlap_from_jaccard(0.135) == doctest::Approx(0.238).epsilon(0.005));
  CHECK(turnover_from_jaccard(0.135) == doctest::Approx(0.762).epsilon(0.003));
  CHECK(overlap_from_jaccard(1.0) == doctest::Approx(1.0));
  CHECK(turnover_from_jaccard(1.0) == doctest::Approx(0.0));
  CHECK(overlap_from_jaccard(0.0) == doctest::Approx(0.0));
  // identity and monotonicity over a grid
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    double j = i / 1000.0;
    CHECK(std::abs(overlap_from_jaccard(j) + turnover_from_jaccard(j) - 1.0) < 1e-12);
    CHECK(overlap_from_jaccard(j) > prev);
    prev = overlap_from_jaccard(j);
  }
}

TEST_CASE("clustered bootstrap: degenerate distribution collapses the CI") {
  std::vector<std::pair<double, std::string>> values;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 3; ++i) values.emplace_back(0.4, "c" + std::to_string(c));
  auto [lo, hi] = clustered_bootstrap(values, 1000, 1);
  CHECK(lo == doctest::Approx(0.4));
  CHECK(hi == doctest::Approx(0.4));
}

TEST_CASE("clustered bootstrap is deterministic for a fixed seed") {
  std::vector<std::pair<double, std::string>> values = {
      {0.1, "a"}, {0.2, "a"}, {0.5, "b"}, {0.9, "c"}, {0.3, "c"}};
  auto ci1 = clustered_bootstrap(values, 1000, 99);
  auto ci2 = clustered_bootstrap(values, 1000, 99);
  CHECK(ci1.first == ci2.first);
  CHECK(ci1.second == ci2.second);
  CHECK_THROWS_AS(clustered_bootstrap({{0.1, "only"}}, 100, 1), ValidationError);
}

TEST_CASE("clustered bootstrap {0,0,1}: percentiles match the exhaustive resample law") {
  std::vector<std::pair<double, std::string>> values = {{0.0, "a"}, {0.0, "b"}, {1.0, "c"}};
  auto [lo, hi] = clustered_bootstrap(values, 20000, 5);
  // exhaustive law over the 27 equiprobable cluster multisets
  std::vector<double> exhaustive;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        exhaustive.push_back(((i == 2) + (j == 2) + (k == 2)) / 3.0);
  std::sort(exhaustive.begin(), exhaustive.end());
  double exp_lo = percentile_nearest_rank(exhaustive, 0.025);
  double exp_hi = percentile_nearest_rank(exhaustive, 0.975);
  CHECK(std::abs(lo - exp_lo) <= 0.02);
  CHECK(std::abs(hi - exp_hi) <= 0.02);
}

TEST_CASE("rerun stability pools per prompt then unweighted across prompts") {
  AnalysisStore store;
  // prompt p1: alternating sets {x,y} and {y,z}: every cross pair J=1/3, same pair 1
  store.runs.push_back(make_run("p1", kCellA, 0, {"x", "y"}));
  store.runs.push_back(make_run("p1", kCellA, 1, {"y", "z"}));
  // prompt p2: identical sets -> per-prompt mean 1.0
  for (int i = 0; i < 10; ++i) store.runs.push_back(make_run("p2", kCellA, i, {"w"}));
  auto rs = rerun_stability(store, kCellA, Signal::recommended_slot);
  CHECK(rs.per_prompt.at("p1") == doctest::Approx(1.0 / 3.0));
  CHECK(rs.per_prompt.at("p2") == doctest::Approx(1.0));
  // unweighted prompt mean despite p2 contributing C(10,2)=45 pairs vs 1
  CHECK(rs.cell_mean == doctest::Approx((1.0 / 3.0 + 1.0) / 2.0));
  CHECK(rs.n_pairs == 1 + 45);
}

TEST_CASE("rerun stability: duplicating a prompt's identical runs leaves the cell mean") {
  AnalysisStore store;
  store.runs.push_back(make_run("p1", kCellA, 0, {"x"}));
  store.runs.push_back(make_run("p1", kCellA, 1, {"y"}));
  for (int i = 0; i < 2; ++i) store.runs.push_back(make_run("p2", kCellA, i, {"w"}));
  double before = rerun_stability(store, kCellA, Signal::recommended_slot).cell_mean;
  for (int i = 2; i < 6; ++i) store.runs.push_back(make_run("p2", kCellA, i, {"w"}));
  double after = rerun_stability(store, kCellA, Signal::recommended_slot).cell_mean;
  CHECK(before == doctest::Approx(after));
}

TEST_CASE("rerun stability errors when no prompt has two runs") {
  AnalysisStore store;
  store.runs.push_back(make_run("p1", kCellA, 0, {"x"}));
  CHECK_THROWS_AS(rerun_stability(store, kCellA, Signal::recommended_slot), ValidationError);
}

TEST_CASE("pair enumeration counts match closed forms") {
  AnalysisStore store;
  const int prompts = 3, n = 30;
  for (int p = 0; p < prompts; ++p)
    for (int i = 0; i < n; ++i)
      store.runs.push_back(make_run("p" + std::to_string(p), kCellA, i,
                                    {"b" + std::to_string(i % 4)}));
  auto rs = rerun_stability(store, kCellA, Signal::recommended_slot);
  CHECK(rs.n_pairs == prompts * (n * (n - 1) / 2));
  CHECK(rs.per_prompt.size() == prompts);
}

TEST_CASE("paraphrase pool jaccard on degenerate worlds") {
  Corpus corpus;
  corpus.bases.push_back({"b1", "best CRM", "saas", "crm", std::nullopt});
  ParaphraseVariant v;
  v.id = "b1-v0";
  v.base_id = "b1";
  v.axis = ParaphraseAxis::synonym_swap;
  v.text = "top CRM";
  corpus.variants.push_back(v);
  auto pairs = enumerate_paraphrase_pairs(corpus);
  REQUIRE(pairs.size() == 1);

  SUBCASE("identical deterministic outputs give 1.0") {
    AnalysisStore store;
    for (int i = 0; i < 3; ++i) {
      store.runs.push_back(make_run("b1", kCellA, i, {"x", "y"}));
      store.runs.push_back(make_run("b1-v0", kCellA, i, {"x", "y"}));
    }
    auto pool = paraphrase_pool_jaccard(store, pairs, {kCellA});
    CHECK(pool.pool_mean == doctest::Approx(1.0));
    CHECK(pool.n_run_pairs == 9);  // n_a * n_b
  }
  SUBCASE("disjoint supports give 0.0") {
    AnalysisStore store;
    for (int i = 0; i < 2; ++i) {
      store.runs.push_back(make_run("b1", kCellA, i, {"x"}));
      store.runs.push_back(make_run("b1-v0", kCellA, i, {"z"}));
    }
    auto pool = paraphrase_pool_jaccard(store, pairs, {kCellA});
    CHECK(pool.pool_mean == doctest::Approx(0.0));
  }
  SUBCASE("empty pair list errors") {
    AnalysisStore store;
    CHECK_THROWS_AS(paraphrase_pool_jaccard(store, {}, {kCellA}), ValidationError);
  }
}

TEST_CASE("cross-provider anchor") {
  SUBCASE("indistinguishable degenerate providers equal the within-cell mean") {
    AnalysisStore store;
    for (int i = 0; i < 3; ++i) {
      store.runs.push_back(make_run("p1", kCellA, i, {"x"}));
      store.runs.push_back(make_run("p1", kCellB, i, {"x"}));
    }
    auto anchor = cross_provider_anchor(store, "openai", "anthropic",
                                        Signal::recommended_slot);
    auto rs = rerun_stability(store, kCellA, Signal::recommended_slot);
    CHECK(anchor.mean == doctest::Approx(rs.cell_mean));
    CHECK(anchor.n_pairs == 9);
  }
  SUBCASE("disjoint per-provider supports give 0") {
    AnalysisStore store;
    for (int i = 0; i < 2; ++i) {
      store.runs.push_back(make_run("p1", kCellA, i, {"x"}));
      store.runs.push_back(make_run("p1", kCellB, i, {"z"}));
    }
    CHECK(cross_provider_anchor(store, "openai", "anthropic", Signal::recommended_slot)
              .mean == doctest::Approx(0.0));
  }
  SUBCASE("no shared prompt errors") {
    AnalysisStore store;
    store.runs.push_back(make_run("p1", kCellA, 0, {"x"}));
    store.runs.push_back(make_run("p2", kCellB, 0, {"x"}));
    CHECK_THROWS_AS(
        cross_provider_anchor(store, "openai", "anthropic", Signal::recommended_slot),
        ValidationError);
  }
}

TEST_CASE("effort delta") {
  SUBCASE("identical effort worlds: zero delta, pairing equals within-cell mean") {
    AnalysisStore store;
    for (int i = 0; i < 3; ++i) {
      store.runs.push_back(make_run("p1", kCellA, i, {"x"}));
      store.runs.push_back(make_run("p1", kCellAHigh, i, {"x"}));
    }
    auto ed = effort_delta(store, "openai", Signal::recommended_slot);
    CHECK(ed.delta == doctest::Approx(0.0));
    auto rs = rerun_stability(store, kCellA, Signal::recommended_slot);
    CHECK(ed.pairing_jaccard == doctest::Approx(rs.cell_mean));
  }
  SUBCASE("missing effort cell errors") {
    AnalysisStore store;
    for (int i = 0; i < 2; ++i) store.runs.push_back(make_run("p1", kCellA, i, {"x"}));
    CHECK_THROWS_AS(effort_delta(store, "openai", Signal::recommended_slot),
                    ValidationError);
  }
}

TEST_CASE("percentile uses the nearest-rank convention") {
  std::vector<double> sorted = {1, 2, 3, 4};
  CHECK(percentile_nearest_rank(sorted, 0.025) == 1);
  CHECK(percentile_nearest_rank(sorted, 0.5) == 2);
  CHECK(percentile_nearest_rank(sorted, 0.75) == 3);
  CHECK(percentile_nearest_rank(sorted, 0.975) == 4);
  CHECK(percentile_nearest_rank(sorted, 1.0) == 4);
}
