// paraudit: paraphrase-stability audit pipeline.
//
// Subcommands drive the pipeline stages over a shared append-only run store:
//   corpus validate -> plan rerun|paraphrase -> run -> extract -> analyze -> report
//
// Exit codes: 0 success, 1 validation/parse error, 2 execution error.

#include <cstdint>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paraudit/canonicalize.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/extraction.hpp"
#include "paraudit/live_adapters.hpp"
#include "paraudit/orchestrator.hpp"
#include "paraudit/report.hpp"
#include "paraudit/run.hpp"
#include "paraudit/stats.hpp"
#include "paraudit/synthetic.hpp"

namespace {

using namespace paraudit;

std::vector<ModelCell> parse_cells(const std::vector<std::string>& specs) {
  std::vector<ModelCell> cells;
  for (const auto& s : specs) cells.push_back(parse_cell(s));
  return cells;
}

BrandNormalizer make_normalizer(const std::string& stoplist_path,
                                const std::string& allowlist_path) {
  auto stoplist = stoplist_path.empty() ? default_stoplist() : load_token_file(stoplist_path);
  auto allowlist = allowlist_path.empty() ? default_short_brand_allowlist()
                                          : load_token_file(allowlist_path);
  return BrandNormalizer(std::move(stoplist), std::move(allowlist));
}

PublicSuffixList make_psl(const std::string& psl_path) {
  return psl_path.empty() ? PublicSuffixList() : PublicSuffixList::from_file(psl_path);
}

struct CommonAnalysisArgs {
  std::string store_path;
  std::string extractions_path;
  std::string corpus_path;
  std::string stoplist_path;
  std::string allowlist_path;
  std::string psl_path;
  int iterations = 1000;
  std::uint64_t seed = 0;
};

AuditReport build_report(const CommonAnalysisArgs& args) {
  Corpus corpus = load_corpus(args.corpus_path, /*require_variants=*/false);
  RunStore store(args.store_path);
  auto records = store.load();
  ExtractionBatch extractions = load_extractions(args.extractions_path);
  ReportConfig config;
  config.bootstrap_seed = args.seed;
  config.bootstrap_iterations = args.iterations;
  config.store_path = args.store_path;
  config.corpus_path = args.corpus_path;
  config.stoplist_hash =
      make_normalizer(args.stoplist_path, args.allowlist_path).stoplist_hash();
  return render_report(records, extractions, corpus, make_psl(args.psl_path), config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paraphrase-stability audit harness"};
  app.require_subcommand(1);

  // corpus validate
  auto* corpus_cmd = app.add_subcommand("corpus", "corpus utilities");
  corpus_cmd->require_subcommand(1);
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "validate a corpus file");
  std::string corpus_path;
  bool allow_missing_variants = false;
  validate_cmd->add_option("--corpus", corpus_path, "corpus NDJSON file")->required();
  validate_cmd->add_flag("--allow-missing-variants", allow_missing_variants,
                         "accept bases with no paraphrase variants (rerun prompt lists)");

  // plan rerun | plan paraphrase
  auto* plan_cmd = app.add_subcommand("plan", "build a run plan");
  plan_cmd->require_subcommand(1);
  std::string plan_corpus, plan_out, plan_surfaces = "bases";
  std::vector<std::string> cell_specs;
  int plan_n = 30;
  auto* rerun_cmd = plan_cmd->add_subcommand("rerun", "same-prompt rerun baseline plan");
  rerun_cmd->add_option("--corpus", plan_corpus)->required();
  rerun_cmd->add_option("--cell", cell_specs, "provider/model/effort (repeatable)")
      ->required();
  rerun_cmd->add_option("--n", plan_n, "repeats per (prompt, cell)");
  rerun_cmd->add_option("--out", plan_out)->required();
  rerun_cmd->add_option("--surfaces", plan_surfaces, "bases|all");
  auto* para_cmd = plan_cmd->add_subcommand("paraphrase", "paraphrase grid plan");
  para_cmd->add_option("--corpus", plan_corpus)->required();
  para_cmd->add_option("--cell", cell_specs)->required();
  para_cmd->add_option("--n", plan_n);
  para_cmd->add_option("--out", plan_out)->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "execute a plan against an adapter");
  std::string run_plan_path, run_store_path, run_adapter = "synthetic";
  std::string run_world_path, run_config_path, run_corpus_path;
  int run_concurrency = 4;
  run_cmd->add_option("--plan", run_plan_path)->required();
  run_cmd->add_option("--store", run_store_path)->required();
  run_cmd->add_option("--adapter", run_adapter, "synthetic|openai|anthropic|live");
  run_cmd->add_option("--world", run_world_path, "synthetic world config JSON");
  run_cmd->add_option("--config", run_config_path, "live adapter config JSON");
  run_cmd->add_option("--corpus", run_corpus_path, "corpus for live prompt texts");
  run_cmd->add_option("--concurrency", run_concurrency, "max in-flight per provider");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "judge completions and intersect");
  std::string ex_store, ex_out, ex_judges = "synthetic", ex_world, ex_config;
  std::string ex_stoplist, ex_allowlist;
  double ex_disagreement = -1.0;
  std::uint64_t ex_seed = 0;
  extract_cmd->add_option("--store", ex_store)->required();
  extract_cmd->add_option("--out", ex_out)->required();
  extract_cmd->add_option("--judges", ex_judges, "synthetic|live");
  extract_cmd->add_option("--world", ex_world, "world file (disagreement rate + seed)");
  extract_cmd->add_option("--disagreement", ex_disagreement, "override disagreement rate");
  extract_cmd->add_option("--seed", ex_seed, "judge seed (synthetic judges)");
  extract_cmd->add_option("--config", ex_config, "live judge config JSON");
  extract_cmd->add_option("--stoplist", ex_stoplist);
  extract_cmd->add_option("--allowlist", ex_allowlist);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "compute statistics JSON");
  CommonAnalysisArgs an;
  std::string an_out;
  analyze_cmd->add_option("--store", an.store_path)->required();
  analyze_cmd->add_option("--extractions", an.extractions_path)->required();
  analyze_cmd->add_option("--corpus", an.corpus_path)->required();
  analyze_cmd->add_option("--out", an_out)->required();
  analyze_cmd->add_option("--iterations", an.iterations);
  analyze_cmd->add_option("--seed", an.seed);
  analyze_cmd->add_option("--stoplist", an.stoplist_path);
  analyze_cmd->add_option("--allowlist", an.allowlist_path);
  analyze_cmd->add_option("--psl", an.psl_path);

  // report
  auto* report_cmd = app.add_subcommand("report", "render report artifacts");
  CommonAnalysisArgs rp;
  std::string rp_out_dir;
  std::vector<std::string> rp_formats{"md", "csv", "json"};
  report_cmd->add_option("--store", rp.store_path)->required();
  report_cmd->add_option("--extractions", rp.extractions_path)->required();
  report_cmd->add_option("--corpus", rp.corpus_path)->required();
  report_cmd->add_option("--out-dir", rp_out_dir)->required();
  report_cmd->add_option("--format", rp_formats, "md|csv|json (repeatable)");
  report_cmd->add_option("--iterations", rp.iterations);
  report_cmd->add_option("--seed", rp.seed);
  report_cmd->add_option("--stoplist", rp.stoplist_path);
  report_cmd->add_option("--allowlist", rp.allowlist_path);
  report_cmd->add_option("--psl", rp.psl_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) {
      Corpus corpus = load_corpus(corpus_path, !allow_missing_variants);
      std::cout << "corpus ok: " << corpus.bases.size() << " bases, "
                << corpus.variants.size() << " variants, "
                << enumerate_paraphrase_pairs(corpus).size() << " paraphrase pairs\n";
      return 0;
    }

    if (*rerun_cmd || *para_cmd) {
      auto cells = parse_cells(cell_specs);
      RunPlan plan;
      if (*rerun_cmd) {
        Corpus corpus = load_corpus(plan_corpus, /*require_variants=*/false);
        std::vector<std::string> surfaces;
        if (plan_surfaces == "all") {
          surfaces = corpus.surface_form_ids();
        } else {
          for (const auto& b : corpus.bases) surfaces.push_back(b.id);
        }
        plan = build_rerun_plan(surfaces, cells, plan_n);
      } else {
        Corpus corpus = load_corpus(plan_corpus);
        plan = build_paraphrase_plan(corpus, cells, plan_n);
      }
      for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
      save_plan(plan, plan_out);
      std::cout << "plan written: " << plan.entries.size() << " entries\n";
      return 0;
    }

    if (*run_cmd) {
      RunPlan plan = load_plan(run_plan_path);
      std::unique_ptr<ProviderAdapter> adapter;
      if (run_adapter == "synthetic") {
        if (run_world_path.empty())
          throw ValidationError("--world is required for the synthetic adapter");
        adapter = std::make_unique<SyntheticAdapter>(load_world(run_world_path));
      } else {
        if (run_config_path.empty() || run_corpus_path.empty())
          throw ValidationError("--config and --corpus are required for live adapters");
        LiveConfig config = load_live_config(run_config_path);
        SurfaceTexts texts =
            surface_texts(load_corpus(run_corpus_path, /*require_variants=*/false));
        auto routing = std::make_unique<RoutingAdapter>();
        std::set<std::string> providers;
        for (const auto& e : plan.entries) providers.insert(e.cell.provider);
        for (const auto& provider : providers) {
          if (run_adapter != "live" && run_adapter != provider) continue;
          if (provider == "openai")
            routing->add(provider, std::make_unique<OpenAiAdapter>(config, texts));
          else if (provider == "anthropic")
            routing->add(provider, std::make_unique<AnthropicAdapter>(config, texts));
          else
            throw ValidationError("no live adapter available for provider " + provider);
        }
        adapter = std::move(routing);
      }
      RunStore store(run_store_path);
      ExecutionConfig config;
      config.max_in_flight_per_provider = run_concurrency;
      ExecutionSummary summary = execute_plan(plan, *adapter, store, config);
      std::cout << "ok: " << summary.ok << " failed: " << summary.failed
                << " skipped: " << summary.skipped << "\n";
      return summary.failed > 0 ? 2 : 0;
    }

    if (*extract_cmd) {
      RunStore store(ex_store);
      auto records = store.load();
      BrandNormalizer normalizer = make_normalizer(ex_stoplist, ex_allowlist);
      ExtractionBatch batch;
      if (ex_judges == "synthetic") {
        double rate = 0.0;
        std::uint64_t seed = ex_seed;
        if (!ex_world.empty()) {
          SyntheticWorldConfig world = load_world(ex_world);
          rate = world.judge_disagreement_rate;
          if (ex_seed == 0) seed = world.seed;
        }
        if (ex_disagreement >= 0.0) rate = ex_disagreement;
        DisagreementJudge judge_a("judge-a", rate, seed);
        DisagreementJudge judge_b("judge-b", rate, seed + 1);
        batch = extract_runs(records, judge_a, judge_b, normalizer);
      } else if (ex_judges == "live") {
        if (ex_config.empty())
          throw ValidationError("--config is required for live judges");
        LiveConfig config = load_live_config(ex_config);
        LiveJudge judge_a(LiveJudge::Provider::anthropic, config);
        LiveJudge judge_b(LiveJudge::Provider::openai, config);
        batch = extract_runs(records, judge_a, judge_b, normalizer);
      } else {
        throw ValidationError("--judges must be synthetic or live");
      }
      save_extractions(batch, ex_out);
      std::cout << "extracted: " << batch.results.size()
                << " (failed runs: " << batch.failed_runs
                << ", invalid judgements: " << batch.invalid_judgements << ")\n";
      return 0;
    }

    if (*analyze_cmd) {
      AuditReport report = build_report(an);
      std::ofstream out(an_out, std::ios::binary);
      if (!out) throw ExecutionError("cannot write " + an_out);
      out << report_to_json(report).dump(2) << "\n";
      std::cout << "statistics written to " << an_out << "\n";
      return 0;
    }

    if (*report_cmd) {
      AuditReport report = build_report(rp);
      std::set<std::string> formats(rp_formats.begin(), rp_formats.end());
      write_report_artifacts(report, rp_out_dir, formats);
      std::cout << "report artifacts written to " << rp_out_dir << "\n";
      if (report.verdict_available)
        std::cout << "verdict: " << to_string(report.verdict_value) << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
