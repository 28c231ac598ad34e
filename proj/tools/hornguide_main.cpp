// Command-line front end: synthetic KB + query generation, triplet datasets,
// embedding/scorer training, reasoner runs and the three experiment drivers.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "hornguide/metrics.hpp"
#include "hornguide/parallel.hpp"
#include "hornguide/pipeline.hpp"
#include "hornguide/reasoner.hpp"
#include "hornguide/synth.hpp"

namespace fs = std::filesystem;
using namespace hornguide;

namespace {

struct CommonOpts {
    std::string preset;
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out_root;
    int jobs = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--preset", o.preset, "Configuration preset (desk, kb250, kb375, kb500)");
    cmd->add_option("--config", o.config_file, "key=value configuration file");
    cmd->add_option("--set", o.overrides, "Override a config key (key=value), repeatable");
    cmd->add_option("--out", o.out_root,
                    "Output root directory (default $HORNGUIDE_OUT or ./out)");
    cmd->add_option("--jobs", o.jobs, "Worker threads (0 = library default)");
}

Params build_params(const CommonOpts& o) {
    Params p = o.preset.empty() ? Params::defaults() : Params::preset(o.preset);
    if (!o.config_file.empty()) p.load_file(o.config_file);
    for (const std::string& kv : o.overrides) p.set_pair(kv);
    if (o.jobs >= 0) p.set("jobs", std::to_string(o.jobs));
    return p;
}

fs::path out_dir(const CommonOpts& o, const Params& p) {
    fs::path root;
    if (!o.out_root.empty()) {
        root = o.out_root;
    } else if (const char* env = std::getenv("HORNGUIDE_OUT")) {
        root = env;
    } else {
        root = "out";
    }
    return root / p.gets("run_name");
}

int run_reasoner_cmd(const std::string& kb_file, const std::string& queries_file,
                     const std::string& section, const std::string& mode_name,
                     const std::string& embed_file, const std::string& scorer_file,
                     const std::string& output, int depth_limit, long long node_cap,
                     std::uint64_t seed) {
    KnowledgeBase kb = read_kb(kb_file);
    QuerySet qs = read_queries(queries_file, kb.vocabulary);
    const std::vector<Atom>& queries = section == "train" ? qs.train : qs.test;

    SearchConfig cfg;
    cfg.mode = search_mode_from_name(mode_name);
    cfg.depth_limit = depth_limit;
    cfg.node_cap = node_cap;
    cfg.rng_seed = seed;

    std::optional<EmbeddingModel> em;
    std::optional<ScoringModel> sm;
    std::optional<GuidedScorer> scorer;
    if (cfg.mode == SearchMode::Guided) {
        if (embed_file.empty() || scorer_file.empty())
            throw InputError("guided mode needs --embed and --scorer");
        em = load_embedding(embed_file);
        sm = load_scorer(scorer_file);
        scorer.emplace(*em, *sm, kb);
    }

    std::vector<double> wall;
    auto results =
        run_query_set(kb, queries, cfg, scorer ? &*scorer : nullptr, true, nullptr, &wall);
    write_results_csv(output, results, wall,
                      {{"mode", mode_name}, {"node_cap", std::to_string(node_cap)}});

    std::vector<std::vector<ProofResult>> per_kb{results};
    NodeStats stats = node_stats(per_kb);
    std::printf("%zu queries: mean_nodes=%.1f median=%.1f fails=%.0f -> %s\n", queries.size(),
                stats.mean_nodes, stats.median_nodes, stats.fails, output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Horn-clause reasoning workbench with learned guidance"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string stage_cmds[] = {"gen-kb",           "gen-queries",  "gen-triplets",
                                "train-embed",      "collect-training", "train-scorer",
                                "pipeline",         "compare",      "ablate",
                                "crosstest"};
    std::map<std::string, CLI::App*> cmds;
    cmds["gen-kb"] = app.add_subcommand("gen-kb", "Generate the synthetic KBs");
    cmds["gen-queries"] =
        app.add_subcommand("gen-queries", "Forward-chain and derive train/test query sets");
    cmds["gen-triplets"] = app.add_subcommand("gen-triplets", "Generate the triplet dataset");
    cmds["train-embed"] = app.add_subcommand("train-embed", "Train the embedding model");
    cmds["collect-training"] = app.add_subcommand(
        "collect-training", "Collect (goal, rule, score) tuples by exhaustive search");
    cmds["train-scorer"] = app.add_subcommand("train-scorer", "Train the per-KB scoring models");
    cmds["pipeline"] = app.add_subcommand("pipeline", "Run the full pipeline end to end");
    cmds["compare"] =
        app.add_subcommand("compare", "Standard vs guided node counts from run artifacts");
    cmds["ablate"] = app.add_subcommand("ablate", "Ablation arms over shared KBs and queries");
    cmds["crosstest"] =
        app.add_subcommand("crosstest", "Cross-test embedding models against KBs");
    for (auto& [name, cmd] : cmds) add_common(cmd, common);

    // Standalone reasoner run over explicit artifacts.
    auto* run_cmd = app.add_subcommand("run", "Run a reasoner over a KB and query file");
    std::string kb_file, queries_file, section = "test", mode_name = "standard";
    std::string embed_file, scorer_file, output = "results.csv";
    int depth_limit = 5;
    long long node_cap = 1'000'000;
    std::uint64_t seed = 0;
    int run_jobs = 0;
    run_cmd->add_option("--kb", kb_file, "KB file")->required();
    run_cmd->add_option("--queries", queries_file, "Query file")->required();
    run_cmd->add_option("--section", section, "train or test (default test)");
    run_cmd->add_option("--mode", mode_name, "standard | exhaustive | guided");
    run_cmd->add_option("--embed", embed_file, "Embedding model (guided)");
    run_cmd->add_option("--scorer", scorer_file, "Scoring model (guided)");
    run_cmd->add_option("--output", output, "Per-query result CSV");
    run_cmd->add_option("--depth-limit", depth_limit, "Proof depth limit");
    run_cmd->add_option("--node-cap", node_cap, "Node cap before a query fails");
    run_cmd->add_option("--seed", seed, "RNG seed");
    run_cmd->add_option("--jobs", run_jobs, "Worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            set_jobs(run_jobs);
            return run_reasoner_cmd(kb_file, queries_file, section, mode_name, embed_file,
                                    scorer_file, output, depth_limit, node_cap, seed);
        }
        Params p = build_params(common);
        fs::path dir = out_dir(common, p);
        if (cmds["gen-kb"]->parsed()) stage_gen_kb(p, dir);
        if (cmds["gen-queries"]->parsed()) stage_gen_queries(p, dir);
        if (cmds["gen-triplets"]->parsed()) stage_gen_triplets(p, dir);
        if (cmds["train-embed"]->parsed()) stage_train_embed(p, dir);
        if (cmds["collect-training"]->parsed()) stage_collect(p, dir);
        if (cmds["train-scorer"]->parsed()) stage_train_scorer(p, dir);
        if (cmds["pipeline"]->parsed()) {
            fs::path manifest = run_pipeline(p, dir);
            std::printf("pipeline complete: %s\n", manifest.string().c_str());
        }
        if (cmds["compare"]->parsed()) {
            auto rows = run_compare(p, dir);
            for (const auto& r : rows)
                std::printf("%-10s size=%d mean=%.1f median=%.1f fails=%.1f\n",
                            r.reasoner.c_str(), r.size, r.mean_nodes, r.median_nodes, r.fails);
        }
        if (cmds["ablate"]->parsed()) {
            auto rows = run_ablate(p, dir);
            for (const auto& r : rows)
                std::printf("%-20s mean_nodes=%.1f\n", r.arm.c_str(), r.mean_nodes);
        }
        if (cmds["crosstest"]->parsed()) {
            auto rows = run_crosstest(p, dir);
            for (const auto& r : rows)
                std::printf("%s min=%.1f max=%.1f mean=%.1f stddev=%.1f tv=%.5f sem=%.2f%%\n",
                            r.model.c_str(), r.min, r.max, r.mean, r.stddev, r.tv_dist,
                            r.sem_match);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const GenerationError& e) {
        std::fprintf(stderr, "generation error: %s\n", e.what());
        return 3;
    } catch (const ArtifactError& e) {
        std::fprintf(stderr, "artifact error: %s\n", e.what());
        return 4;
    } catch (const TrainingError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return 5;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 6;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 6;
    }
}
