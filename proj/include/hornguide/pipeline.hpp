#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hornguide/config.hpp"

namespace hornguide {

inline constexpr const char* kToolVersion = "hornguide 0.1.0";

struct CompareRow {
    std::string reasoner;  // standard | guided
    int size{0};
    double mean_nodes{0.0};
    double median_nodes{0.0};
    double fails{0.0};
};

struct AblateRow {
    std::string arm;  // Baseline | Hard Samples | Triplet Difficulty | Repeated Terms | All
    double mean_nodes{0.0};
};

struct CrosstestRow {
    std::string model;  // Model A..
    double min{0.0}, max{0.0}, mean{0.0}, stddev{0.0};
    double tv_dist{0.0};
    double sem_match{0.0};
};

// Full chain gen-kb -> forward-chain -> gen-queries -> gen-triplets ->
// train-embed -> collect-training -> train-scorer -> evaluate, persisting
// every artifact under out_dir. Re-running resumes at the first missing
// artifact; a changed config against an existing manifest is an error.
// Returns the manifest path.
std::filesystem::path run_pipeline(const Params& cfg, const std::filesystem::path& out_dir);

// Single stages (the CLI subcommands); each assumes its inputs exist.
void stage_gen_kb(const Params& cfg, const std::filesystem::path& out_dir);
void stage_gen_queries(const Params& cfg, const std::filesystem::path& out_dir);
void stage_gen_triplets(const Params& cfg, const std::filesystem::path& out_dir);
void stage_train_embed(const Params& cfg, const std::filesystem::path& out_dir);
void stage_collect(const Params& cfg, const std::filesystem::path& out_dir);
void stage_train_scorer(const Params& cfg, const std::filesystem::path& out_dir);
void stage_evaluate(const Params& cfg, const std::filesystem::path& out_dir);

// Standard vs guided on the run's test queries, from existing pipeline
// artifacts. Writes compare.csv and returns its rows.
std::vector<CompareRow> run_compare(const Params& cfg, const std::filesystem::path& out_dir);

// Five arms over shared KBs/queries/training samples; writes ablate.csv.
std::vector<AblateRow> run_ablate(const Params& cfg, const std::filesystem::path& out_dir);

// n_embeddings models x kb_count KBs; writes metrics.csv (per-cell rows) and
// crosstest.csv (per-model summary over KB means).
std::vector<CrosstestRow> run_crosstest(const Params& cfg, const std::filesystem::path& out_dir);

}  // namespace hornguide
