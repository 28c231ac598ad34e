#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hornguide/logic.hpp"
#include "hornguide/nn.hpp"

namespace hornguide {

enum class SearchMode { Standard, Exhaustive, Guided };
enum class GoalStrategy { MinGoal, StackOrder };

SearchMode search_mode_from_name(std::string_view s);
const char* search_mode_name(SearchMode m);

struct SearchConfig {
    SearchMode mode{SearchMode::Standard};
    int depth_limit{5};
    long long node_cap{1'000'000};
    std::uint64_t rng_seed{0};
    // Guided subgoal selection. MinGoal expands the open goal whose best
    // candidate-clause score is smallest (fail-first); StackOrder always
    // expands the leftmost goal.
    GoalStrategy strategy{GoalStrategy::MinGoal};
};

enum class Outcome { Proved, Exhausted, FailedAtCap };
const char* outcome_name(Outcome o);
Outcome outcome_from_name(std::string_view s);

struct ProofResult {
    Outcome outcome{Outcome::Exhausted};
    Substitution answer;  // first proof's bindings restricted to query variables
    long long nodes_explored{0};
    int depth_reached{0};
    long long proofs_found{0};  // > 1 only in exhaustive mode
};

// Shared read-only scoring state for the guided reasoner; per-query mutable
// caches live in Session objects so query-level parallelism stays
// contention-free and deterministic.
class GuidedScorer {
public:
    GuidedScorer(const EmbeddingModel& em, const ScoringModel& sm, const KnowledgeBase& kb);

    const KnowledgeBase& kb() const { return kb_; }

    struct Session {
        const GuidedScorer* shared{nullptr};
        std::unordered_map<Atom, std::vector<double>, AtomHash> cache;

        // Scores aligned with `bucket` (clause indices of the goal's
        // predicate). Goal instances are pool-folded before embedding, so
        // fresh search variables reuse pool encodings deterministically.
        const std::vector<double>& scores(const Atom& goal_instance,
                                          const std::vector<int>& bucket);
    };

    Session session() const { return Session{this, {}}; }

private:
    friend struct Session;
    const EmbeddingModel& em_;
    const ScoringModel& sm_;
    const KnowledgeBase& kb_;
    std::vector<std::vector<double>> clause_emb_;
};

struct SolveTrace {
    struct Step {
        Atom goal;  // instance in force at expansion, pool-folded
        int clause_index{-1};
        bool on_proof{false};
    };
    // Exhaustive-mode resolution steps whose unification succeeded.
    std::vector<Step>* steps{nullptr};
    // Every attempted (goal instance, clause) pair, successful or not.
    std::vector<std::pair<Atom, int>>* attempts{nullptr};
};

// Depth-first resolution with standardize-apart unification. A node is one
// attempted (goal, clause) resolution against the goal's predicate bucket,
// counted whether or not unification succeeds. Standard and guided modes
// stop at the first proof; exhaustive explores every path within the depth
// limit and node cap.
ProofResult solve(const KnowledgeBase& kb, const Atom& query, const SearchConfig& cfg,
                  const GuidedScorer* scorer = nullptr, SolveTrace* trace = nullptr);

// Independent solve per query; per-query RNG stream derived from
// (cfg.rng_seed, query index). `parallel=false` is the serial reference and
// must produce identical results.
std::vector<ProofResult> run_query_set(
    const KnowledgeBase& kb, const std::vector<Atom>& queries, const SearchConfig& cfg,
    const GuidedScorer* scorer = nullptr, bool parallel = true,
    std::vector<std::vector<std::pair<Atom, int>>>* attempts = nullptr,
    std::vector<double>* wall_ms = nullptr);

// Exhaustive run per query (no first-proof cutoff); one sample per successful
// resolution step, score 1 iff the step lies on at least one completed proof.
// Duplicate (canonical goal, clause, score) records are dropped.
std::vector<TrainingSample> collect_training_data(const KnowledgeBase& kb,
                                                  const std::vector<Atom>& queries,
                                                  int depth_limit, long long node_cap,
                                                  std::uint64_t seed, bool parallel = true);

// ---- Files -----------------------------------------------------------------

// CSV: query_id,outcome,nodes,depth,wall_ms
void write_results_csv(const std::filesystem::path& path, const std::vector<ProofResult>& results,
                       const std::vector<double>& wall_ms,
                       const std::map<std::string, std::string>& header = {});
std::vector<ProofResult> read_results_csv(const std::filesystem::path& path);

// TSV: goal, clause, score
void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples,
                   const KnowledgeBase& kb, const std::map<std::string, std::string>& extra = {});
std::vector<TrainingSample> read_samples(const std::filesystem::path& path, KnowledgeBase& kb);

}  // namespace hornguide
