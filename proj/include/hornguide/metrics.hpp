#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hornguide/logic.hpp"
#include "hornguide/nn.hpp"
#include "hornguide/reasoner.hpp"

namespace hornguide {

struct KbNodeStats {
    double mean{0.0};
    double median{0.0};
    int fails{0};
    std::size_t queries{0};
};

struct NodeStats {
    double mean_nodes{0.0};    // pooled over all queries of all KBs
    double median_nodes{0.0};  // mean of per-KB medians
    double fails{0.0};         // mean per-KB failed-query count
    std::vector<KbNodeStats> per_kb;
};

// Failed-at-cap results carry node_cap in nodes_explored and, like exhausted
// results, count as fails.
NodeStats node_stats(const std::vector<std::vector<ProofResult>>& per_kb_results);

struct DistancePairSet {
    std::vector<double> positive_scores;
    std::vector<double> negative_scores;
};

// Both lists histogrammed over the shared [min, max] range into num_bins
// equal bins; returns half the L1 distance between the normalized
// histograms. Degenerate range (all values equal) -> 0.
double tv_distance(const DistancePairSet& d, int num_bins);

// Similarity = negative squared embedding distance of each anchor-positive
// and anchor-negative pair of a held-out triplet set.
DistancePairSet similarity_pairs(const EmbeddingModel& em, const TripletDataset& holdout,
                                 const Vocabulary& v, bool parallel = true);

struct MatchStats {
    bool defined{false};  // false when test_pairs is empty
    double semantic_pct{0.0};
    double exact_pct{0.0};
};

// A test (goal, clause) pair matches semantically when some train pair has
// the identical clause and a goal equal up to canonical renaming; exact
// match requires literal goal equality.
MatchStats semantic_match(const std::vector<std::pair<Atom, int>>& train_pairs,
                          const std::vector<std::pair<Atom, int>>& test_pairs);

double mean_of(const std::vector<double>& xs);
double median_of(std::vector<double> xs);  // midpoint average for even sizes
double stddev_of(const std::vector<double>& xs);

}  // namespace hornguide
