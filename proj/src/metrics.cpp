#include "hornguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hornguide/parallel.hpp"

namespace hornguide {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double stddev_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

NodeStats node_stats(const std::vector<std::vector<ProofResult>>& per_kb_results) {
    NodeStats stats;
    std::vector<double> pooled;
    std::vector<double> medians;
    std::vector<double> fail_counts;
    for (const auto& kb_results : per_kb_results) {
        if (kb_results.empty()) throw InputError("node_stats: empty result list for a KB");
        KbNodeStats ks;
        ks.queries = kb_results.size();
        std::vector<double> nodes;
        nodes.reserve(kb_results.size());
        for (const ProofResult& r : kb_results) {
            nodes.push_back(static_cast<double>(r.nodes_explored));
            if (r.outcome != Outcome::Proved) ++ks.fails;
        }
        ks.mean = mean_of(nodes);
        ks.median = median_of(nodes);
        pooled.insert(pooled.end(), nodes.begin(), nodes.end());
        medians.push_back(ks.median);
        fail_counts.push_back(static_cast<double>(ks.fails));
        stats.per_kb.push_back(ks);
    }
    stats.mean_nodes = mean_of(pooled);
    stats.median_nodes = mean_of(medians);
    stats.fails = mean_of(fail_counts);
    return stats;
}

double tv_distance(const DistancePairSet& d, int num_bins) {
    if (num_bins < 2) throw InputError("tv_distance requires num_bins >= 2");
    if (d.positive_scores.empty() || d.negative_scores.empty())
        throw InputError("tv_distance requires non-empty score lists");
    double lo = d.positive_scores[0], hi = d.positive_scores[0];
    for (const auto* list : {&d.positive_scores, &d.negative_scores})
        for (double x : *list) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(hi > lo)) return 0.0;

    auto histogram = [&](const std::vector<double>& xs) {
        std::vector<double> h(num_bins, 0.0);
        for (double x : xs) {
            int bin = static_cast<int>((x - lo) / (hi - lo) * num_bins);
            bin = std::clamp(bin, 0, num_bins - 1);
            h[bin] += 1.0;
        }
        for (double& b : h) b /= static_cast<double>(xs.size());
        return h;
    };
    std::vector<double> p = histogram(d.positive_scores);
    std::vector<double> q = histogram(d.negative_scores);
    double tv = 0.0;
    for (int i = 0; i < num_bins; ++i) tv += std::fabs(p[i] - q[i]);
    return 0.5 * tv;
}

DistancePairSet similarity_pairs(const EmbeddingModel& em, const TripletDataset& holdout,
                                 const Vocabulary& v, bool parallel) {
    DistancePairSet out;
    out.positive_scores.resize(holdout.triplets.size());
    out.negative_scores.resize(holdout.triplets.size());
    parallel_for(holdout.triplets.size(), parallel, [&](std::size_t i) {
        const Triplet& t = holdout.triplets[i];
        std::vector<double> ea = embed(em, t.anchor, v);
        std::vector<double> ep = embed(em, t.positive, v);
        std::vector<double> en = embed(em, t.negative, v);
        out.positive_scores[i] = -squared_distance(ea, ep);
        out.negative_scores[i] = -squared_distance(ea, en);
    });
    return out;
}

MatchStats semantic_match(const std::vector<std::pair<Atom, int>>& train_pairs,
                          const std::vector<std::pair<Atom, int>>& test_pairs) {
    MatchStats stats;
    if (test_pairs.empty()) return stats;
    stats.defined = true;

    struct PairHash {
        std::size_t operator()(const std::pair<Atom, int>& p) const {
            return AtomHash{}(p.first) * 1099511628211ull + static_cast<std::size_t>(p.second);
        }
    };
    std::unordered_set<std::pair<Atom, int>, PairHash> canon_set, exact_set;
    for (const auto& [goal, clause] : train_pairs) {
        canon_set.emplace(canonical_rename(goal), clause);
        exact_set.emplace(goal, clause);
    }
    std::size_t sem = 0, exact = 0;
    for (const auto& [goal, clause] : test_pairs) {
        if (canon_set.count({canonical_rename(goal), clause})) ++sem;
        if (exact_set.count({goal, clause})) ++exact;
    }
    stats.semantic_pct = 100.0 * static_cast<double>(sem) / test_pairs.size();
    stats.exact_pct = 100.0 * static_cast<double>(exact) / test_pairs.size();
    return stats;
}

}  // namespace hornguide
