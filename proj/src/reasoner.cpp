#include "hornguide/reasoner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "hornguide/parallel.hpp"
#include "hornguide/rng.hpp"

namespace hornguide {

SearchMode search_mode_from_name(std::string_view s) {
    if (s == "standard") return SearchMode::Standard;
    if (s == "exhaustive") return SearchMode::Exhaustive;
    if (s == "guided") return SearchMode::Guided;
    throw ConfigError("unknown search mode: " + std::string(s));
}

const char* search_mode_name(SearchMode m) {
    switch (m) {
        case SearchMode::Standard: return "standard";
        case SearchMode::Exhaustive: return "exhaustive";
        case SearchMode::Guided: return "guided";
    }
    return "?";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Proved: return "proved";
        case Outcome::Exhausted: return "exhausted";
        case Outcome::FailedAtCap: return "failed_at_cap";
    }
    return "?";
}

Outcome outcome_from_name(std::string_view s) {
    if (s == "proved") return Outcome::Proved;
    if (s == "exhausted") return Outcome::Exhausted;
    if (s == "failed_at_cap") return Outcome::FailedAtCap;
    throw ArtifactError("unknown outcome: " + std::string(s));
}

GuidedScorer::GuidedScorer(const EmbeddingModel& em, const ScoringModel& sm,
                           const KnowledgeBase& kb)
    : em_(em), sm_(sm), kb_(kb) {
    const Vocabulary& v = kb.vocabulary;
    if (em.vocab_hash != v.hash() || sm.vocab_hash != v.hash())
        throw VocabMismatchError("guided reasoner requires models trained on this vocabulary");
    if (sm.embedding_hash != net_hash(em.net))
        throw VocabMismatchError("scoring model does not match the embedding model");
    clause_emb_.resize(kb.clauses.size());
    for (std::size_t c = 0; c < kb.clauses.size(); ++c)
        clause_emb_[c] = rule_repr_embedding(em, kb.clauses[c], v, sm.rule_repr);
}

const std::vector<double>& GuidedScorer::Session::scores(const Atom& goal_instance,
                                                         const std::vector<int>& bucket) {
    const Vocabulary& v = shared->kb_.vocabulary;
    Atom folded = fold_into_pool(goal_instance, v);
    auto it = cache.find(folded);
    if (it != cache.end()) return it->second;

    std::vector<double> goal_emb = embed(shared->em_, folded, v);
    const int edim = static_cast<int>(goal_emb.size());
    std::vector<double> x(2 * edim);
    std::copy(goal_emb.begin(), goal_emb.end(), x.begin());
    std::vector<double> out(bucket.size());
    NetWorkspace ws;
    for (std::size_t i = 0; i < bucket.size(); ++i) {
        const std::vector<double>& ce = shared->clause_emb_[bucket[i]];
        std::copy(ce.begin(), ce.end(), x.begin() + edim);
        forward(shared->sm_.net, x, ws);
        out[i] = ws.act.back()[0];
    }
    return cache.emplace(std::move(folded), std::move(out)).first->second;
}

namespace {

struct OpenGoal {
    Atom atom;  // raw (bindings applied lazily via the path substitution)
    int depth{1};
};

std::vector<std::vector<int>> predicate_buckets(const KnowledgeBase& kb) {
    std::vector<std::vector<int>> bucket(kb.vocabulary.num_predicates());
    for (std::size_t c = 0; c < kb.clauses.size(); ++c)
        bucket[kb.clauses[c].head.predicate].push_back(static_cast<int>(c));
    return bucket;
}

struct SearchState {
    const KnowledgeBase& kb;
    const SearchConfig& cfg;
    const std::vector<std::vector<int>>& bucket;
    Rng rng;
    GuidedScorer::Session session;
    SolveTrace* trace{nullptr};
    const Atom* query{nullptr};

    long long nodes{0};
    int depth_reached{0};
    long long proofs{0};
    bool capped{false};
    bool stop{false};
    Substitution answer;
    VarCounter fresh;
    std::vector<std::size_t> path;  // open step ids (collection)
};

void record_proof(SearchState& st, const Substitution& theta) {
    ++st.proofs;
    if (st.trace && st.trace->steps)
        for (std::size_t id : st.path) (*st.trace->steps)[id].on_proof = true;
    if (st.proofs == 1) {
        Substitution ans;
        for (const Term& t : st.query->args) {
            if (!t.is_var()) continue;
            Term m = theta.apply(t);
            if (!(m == t)) ans.bind(t.id, m);
        }
        st.answer = ans;
    }
    if (st.cfg.mode != SearchMode::Exhaustive) st.stop = true;
}

void dfs(SearchState& st, const std::vector<OpenGoal>& goals, const Substitution& theta) {
    if (st.stop || st.capped) return;
    if (goals.empty()) {
        record_proof(st, theta);
        return;
    }

    // Select which open goal to expand.
    std::size_t sel = 0;
    if (st.cfg.mode == SearchMode::Guided && st.cfg.strategy == GoalStrategy::MinGoal &&
        goals.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < goals.size(); ++i) {
            Atom inst = theta.apply(goals[i].atom);
            const auto& b = st.bucket[inst.predicate];
            double mx = -std::numeric_limits<double>::infinity();
            if (!b.empty()) {
                const std::vector<double>& sc = st.session.scores(inst, b);
                for (double s : sc) mx = std::max(mx, s);
            }
            if (mx < best) {  // strict: ties keep the lowest index
                best = mx;
                sel = i;
            }
        }
    }

    const OpenGoal& g = goals[sel];
    Atom inst = theta.apply(g.atom);
    const std::vector<int>& bucket = st.bucket[inst.predicate];
    if (bucket.empty()) return;

    std::vector<int> order(bucket);
    if (st.cfg.mode == SearchMode::Exhaustive) {
        st.rng.shuffle(order);
    } else if (st.cfg.mode == SearchMode::Guided) {
        const std::vector<double>& sc = st.session.scores(inst, bucket);
        std::vector<std::size_t> perm(bucket.size());
        std::iota(perm.begin(), perm.end(), 0u);
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return sc[a] > sc[b]; });
        for (std::size_t i = 0; i < perm.size(); ++i) order[i] = bucket[perm[i]];
    }

    const bool collecting =
        st.cfg.mode == SearchMode::Exhaustive && st.trace && st.trace->steps;

    for (int cidx : order) {
        if (st.stop || st.capped) return;
        if (st.nodes >= st.cfg.node_cap) {
            st.capped = true;
            return;
        }
        ++st.nodes;
        st.depth_reached = std::max(st.depth_reached, g.depth);
        Clause rc = standardize_apart(st.kb.clauses[cidx], st.fresh);
        auto sigma = unify(inst, rc.head, UnifyMode::SharedNames);
        if (st.trace && st.trace->attempts)
            st.trace->attempts->emplace_back(fold_into_pool(inst, st.kb.vocabulary), cidx);
        if (!sigma) continue;

        std::size_t step_id = 0;
        if (collecting) {
            step_id = st.trace->steps->size();
            st.trace->steps->push_back(
                SolveTrace::Step{fold_into_pool(inst, st.kb.vocabulary), cidx, false});
        }

        if (!rc.body.empty() && g.depth >= st.cfg.depth_limit) {
            // Subgoals would exceed the depth limit: dead branch. The
            // attempt is still counted (and recorded with score 0).
            continue;
        }

        std::vector<OpenGoal> next;
        next.reserve(goals.size() - 1 + rc.body.size());
        next.insert(next.end(), goals.begin(), goals.begin() + sel);
        if (!rc.body.empty()) {
            std::vector<std::size_t> body_order(rc.body.size());
            std::iota(body_order.begin(), body_order.end(), 0u);
            if (st.cfg.mode == SearchMode::Exhaustive) st.rng.shuffle(body_order);
            for (std::size_t bi : body_order)
                next.push_back(OpenGoal{rc.body[bi], g.depth + 1});
        }
        next.insert(next.end(), goals.begin() + sel + 1, goals.end());

        Substitution theta2 = theta.compose(*sigma);
        if (collecting) st.path.push_back(step_id);
        dfs(st, next, theta2);
        if (collecting) st.path.pop_back();
    }
}

}  // namespace

ProofResult solve(const KnowledgeBase& kb, const Atom& query, const SearchConfig& cfg,
                  const GuidedScorer* scorer, SolveTrace* trace) {
    if (query.predicate < 0 || query.predicate >= kb.vocabulary.num_predicates())
        throw InputError("query predicate is not in the vocabulary");
    if (static_cast<int>(query.args.size()) != kb.vocabulary.predicate(query.predicate).arity)
        throw InputError("query arity does not match the predicate declaration");
    if (cfg.mode == SearchMode::Guided && !scorer)
        throw InputError("guided mode requires embedding and scoring models");
    if (cfg.node_cap < 1 || cfg.depth_limit < 1)
        throw ConfigError("node_cap and depth_limit must be >= 1");

    auto buckets = predicate_buckets(kb);
    SearchState st{kb,
                   cfg,
                   buckets,
                   Rng(cfg.rng_seed),
                   scorer ? scorer->session() : GuidedScorer::Session{},
                   trace,
                   &query,
                   0,
                   0,
                   0,
                   false,
                   false,
                   {},
                   {},
                   {}};
    st.fresh.next = kb.vocabulary.num_variables();

    std::vector<OpenGoal> goals{OpenGoal{query, 1}};
    dfs(st, goals, Substitution{});

    ProofResult r;
    r.nodes_explored = st.nodes;
    r.depth_reached = st.depth_reached;
    r.proofs_found = st.proofs;
    if (st.proofs > 0) {
        r.outcome = Outcome::Proved;
        r.answer = st.answer;
    } else {
        r.outcome = st.capped ? Outcome::FailedAtCap : Outcome::Exhausted;
    }
    return r;
}

std::vector<ProofResult> run_query_set(const KnowledgeBase& kb, const std::vector<Atom>& queries,
                                       const SearchConfig& cfg, const GuidedScorer* scorer,
                                       bool parallel,
                                       std::vector<std::vector<std::pair<Atom, int>>>* attempts,
                                       std::vector<double>* wall_ms) {
    std::vector<ProofResult> results(queries.size());
    if (attempts) attempts->assign(queries.size(), {});
    if (wall_ms) wall_ms->assign(queries.size(), 0.0);
    parallel_for(queries.size(), parallel, [&](std::size_t qi) {
        SearchConfig qcfg = cfg;
        qcfg.rng_seed = Rng::derive(cfg.rng_seed, qi).next_u64();
        SolveTrace trace;
        if (attempts) trace.attempts = &(*attempts)[qi];
        auto t0 = std::chrono::steady_clock::now();
        results[qi] = solve(kb, queries[qi], qcfg, scorer, attempts ? &trace : nullptr);
        auto t1 = std::chrono::steady_clock::now();
        if (wall_ms)
            (*wall_ms)[qi] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    });
    return results;
}

std::vector<TrainingSample> collect_training_data(const KnowledgeBase& kb,
                                                  const std::vector<Atom>& queries,
                                                  int depth_limit, long long node_cap,
                                                  std::uint64_t seed, bool parallel) {
    std::vector<std::vector<SolveTrace::Step>> steps(queries.size());
    parallel_for(queries.size(), parallel, [&](std::size_t qi) {
        SearchConfig cfg;
        cfg.mode = SearchMode::Exhaustive;
        cfg.depth_limit = depth_limit;
        cfg.node_cap = node_cap;
        cfg.rng_seed = Rng::derive(seed, qi).next_u64();
        SolveTrace trace;
        trace.steps = &steps[qi];
        solve(kb, queries[qi], cfg, nullptr, &trace);
    });

    struct Key {
        Atom canon;
        int clause;
        int score;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return AtomHash{}(k.canon) * 1099511628211ull + k.clause * 2u + k.score;
        }
    };
    struct PairKey {
        Atom canon;
        int clause;
        bool operator==(const PairKey&) const = default;
    };
    struct PairKeyHash {
        std::size_t operator()(const PairKey& k) const {
            return AtomHash{}(k.canon) * 1099511628211ull + k.clause;
        }
    };

    std::unordered_set<Key, KeyHash> seen;
    std::vector<TrainingSample> out;
    for (const auto& qsteps : steps) {
        // The same (goal, clause) step often recurs on several paths of one
        // query; it scores 1 iff any occurrence lies on a completed proof.
        std::unordered_map<PairKey, std::pair<std::size_t, int>, PairKeyHash> per_query;
        std::vector<PairKey> order;
        for (const SolveTrace::Step& s : qsteps) {
            PairKey key{canonical_rename(s.goal), s.clause_index};
            auto [it, fresh] = per_query.try_emplace(key, std::make_pair(order.size(), 0));
            if (fresh) order.push_back(key);
            it->second.second |= s.on_proof ? 1 : 0;
        }
        // Stable first-occurrence order keeps output deterministic.
        std::vector<std::pair<std::size_t, TrainingSample>> merged;
        merged.reserve(per_query.size());
        for (const SolveTrace::Step& s : qsteps) {
            PairKey key{canonical_rename(s.goal), s.clause_index};
            auto it = per_query.find(key);
            if (it == per_query.end()) continue;
            merged.emplace_back(it->second.first,
                                TrainingSample{s.goal, s.clause_index, it->second.second});
            per_query.erase(it);
        }
        std::sort(merged.begin(), merged.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [idx, sample] : merged) {
            (void)idx;
            Key key{canonical_rename(sample.goal), sample.clause_index, sample.score};
            if (seen.insert(key).second) out.push_back(std::move(sample));
        }
    }
    return out;
}

// ---- Files ----------------------------------------------------------------

void write_results_csv(const std::filesystem::path& path, const std::vector<ProofResult>& results,
                       const std::vector<double>& wall_ms,
                       const std::map<std::string, std::string>& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    for (const auto& [k, v] : header) os << "# " << k << "=" << v << "\n";
    os << "query_id,outcome,nodes,depth,wall_ms\n";
    char buf[160];
    for (std::size_t i = 0; i < results.size(); ++i) {
        double ms = i < wall_ms.size() ? wall_ms[i] : 0.0;
        std::snprintf(buf, sizeof(buf), "%zu,%s,%lld,%d,%.3f\n", i,
                      outcome_name(results[i].outcome), results[i].nodes_explored,
                      results[i].depth_reached, ms);
        os << buf;
    }
}

std::vector<ProofResult> read_results_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    std::vector<ProofResult> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("query_id", 0) == 0) continue;
        std::istringstream ss(line);
        std::string id, outcome, nodes, depth;
        std::getline(ss, id, ',');
        std::getline(ss, outcome, ',');
        std::getline(ss, nodes, ',');
        std::getline(ss, depth, ',');
        ProofResult r;
        r.outcome = outcome_from_name(outcome);
        r.nodes_explored = std::stoll(nodes);
        r.depth_reached = std::stoi(depth);
        out.push_back(r);
    }
    return out;
}

void write_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples,
                   const KnowledgeBase& kb, const std::map<std::string, std::string>& extra) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    for (const auto& [k, v] : extra) os << "% " << k << "=" << v << "\n";
    for (const TrainingSample& s : samples) {
        os << to_text(s.goal, kb.vocabulary) << '\t'
           << to_text(kb.clauses[s.clause_index], kb.vocabulary) << '\t' << s.score << "\n";
    }
}

std::vector<TrainingSample> read_samples(const std::filesystem::path& path, KnowledgeBase& kb) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    std::unordered_map<std::string, int> clause_index;
    for (std::size_t c = 0; c < kb.clauses.size(); ++c)
        clause_index.emplace(to_text(kb.clauses[c], kb.vocabulary), static_cast<int>(c));
    std::vector<TrainingSample> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        std::string goal, clause, score;
        if (!std::getline(ss, goal, '\t') || !std::getline(ss, clause, '\t') ||
            !std::getline(ss, score, '\t'))
            throw ArtifactError("bad sample line in " + path.string());
        auto it = clause_index.find(clause);
        if (it == clause_index.end())
            throw ArtifactError("sample references a clause not in the KB: " + clause);
        TrainingSample s;
        s.goal = parse_atom(goal, kb.vocabulary, SymbolPolicy::Strict);
        s.clause_index = it->second;
        s.score = std::stoi(score);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace hornguide
