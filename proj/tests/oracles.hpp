// Test-only oracles, independent of the implementation paths they check:
// grounding-based unifiability, naive bottom-up forward chaining, and an
// all-proofs enumerator for depth-bounded backward search.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "hornguide/logic.hpp"

namespace oracle {

using namespace hornguide;

// Every assignment of the combined variable set to constants; a and b are
// unifiable (shared names) iff some assignment makes them identical.
inline bool grounding_unifiable_shared(const Atom& a, const Atom& b, int num_constants) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
    std::vector<std::int32_t> vars;
    for (const Atom* atom : {&a, &b})
        for (const Term& t : atom->args)
            if (t.is_var() && std::find(vars.begin(), vars.end(), t.id) == vars.end())
                vars.push_back(t.id);

    std::vector<int> assign(vars.size(), 0);
    auto value = [&](const Term& t) {
        if (t.is_const()) return t.id;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == t.id) return static_cast<std::int32_t>(assign[i]);
        return static_cast<std::int32_t>(-1);
    };
    while (true) {
        bool equal = true;
        for (std::size_t i = 0; i < a.args.size() && equal; ++i)
            equal = value(a.args[i]) == value(b.args[i]);
        if (equal) return true;
        // next assignment
        std::size_t k = 0;
        while (k < assign.size()) {
            if (++assign[k] < num_constants) break;
            assign[k] = 0;
            ++k;
        }
        if (k == assign.size()) return false;
        if (assign.empty()) return false;
    }
}

inline bool grounding_unifiable_apart(const Atom& a, const Atom& b, int num_constants) {
    std::int32_t base = 1 + std::max(max_var_id(a), max_var_id(b));
    if (base < 0) base = 0;
    return grounding_unifiable_shared(a, rename_vars_from(b, base), num_constants);
}

// All atoms over the vocabulary (every predicate, every combination of
// in-pool terms).
inline std::vector<Atom> all_atoms(const Vocabulary& v) {
    std::vector<Atom> out;
    std::vector<Term> terms;
    for (int i = 0; i < v.num_variables(); ++i) terms.push_back(make_var(i));
    for (int i = 0; i < v.num_constants(); ++i) terms.push_back(make_const(i));
    for (std::int32_t p = 0; p < v.num_predicates(); ++p) {
        int arity = v.predicate(p).arity;
        std::vector<std::size_t> idx(arity, 0);
        while (true) {
            Atom a;
            a.predicate = p;
            for (int k = 0; k < arity; ++k) a.args.push_back(terms[idx[k]]);
            out.push_back(std::move(a));
            int k = 0;
            while (k < arity) {
                if (++idx[k] < terms.size()) break;
                idx[k] = 0;
                ++k;
            }
            if (k == arity) break;
        }
    }
    return out;
}

// Naive bottom-up least fixpoint: repeatedly instantiate every rule against
// every combination of known facts until nothing new appears.
inline std::set<Atom> naive_fixpoint(const KnowledgeBase& kb) {
    std::set<Atom> facts;
    std::vector<const Clause*> rules;
    for (const Clause& c : kb.clauses) {
        if (c.is_fact())
            facts.insert(c.head);
        else
            rules.push_back(&c);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Clause* r : rules) {
            std::vector<Atom> body(r->body);
            // enumerate assignments over all fact tuples matching the body
            std::vector<const Atom*> pool(facts.size());
            {
                std::size_t i = 0;
                for (const Atom& f : facts) pool[i++] = &f;
            }
            std::vector<std::size_t> pick(body.size(), 0);
            if (pool.empty()) continue;
            while (true) {
                std::map<std::int32_t, Term> bind;
                bool ok = true;
                for (std::size_t bi = 0; bi < body.size() && ok; ++bi) {
                    const Atom& pat = body[bi];
                    const Atom& f = *pool[pick[bi]];
                    if (pat.predicate != f.predicate || pat.args.size() != f.args.size()) {
                        ok = false;
                        break;
                    }
                    for (std::size_t ai = 0; ai < pat.args.size(); ++ai) {
                        Term t = pat.args[ai];
                        if (t.is_const()) {
                            if (!(t == f.args[ai])) {
                                ok = false;
                                break;
                            }
                        } else {
                            auto it = bind.find(t.id);
                            if (it == bind.end())
                                bind[t.id] = f.args[ai];
                            else if (!(it->second == f.args[ai])) {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                if (ok) {
                    Atom head = r->head;
                    for (Term& t : head.args)
                        if (t.is_var()) t = bind.at(t.id);
                    if (facts.insert(head).second) changed = true;
                }
                std::size_t k = 0;
                while (k < pick.size()) {
                    if (++pick[k] < pool.size()) break;
                    pick[k] = 0;
                    ++k;
                }
                if (k == pick.size()) break;
            }
        }
    }
    return facts;
}

// Is some ground instance of `query` in the derivable set?
inline bool provable_by_fixpoint(const KnowledgeBase& kb, const Atom& query) {
    std::set<Atom> facts = naive_fixpoint(kb);
    for (const Atom& f : facts)
        if (unifiable(query, f, UnifyMode::StandardizeApart)) return true;
    return false;
}

// Depth-bounded all-proofs enumerator (left-to-right, clause order), fully
// independent of the production reasoner. Counts completed proofs, collects
// ground answers, and records each resolution step's goal instance at
// expansion (canonically renamed) with its clause index.
struct EnumeratorResult {
    long long proofs{0};
    std::set<Atom> answers;  // query under the final substitution, per proof
    std::set<std::pair<Atom, int>> on_proof_steps;   // canonical goal, clause
    std::set<std::pair<Atom, int>> attempted_steps;  // successful unifications
};

struct Enumerator {
    const KnowledgeBase& kb;
    int depth_limit;
    EnumeratorResult result;
    VarCounter fresh;
    Atom query;
    std::vector<std::pair<Atom, int>> path;

    struct Goal {
        Atom atom;
        int depth;
    };

    void run(const Atom& q) {
        query = q;
        fresh.next = kb.vocabulary.num_variables();
        explore({Goal{q, 1}}, Substitution{});
    }

    void explore(const std::vector<Goal>& goals, const Substitution& theta) {
        if (goals.empty()) {
            ++result.proofs;
            result.answers.insert(theta.apply(query));
            for (const auto& step : path) result.on_proof_steps.insert(step);
            return;
        }
        const Goal& g = goals.front();
        Atom inst = theta.apply(g.atom);
        for (std::size_t c = 0; c < kb.clauses.size(); ++c) {
            if (kb.clauses[c].head.predicate != inst.predicate) continue;
            Clause rc = standardize_apart(kb.clauses[c], fresh);
            auto sigma = unify(inst, rc.head, UnifyMode::SharedNames);
            if (!sigma) continue;
            result.attempted_steps.insert({canonical_rename(inst), static_cast<int>(c)});
            if (!rc.body.empty() && g.depth >= depth_limit) continue;
            std::vector<Goal> next;
            for (const Atom& b : rc.body) next.push_back(Goal{b, g.depth + 1});
            next.insert(next.end(), goals.begin() + 1, goals.end());
            path.emplace_back(canonical_rename(inst), static_cast<int>(c));
            explore(next, theta.compose(*sigma));
            path.pop_back();
        }
    }
};

}  // namespace oracle
