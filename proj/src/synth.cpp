#include "hornguide/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hornguide {

Vocabulary gen_vocabulary(int num_predicates, int num_constants, int num_variables,
                          int max_arity, Rng& rng) {
    if (num_predicates < 1 || num_constants < 1 || num_variables < 1 || max_arity < 1)
        throw GenerationError("vocabulary parameters must all be >= 1");
    std::vector<int> arities(num_predicates);
    while (true) {
        bool has_max = false;
        for (int& a : arities) {
            a = 1 + static_cast<int>(rng.index(max_arity));
            if (a == max_arity) has_max = true;
        }
        if (has_max) break;
    }
    Vocabulary v;
    for (int i = 0; i < num_predicates; ++i) v.add_predicate("p" + std::to_string(i), arities[i]);
    for (int i = 0; i < num_constants; ++i) v.add_constant("c" + std::to_string(i));
    for (int i = 0; i < num_variables; ++i) v.add_variable("V" + std::to_string(i));
    v.check();
    return v;
}

namespace {

struct ClauseKeyHash {
    std::size_t operator()(const Clause& c) const {
        AtomHash ah;
        std::size_t h = ah(c.head);
        for (const Atom& a : c.body) h = h * 1099511628211ull + ah(a);
        return h;
    }
};

Atom random_ground_fact(const Vocabulary& v, Rng& rng) {
    std::int32_t pid = static_cast<std::int32_t>(rng.index(v.num_predicates()));
    Atom a;
    a.predicate = pid;
    int arity = v.predicate(pid).arity;
    a.args.reserve(arity);
    for (int i = 0; i < arity; ++i)
        a.args.push_back(make_const(static_cast<std::int32_t>(rng.index(v.num_constants()))));
    return a;
}

// Body slots: variable with prob 0.6 (uniform over the pool), else constant.
// Head slots: variable from the body's variables with prob 0.8 when any
// exist; constants otherwise keep the clause safe.
Clause random_rule(const Vocabulary& v, int max_body_len, Rng& rng) {
    Clause c;
    int body_len = 1 + static_cast<int>(rng.index(max_body_len));
    std::vector<std::int32_t> body_vars;
    for (int b = 0; b < body_len; ++b) {
        Atom a;
        a.predicate = static_cast<std::int32_t>(rng.index(v.num_predicates()));
        int arity = v.predicate(a.predicate).arity;
        for (int i = 0; i < arity; ++i) {
            if (rng.bernoulli(0.6)) {
                std::int32_t var = static_cast<std::int32_t>(rng.index(v.num_variables()));
                a.args.push_back(make_var(var));
                if (std::find(body_vars.begin(), body_vars.end(), var) == body_vars.end())
                    body_vars.push_back(var);
            } else {
                a.args.push_back(make_const(static_cast<std::int32_t>(rng.index(v.num_constants()))));
            }
        }
        c.body.push_back(std::move(a));
    }
    Atom h;
    h.predicate = static_cast<std::int32_t>(rng.index(v.num_predicates()));
    int arity = v.predicate(h.predicate).arity;
    for (int i = 0; i < arity; ++i) {
        if (!body_vars.empty() && rng.bernoulli(0.8)) {
            h.args.push_back(make_var(body_vars[rng.index(body_vars.size())]));
        } else {
            h.args.push_back(make_const(static_cast<std::int32_t>(rng.index(v.num_constants()))));
        }
    }
    c.head = std::move(h);
    return c;
}

}  // namespace

KnowledgeBase gen_kb(const KbGenConfig& config) {
    if (config.kb_size < 1) throw GenerationError("kb_size must be >= 1");
    if (config.max_body_len < 1) throw GenerationError("max_body_len must be >= 1");
    if (!(config.fact_fraction > 0.0 && config.fact_fraction <= 1.0))
        throw GenerationError("fact_fraction must be in (0,1]");

    Rng vocab_rng(config.vocab_seed);
    KnowledgeBase kb;
    kb.vocabulary = gen_vocabulary(config.num_predicates, config.num_constants,
                                   config.num_variables, config.max_arity, vocab_rng);

    Rng rng(config.rng_seed);
    int n_facts = static_cast<int>(
        std::ceil(config.fact_fraction * static_cast<double>(config.kb_size)));
    n_facts = std::min(n_facts, config.kb_size);
    int n_rules = config.kb_size - n_facts;

    std::unordered_set<Clause, ClauseKeyHash> seen;
    const long max_attempts = 1000 + 200L * config.kb_size;
    long attempts = 0;

    auto emit = [&](auto&& make) {
        while (true) {
            if (++attempts > max_attempts)
                throw GenerationError(
                    "could not generate " + std::to_string(config.kb_size) +
                    " distinct clauses; vocabulary too small for kb_size");
            Clause c = make();
            Clause key = canonical_rename(c);
            if (seen.insert(key).second) {
                kb.clauses.push_back(std::move(c));
                return;
            }
        }
    };

    for (int i = 0; i < n_facts; ++i)
        emit([&] { return Clause{random_ground_fact(kb.vocabulary, rng), {}}; });
    for (int i = 0; i < n_rules; ++i)
        emit([&] { return random_rule(kb.vocabulary, config.max_body_len, rng); });
    return kb;
}

// ---- Forward chaining -------------------------------------------------------

namespace {

// Matches a body atom (under bindings) against a ground fact; extends
// `bound` in place on success.
bool match_ground(const Atom& pattern, const Atom& fact,
                  std::vector<std::pair<std::int32_t, Term>>& bound) {
    if (pattern.predicate != fact.predicate) return false;
    std::size_t checkpoint = bound.size();
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        Term t = pattern.args[i];
        if (t.is_var()) {
            Term existing{};
            bool has = false;
            for (const auto& [v, val] : bound) {
                if (v == t.id) {
                    existing = val;
                    has = true;
                    break;
                }
            }
            if (has) {
                if (!(existing == fact.args[i])) {
                    bound.resize(checkpoint);
                    return false;
                }
            } else {
                bound.emplace_back(t.id, fact.args[i]);
            }
        } else if (!(t == fact.args[i])) {
            bound.resize(checkpoint);
            return false;
        }
    }
    return true;
}

}  // namespace

std::vector<Atom> forward_chain(const KnowledgeBase& kb, std::size_t max_new_facts) {
    std::vector<const Clause*> rules;
    std::vector<Atom> facts;  // insertion order
    std::unordered_set<Atom, AtomHash> fact_set;
    std::unordered_set<Atom, AtomHash> base_set;

    for (const Clause& c : kb.clauses) {
        if (c.is_fact()) {
            if (fact_set.insert(c.head).second) facts.push_back(c.head);
            base_set.insert(c.head);
        } else {
            rules.push_back(&c);
        }
    }

    std::vector<Atom> derived;
    if (rules.empty() || max_new_facts == 0) return derived;

    std::vector<Atom> delta = facts;  // round 1 joins against the base facts

    while (!delta.empty() && derived.size() < max_new_facts) {
        // Buckets snapshot the facts known at round start; derivations of
        // this round land in `next` and only join in the following round.
        const std::size_t old_count = facts.size() - delta.size();
        std::vector<std::vector<const Atom*>> all_byp(kb.vocabulary.num_predicates());
        std::vector<std::vector<const Atom*>> old_byp(kb.vocabulary.num_predicates());
        std::vector<std::vector<const Atom*>> delta_byp(kb.vocabulary.num_predicates());
        for (std::size_t i = 0; i < facts.size(); ++i) {
            all_byp[facts[i].predicate].push_back(&facts[i]);
            if (i < old_count) old_byp[facts[i].predicate].push_back(&facts[i]);
        }
        for (const Atom& f : delta) delta_byp[f.predicate].push_back(&f);

        std::vector<Atom> next;
        std::vector<std::pair<std::int32_t, Term>> bound;

        for (const Clause* rule : rules) {
            const std::size_t blen = rule->body.size();
            // Position dpos must match a delta fact, earlier positions only
            // old facts: every new combination is enumerated exactly once.
            for (std::size_t dpos = 0; dpos < blen && derived.size() < max_new_facts; ++dpos) {
                auto join = [&](auto&& self, std::size_t pos) -> void {
                    if (derived.size() >= max_new_facts) return;
                    if (pos == blen) {
                        Atom head;
                        head.predicate = rule->head.predicate;
                        head.args.reserve(rule->head.args.size());
                        for (Term t : rule->head.args) {
                            if (t.is_var()) {
                                for (const auto& [v, val] : bound) {
                                    if (v == t.id) {
                                        t = val;
                                        break;
                                    }
                                }
                            }
                            head.args.push_back(t);
                        }
                        if (fact_set.insert(head).second) {
                            next.push_back(head);
                            if (!base_set.count(head)) derived.push_back(head);
                        }
                        return;
                    }
                    const auto& pool = (pos == dpos)  ? delta_byp
                                       : (pos < dpos) ? old_byp
                                                      : all_byp;
                    const Atom& pat = rule->body[pos];
                    if (pat.predicate >= static_cast<std::int32_t>(pool.size())) return;
                    for (const Atom* f : pool[pat.predicate]) {
                        std::size_t checkpoint = bound.size();
                        if (match_ground(pat, *f, bound)) {
                            self(self, pos + 1);
                            bound.resize(checkpoint);
                        }
                        if (derived.size() >= max_new_facts) return;
                    }
                };
                join(join, 0);
            }
        }
        facts.insert(facts.end(), next.begin(), next.end());
        delta = std::move(next);
    }
    return derived;
}

// ---- Queries ---------------------------------------------------------------

QuerySet gen_queries(const std::vector<Atom>& derived, int n_train, int n_test,
                     double var_sub_prob, Rng& rng) {
    const int need = n_train + n_test;
    if (static_cast<int>(derived.size()) < need)
        throw GenerationError("only " + std::to_string(derived.size()) +
                              " derived facts for " + std::to_string(need) +
                              " queries; generate a larger KB or chain more facts");

    std::vector<std::size_t> order(derived.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::unordered_set<Atom, AtomHash> canon_seen;
    std::vector<Atom> queries;
    for (std::size_t idx : order) {
        if (static_cast<int>(queries.size()) == need) break;
        const Atom& fact = derived[idx];
        Atom q;
        q.predicate = fact.predicate;
        q.args = fact.args;
        // distinct constants, in order of first occurrence
        std::vector<std::int32_t> consts;
        for (const Term& t : q.args)
            if (t.is_const() && std::find(consts.begin(), consts.end(), t.id) == consts.end())
                consts.push_back(t.id);
        std::int32_t next_var = 0;
        for (std::int32_t cid : consts) {
            if (!rng.bernoulli(var_sub_prob)) continue;
            for (Term& t : q.args)
                if (t.is_const() && t.id == cid) t = make_var(next_var);
            ++next_var;
        }
        if (canon_seen.insert(canonical_rename(q)).second) queries.push_back(std::move(q));
    }
    if (static_cast<int>(queries.size()) < need)
        throw GenerationError("derived facts collapse to too few distinct queries; "
                              "generate a larger KB or chain more facts");

    QuerySet qs;
    qs.train.assign(queries.begin(), queries.begin() + n_train);
    qs.test.assign(queries.begin() + n_train, queries.begin() + need);
    return qs;
}

// ---- Files -------------------------------------------------------------------

namespace {

void write_vocab_header(std::ostream& os, const Vocabulary& v,
                        const std::map<std::string, std::string>& extra) {
    os << "% np=" << v.num_predicates() << " nc=" << v.num_constants()
       << " nv=" << v.num_variables() << " ma=" << v.max_arity() << "\n";
    os << "% arities=";
    for (int i = 0; i < v.num_predicates(); ++i) {
        if (i) os << ',';
        os << v.predicate(i).arity;
    }
    os << "\n";
    for (const auto& [k, val] : extra) os << "% " << k << "=" << val << "\n";
}

std::map<std::string, std::string> parse_header_line(const std::string& line,
                                                     std::map<std::string, std::string>& out) {
    std::istringstream ss(line.substr(1));
    std::string tok;
    while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

Vocabulary vocab_from_header(const std::map<std::string, std::string>& h) {
    auto get = [&](const char* k) {
        auto it = h.find(k);
        if (it == h.end()) throw ArtifactError(std::string("KB header missing ") + k);
        return it->second;
    };
    int np = std::stoi(get("np"));
    int nc = std::stoi(get("nc"));
    int nv = std::stoi(get("nv"));
    int ma = std::stoi(get("ma"));
    std::vector<int> arities;
    {
        std::istringstream ss(get("arities"));
        std::string piece;
        while (std::getline(ss, piece, ',')) arities.push_back(std::stoi(piece));
    }
    if (static_cast<int>(arities.size()) != np)
        throw ArtifactError("KB header arity list does not match np");
    Vocabulary v;
    for (int i = 0; i < np; ++i) v.add_predicate("p" + std::to_string(i), arities[i]);
    for (int i = 0; i < nc; ++i) v.add_constant("c" + std::to_string(i));
    for (int i = 0; i < nv; ++i) v.add_variable("V" + std::to_string(i));
    if (v.max_arity() != ma) throw ArtifactError("KB header ma does not match arities");
    v.check();
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    return is;
}

}  // namespace

std::map<std::string, std::string> read_header(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::map<std::string, std::string> h;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] != '%') break;
        parse_header_line(line, h);
    }
    return h;
}

void write_kb(const std::filesystem::path& path, const KnowledgeBase& kb,
              const std::map<std::string, std::string>& extra) {
    auto os = open_out(path);
    write_vocab_header(os, kb.vocabulary, extra);
    for (const Clause& c : kb.clauses) os << to_text(c, kb.vocabulary) << "\n";
}

KnowledgeBase read_kb(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::map<std::string, std::string> header;
    KnowledgeBase kb;
    std::string line;
    bool vocab_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '%') {
            if (!vocab_done) parse_header_line(line, header);
            continue;
        }
        if (!vocab_done) {
            kb.vocabulary = vocab_from_header(header);
            vocab_done = true;
        }
        kb.clauses.push_back(parse_clause(line, kb.vocabulary, SymbolPolicy::Strict));
    }
    if (!vocab_done) throw ArtifactError("KB file has no clauses: " + path.string());
    return kb;
}

void write_queries(const std::filesystem::path& path, const QuerySet& qs, const Vocabulary& v,
                   const std::map<std::string, std::string>& extra) {
    auto os = open_out(path);
    write_vocab_header(os, v, extra);
    os << "# train\n";
    for (const Atom& a : qs.train) os << to_text(a, v) << ".\n";
    os << "# test\n";
    for (const Atom& a : qs.test) os << to_text(a, v) << ".\n";
}

QuerySet read_queries(const std::filesystem::path& path, Vocabulary& v) {
    auto is = open_in(path);
    QuerySet qs;
    std::string line;
    std::vector<Atom>* section = nullptr;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '%') continue;
        if (line.rfind("# train", 0) == 0) {
            section = &qs.train;
            continue;
        }
        if (line.rfind("# test", 0) == 0) {
            section = &qs.test;
            continue;
        }
        if (!section) throw ArtifactError("query before section marker in " + path.string());
        section->push_back(parse_atom(line, v, SymbolPolicy::Strict));
    }
    return qs;
}

void write_atoms(const std::filesystem::path& path, const std::vector<Atom>& atoms,
                 const Vocabulary& v, const std::map<std::string, std::string>& extra) {
    auto os = open_out(path);
    for (const auto& [k, val] : extra) os << "% " << k << "=" << val << "\n";
    for (const Atom& a : atoms) os << to_text(a, v) << ".\n";
}

std::vector<Atom> read_atoms(const std::filesystem::path& path, Vocabulary& v) {
    auto is = open_in(path);
    std::vector<Atom> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '%' || line[0] == '#') continue;
        out.push_back(parse_atom(line, v, SymbolPolicy::Strict));
    }
    return out;
}

}  // namespace hornguide
