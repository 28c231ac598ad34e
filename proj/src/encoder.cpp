#include "hornguide/encoder.hpp"

#include <algorithm>

namespace hornguide {

int encoding_width(const Vocabulary& v) {
    return v.num_predicates() + v.max_arity() * (2 + v.num_variables() + v.num_constants());
}

std::vector<std::int32_t> encode_atom_sparse(const Atom& a, const Vocabulary& v,
                                             VariableMode mode) {
    const Atom* atom = &a;
    Atom canon;
    if (mode == VariableMode::Canonical) {
        canon = canonical_rename(a);
        atom = &canon;
    }
    if (atom->predicate < 0 || atom->predicate >= v.num_predicates())
        throw EncodingError("predicate id out of vocabulary");
    if (static_cast<int>(atom->args.size()) > v.max_arity())
        throw EncodingError("atom arity exceeds vocabulary max arity");

    const int np = v.num_predicates();
    const int nv = v.num_variables();
    const int nc = v.num_constants();
    const int slot_width = 2 + nv + nc;

    std::vector<std::int32_t> active;
    active.reserve(1 + v.max_arity() * 2);
    active.push_back(atom->predicate);
    for (int k = 0; k < v.max_arity(); ++k) {
        const int base = np + k * slot_width;
        if (k >= static_cast<int>(atom->args.size())) {
            active.push_back(base + 1);  // empty flag
            continue;
        }
        const Term& t = atom->args[k];
        if (t.is_var()) {
            if (t.id < 0 || t.id >= nv)
                throw EncodingError("variable id out of vocabulary (fold fresh variables first)");
            active.push_back(base);  // is_var flag
            active.push_back(base + 2 + t.id);
        } else {
            if (t.id < 0 || t.id >= nc) throw EncodingError("constant id out of vocabulary");
            active.push_back(base + 2 + nv + t.id);
        }
    }
    return active;
}

std::vector<double> encode_atom(const Atom& a, const Vocabulary& v, VariableMode mode) {
    std::vector<double> out(encoding_width(v), 0.0);
    for (std::int32_t i : encode_atom_sparse(a, v, mode)) out[i] = 1.0;
    return out;
}

Atom fold_into_pool(const Atom& a, const Vocabulary& v) {
    const std::int32_t nv = v.num_variables();
    bool needs = false;
    for (const Term& t : a.args)
        if (t.is_var() && t.id >= nv) needs = true;
    if (!needs) return a;

    std::vector<std::int32_t> in_use;
    for (const Term& t : a.args)
        if (t.is_var() && t.id < nv) in_use.push_back(t.id);

    Atom out = a;
    std::vector<std::pair<std::int32_t, std::int32_t>> map;
    std::int32_t cursor = 0;
    for (Term& t : out.args) {
        if (!t.is_var() || t.id < nv) continue;
        std::int32_t target = -1;
        for (const auto& [from, to] : map)
            if (from == t.id) target = to;
        if (target < 0) {
            while (cursor < nv &&
                   std::find(in_use.begin(), in_use.end(), cursor) != in_use.end())
                ++cursor;
            // pool exhausted: wrap (only reachable when arity > nv)
            target = cursor < nv ? cursor : static_cast<std::int32_t>(map.size()) % nv;
            if (cursor < nv) ++cursor;
            map.emplace_back(t.id, target);
        }
        t = make_var(target);
    }
    return out;
}

}  // namespace hornguide
