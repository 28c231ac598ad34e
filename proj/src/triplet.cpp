#include "hornguide/triplet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hornguide/parallel.hpp"

namespace hornguide {

const char* anchor_type_name(AnchorType t) {
    switch (t) {
        case AnchorType::Binary2Consts: return "binary_2consts";
        case AnchorType::BinaryVarConst: return "binary_var_const";
        case AnchorType::Binary2Vars: return "binary_2vars";
        case AnchorType::BinaryDupVar: return "binary_dup_var";
        case AnchorType::BinaryDupConst: return "binary_dup_const";
        case AnchorType::UnaryConst: return "unary_const";
        case AnchorType::UnaryVar: return "unary_var";
    }
    return "?";
}

const char* policy_name(Policy p) {
    switch (p) {
        case Policy::OCNV: return "OCNV";
        case Policy::OCNC: return "OCNC";
        case Policy::OADA: return "OADA";
        case Policy::OVNC: return "OVNC";
        case Policy::OVNV: return "OVNV";
        case Policy::NPAr: return "NPAr";
        case Policy::NPAg: return "NPAg";
        case Policy::NAllAg: return "NAllAg";
        case Policy::NP: return "NP";
        case Policy::TNV: return "TNV";
        case Policy::TNC: return "TNC";
        case Policy::TNDV: return "TNDV";
        case Policy::TNDC: return "TNDC";
        case Policy::TNVC: return "TNVC";
        case Policy::SWA: return "SWA";
    }
    return "?";
}

const char* triplet_class_name(TripletClass c) {
    switch (c) {
        case TripletClass::Easy: return "easy";
        case TripletClass::MediumEpHn: return "medium_ep_hn";
        case TripletClass::MediumHpEn: return "medium_hp_en";
        case TripletClass::Hard: return "hard";
        case TripletClass::Legacy: return "legacy";
    }
    return "?";
}

TripletClass triplet_class_from_name(std::string_view s) {
    if (s == "easy") return TripletClass::Easy;
    if (s == "medium_ep_hn") return TripletClass::MediumEpHn;
    if (s == "medium_hp_en") return TripletClass::MediumHpEn;
    if (s == "hard") return TripletClass::Hard;
    if (s == "legacy") return TripletClass::Legacy;
    throw MalformedInputError("unknown triplet class: " + std::string(s));
}

Policy policy_from_name(std::string_view s) {
    static const Policy all[] = {Policy::OCNV, Policy::OCNC, Policy::OADA, Policy::OVNC,
                                 Policy::OVNV, Policy::NPAr, Policy::NPAg, Policy::NAllAg,
                                 Policy::NP,   Policy::TNV,  Policy::TNC,  Policy::TNDV,
                                 Policy::TNDC, Policy::TNVC, Policy::SWA};
    for (Policy p : all)
        if (s == policy_name(p)) return p;
    throw MalformedInputError("unknown policy: " + std::string(s));
}

AnchorType classify_anchor(const Atom& a) {
    if (a.args.size() > 2)
        throw UnsupportedAnchorError("anchor classification requires arity <= 2");
    if (a.args.size() == 1)
        return a.args[0].is_var() ? AnchorType::UnaryVar : AnchorType::UnaryConst;
    const Term& x = a.args[0];
    const Term& y = a.args[1];
    if (x.is_var() && y.is_var()) return x.id == y.id ? AnchorType::BinaryDupVar
                                                      : AnchorType::Binary2Vars;
    if (x.is_const() && y.is_const()) return x.id == y.id ? AnchorType::BinaryDupConst
                                                          : AnchorType::Binary2Consts;
    return AnchorType::BinaryVarConst;
}

namespace {

using PolicyList = std::vector<Policy>;

struct AnchorRow {
    PolicyList easy_pos, hard_pos, easy_neg, hard_neg;
};

// One row per anchor type. The cells define which transformations yield
// easy/hard positives and negatives for that structure.
const AnchorRow& row_for(AnchorType t) {
    static const AnchorRow binary_2consts{
        {Policy::OCNV},
        {Policy::TNV},
        {Policy::NPAr, Policy::NPAg, Policy::NAllAg},
        {Policy::OCNC, Policy::OADA, Policy::NP}};
    static const AnchorRow binary_var_const{
        {Policy::OCNV, Policy::OADA, Policy::OVNC, Policy::OVNV},
        {Policy::TNV},
        {Policy::NPAr, Policy::NPAg, Policy::NAllAg},
        {Policy::OCNC, Policy::NP}};
    static const AnchorRow binary_2vars{
        {Policy::OADA, Policy::OVNC, Policy::OVNV},
        {Policy::TNV, Policy::TNC, Policy::TNDV, Policy::TNDC, Policy::SWA},
        {Policy::NPAr, Policy::NPAg},
        {Policy::NP}};
    static const AnchorRow binary_dup_var{
        {Policy::OVNC, Policy::OVNV},
        {Policy::TNDV, Policy::TNDC, Policy::TNVC},
        {Policy::NPAr, Policy::NPAg},
        {Policy::TNC}};
    static const AnchorRow binary_dup_const{
        {Policy::OCNV},
        {Policy::TNDV, Policy::TNV},
        {Policy::NPAr, Policy::NPAg, Policy::NAllAg},
        {Policy::OCNC, Policy::NP}};
    static const AnchorRow unary_const{
        {Policy::OCNV},
        {},
        {Policy::NPAr, Policy::NPAg},
        {Policy::OCNC, Policy::NP}};
    static const AnchorRow unary_var{
        {Policy::OVNC, Policy::OVNV},
        {},
        {Policy::NPAr, Policy::NPAg},
        {Policy::NP}};
    switch (t) {
        case AnchorType::Binary2Consts: return binary_2consts;
        case AnchorType::BinaryVarConst: return binary_var_const;
        case AnchorType::Binary2Vars: return binary_2vars;
        case AnchorType::BinaryDupVar: return binary_dup_var;
        case AnchorType::BinaryDupConst: return binary_dup_const;
        case AnchorType::UnaryConst: return unary_const;
        case AnchorType::UnaryVar: return unary_var;
    }
    return binary_2consts;
}

}  // namespace

std::span<const Policy> policies_for(AnchorType t, ExampleDifficulty d, Polarity p) {
    const AnchorRow& row = row_for(t);
    if (d == ExampleDifficulty::Easy)
        return p == Polarity::Positive ? row.easy_pos : row.easy_neg;
    return p == Polarity::Positive ? row.hard_pos : row.hard_neg;
}

Atom sample_atom(const Vocabulary& v, double repeat_chance, Rng& rng) {
    Atom a;
    a.predicate = static_cast<std::int32_t>(rng.index(v.num_predicates()));
    int arity = v.predicate(a.predicate).arity;
    a.args.reserve(arity);
    auto fresh_term = [&]() -> Term {
        if (rng.bernoulli(0.5))
            return make_var(static_cast<std::int32_t>(rng.index(v.num_variables())));
        return make_const(static_cast<std::int32_t>(rng.index(v.num_constants())));
    };
    for (int k = 0; k < arity; ++k) {
        if (k >= 1 && rng.bernoulli(repeat_chance)) {
            a.args.push_back(a.args[rng.index(a.args.size())]);
        } else {
            a.args.push_back(fresh_term());
        }
    }
    return a;
}

namespace {

std::vector<std::int32_t> vars_of(const Atom& a) {
    std::vector<std::int32_t> out;
    for (const Term& t : a.args)
        if (t.is_var() && std::find(out.begin(), out.end(), t.id) == out.end()) out.push_back(t.id);
    return out;
}

std::vector<std::int32_t> consts_of(const Atom& a) {
    std::vector<std::int32_t> out;
    for (const Term& t : a.args)
        if (t.is_const() && std::find(out.begin(), out.end(), t.id) == out.end())
            out.push_back(t.id);
    return out;
}

// Uniform draw from {0..n-1} minus `used`; -1 when empty.
std::int32_t draw_new(std::int32_t n, const std::vector<std::int32_t>& used, Rng& rng) {
    std::int32_t avail = n - static_cast<std::int32_t>(used.size());
    if (avail <= 0) return -1;
    std::int32_t k = static_cast<std::int32_t>(rng.index(avail));
    // k-th id not in `used` (used is small)
    std::vector<std::int32_t> sorted = used;
    std::sort(sorted.begin(), sorted.end());
    for (std::int32_t u : sorted) {
        if (u <= k) ++k;
    }
    return k;
}

std::vector<std::size_t> positions_of_kind(const Atom& a, TermKind kind) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (a.args[i].kind == kind) out.push_back(i);
    return out;
}

bool policy_in_row(AnchorType t, Policy p) {
    for (auto d : {ExampleDifficulty::Easy, ExampleDifficulty::Hard})
        for (auto pol : {Polarity::Positive, Polarity::Negative}) {
            auto cell = policies_for(t, d, pol);
            if (std::find(cell.begin(), cell.end(), p) != cell.end()) return true;
        }
    return false;
}

}  // namespace

std::optional<Atom> apply_policy(const Atom& anchor, Policy p, const Vocabulary& v, Rng& rng) {
    AnchorType type = classify_anchor(anchor);
    if (!policy_in_row(type, p))
        throw Error(std::string("policy ") + policy_name(p) + " not applicable to anchor type " +
                    anchor_type_name(type));

    const auto avars = vars_of(anchor);
    const auto aconsts = consts_of(anchor);
    const std::int32_t nv = v.num_variables();
    const std::int32_t nc = v.num_constants();
    Atom out = anchor;

    auto new_var = [&]() { return draw_new(nv, avars, rng); };
    auto new_const = [&]() { return draw_new(nc, aconsts, rng); };

    switch (p) {
        case Policy::OCNV: {
            auto pos = positions_of_kind(anchor, TermKind::Constant);
            if (pos.empty()) return std::nullopt;
            std::int32_t nvid = new_var();
            if (nvid < 0) return std::nullopt;
            out.args[pos[rng.index(pos.size())]] = make_var(nvid);
            return out;
        }
        case Policy::OCNC: {
            auto pos = positions_of_kind(anchor, TermKind::Constant);
            if (pos.empty()) return std::nullopt;
            std::int32_t ncid = new_const();
            if (ncid < 0) return std::nullopt;
            out.args[pos[rng.index(pos.size())]] = make_const(ncid);
            return out;
        }
        case Policy::OADA: {
            // ordered (target, source) pairs with differing argument values
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t i = 0; i < anchor.args.size(); ++i)
                for (std::size_t j = 0; j < anchor.args.size(); ++j)
                    if (i != j && !(anchor.args[i] == anchor.args[j])) pairs.emplace_back(i, j);
            if (pairs.empty()) return std::nullopt;
            auto [tgt, src] = pairs[rng.index(pairs.size())];
            out.args[tgt] = anchor.args[src];
            return out;
        }
        case Policy::OVNC: {
            auto pos = positions_of_kind(anchor, TermKind::Variable);
            if (pos.empty()) return std::nullopt;
            std::int32_t ncid = new_const();
            if (ncid < 0) return std::nullopt;
            out.args[pos[rng.index(pos.size())]] = make_const(ncid);
            return out;
        }
        case Policy::OVNV: {
            auto pos = positions_of_kind(anchor, TermKind::Variable);
            if (pos.empty()) return std::nullopt;
            std::int32_t nvid = new_var();
            if (nvid < 0) return std::nullopt;
            out.args[pos[rng.index(pos.size())]] = make_var(nvid);
            return out;
        }
        case Policy::NPAr:
        case Policy::NPAg: {
            int aar = static_cast<int>(anchor.args.size());
            std::vector<std::int32_t> cands;
            for (std::int32_t i = 0; i < v.num_predicates(); ++i) {
                if (p == Policy::NPAr && v.predicate(i).arity != aar) cands.push_back(i);
                if (p == Policy::NPAg && i != anchor.predicate && v.predicate(i).arity == aar)
                    cands.push_back(i);
            }
            if (cands.empty()) return std::nullopt;
            out.predicate = cands[rng.index(cands.size())];
            int arity = v.predicate(out.predicate).arity;
            out.args.clear();
            for (int i = 0; i < arity; ++i) {
                bool want_var = rng.bernoulli(0.5);
                std::int32_t nvid = want_var ? new_var() : -1;
                std::int32_t ncid = want_var ? -1 : new_const();
                if (want_var && nvid < 0) ncid = new_const();
                if (!want_var && ncid < 0) nvid = new_var();
                if (nvid >= 0)
                    out.args.push_back(make_var(nvid));
                else if (ncid >= 0)
                    out.args.push_back(make_const(ncid));
                else
                    return std::nullopt;
            }
            return out;
        }
        case Policy::NAllAg: {
            // Must come out non-unifiable; random mixes are retried and the
            // all-new-constants form (guaranteed when the anchor has a
            // constant argument) is the fallback.
            for (int attempt = 0; attempt < 16; ++attempt) {
                Atom cand = anchor;
                bool ok = true;
                for (std::size_t i = 0; i < cand.args.size(); ++i) {
                    bool want_var = rng.bernoulli(0.5);
                    std::int32_t id = want_var ? new_var() : new_const();
                    if (id < 0) {
                        want_var = !want_var;
                        id = want_var ? new_var() : new_const();
                    }
                    if (id < 0) {
                        ok = false;
                        break;
                    }
                    cand.args[i] = want_var ? make_var(id) : make_const(id);
                }
                if (ok && !unifiable(anchor, cand, UnifyMode::SharedNames)) return cand;
            }
            Atom cand = anchor;
            std::vector<std::int32_t> used = aconsts;
            for (std::size_t i = 0; i < cand.args.size(); ++i) {
                std::int32_t id = draw_new(nc, used, rng);
                if (id < 0) return std::nullopt;
                used.push_back(id);
                cand.args[i] = make_const(id);
            }
            if (unifiable(anchor, cand, UnifyMode::SharedNames)) return std::nullopt;
            return cand;
        }
        case Policy::NP: {
            std::vector<std::int32_t> cands;
            for (std::int32_t i = 0; i < v.num_predicates(); ++i)
                if (i != anchor.predicate &&
                    v.predicate(i).arity == static_cast<int>(anchor.args.size()))
                    cands.push_back(i);
            if (cands.empty()) return std::nullopt;
            out.predicate = cands[rng.index(cands.size())];
            return out;
        }
        case Policy::TNV: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::int32_t v1 = new_var();
            if (v1 < 0) return std::nullopt;
            auto used = avars;
            used.push_back(v1);
            std::int32_t v2 = draw_new(nv, used, rng);
            if (v2 < 0) return std::nullopt;
            out.args[0] = make_var(v1);
            out.args[1] = make_var(v2);
            return out;
        }
        case Policy::TNC: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::int32_t c1 = new_const();
            if (c1 < 0) return std::nullopt;
            auto used = aconsts;
            used.push_back(c1);
            std::int32_t c2 = draw_new(nc, used, rng);
            if (c2 < 0) return std::nullopt;
            out.args[0] = make_const(c1);
            out.args[1] = make_const(c2);
            return out;
        }
        case Policy::TNDV: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::int32_t nvid = new_var();
            if (nvid < 0) return std::nullopt;
            out.args[0] = out.args[1] = make_var(nvid);
            return out;
        }
        case Policy::TNDC: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::int32_t ncid = new_const();
            if (ncid < 0) return std::nullopt;
            out.args[0] = out.args[1] = make_const(ncid);
            return out;
        }
        case Policy::TNVC: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::int32_t nvid = new_var();
            std::int32_t ncid = new_const();
            if (nvid < 0 || ncid < 0) return std::nullopt;
            bool var_first = rng.bernoulli(0.5);
            out.args[var_first ? 0 : 1] = make_var(nvid);
            out.args[var_first ? 1 : 0] = make_const(ncid);
            return out;
        }
        case Policy::SWA: {
            if (anchor.args.size() != 2) return std::nullopt;
            std::swap(out.args[0], out.args[1]);
            if (out == anchor) return std::nullopt;
            return out;
        }
    }
    return std::nullopt;
}

std::optional<GeneratedExample> gen_example(const Atom& anchor, ExampleDifficulty d, Polarity p,
                                            const Vocabulary& v, Rng& rng) {
    auto cell = policies_for(classify_anchor(anchor), d, p);
    std::vector<Policy> cands(cell.begin(), cell.end());
    while (!cands.empty()) {
        std::size_t i = rng.index(cands.size());
        Policy pol = cands[i];
        if (auto atom = apply_policy(anchor, pol, v, rng)) {
            bool unifies = unifiable(anchor, *atom, UnifyMode::SharedNames);
            if (unifies == (p == Polarity::Positive)) return GeneratedExample{*atom, pol};
        }
        cands.erase(cands.begin() + i);
    }
    return std::nullopt;
}

Triplet gen_triplet(const Atom& anchor, int requested, const Vocabulary& v, Rng& rng) {
    auto make = [&](const GeneratedExample& pos, const GeneratedExample& neg, TripletClass cls,
                    bool fallback) {
        Triplet t;
        t.anchor = anchor;
        t.positive = pos.atom;
        t.negative = neg.atom;
        t.cls = cls;
        t.positive_policy = static_cast<int>(pos.policy);
        t.negative_policy = static_cast<int>(neg.policy);
        t.requested = requested;
        t.fallback = fallback;
        return t;
    };

    bool fallback = false;
    int level = requested;
    if (level == 2) {
        auto hp = gen_example(anchor, ExampleDifficulty::Hard, Polarity::Positive, v, rng);
        auto hn = gen_example(anchor, ExampleDifficulty::Hard, Polarity::Negative, v, rng);
        if (hp && hn) return make(*hp, *hn, TripletClass::Hard, false);
        fallback = true;
        level = 1;
    }
    if (level == 1) {
        auto ep = gen_example(anchor, ExampleDifficulty::Easy, Polarity::Positive, v, rng);
        auto hn = gen_example(anchor, ExampleDifficulty::Hard, Polarity::Negative, v, rng);
        auto hp = gen_example(anchor, ExampleDifficulty::Hard, Polarity::Positive, v, rng);
        auto en = gen_example(anchor, ExampleDifficulty::Easy, Polarity::Negative, v, rng);
        bool form_a = ep && hn;
        bool form_b = hp && en;
        if (form_a && form_b) {
            if (rng.bernoulli(0.5)) return make(*ep, *hn, TripletClass::MediumEpHn, fallback);
            return make(*hp, *en, TripletClass::MediumHpEn, fallback);
        }
        if (form_a) return make(*ep, *hn, TripletClass::MediumEpHn, fallback);
        if (form_b) return make(*hp, *en, TripletClass::MediumHpEn, fallback);
        fallback = true;
        level = 0;
    }
    auto ep = gen_example(anchor, ExampleDifficulty::Easy, Polarity::Positive, v, rng);
    auto en = gen_example(anchor, ExampleDifficulty::Easy, Polarity::Negative, v, rng);
    if (!ep || !en)
        throw GenerationError("no easy triplet exists for anchor " + to_text(anchor, v));
    return make(*ep, *en, TripletClass::Easy, fallback || requested != 0);
}

bool anchor_usable(const Atom& anchor, const Vocabulary& v) {
    // Structural check, no RNG: some easy-positive and easy-negative policy
    // must have a non-empty pool.
    AnchorType t = classify_anchor(anchor);
    auto avars = vars_of(anchor);
    auto aconsts = consts_of(anchor);
    bool new_var_ok = static_cast<int>(avars.size()) < v.num_variables();
    bool new_const_ok = static_cast<int>(aconsts.size()) < v.num_constants();
    bool has_const = !aconsts.empty();
    bool has_var = !avars.empty();
    int aar = static_cast<int>(anchor.args.size());

    bool pos_ok = false;
    for (Policy p : policies_for(t, ExampleDifficulty::Easy, Polarity::Positive)) {
        switch (p) {
            case Policy::OCNV: pos_ok |= has_const && new_var_ok; break;
            case Policy::OADA: pos_ok |= aar == 2 && !(anchor.args[0] == anchor.args[1]); break;
            case Policy::OVNC: pos_ok |= has_var && new_const_ok; break;
            case Policy::OVNV: pos_ok |= has_var && new_var_ok; break;
            default: break;
        }
        if (pos_ok) break;
    }
    if (!pos_ok) return false;

    bool diff_arity = false, same_arity_other = false;
    for (std::int32_t i = 0; i < v.num_predicates(); ++i) {
        if (v.predicate(i).arity != aar) diff_arity = true;
        if (i != anchor.predicate && v.predicate(i).arity == aar) same_arity_other = true;
    }
    bool neg_ok = false;
    for (Policy p : policies_for(t, ExampleDifficulty::Easy, Polarity::Negative)) {
        switch (p) {
            case Policy::NPAr: neg_ok |= diff_arity && (new_var_ok || new_const_ok); break;
            case Policy::NPAg: neg_ok |= same_arity_other && (new_var_ok || new_const_ok); break;
            case Policy::NAllAg:
                // all-new-constants fallback needs `arity` fresh constants
                neg_ok |= has_const &&
                          v.num_constants() - static_cast<int>(aconsts.size()) >= aar;
                break;
            default: break;
        }
        if (neg_ok) break;
    }
    return neg_ok;
}

namespace {

int draw_class(const std::array<double, 3>& mix, Rng& rng) {
    double u = rng.uniform();
    if (u < mix[0]) return 0;
    if (u < mix[0] + mix[1]) return 1;
    return 2;
}

double max_unique_atoms(const Vocabulary& v) {
    return static_cast<double>(v.num_predicates()) *
           std::pow(static_cast<double>(v.num_constants() + v.num_variables()),
                    static_cast<double>(v.max_arity()));
}

}  // namespace

TripletDataset gen_dataset(const Vocabulary& v, std::size_t n_triplets, int tpa,
                           std::array<double, 3> mix, double repeat_chance, std::uint64_t seed,
                           bool parallel) {
    if (tpa < 1) throw GenerationError("tpa must be >= 1");
    TripletDataset ds;
    ds.tpa = tpa;
    ds.mix = mix;
    ds.repeat_chance = repeat_chance;
    ds.vocab_hash = v.hash();
    ds.seed = seed;
    if (n_triplets == 0) return ds;

    const std::size_t n_anchors = (n_triplets + tpa - 1) / tpa;
    if (static_cast<double>(n_anchors) > max_unique_atoms(v))
        throw GenerationError(
            "anchor space exhausted: need " + std::to_string(n_anchors) +
            " distinct anchors but the vocabulary admits only np*(nc+nv)^ma = " +
            std::to_string(static_cast<long long>(max_unique_atoms(v))) + " atoms");

    // Phase 1 (sequential): distinct, usable anchors.
    Rng anchor_rng = Rng::derive(seed, 0);
    std::vector<Atom> anchors;
    anchors.reserve(n_anchors);
    std::unordered_set<Atom, AtomHash> seen;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 + 200 * n_anchors;
    while (anchors.size() < n_anchors) {
        if (++attempts > max_attempts)
            throw GenerationError("could not sample enough distinct usable anchors "
                                  "(np*(nc+nv)^ma too small for the request)");
        Atom a = sample_atom(v, repeat_chance, anchor_rng);
        if (!anchor_usable(a, v)) continue;
        if (seen.insert(a).second) anchors.push_back(std::move(a));
    }

    // Phase 2 (parallel by anchor): per-anchor streams; anchor i owns
    // triplet slots [i*tpa, min((i+1)*tpa, n)).
    ds.triplets.resize(n_triplets);
    parallel_for(anchors.size(), parallel, [&](std::size_t ai) {
        Rng rng = Rng::derive(seed, 1 + ai);
        std::size_t begin = ai * static_cast<std::size_t>(tpa);
        std::size_t end = std::min(begin + static_cast<std::size_t>(tpa), n_triplets);
        for (std::size_t i = begin; i < end; ++i) {
            int cls = draw_class(mix, rng);
            ds.triplets[i] = gen_triplet(anchors[ai], cls, v, rng);
        }
    });

    for (const Triplet& t : ds.triplets) {
        if (t.requested >= 0 && t.requested < 3) ++ds.requested[t.requested];
        ++ds.realized[static_cast<int>(t.cls)];
    }
    return ds;
}

TripletDataset gen_dataset_legacy(const Vocabulary& v, std::size_t n_triplets, std::uint64_t seed,
                                  double repeat_chance) {
    TripletDataset ds;
    ds.tpa = 1;
    ds.mix = {0.0, 0.0, 0.0};
    ds.repeat_chance = repeat_chance;
    ds.vocab_hash = v.hash();
    ds.seed = seed;
    if (n_triplets == 0) return ds;

    Rng pool_rng = Rng::derive(seed, 0);
    Rng probe_rng = Rng::derive(seed, 1);

    std::vector<Atom> pool;
    auto grow_pool = [&](std::size_t by) {
        pool.reserve(pool.size() + by);
        for (std::size_t i = 0; i < by; ++i) pool.push_back(sample_atom(v, repeat_chance, pool_rng));
    };
    grow_pool(std::max<std::size_t>(2 * n_triplets, 1000));

    std::size_t anchor_idx = 0;
    while (ds.triplets.size() < n_triplets) {
        if (anchor_idx >= pool.size()) grow_pool(std::max<std::size_t>(n_triplets, 1000));
        const Atom& anchor = pool[anchor_idx];

        // Random-order probe of the pool for a unifying partner; a linear
        // sweep settles existence when probing misses.
        std::optional<std::size_t> pos_idx;
        const std::size_t probe_budget = 2000;
        for (std::size_t k = 0; k < probe_budget; ++k) {
            std::size_t j = probe_rng.index(pool.size());
            if (j == anchor_idx) continue;
            if (unifiable(anchor, pool[j], UnifyMode::SharedNames)) {
                pos_idx = j;
                break;
            }
        }
        if (!pos_idx) {
            std::size_t start = probe_rng.index(pool.size());
            for (std::size_t k = 0; k < pool.size(); ++k) {
                std::size_t j = (start + k) % pool.size();
                if (j == anchor_idx) continue;
                if (unifiable(anchor, pool[j], UnifyMode::SharedNames)) {
                    pos_idx = j;
                    break;
                }
            }
        }
        std::optional<std::size_t> neg_idx;
        for (std::size_t k = 0; k < probe_budget && !neg_idx; ++k) {
            std::size_t j = probe_rng.index(pool.size());
            if (j == anchor_idx) continue;
            if (!unifiable(anchor, pool[j], UnifyMode::SharedNames)) neg_idx = j;
        }
        if (!neg_idx) {
            std::size_t start = probe_rng.index(pool.size());
            for (std::size_t k = 0; k < pool.size(); ++k) {
                std::size_t j = (start + k) % pool.size();
                if (j == anchor_idx) continue;
                if (!unifiable(anchor, pool[j], UnifyMode::SharedNames)) {
                    neg_idx = j;
                    break;
                }
            }
        }

        if (pos_idx && neg_idx) {
            Triplet t;
            t.anchor = anchor;
            t.positive = pool[*pos_idx];
            t.negative = pool[*neg_idx];
            t.cls = TripletClass::Legacy;
            ds.triplets.push_back(std::move(t));
        }
        ++anchor_idx;
    }
    ds.realized[static_cast<int>(TripletClass::Legacy)] = ds.triplets.size();
    return ds;
}

// ---- Files -------------------------------------------------------------------

void write_triplets(const std::filesystem::path& path, const TripletDataset& ds,
                    const Vocabulary& v, const std::map<std::string, std::string>& extra) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    os << "% np=" << v.num_predicates() << " nc=" << v.num_constants()
       << " nv=" << v.num_variables() << " ma=" << v.max_arity() << "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%% seed=%llu tpa=%d mix=%.4f,%.4f,%.4f repeat_chance=%.4f",
                  static_cast<unsigned long long>(ds.seed), ds.tpa, ds.mix[0], ds.mix[1],
                  ds.mix[2], ds.repeat_chance);
    os << buf << "\n";
    os << "% requested easy=" << ds.requested[0] << " medium=" << ds.requested[1]
       << " hard=" << ds.requested[2] << "\n";
    os << "% realized easy=" << ds.realized[0] << " medium_ep_hn=" << ds.realized[1]
       << " medium_hp_en=" << ds.realized[2] << " hard=" << ds.realized[3]
       << " legacy=" << ds.realized[4] << "\n";
    for (const auto& [k, val] : extra) os << "% " << k << "=" << val << "\n";
    for (const Triplet& t : ds.triplets) {
        os << to_text(t.anchor, v) << '\t' << to_text(t.positive, v) << '\t'
           << to_text(t.negative, v) << '\t' << triplet_class_name(t.cls) << '\t'
           << (t.positive_policy >= 0 ? policy_name(static_cast<Policy>(t.positive_policy)) : "-")
           << '\t'
           << (t.negative_policy >= 0 ? policy_name(static_cast<Policy>(t.negative_policy)) : "-")
           << "\n";
    }
}

TripletDataset read_triplets(const std::filesystem::path& path, Vocabulary& v) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    TripletDataset ds;
    ds.vocab_hash = v.hash();
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '%') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string k = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (k == "tpa") ds.tpa = std::stoi(val);
                if (k == "seed") ds.seed = std::stoull(val);
                if (k == "repeat_chance") ds.repeat_chance = std::stod(val);
                if (k == "mix") {
                    std::istringstream ms(val);
                    std::string piece;
                    int i = 0;
                    while (std::getline(ms, piece, ',') && i < 3) ds.mix[i++] = std::stod(piece);
                }
            }
            continue;
        }
        std::istringstream ss(line);
        std::string anchor, pos, neg, cls, pp, np;
        if (!std::getline(ss, anchor, '\t') || !std::getline(ss, pos, '\t') ||
            !std::getline(ss, neg, '\t') || !std::getline(ss, cls, '\t') ||
            !std::getline(ss, pp, '\t') || !std::getline(ss, np, '\t'))
            throw ArtifactError("bad triplet line in " + path.string());
        Triplet t;
        t.anchor = parse_atom(anchor, v, SymbolPolicy::Strict);
        t.positive = parse_atom(pos, v, SymbolPolicy::Strict);
        t.negative = parse_atom(neg, v, SymbolPolicy::Strict);
        t.cls = triplet_class_from_name(cls);
        if (pp != "-") t.positive_policy = static_cast<int>(policy_from_name(pp));
        if (np != "-") t.negative_policy = static_cast<int>(policy_from_name(np));
        ++ds.realized[static_cast<int>(t.cls)];
        ds.triplets.push_back(std::move(t));
    }
    return ds;
}

}  // namespace hornguide
