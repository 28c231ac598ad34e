#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hornguide/logic.hpp"
#include "hornguide/rng.hpp"

namespace hornguide {

// The seven structural anchor types over unary/binary predicates.
enum class AnchorType {
    Binary2Consts,
    BinaryVarConst,  // either argument order
    Binary2Vars,
    BinaryDupVar,
    BinaryDupConst,
    UnaryConst,
    UnaryVar,
};

// Transformation policies. Positive policies keep the result unifiable with
// the anchor (shared variable names); negative ones break unifiability.
enum class Policy {
    OCNV,    // one const -> one new var                  (+)
    OCNC,    // one const -> new const                    (-)
    OADA,    // one arg -> duplicate of another           (+/-)
    OVNC,    // one var occurrence -> new const           (+)
    OVNV,    // one var occurrence -> new var             (+)
    NPAr,    // pred -> new pred of different arity       (-)
    NPAg,    // pred and args -> new, same arity          (-)
    NAllAg,  // all args -> new symbols, same pred        (-)
    NP,      // pred -> new pred of same arity, args kept (-)
    TNV,     // both args -> two new distinct vars        (+)
    TNC,     // both args -> two new distinct consts      (+/-)
    TNDV,    // both args -> one new var, duplicated      (+)
    TNDC,    // both args -> one new const, duplicated    (+)
    TNVC,    // both args -> new var + new const          (+)
    SWA,     // swap the two args                         (+)
};

enum class ExampleDifficulty { Easy, Hard };
enum class Polarity { Positive, Negative };

enum class TripletClass {
    Easy,        // (E+, E-)
    MediumEpHn,  // (E+, H-)
    MediumHpEn,  // (H+, E-)
    Hard,        // (H+, H-)
    Legacy,      // uniform-pool generator, no difficulty structure
};

const char* anchor_type_name(AnchorType t);
const char* policy_name(Policy p);
const char* triplet_class_name(TripletClass c);
TripletClass triplet_class_from_name(std::string_view s);
Policy policy_from_name(std::string_view s);

struct Triplet {
    Atom anchor;
    Atom positive;
    Atom negative;
    TripletClass cls{TripletClass::Easy};
    // -1 for legacy triplets.
    int positive_policy{-1};
    int negative_policy{-1};
    // requested class (0 easy / 1 medium / 2 hard, -1 legacy); differs from
    // cls when a hard request fell back.
    int requested{-1};
    bool fallback{false};
};

struct TripletDataset {
    std::vector<Triplet> triplets;
    int tpa{1};
    std::array<double, 3> mix{0.40, 0.50, 0.10};
    double repeat_chance{0.0};
    std::uint64_t vocab_hash{0};
    std::uint64_t seed{0};
    // requested easy/medium/hard counts
    std::array<std::size_t, 3> requested{0, 0, 0};
    // realized counts indexed by TripletClass
    std::array<std::size_t, 5> realized{0, 0, 0, 0, 0};
};

// Throws UnsupportedAnchorError for arity > 2.
AnchorType classify_anchor(const Atom& a);

// Policies listed for (anchor type, difficulty, polarity); empty span for
// empty cells (e.g. unary hard positives).
std::span<const Policy> policies_for(AnchorType t, ExampleDifficulty d, Polarity p);

// Predicate uniform; slot 1 is a variable with prob 1/2 (uniform over the
// pool) else a constant; each later slot repeats a uniformly chosen earlier
// slot with probability repeat_chance, else is drawn like slot 1.
Atom sample_atom(const Vocabulary& v, double repeat_chance, Rng& rng);

// Applies one policy. "New" symbols are drawn uniformly from the symbols of
// that kind not already in the anchor. Returns nullopt when the needed pool
// is empty. Throws for a (anchor type, policy) pair not in the table.
std::optional<Atom> apply_policy(const Atom& anchor, Policy p, const Vocabulary& v, Rng& rng);

struct GeneratedExample {
    Atom atom;
    Policy policy;
};

// Uniform choice among the cell's policies; falls through to the remaining
// ones when a policy comes back empty. The result is always label-checked
// against the anchor before being returned.
std::optional<GeneratedExample> gen_example(const Atom& anchor, ExampleDifficulty d, Polarity p,
                                            const Vocabulary& v, Rng& rng);

// requested: 0 easy, 1 medium, 2 hard. A hard request whose (H+, H-) pair is
// unrealizable degrades to medium (fallback flagged); a medium request with
// neither form realizable degrades to easy. Throws GenerationError when not
// even an easy triplet exists for the anchor.
Triplet gen_triplet(const Atom& anchor, int requested, const Vocabulary& v, Rng& rng);

// True when the anchor admits an easy positive and an easy negative, i.e.
// gen_triplet cannot fail on it.
bool anchor_usable(const Atom& anchor, const Vocabulary& v);

// ceil(n/tpa) distinct anchors (dedup by exact form), tpa triplets each
// (the last anchor takes the remainder), difficulty classes i.i.d. from
// mix. Per-anchor RNG streams keyed by anchor index make the output
// independent of scheduling; `parallel=false` is the serial reference.
TripletDataset gen_dataset(const Vocabulary& v, std::size_t n_triplets, int tpa,
                           std::array<double, 3> mix, double repeat_chance, std::uint64_t seed,
                           bool parallel = true);

// Baseline generator: a pool of uniform-random atoms; each pool atom in turn
// becomes an anchor and the pool is probed in random order for one unifying
// and one non-unifying partner; anchors with no unifying partner are
// skipped. The pool grows as needed until n_triplets are produced.
TripletDataset gen_dataset_legacy(const Vocabulary& v, std::size_t n_triplets, std::uint64_t seed,
                                  double repeat_chance = 0.0);

// TSV: anchor, positive, negative, class, pos_policy, neg_policy.
void write_triplets(const std::filesystem::path& path, const TripletDataset& ds,
                    const Vocabulary& v, const std::map<std::string, std::string>& extra = {});
TripletDataset read_triplets(const std::filesystem::path& path, Vocabulary& v);

}  // namespace hornguide
