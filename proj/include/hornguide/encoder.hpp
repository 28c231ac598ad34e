#pragma once

#include <cstdint>
#include <vector>

#include "hornguide/logic.hpp"

namespace hornguide {

enum class VariableMode {
    Identity,   // variable-id one-hot; renamings encode differently
    Canonical,  // canonical_rename first; renamings collapse
};

// Width: np + ma * (2 + nv + nc). Layout per slot k: [is_var, is_empty,
// var one-hot (nv), const one-hot (nc)]. Entries are 0/1; a constant slot
// sets only its constant position, an empty slot only the empty flag.
int encoding_width(const Vocabulary& v);

// Dense 0/1 vector. Throws EncodingError on out-of-vocabulary symbols
// (variables with id >= nv under Identity).
std::vector<double> encode_atom(const Atom& a, const Vocabulary& v,
                                VariableMode mode = VariableMode::Identity);

// Indices of the 1-entries, ascending. Same contract as encode_atom; the
// network kernels consume this form.
std::vector<std::int32_t> encode_atom_sparse(const Atom& a, const Vocabulary& v,
                                             VariableMode mode = VariableMode::Identity);

// Maps variables minted during search (ids >= nv) back into the pool:
// in-pool ids are kept, fresh ids get the lowest pool ids the atom does not
// already use, in order of first occurrence. Identity on atoms that are
// already in-pool.
Atom fold_into_pool(const Atom& a, const Vocabulary& v);

}  // namespace hornguide
