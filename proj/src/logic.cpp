#include "hornguide/logic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace hornguide {

std::int32_t Vocabulary::add_predicate(std::string name, int arity) {
    if (arity < 1) throw MalformedInputError("predicate arity must be >= 1: " + name);
    auto it = pred_index_.find(name);
    if (it != pred_index_.end()) {
        if (predicates_[it->second].arity != arity)
            throw MalformedInputError("predicate " + name + " redeclared with different arity");
        return it->second;
    }
    std::int32_t id = static_cast<std::int32_t>(predicates_.size());
    pred_index_.emplace(name, id);
    predicates_.push_back(PredicateInfo{std::move(name), arity});
    max_arity_ = std::max(max_arity_, arity);
    return id;
}

std::int32_t Vocabulary::add_constant(std::string name) {
    auto it = const_index_.find(name);
    if (it != const_index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(constants_.size());
    const_index_.emplace(name, id);
    constants_.push_back(std::move(name));
    return id;
}

std::int32_t Vocabulary::add_variable(std::string name) {
    auto it = var_index_.find(name);
    if (it != var_index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(variables_.size());
    var_index_.emplace(name, id);
    variables_.push_back(std::move(name));
    return id;
}

std::int32_t Vocabulary::find_predicate(std::string_view name) const {
    auto it = pred_index_.find(std::string(name));
    return it == pred_index_.end() ? -1 : it->second;
}

std::int32_t Vocabulary::find_constant(std::string_view name) const {
    auto it = const_index_.find(std::string(name));
    return it == const_index_.end() ? -1 : it->second;
}

std::int32_t Vocabulary::find_variable(std::string_view name) const {
    auto it = var_index_.find(std::string(name));
    return it == var_index_.end() ? -1 : it->second;
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    auto mix_str = [&](const std::string& s) {
        for (unsigned char c : s) mix_byte(c);
        mix_byte(0);
    };
    auto mix_int = [&](std::int64_t v) {
        for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    };
    mix_int(num_predicates());
    for (const auto& p : predicates_) {
        mix_str(p.name);
        mix_int(p.arity);
    }
    mix_int(num_constants());
    for (const auto& c : constants_) mix_str(c);
    mix_int(num_variables());
    for (const auto& v : variables_) mix_str(v);
    mix_int(max_arity_);
    return h;
}

void Vocabulary::check() const {
    if (predicates_.empty()) throw MalformedInputError("vocabulary has no predicates");
    if (constants_.empty()) throw MalformedInputError("vocabulary has no constants");
    if (variables_.empty()) throw MalformedInputError("vocabulary has no variables");
    bool has_max = false;
    for (const auto& p : predicates_) {
        if (p.arity < 1 || p.arity > max_arity_)
            throw MalformedInputError("predicate " + p.name + " arity out of range");
        if (p.arity == max_arity_) has_max = true;
    }
    if (!has_max) throw MalformedInputError("no predicate of max arity");
}

bool is_ground(const Atom& a) {
    for (const Term& t : a.args)
        if (t.is_var()) return false;
    return true;
}

bool is_ground(const Clause& c) {
    if (!is_ground(c.head)) return false;
    for (const Atom& a : c.body)
        if (!is_ground(a)) return false;
    return true;
}

bool is_safe(const Clause& c) {
    for (const Term& t : c.head.args) {
        if (!t.is_var()) continue;
        bool found = false;
        for (const Atom& b : c.body) {
            for (const Term& u : b.args) {
                if (u.is_var() && u.id == t.id) {
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        if (!found) return false;
    }
    return true;
}

void validate_atom(const Atom& a, const Vocabulary& v) {
    if (a.predicate < 0 || a.predicate >= v.num_predicates())
        throw MalformedInputError("predicate id out of range");
    const PredicateInfo& p = v.predicate(a.predicate);
    if (static_cast<int>(a.args.size()) != p.arity)
        throw MalformedInputError("atom " + p.name + " has " + std::to_string(a.args.size()) +
                                  " args, declared arity " + std::to_string(p.arity));
    for (const Term& t : a.args) {
        if (t.is_const() && (t.id < 0 || t.id >= v.num_constants()))
            throw MalformedInputError("constant id out of range in " + p.name);
        if (t.is_var() && t.id < 0) throw MalformedInputError("negative variable id");
    }
}

void validate_clause(const Clause& c, const Vocabulary& v) {
    validate_atom(c.head, v);
    for (const Atom& a : c.body) validate_atom(a, v);
    if (!is_safe(c)) throw MalformedInputError("unsafe clause: head variable not in body");
}

// ---- Substitution --------------------------------------------------------

const Term* Substitution::lookup(std::int32_t var) const {
    for (const auto& [v, t] : bind_)
        if (v == var) return &t;
    return nullptr;
}

void Substitution::bind(std::int32_t var, Term value) {
    if (value.is_var() && value.id == var) return;
    auto it = std::lower_bound(bind_.begin(), bind_.end(), var,
                               [](const auto& p, std::int32_t v) { return p.first < v; });
    if (it != bind_.end() && it->first == var) {
        it->second = value;
    } else {
        bind_.insert(it, {var, value});
    }
}

Term Substitution::apply(Term t) const {
    if (!t.is_var()) return t;
    const Term* b = lookup(t.id);
    return b ? *b : t;
}

Atom Substitution::apply(const Atom& a) const {
    Atom out;
    out.predicate = a.predicate;
    out.args.reserve(a.args.size());
    for (const Term& t : a.args) out.args.push_back(apply(t));
    return out;
}

Clause Substitution::apply(const Clause& c) const {
    Clause out;
    out.head = apply(c.head);
    out.body.reserve(c.body.size());
    for (const Atom& a : c.body) out.body.push_back(apply(a));
    return out;
}

bool Substitution::is_idempotent() const {
    for (const auto& [v, t] : bind_) {
        (void)v;
        if (t.is_var() && lookup(t.id) != nullptr) return false;
    }
    return true;
}

Substitution Substitution::compose(const Substitution& other) const {
    Substitution out;
    for (const auto& [v, t] : bind_) {
        Term mapped = other.apply(t);
        out.bind(v, mapped);
    }
    for (const auto& [v, t] : other.bind_) {
        if (lookup(v) == nullptr) out.bind(v, t);
    }
    return out;
}

// ---- Unification ----------------------------------------------------------

std::int32_t max_var_id(const Atom& a) {
    std::int32_t m = -1;
    for (const Term& t : a.args)
        if (t.is_var()) m = std::max(m, t.id);
    return m;
}

Atom rename_vars_from(const Atom& b, std::int32_t base) {
    Atom out;
    out.predicate = b.predicate;
    out.args.reserve(b.args.size());
    std::vector<std::pair<std::int32_t, std::int32_t>> map;
    for (const Term& t : b.args) {
        if (!t.is_var()) {
            out.args.push_back(t);
            continue;
        }
        std::int32_t target = -1;
        for (const auto& [from, to] : map) {
            if (from == t.id) {
                target = to;
                break;
            }
        }
        if (target < 0) {
            target = base + static_cast<std::int32_t>(map.size());
            map.emplace_back(t.id, target);
        }
        out.args.push_back(make_var(target));
    }
    return out;
}

namespace {

// Working bindings with chase-to-representative resolution. Flat terms mean
// chains are at most var->var->...->(const|unbound var), never cyclic.
struct Work {
    std::vector<std::pair<std::int32_t, Term>> bind;

    const Term* lookup(std::int32_t var) const {
        for (const auto& [v, t] : bind)
            if (v == var) return &t;
        return nullptr;
    }

    Term resolve(Term t) const {
        while (t.is_var()) {
            const Term* b = lookup(t.id);
            if (!b) break;
            t = *b;
        }
        return t;
    }
};

}  // namespace

std::optional<Substitution> unify(const Atom& a, const Atom& b_in, UnifyMode mode) {
    if (a.predicate == b_in.predicate && a.args.size() != b_in.args.size())
        throw MalformedInputError("atoms share a predicate but disagree on arity");
    if (a.predicate != b_in.predicate) return std::nullopt;

    Atom renamed;
    const Atom* b = &b_in;
    if (mode == UnifyMode::StandardizeApart) {
        std::int32_t base = 1 + std::max(max_var_id(a), max_var_id(b_in));
        if (base < 0) base = 0;
        renamed = rename_vars_from(b_in, base);
        b = &renamed;
    }

    Work w;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        Term ta = w.resolve(a.args[i]);
        Term tb = w.resolve(b->args[i]);
        if (ta == tb) continue;
        if (ta.is_var()) {
            w.bind.emplace_back(ta.id, tb);
        } else if (tb.is_var()) {
            w.bind.emplace_back(tb.id, ta);
        } else {
            return std::nullopt;  // distinct constants
        }
    }

    Substitution out;
    for (const auto& [v, t] : w.bind) out.bind(v, w.resolve(t));
    return out;
}

bool unifiable(const Atom& a, const Atom& b, UnifyMode mode) {
    return unify(a, b, mode).has_value();
}

Atom standardize_apart(const Atom& a, VarCounter& counter) {
    Atom out;
    out.predicate = a.predicate;
    out.args.reserve(a.args.size());
    std::vector<std::pair<std::int32_t, std::int32_t>> map;
    for (const Term& t : a.args) {
        if (!t.is_var()) {
            out.args.push_back(t);
            continue;
        }
        std::int32_t target = -1;
        for (const auto& [from, to] : map) {
            if (from == t.id) {
                target = to;
                break;
            }
        }
        if (target < 0) {
            target = counter.fresh().id;
            map.emplace_back(t.id, target);
        }
        out.args.push_back(make_var(target));
    }
    return out;
}

Clause standardize_apart(const Clause& c, VarCounter& counter) {
    std::vector<std::pair<std::int32_t, std::int32_t>> map;
    auto rename = [&](const Atom& a) {
        Atom out;
        out.predicate = a.predicate;
        out.args.reserve(a.args.size());
        for (const Term& t : a.args) {
            if (!t.is_var()) {
                out.args.push_back(t);
                continue;
            }
            std::int32_t target = -1;
            for (const auto& [from, to] : map) {
                if (from == t.id) {
                    target = to;
                    break;
                }
            }
            if (target < 0) {
                target = counter.fresh().id;
                map.emplace_back(t.id, target);
            }
            out.args.push_back(make_var(target));
        }
        return out;
    };
    Clause out;
    out.head = rename(c.head);
    out.body.reserve(c.body.size());
    for (const Atom& a : c.body) out.body.push_back(rename(a));
    return out;
}

Atom canonical_rename(const Atom& a) { return rename_vars_from(a, 0); }

Clause canonical_rename(const Clause& c) {
    std::vector<std::pair<std::int32_t, std::int32_t>> map;
    auto rename = [&](const Atom& a) {
        Atom out;
        out.predicate = a.predicate;
        out.args.reserve(a.args.size());
        for (const Term& t : a.args) {
            if (!t.is_var()) {
                out.args.push_back(t);
                continue;
            }
            std::int32_t target = -1;
            for (const auto& [from, to] : map) {
                if (from == t.id) {
                    target = to;
                    break;
                }
            }
            if (target < 0) {
                target = static_cast<std::int32_t>(map.size());
                map.emplace_back(t.id, target);
            }
            out.args.push_back(make_var(target));
        }
        return out;
    };
    Clause out;
    out.head = rename(c.head);
    out.body.reserve(c.body.size());
    for (const Atom& a : c.body) out.body.push_back(rename(a));
    return out;
}

// ---- Text ------------------------------------------------------------------

std::string to_text(const Term& t, const Vocabulary& v) {
    if (t.is_const()) {
        if (t.id >= 0 && t.id < v.num_constants()) return v.constant_name(t.id);
        return "c?" + std::to_string(t.id);
    }
    if (t.id >= 0 && t.id < v.num_variables()) return v.variable_name(t.id);
    // Fresh variables minted during search; '_' keeps them in variable
    // lexical space and the parser maps them back to the same id.
    return "_G" + std::to_string(t.id);
}

std::string to_text(const Atom& a, const Vocabulary& v) {
    std::string out = (a.predicate >= 0 && a.predicate < v.num_predicates())
                          ? v.predicate(a.predicate).name
                          : "p?" + std::to_string(a.predicate);
    out += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        out += to_text(a.args[i], v);
    }
    out += ')';
    return out;
}

std::string to_text(const Clause& c, const Vocabulary& v) {
    std::string out = to_text(c.head, v);
    if (!c.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i) out += ", ";
            out += to_text(c.body[i], v);
        }
    }
    out += '.';
    return out;
}

namespace {

struct Lexer {
    std::string_view text;
    std::size_t pos{0};

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '%') {  // comment to end of line
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool consume(std::string_view tok) {
        skip_ws();
        if (text.substr(pos, tok.size()) == tok) {
            pos += tok.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view tok) {
        if (!consume(tok))
            throw MalformedInputError("expected '" + std::string(tok) + "' near: " +
                                      std::string(text.substr(pos, 24)));
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
                ++pos;
            else
                break;
        }
        if (start == pos)
            throw MalformedInputError("expected identifier near: " +
                                      std::string(text.substr(pos, 24)));
        return std::string(text.substr(start, pos - start));
    }
};

bool is_variable_token(std::string_view tok) {
    return !tok.empty() && (std::isupper(static_cast<unsigned char>(tok[0])) || tok[0] == '_');
}

Term term_from_token(const std::string& tok, Vocabulary& v, SymbolPolicy policy) {
    if (is_variable_token(tok)) {
        // Fresh-variable names round-trip to their raw id.
        if (tok.size() > 2 && tok[0] == '_' && tok[1] == 'G') {
            std::int32_t id = 0;
            auto [p, ec] = std::from_chars(tok.data() + 2, tok.data() + tok.size(), id);
            if (ec == std::errc() && p == tok.data() + tok.size()) return make_var(id);
        }
        std::int32_t id = v.find_variable(tok);
        if (id < 0) {
            if (policy == SymbolPolicy::Strict)
                throw MalformedInputError("unknown variable: " + tok);
            id = v.add_variable(tok);
        }
        return make_var(id);
    }
    std::int32_t id = v.find_constant(tok);
    if (id < 0) {
        if (policy == SymbolPolicy::Strict) throw MalformedInputError("unknown constant: " + tok);
        id = v.add_constant(tok);
    }
    return make_const(id);
}

Atom parse_atom_inner(Lexer& lex, Vocabulary& v, SymbolPolicy policy) {
    std::string pname = lex.ident();
    if (is_variable_token(pname))
        throw MalformedInputError("predicate name cannot start uppercase/underscore: " + pname);
    lex.expect("(");
    std::vector<Term> args;
    if (lex.peek() != ')') {
        while (true) {
            args.push_back(term_from_token(lex.ident(), v, policy));
            if (lex.consume(",")) continue;
            break;
        }
    }
    lex.expect(")");
    if (args.empty()) throw MalformedInputError("zero-arity atom: " + pname);

    std::int32_t pid = v.find_predicate(pname);
    if (pid < 0) {
        if (policy == SymbolPolicy::Strict) throw MalformedInputError("unknown predicate: " + pname);
        pid = v.add_predicate(pname, static_cast<int>(args.size()));
    } else if (v.predicate(pid).arity != static_cast<int>(args.size())) {
        throw MalformedInputError("predicate " + pname + " used with arity " +
                                  std::to_string(args.size()) + ", declared " +
                                  std::to_string(v.predicate(pid).arity));
    }
    return Atom{pid, std::move(args)};
}

Clause parse_clause_inner(Lexer& lex, Vocabulary& v, SymbolPolicy policy) {
    Clause c;
    c.head = parse_atom_inner(lex, v, policy);
    if (lex.consume(":-")) {
        while (true) {
            c.body.push_back(parse_atom_inner(lex, v, policy));
            if (lex.consume(",")) continue;
            break;
        }
    }
    lex.expect(".");
    return c;
}

}  // namespace

Atom parse_atom(std::string_view text, Vocabulary& v, SymbolPolicy policy) {
    Lexer lex{text};
    Atom a = parse_atom_inner(lex, v, policy);
    lex.consume(".");
    if (!lex.eof())
        throw MalformedInputError("trailing input after atom: " +
                                  std::string(text.substr(lex.pos, 24)));
    return a;
}

Clause parse_clause(std::string_view text, Vocabulary& v, SymbolPolicy policy) {
    Lexer lex{text};
    Clause c = parse_clause_inner(lex, v, policy);
    if (!lex.eof())
        throw MalformedInputError("trailing input after clause: " +
                                  std::string(text.substr(lex.pos, 24)));
    return c;
}

std::vector<Clause> parse_program(std::string_view text, Vocabulary& v, SymbolPolicy policy) {
    Lexer lex{text};
    std::vector<Clause> out;
    while (!lex.eof()) out.push_back(parse_clause_inner(lex, v, policy));
    return out;
}

}  // namespace hornguide
