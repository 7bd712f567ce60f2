#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tesselogic/grid.hpp"

namespace tess {

/// Terms are kept in variable-plus-offset canonical form: every composition
/// of the four unit maps is a translation, so N1(E1(z)) and E1(N1(z)) are the
/// same term.
struct Term {
    std::string var;
    Offset off;

    friend auto operator<=>(const Term&, const Term&) = default;
};

struct BoolConst {
    bool value = true;
    friend auto operator<=>(const BoolConst&, const BoolConst&) = default;
};
struct ColorAtom {
    ColorId color = 0;
    Term t;
    friend auto operator<=>(const ColorAtom&, const ColorAtom&) = default;
};
struct SetAtom {
    std::string set;
    Term t;
    friend auto operator<=>(const SetAtom&, const SetAtom&) = default;
};
struct EqAtom {
    Term lhs, rhs;
    friend auto operator<=>(const EqAtom&, const EqAtom&) = default;
};
/// Pseudo-atom: |set| <= 1. Abstract stand-in for the quarter-plane gadget.
struct AtMostOneAtom {
    std::string set;
    friend auto operator<=>(const AtMostOneAtom&, const AtMostOneAtom&) = default;
};

enum class Conn { Not, And, Or, Imp, Iff };
enum class Quant { ExistsFo, ForallFo, ExistsSo, ForallSo };

inline bool is_fo(Quant q) { return q == Quant::ExistsFo || q == Quant::ForallFo; }
inline bool is_existential(Quant q) { return q == Quant::ExistsFo || q == Quant::ExistsSo; }

struct Formula;
using Fptr = std::shared_ptr<const Formula>;

struct Unary {
    Conn op = Conn::Not;
    Fptr child;
};
struct Binary {
    Conn op = Conn::And;
    Fptr lhs, rhs;
};
struct Quantified {
    Quant q = Quant::ForallFo;
    std::string var;
    Fptr body;
};

struct Formula {
    using Node =
        std::variant<BoolConst, ColorAtom, SetAtom, EqAtom, AtMostOneAtom, Unary, Binary, Quantified>;
    Node node;
};

Fptr f_true();
Fptr f_false();
Fptr f_bool(bool v);
Fptr f_color(ColorId c, Term t);
Fptr f_inset(std::string set, Term t);
Fptr f_eq(Term a, Term b);
Fptr f_atmostone(std::string set);
Fptr f_not(Fptr a);
Fptr f_and(Fptr a, Fptr b);
Fptr f_or(Fptr a, Fptr b);
Fptr f_imp(Fptr a, Fptr b);
Fptr f_iff(Fptr a, Fptr b);
Fptr f_quant(Quant q, std::string var, Fptr body);
/// Conjunction over a list; empty list is true.
Fptr f_and_all(const std::vector<Fptr>& fs);
/// Disjunction over a list; empty list is false.
Fptr f_or_all(const std::vector<Fptr>& fs);

bool formula_equal(const Fptr& a, const Fptr& b);

struct FreeVars {
    std::set<std::string> fo;
    std::set<std::string> so;
    bool empty() const { return fo.empty() && so.empty(); }
};
FreeVars free_vars(const Fptr& f);

/// Capture-avoiding first-order substitution var := t (offsets compose).
Fptr substitute_fo(const Fptr& f, const std::string& var, const Term& t);
/// Rename a free set variable.
Fptr rename_so(const Fptr& f, const std::string& from, const std::string& to);

/// A closed formula over a declared alphabet.
struct Sentence {
    Alphabet alphabet;
    Fptr body;
};
/// Throws if the body has free variables or colors outside the alphabet.
void validate_sentence(const Sentence& s);

enum class FragmentTag { QF, UnivSFT, ClassC, EMSO, FO, MSO, EMSONormal };
std::string to_string(FragmentTag t);

std::set<FragmentTag> classify(const Sentence& s);

/// One quantifier of a prenex prefix.
struct PrefixEntry {
    Quant q;
    std::string var;
};

struct PrenexView {
    std::vector<PrefixEntry> prefix;
    Fptr matrix;
};

/// Decompose an already-prenex formula; nullopt if the body has quantifiers
/// below a connective.
std::optional<PrenexView> prenex_view(const Fptr& f);
Fptr from_prenex_view(const PrenexView& v);

/// Prenex normal form. Already-prenex sentences are returned unchanged.
/// Rejects inputs where hoisting a first-order quantifier would pull an
/// AtMostOne pseudo-atom into its scope.
Sentence prenex(const Sentence& s);

/// Rename every bound variable to a fresh name (v0, v1, ... / V0, V1, ...).
Fptr uniquify_bound(const Fptr& f);

/// The Theorem 3 normal form: an existential set prefix over the conjunction
/// of a single-universal part and an existential first-order part, both with
/// quantifier-free matrices. Either part may be absent.
struct Thm3Form {
    Alphabet alphabet;
    std::vector<std::string> set_vars;
    std::string univ_var;          // empty when the universal part is absent
    Fptr univ_matrix;              // quantifier-free
    std::vector<std::string> exist_vars;
    Fptr exist_matrix;             // quantifier-free; f_true() when absent

    Sentence to_sentence() const;
};
std::optional<Thm3Form> parse_thm3(const Sentence& s);

bool is_quantifier_free(const Fptr& f);
/// All term offsets occurring in a formula (by variable).
std::vector<Offset> term_offsets(const Fptr& f, const std::string& var);
bool mentions_set_atoms(const Fptr& f);
bool mentions_atmostone(const Fptr& f);

}  // namespace tess
