#pragma once

#include <string>
#include <vector>

#include "tesselogic/formula.hpp"
#include "tesselogic/grid.hpp"

namespace tess {

/// A literal is a possibly negated atom (color, set, equality, pseudo-atom
/// or boolean constant).
struct Literal {
    bool neg = false;
    Fptr atom;
};
using Clause = std::vector<Literal>;

struct Cnf {
    std::vector<Clause> clauses;
    Fptr to_formula() const;
};

/// Conjunctive normal form of a quantifier-free formula. Clauses containing
/// a true literal are dropped; false literals are dropped from their clause.
Cnf cnf_of(const Fptr& matrix);
Fptr to_cnf(const Fptr& matrix);

/// Decomposition of one clause around the innermost universal variable zp:
/// the zp-only disjunct epsilon, the equalities zp = other@shift, and the
/// zp-free residue theta.
struct ClauseAnalysis {
    std::vector<Literal> epsilon;
    struct EqLink {
        std::string other_var;
        Offset shift;
    };
    std::vector<EqLink> equalities;
    std::vector<Literal> theta;
};
ClauseAnalysis analyze_clause(const Clause& c, const std::string& zp);

enum class GadgetMode { Abstract, Concrete };
enum class CountMode { Eq, Geq };

struct TransformResult {
    Sentence sentence;
    /// True when a same-variable (dis)equality was resolved by its Z^2 truth
    /// value; torus oracles must skip such sentences.
    bool z2_only = false;
};

/// Removes disequalities between distinct variables from a prenex ClassC
/// sentence by substituting one side into the clause; same-variable
/// disequalities are replaced by their Z^2 truth value and flagged.
TransformResult eliminate_disequality(const Sentence& s);

/// The single-universal reduction: rewrites a ClassC sentence to an
/// equivalent one with exactly one universal first-order quantifier.
/// Abstract mode emits atmostone pseudo-atoms for the singleton sets;
/// concrete mode expands each into the quarter-plane gadget.
TransformResult reduce_universals(const Sentence& s, GadgetMode mode);

/// phi_P: true at z iff the pattern occurs at z.
Fptr pattern_sentinel(const Pattern& p, const std::string& var);

/// Sentence defining S_=k(P) (Eq) or S_>=k(P) (Geq) over the base alphabet,
/// in the normal form with one universal block and one existential block.
Sentence counting_formula(const Pattern& p, int k, CountMode mode, const Alphabet& base,
                          GadgetMode gadget = GadgetMode::Abstract);

/// Union / intersection of two normal-form sentences, staying in the normal
/// form. Quantifier counts are padded first.
Sentence union_emso(const Sentence& a, const Sentence& b);
Sentence intersect_emso(const Sentence& a, const Sentence& b);

/// Rewrites a sentence over the projection's source alphabet into one over
/// the target whose models are the E(pi)-image of the input's models.
Sentence project_formula(const Projection& pi, const Sentence& s);

/// The dual rewriting: strips the leading existential set quantifiers of s
/// and recolors over the product alphabet Q x {0,1}^n, returning the
/// canonical projection back onto Q.
struct ColorsToSets {
    Sentence sentence;
    Projection pi;
};
ColorsToSets colors_to_sets(const Sentence& s);

/// Pads a normal-form sentence to the requested quantifier counts.
Thm3Form pad_thm3(const Thm3Form& t, int num_sets, int num_exists);

}  // namespace tess
