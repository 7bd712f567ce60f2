#include "tesselogic/transforms.hpp"

#include <algorithm>

namespace tess {

namespace {

bool is_atom(const Fptr& f) {
    return std::holds_alternative<BoolConst>(f->node) ||
           std::holds_alternative<ColorAtom>(f->node) ||
           std::holds_alternative<SetAtom>(f->node) || std::holds_alternative<EqAtom>(f->node) ||
           std::holds_alternative<AtMostOneAtom>(f->node);
}

Fptr literal_formula(const Literal& l) { return l.neg ? f_not(l.atom) : l.atom; }

std::optional<bool> literal_const(const Literal& l) {
    if (const auto* b = std::get_if<BoolConst>(&l.atom->node))
        return l.neg ? !b->value : b->value;
    return std::nullopt;
}

/// Clause-level simplification: drop false literals, drop clauses containing
/// a true literal, deduplicate.
void simplify(Cnf& cnf) {
    std::vector<Clause> out;
    for (auto& clause : cnf.clauses) {
        Clause kept;
        bool clause_true = false;
        for (auto& lit : clause) {
            auto c = literal_const(lit);
            if (c) {
                if (*c) clause_true = true;
                continue;
            }
            bool dup = false;
            for (const auto& k : kept)
                if (k.neg == lit.neg && formula_equal(k.atom, lit.atom)) dup = true;
            if (!dup) kept.push_back(lit);
        }
        if (!clause_true) out.push_back(std::move(kept));
    }
    cnf.clauses = std::move(out);
}

void cnf_rec(const Fptr& f, bool neg, Cnf& out);

/// Distributes two CNFs over a disjunction.
Cnf cnf_or(const Cnf& a, const Cnf& b) {
    Cnf out;
    out.clauses.reserve(a.clauses.size() * b.clauses.size());
    for (const auto& ca : a.clauses)
        for (const auto& cb : b.clauses) {
            Clause c = ca;
            c.insert(c.end(), cb.begin(), cb.end());
            out.clauses.push_back(std::move(c));
        }
    return out;
}

void cnf_rec(const Fptr& f, bool neg, Cnf& out) {
    if (is_atom(f)) {
        out.clauses.push_back({Literal{neg, f}});
        return;
    }
    if (const auto* u = std::get_if<Unary>(&f->node)) {
        cnf_rec(u->child, !neg, out);
        return;
    }
    const auto* b = std::get_if<Binary>(&f->node);
    if (!b) throw Error("to_cnf: input must be quantifier-free");
    Conn op = b->op;
    Fptr lhs = b->lhs, rhs = b->rhs;
    if (op == Conn::Imp) {
        cnf_rec(f_or(f_not(lhs), rhs), neg, out);
        return;
    }
    if (op == Conn::Iff) {
        cnf_rec(f_and(f_or(f_not(lhs), rhs), f_or(f_not(rhs), lhs)), neg, out);
        return;
    }
    bool conj = (op == Conn::And) != neg;  // de Morgan under negation
    if (conj) {
        cnf_rec(lhs, neg, out);
        cnf_rec(rhs, neg, out);
    } else {
        Cnf l, r;
        cnf_rec(lhs, neg, l);
        cnf_rec(rhs, neg, r);
        Cnf prod = cnf_or(l, r);
        out.clauses.insert(out.clauses.end(), prod.clauses.begin(), prod.clauses.end());
    }
}

}  // namespace

Fptr Cnf::to_formula() const {
    std::vector<Fptr> cs;
    cs.reserve(clauses.size());
    for (const auto& clause : clauses) {
        std::vector<Fptr> lits;
        lits.reserve(clause.size());
        for (const auto& l : clause) lits.push_back(literal_formula(l));
        cs.push_back(f_or_all(lits));
    }
    return f_and_all(cs);
}

Cnf cnf_of(const Fptr& matrix) {
    if (!is_quantifier_free(matrix)) throw Error("to_cnf: input must be quantifier-free");
    Cnf out;
    cnf_rec(matrix, false, out);
    simplify(out);
    return out;
}

Fptr to_cnf(const Fptr& matrix) { return cnf_of(matrix).to_formula(); }

namespace {

bool mentions_var(const Literal& l, const std::string& var) {
    if (const auto* c = std::get_if<ColorAtom>(&l.atom->node)) return c->t.var == var;
    if (const auto* s = std::get_if<SetAtom>(&l.atom->node)) return s->t.var == var;
    if (const auto* e = std::get_if<EqAtom>(&l.atom->node))
        return e->lhs.var == var || e->rhs.var == var;
    return false;
}

bool only_var(const Literal& l, const std::string& var) {
    if (const auto* c = std::get_if<ColorAtom>(&l.atom->node)) return c->t.var == var;
    if (const auto* s = std::get_if<SetAtom>(&l.atom->node)) return s->t.var == var;
    if (const auto* e = std::get_if<EqAtom>(&l.atom->node))
        return e->lhs.var == var && e->rhs.var == var;
    return false;
}

Literal subst_literal(const Literal& l, const std::string& var, const Term& t) {
    return Literal{l.neg, substitute_fo(l.atom, var, t)};
}

/// Replaces same-variable equality literals by their Z^2 truth value.
/// Returns true if any replacement fired.
bool resolve_same_var_equalities(Clause& clause) {
    bool fired = false;
    for (auto& l : clause) {
        const auto* e = std::get_if<EqAtom>(&l.atom->node);
        if (!e || e->lhs.var != e->rhs.var) continue;
        bool value = (e->lhs.off == e->rhs.off);
        if (!value) fired = true;  // offset inequality is a Z^2 judgment
        l = Literal{false, f_bool(l.neg ? !value : value)};
    }
    return fired;
}

struct ClassCView {
    std::vector<std::string> sets;
    std::vector<std::string> univs;
    Fptr matrix;
};

ClassCView classc_view(const Sentence& s) {
    Sentence p = prenex(s);
    auto view = prenex_view(p.body);
    if (!view) throw Error("input not in ClassC");
    ClassCView out;
    size_t i = 0;
    while (i < view->prefix.size() && view->prefix[i].q == Quant::ExistsSo)
        out.sets.push_back(view->prefix[i++].var);
    while (i < view->prefix.size() && view->prefix[i].q == Quant::ForallFo)
        out.univs.push_back(view->prefix[i++].var);
    if (i != view->prefix.size()) throw Error("input not in ClassC");
    out.matrix = view->matrix;
    return out;
}

Sentence rebuild_classc(const Alphabet& a, const std::vector<std::string>& sets,
                        const std::vector<std::string>& univs, const Fptr& matrix) {
    Fptr body = matrix;
    for (auto it = univs.rbegin(); it != univs.rend(); ++it)
        body = f_quant(Quant::ForallFo, *it, body);
    for (auto it = sets.rbegin(); it != sets.rend(); ++it)
        body = f_quant(Quant::ExistsSo, *it, body);
    return Sentence{a, body};
}

std::vector<std::string> used_univs(const std::vector<std::string>& univs, const Cnf& cnf) {
    std::vector<std::string> kept;
    for (const auto& v : univs) {
        bool used = false;
        for (const auto& clause : cnf.clauses)
            for (const auto& l : clause)
                if (mentions_var(l, v)) used = true;
        if (used) kept.push_back(v);
    }
    return kept;
}

/// Removes distinct-variable disequalities from every clause by substitution;
/// the later-quantified variable is eliminated. May cascade into same-variable
/// literals, which are resolved by Z^2 truth.
bool eliminate_disequalities_in(Cnf& cnf, const std::vector<std::string>& univs) {
    auto rank = [&](const std::string& v) {
        for (size_t i = 0; i < univs.size(); ++i)
            if (univs[i] == v) return static_cast<int>(i);
        return -1;
    };
    bool z2 = false;
    for (auto& clause : cnf.clauses) {
        z2 |= resolve_same_var_equalities(clause);
        while (true) {
            int found = -1;
            for (size_t i = 0; i < clause.size(); ++i) {
                if (!clause[i].neg) continue;
                const auto* e = std::get_if<EqAtom>(&clause[i].atom->node);
                if (e && e->lhs.var != e->rhs.var) {
                    found = static_cast<int>(i);
                    break;
                }
            }
            if (found < 0) break;
            const auto* e = std::get_if<EqAtom>(&clause[static_cast<size_t>(found)].atom->node);
            // victim = the later-quantified side; t1@u != t2@v drops the
            // literal and substitutes victim := keeper@(shift)
            Term a = e->lhs, b = e->rhs;
            bool drop_lhs = rank(a.var) >= rank(b.var);
            Term victim = drop_lhs ? a : b;
            Term keeper = drop_lhs ? b : a;
            // victim.var@victim.off = keeper.var@keeper.off
            // => victim.var = keeper.var @ (keeper.off - victim.off)
            Term repl{keeper.var, keeper.off - victim.off};
            Clause next;
            for (size_t i = 0; i < clause.size(); ++i) {
                if (static_cast<int>(i) == found) continue;
                next.push_back(subst_literal(clause[i], victim.var, repl));
            }
            clause = std::move(next);
            z2 |= resolve_same_var_equalities(clause);
        }
    }
    simplify(cnf);
    return z2;
}

}  // namespace

ClauseAnalysis analyze_clause(const Clause& c, const std::string& zp) {
    ClauseAnalysis out;
    for (const auto& l : c) {
        if (only_var(l, zp)) {
            if (const auto* e = std::get_if<EqAtom>(&l.atom->node)) {
                (void)e;
                throw Error("analyze_clause: same-variable equality must be pre-simplified");
            }
            out.epsilon.push_back(l);
        } else if (!l.neg && mentions_var(l, zp)) {
            const auto* e = std::get_if<EqAtom>(&l.atom->node);
            if (e) {
                // zp@u = y@v  <=>  zp = y@(v-u)
                Term zp_side = e->lhs.var == zp ? e->lhs : e->rhs;
                Term other = e->lhs.var == zp ? e->rhs : e->lhs;
                out.equalities.push_back({other.var, other.off - zp_side.off});
                continue;
            }
            throw Error("analyze_clause: unexpected negated literal on zp");
        } else if (mentions_var(l, zp)) {
            throw Error("analyze_clause: disequality on zp must be eliminated first");
        } else {
            out.theta.push_back(l);
        }
    }
    return out;
}

TransformResult eliminate_disequality(const Sentence& s) {
    validate_sentence(s);
    ClassCView v = classc_view(s);
    Cnf cnf = cnf_of(v.matrix);
    bool z2 = eliminate_disequalities_in(cnf, v.univs);
    std::vector<std::string> univs = used_univs(v.univs, cnf);
    return {rebuild_classc(s.alphabet, v.sets, univs, cnf.to_formula()), z2};
}

namespace {

struct FreshNames {
    int counter = 0;
    std::string next(const std::string& stem) { return stem + std::to_string(counter++); }
};

Literal pos(Fptr atom) { return Literal{false, std::move(atom)}; }
Literal negl(Fptr atom) { return Literal{true, std::move(atom)}; }

Term at(const std::string& var, Offset off = {0, 0}) { return Term{var, off}; }

/// X(w) <=> X(N(w)) and X(w) <=> X(E(w)): on any torus or on Z^2 this forces
/// X to be the empty set or everything.
void emit_plane_or_empty(Cnf& cnf, const std::string& x, const std::string& w) {
    cnf.clauses.push_back({negl(f_inset(x, at(w))), pos(f_inset(x, at(w, {0, 1})))});
    cnf.clauses.push_back({pos(f_inset(x, at(w))), negl(f_inset(x, at(w, {0, 1})))});
    cnf.clauses.push_back({negl(f_inset(x, at(w))), pos(f_inset(x, at(w, {1, 0})))});
    cnf.clauses.push_back({pos(f_inset(x, at(w))), negl(f_inset(x, at(w, {1, 0})))});
}

/// The quarter-plane gadget: A(w) <=> A(N(w)) & A(E(w)), and the set is its
/// corner: S(w) <=> A(w) & !A(S(w)) & !A(W(w)).
void emit_quarter_plane(Cnf& cnf, const std::string& s, const std::string& a,
                        const std::string& w) {
    cnf.clauses.push_back({negl(f_inset(a, at(w))), pos(f_inset(a, at(w, {0, 1})))});
    cnf.clauses.push_back({negl(f_inset(a, at(w))), pos(f_inset(a, at(w, {1, 0})))});
    cnf.clauses.push_back({pos(f_inset(a, at(w))), negl(f_inset(a, at(w, {0, 1}))),
                           negl(f_inset(a, at(w, {1, 0})))});
    cnf.clauses.push_back({negl(f_inset(s, at(w))), pos(f_inset(a, at(w)))});
    cnf.clauses.push_back({negl(f_inset(s, at(w))), negl(f_inset(a, at(w, {0, -1})))});
    cnf.clauses.push_back({negl(f_inset(s, at(w))), negl(f_inset(a, at(w, {-1, 0})))});
    cnf.clauses.push_back({pos(f_inset(s, at(w))), negl(f_inset(a, at(w))),
                           pos(f_inset(a, at(w, {0, -1}))), pos(f_inset(a, at(w, {-1, 0})))});
}

}  // namespace

TransformResult reduce_universals(const Sentence& s, GadgetMode mode) {
    validate_sentence(s);
    {
        // p <= 1 inputs are already in the target form
        Sentence p = prenex(s);
        auto view = prenex_view(p.body);
        if (view) {
            int univ_count = 0;
            bool classc = true;
            size_t i = 0;
            while (i < view->prefix.size() && view->prefix[i].q == Quant::ExistsSo) ++i;
            for (; i < view->prefix.size(); ++i) {
                if (view->prefix[i].q == Quant::ForallFo) ++univ_count;
                else classc = false;
            }
            if (classc && univ_count <= 1) return {s, false};
        }
    }

    ClassCView v = classc_view(s);
    Cnf cnf = cnf_of(v.matrix);
    bool z2 = eliminate_disequalities_in(cnf, v.univs);
    std::vector<std::string> univs = used_univs(v.univs, cnf);
    std::vector<std::string> sets = v.sets;
    FreshNames fresh;

    while (univs.size() > 1) {
        const std::string zp = univs.back();
        univs.pop_back();
        const std::string w = univs.front();  // canonical remaining cell variable

        Cnf next;
        for (const auto& clause : cnf.clauses) {
            bool uses_zp = false;
            for (const auto& l : clause) uses_zp |= mentions_var(l, zp);
            if (!uses_zp) {
                next.clauses.push_back(clause);
                continue;
            }
            ClauseAnalysis an = analyze_clause(clause, zp);

            if (an.equalities.empty() && an.theta.empty()) {
                // forall zp epsilon(zp) == forall w epsilon(w)
                Clause c;
                for (const auto& l : an.epsilon) c.push_back(subst_literal(l, zp, at(w)));
                next.clauses.push_back(std::move(c));
                continue;
            }

            const size_t m = an.equalities.size();
            const std::string xvar = fresh.next("X");
            sets.push_back(xvar);
            emit_plane_or_empty(next, xvar, w);

            // X(w) -> theta(w,...)
            {
                Clause c{negl(f_inset(xvar, at(w)))};
                for (const auto& l : an.theta) c.push_back(l);
                next.clauses.push_back(std::move(c));
            }

            // !X branch: the epsilon-violations are covered by singletons
            std::vector<std::string> svars;
            for (size_t j = 0; j < m; ++j) {
                std::string sj = fresh.next("S");
                svars.push_back(sj);
                sets.push_back(sj);
                if (mode == GadgetMode::Abstract) {
                    next.clauses.push_back({pos(f_atmostone(sj))});
                } else {
                    std::string aj = fresh.next("Q");
                    sets.push_back(aj);
                    emit_quarter_plane(next, sj, aj, w);
                }
            }

            // coverage (guarded by !X): (\/_j Sj(w)) <=> !epsilon(w)
            // direction ->: for each epsilon literal e and each j:
            //   X(w) | !Sj(w) | !e(w)
            for (const auto& sj : svars)
                for (const auto& e : an.epsilon) {
                    Clause c{pos(f_inset(xvar, at(w))), negl(f_inset(sj, at(w)))};
                    Literal el = subst_literal(e, zp, at(w));
                    c.push_back(Literal{!el.neg, el.atom});
                    next.clauses.push_back(std::move(c));
                }
            // direction <-: X(w) | epsilon(w) | S1(w) | ... | Sm(w)
            {
                Clause c{pos(f_inset(xvar, at(w)))};
                for (const auto& e : an.epsilon) c.push_back(subst_literal(e, zp, at(w)));
                for (const auto& sj : svars) c.push_back(pos(f_inset(sj, at(w))));
                next.clauses.push_back(std::move(c));
            }

            std::string evar;
            if (m > 0) {
                // escape variable for the no-violations case
                evar = fresh.next("X");
                sets.push_back(evar);
                emit_plane_or_empty(next, evar, w);
                // E(w) -> epsilon(w)
                Clause c{negl(f_inset(evar, at(w)))};
                for (const auto& e : an.epsilon) c.push_back(subst_literal(e, zp, at(w)));
                next.clauses.push_back(std::move(c));
            }

            // substituted clause, one per marked set:
            //   X(w) | E(w) | theta | \/_l Sj(f_l(z_{k_l}))
            for (const auto& sj : svars) {
                Clause c{pos(f_inset(xvar, at(w)))};
                if (!evar.empty()) c.push_back(pos(f_inset(evar, at(w))));
                for (const auto& l : an.theta) c.push_back(l);
                for (const auto& eq : an.equalities)
                    c.push_back(pos(f_inset(sj, at(eq.other_var, eq.shift))));
                next.clauses.push_back(std::move(c));
            }
        }
        simplify(next);
        cnf = std::move(next);
    }

    if (univs.empty()) univs.push_back("z0");  // keep one universal in the shape
    return {rebuild_classc(s.alphabet, sets, univs, cnf.to_formula()), z2};
}

Fptr pattern_sentinel(const Pattern& p, const std::string& var) {
    std::vector<Fptr> conj;
    conj.reserve(p.cells().size());
    for (const auto& [off, color] : p.cells()) conj.push_back(f_color(color, Term{var, off}));
    return f_and_all(conj);
}

Sentence counting_formula(const Pattern& p, int k, CountMode mode, const Alphabet& base,
                          GadgetMode gadget) {
    if (k < 0) throw Error("counting_formula needs k >= 0");
    if (p.max_color() >= base.size()) throw Error("pattern colors outside base alphabet");
    Thm3Form t;
    t.alphabet = base;
    t.univ_var = "x";
    if (k == 0 && mode == CountMode::Eq) {
        t.univ_matrix = f_not(pattern_sentinel(p, "x"));
        t.exist_matrix = f_true();
        return t.to_sentence();
    }
    if (k == 0) {
        t.univ_matrix = f_true();
        t.exist_matrix = f_true();
        return t.to_sentence();
    }

    std::vector<Fptr> matrix;
    std::vector<std::string> xs;
    for (int i = 1; i <= k; ++i) xs.push_back("X" + std::to_string(i));
    const Term x = Term{"x", {0, 0}};
    for (int i = 0; i < k; ++i) {
        if (gadget == GadgetMode::Abstract) {
            matrix.push_back(f_atmostone(xs[static_cast<size_t>(i)]));
        } else {
            std::string ai = "A" + std::to_string(i + 1);
            t.set_vars.push_back(ai);
            // Ai(x) <=> Ai(N(x)) & Ai(E(x))
            matrix.push_back(f_iff(f_inset(ai, x), f_and(f_inset(ai, Term{"x", {0, 1}}),
                                                         f_inset(ai, Term{"x", {1, 0}}))));
            // Xi(x) <=> Ai(x) & !Ai(S(x)) & !Ai(W(x))
            matrix.push_back(
                f_iff(f_inset(xs[static_cast<size_t>(i)], x),
                      f_and(f_inset(ai, x), f_and(f_not(f_inset(ai, Term{"x", {0, -1}})),
                                                  f_not(f_inset(ai, Term{"x", {-1, 0}}))))));
        }
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j)
                matrix.push_back(f_imp(f_inset(xs[static_cast<size_t>(i)], x),
                                       f_not(f_inset(xs[static_cast<size_t>(j)], x))));
    std::vector<Fptr> marks;
    for (const auto& xi : xs) marks.push_back(f_inset(xi, x));
    Fptr any_mark = f_or_all(marks);
    Fptr occ = pattern_sentinel(p, "x");
    matrix.push_back(mode == CountMode::Eq ? f_iff(any_mark, occ) : f_imp(any_mark, occ));

    for (const auto& xi : xs) t.set_vars.push_back(xi);
    t.univ_matrix = f_and_all(matrix);

    std::vector<Fptr> witness;
    for (int i = 1; i <= k; ++i) {
        t.exist_vars.push_back("z" + std::to_string(i));
        witness.push_back(f_inset(xs[static_cast<size_t>(i - 1)], Term{"z" + std::to_string(i), {0, 0}}));
    }
    t.exist_matrix = f_and_all(witness);
    return t.to_sentence();
}

namespace {

Thm3Form require_thm3(const Sentence& s, const char* who) {
    auto t = parse_thm3(s);
    if (!t) throw Error(std::string(who) + ": input not in the normal form");
    return *t;
}

Thm3Form rename_apart(const Thm3Form& t, const std::string& suffix) {
    Thm3Form out = t;
    Fptr u = t.univ_matrix;
    Fptr e = t.exist_matrix;
    out.set_vars.clear();
    for (const auto& sv : t.set_vars) {
        std::string nv = sv + suffix;
        out.set_vars.push_back(nv);
        if (u) u = rename_so(u, sv, nv);
        if (e) e = rename_so(e, sv, nv);
    }
    out.exist_vars.clear();
    for (size_t i = 0; i < t.exist_vars.size(); ++i) {
        std::string nv = t.exist_vars[i] + suffix;
        out.exist_vars.push_back(nv);
        if (e) e = substitute_fo(e, t.exist_vars[i], Term{nv, {0, 0}});
    }
    out.univ_matrix = u;
    out.exist_matrix = e;
    return out;
}

/// Substitutes the universal variable to a shared name.
Fptr retarget_univ(const Thm3Form& t, const std::string& w) {
    if (t.univ_var.empty() || !t.univ_matrix) return f_true();
    return substitute_fo(t.univ_matrix, t.univ_var, Term{w, {0, 0}});
}

}  // namespace

Thm3Form pad_thm3(const Thm3Form& t, int num_sets, int num_exists) {
    Thm3Form out = t;
    if (out.univ_var.empty()) {
        out.univ_var = "u";
        out.univ_matrix = f_true();
    }
    std::vector<Fptr> extra;
    int have = static_cast<int>(out.set_vars.size());
    for (int i = have; i < num_sets; ++i) {
        std::string dv = "D" + std::to_string(i);
        out.set_vars.push_back(dv);
        // dummy sets are pinned empty
        extra.push_back(f_not(f_inset(dv, Term{out.univ_var, {0, 0}})));
    }
    if (!extra.empty()) {
        std::vector<Fptr> all{out.univ_matrix ? out.univ_matrix : f_true()};
        all.insert(all.end(), extra.begin(), extra.end());
        out.univ_matrix = f_and_all(all);
    }
    int ehave = static_cast<int>(out.exist_vars.size());
    for (int i = ehave; i < num_exists; ++i)
        out.exist_vars.push_back("d" + std::to_string(i));  // unused witnesses
    if (!out.exist_matrix) out.exist_matrix = f_true();
    return out;
}

Sentence union_emso(const Sentence& a, const Sentence& b) {
    if (a.alphabet != b.alphabet) throw Error("union_emso: alphabets differ");
    Thm3Form ta = rename_apart(require_thm3(a, "union_emso"), "l");
    Thm3Form tb = rename_apart(require_thm3(b, "union_emso"), "r");
    int ns = static_cast<int>(std::max(ta.set_vars.size(), tb.set_vars.size()));
    int ne = static_cast<int>(std::max(ta.exist_vars.size(), tb.exist_vars.size()));
    ta = pad_thm3(ta, ns, ne);
    tb = pad_thm3(tb, ns, ne);

    Thm3Form out;
    out.alphabet = a.alphabet;
    const std::string w = "u0";
    const std::string sw = "U0";  // the plane-or-empty switch

    std::vector<Fptr> univ;
    univ.push_back(f_iff(f_inset(sw, Term{w, {0, 0}}), f_inset(sw, Term{w, {0, 1}})));
    univ.push_back(f_iff(f_inset(sw, Term{w, {0, 0}}), f_inset(sw, Term{w, {1, 0}})));
    univ.push_back(f_imp(f_inset(sw, Term{w, {0, 0}}), retarget_univ(ta, w)));
    univ.push_back(f_imp(f_not(f_inset(sw, Term{w, {0, 0}})), retarget_univ(tb, w)));

    out.set_vars.push_back(sw);
    out.set_vars.insert(out.set_vars.end(), ta.set_vars.begin(), ta.set_vars.end());
    out.set_vars.insert(out.set_vars.end(), tb.set_vars.begin(), tb.set_vars.end());
    out.univ_var = w;
    out.univ_matrix = f_and_all(univ);

    if (ne > 0) {
        std::vector<std::string> evars;
        Fptr ea = ta.exist_matrix, eb = tb.exist_matrix;
        for (int i = 0; i < ne; ++i) {
            std::string ev = "e" + std::to_string(i);
            evars.push_back(ev);
            ea = substitute_fo(ea, ta.exist_vars[static_cast<size_t>(i)], Term{ev, {0, 0}});
            eb = substitute_fo(eb, tb.exist_vars[static_cast<size_t>(i)], Term{ev, {0, 0}});
        }
        out.exist_vars = evars;
        out.exist_matrix = f_or(f_and(f_inset(sw, Term{evars[0], {0, 0}}), ea),
                                f_and(f_not(f_inset(sw, Term{evars[0], {0, 0}})), eb));
    } else {
        out.exist_matrix = f_true();
    }
    return out.to_sentence();
}

Sentence intersect_emso(const Sentence& a, const Sentence& b) {
    if (a.alphabet != b.alphabet) throw Error("intersect_emso: alphabets differ");
    Thm3Form ta = rename_apart(require_thm3(a, "intersect_emso"), "l");
    Thm3Form tb = rename_apart(require_thm3(b, "intersect_emso"), "r");

    Thm3Form out;
    out.alphabet = a.alphabet;
    const std::string w = "u0";
    out.univ_var = w;
    out.univ_matrix = f_and(retarget_univ(ta, w), retarget_univ(tb, w));
    out.set_vars = ta.set_vars;
    out.set_vars.insert(out.set_vars.end(), tb.set_vars.begin(), tb.set_vars.end());
    out.exist_vars = ta.exist_vars;
    out.exist_vars.insert(out.exist_vars.end(), tb.exist_vars.begin(), tb.exist_vars.end());
    Fptr ea = ta.exist_matrix ? ta.exist_matrix : f_true();
    Fptr eb = tb.exist_matrix ? tb.exist_matrix : f_true();
    out.exist_matrix = f_and(ea, eb);
    if (out.exist_vars.empty()) out.exist_matrix = f_true();
    return out.to_sentence();
}

namespace {

Fptr recolor_to_sets(const Fptr& f, const std::vector<std::string>& set_of_color) {
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ColorAtom>) {
                return f_inset(set_of_color[static_cast<size_t>(n.color)], n.t);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return f_not(recolor_to_sets(n.child, set_of_color));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return std::make_shared<const Formula>(
                    Formula{Binary{n.op, recolor_to_sets(n.lhs, set_of_color),
                                   recolor_to_sets(n.rhs, set_of_color)}});
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return f_quant(n.q, n.var, recolor_to_sets(n.body, set_of_color));
            } else {
                return f;
            }
        },
        f->node);
}

}  // namespace

Sentence project_formula(const Projection& pi, const Sentence& s) {
    validate_sentence(s);
    if (s.alphabet != pi.source()) throw Error("project_formula: sentence not over source alphabet");
    const int n = pi.source().size();
    std::vector<std::string> cvars;
    for (int i = 1; i <= n; ++i) cvars.push_back("C" + std::to_string(i));

    const std::string w = "w0";
    const Term wt{w, {0, 0}};
    std::vector<Fptr> part;
    {
        std::vector<Fptr> any;
        for (const auto& cv : cvars) any.push_back(f_inset(cv, wt));
        part.push_back(f_or_all(any));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            part.push_back(f_or(f_not(f_inset(cvars[static_cast<size_t>(i)], wt)),
                                f_not(f_inset(cvars[static_cast<size_t>(j)], wt))));
    for (int i = 0; i < n; ++i)
        part.push_back(f_imp(f_inset(cvars[static_cast<size_t>(i)], wt),
                             f_color(pi.apply(i), wt)));
    Fptr partition = f_and_all(part);

    if (auto t3 = parse_thm3(s)) {
        Thm3Form t = rename_apart(*t3, "p");
        Thm3Form out;
        out.alphabet = pi.target();
        out.set_vars = cvars;
        out.set_vars.insert(out.set_vars.end(), t.set_vars.begin(), t.set_vars.end());
        out.univ_var = w;
        Fptr inner_univ = t.univ_matrix ? retarget_univ(t, w) : f_true();
        out.univ_matrix = f_and(partition, recolor_to_sets(inner_univ, cvars));
        out.exist_vars = t.exist_vars;
        out.exist_matrix =
            t.exist_matrix ? recolor_to_sets(t.exist_matrix, cvars) : f_true();
        return out.to_sentence();
    }

    Fptr body = f_and(f_quant(Quant::ForallFo, w, partition),
                      recolor_to_sets(uniquify_bound(s.body), cvars));
    for (auto it = cvars.rbegin(); it != cvars.rend(); ++it)
        body = f_quant(Quant::ExistsSo, *it, body);
    return Sentence{pi.target(), body};
}

ColorsToSets colors_to_sets(const Sentence& s) {
    validate_sentence(s);
    std::vector<std::string> sets;
    Fptr cur = s.body;
    while (const auto* q = std::get_if<Quantified>(&cur->node)) {
        if (q->q != Quant::ExistsSo) break;
        sets.push_back(q->var);
        cur = q->body;
    }
    const int n = static_cast<int>(sets.size());
    const int q0 = s.alphabet.size();

    // product alphabet Q x {0,1}^n, base-major, bit vector as a suffix
    std::vector<std::string> names;
    for (int c = 0; c < q0; ++c) {
        for (int bits = 0; bits < (1 << n); ++bits) {
            std::string nm = s.alphabet.name(c);
            if (n > 0) {
                nm += ".";
                for (int i = 0; i < n; ++i) nm += ((bits >> i) & 1) ? '1' : '0';
            }
            names.push_back(nm);
        }
    }
    Alphabet prod(names);
    std::vector<ColorId> map;
    map.reserve(names.size());
    for (int c = 0; c < q0; ++c)
        for (int bits = 0; bits < (1 << n); ++bits) map.push_back(c);
    Projection pi(prod, s.alphabet, std::move(map));

    auto letter = [&](int base, int bits) { return base * (1 << n) + bits; };

    // rewrite: X_i(t) -> \/_{bits: bit i set, any base} P_(base,bits)(t)
    //          P_c(t) -> \/_bits P_(c,bits)(t)
    std::function<Fptr(const Fptr&)> rw = [&](const Fptr& f) -> Fptr {
        return std::visit(
            [&](const auto& nd) -> Fptr {
                using T = std::decay_t<decltype(nd)>;
                if constexpr (std::is_same_v<T, ColorAtom>) {
                    std::vector<Fptr> ds;
                    for (int bits = 0; bits < (1 << n); ++bits)
                        ds.push_back(f_color(letter(nd.color, bits), nd.t));
                    return f_or_all(ds);
                } else if constexpr (std::is_same_v<T, SetAtom>) {
                    int idx = -1;
                    for (int i = 0; i < n; ++i)
                        if (sets[static_cast<size_t>(i)] == nd.set) idx = i;
                    if (idx < 0) return f;  // free or inner set variable stays
                    std::vector<Fptr> ds;
                    for (int c = 0; c < q0; ++c)
                        for (int bits = 0; bits < (1 << n); ++bits)
                            if ((bits >> idx) & 1) ds.push_back(f_color(letter(c, bits), nd.t));
                    return f_or_all(ds);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    return f_not(rw(nd.child));
                } else if constexpr (std::is_same_v<T, Binary>) {
                    return std::make_shared<const Formula>(
                        Formula{Binary{nd.op, rw(nd.lhs), rw(nd.rhs)}});
                } else if constexpr (std::is_same_v<T, Quantified>) {
                    return f_quant(nd.q, nd.var, rw(nd.body));
                } else {
                    return f;
                }
            },
            f->node);
    };

    Sentence out{prod, rw(cur)};
    validate_sentence(out);
    return {out, pi};
}

}  // namespace tess
