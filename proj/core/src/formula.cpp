#include "tesselogic/formula.hpp"

#include <algorithm>
#include <atomic>

namespace tess {

namespace {

Fptr mk(Formula::Node n) { return std::make_shared<const Formula>(Formula{std::move(n)}); }

}  // namespace

Fptr f_true() {
    static const Fptr t = mk(BoolConst{true});
    return t;
}
Fptr f_false() {
    static const Fptr f = mk(BoolConst{false});
    return f;
}
Fptr f_bool(bool v) { return v ? f_true() : f_false(); }
Fptr f_color(ColorId c, Term t) { return mk(ColorAtom{c, std::move(t)}); }
Fptr f_inset(std::string set, Term t) { return mk(SetAtom{std::move(set), std::move(t)}); }
Fptr f_eq(Term a, Term b) { return mk(EqAtom{std::move(a), std::move(b)}); }
Fptr f_atmostone(std::string set) { return mk(AtMostOneAtom{std::move(set)}); }
Fptr f_not(Fptr a) { return mk(Unary{Conn::Not, std::move(a)}); }
Fptr f_and(Fptr a, Fptr b) { return mk(Binary{Conn::And, std::move(a), std::move(b)}); }
Fptr f_or(Fptr a, Fptr b) { return mk(Binary{Conn::Or, std::move(a), std::move(b)}); }
Fptr f_imp(Fptr a, Fptr b) { return mk(Binary{Conn::Imp, std::move(a), std::move(b)}); }
Fptr f_iff(Fptr a, Fptr b) { return mk(Binary{Conn::Iff, std::move(a), std::move(b)}); }
Fptr f_quant(Quant q, std::string var, Fptr body) {
    return mk(Quantified{q, std::move(var), std::move(body)});
}

Fptr f_and_all(const std::vector<Fptr>& fs) {
    if (fs.empty()) return f_true();
    Fptr acc = fs.front();
    for (size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
    return acc;
}

Fptr f_or_all(const std::vector<Fptr>& fs) {
    if (fs.empty()) return f_false();
    Fptr acc = fs.front();
    for (size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
    return acc;
}

bool formula_equal(const Fptr& a, const Fptr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& na) -> bool {
            using T = std::decay_t<decltype(na)>;
            const auto& nb = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, Unary>) {
                return na.op == nb.op && formula_equal(na.child, nb.child);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return na.op == nb.op && formula_equal(na.lhs, nb.lhs) &&
                       formula_equal(na.rhs, nb.rhs);
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return na.q == nb.q && na.var == nb.var && formula_equal(na.body, nb.body);
            } else {
                return na == nb;
            }
        },
        a->node);
}

namespace {

void collect_free(const Fptr& f, std::set<std::string>& bound_fo, std::set<std::string>& bound_so,
                  FreeVars& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ColorAtom>) {
                if (!bound_fo.count(n.t.var)) out.fo.insert(n.t.var);
            } else if constexpr (std::is_same_v<T, SetAtom>) {
                if (!bound_fo.count(n.t.var)) out.fo.insert(n.t.var);
                if (!bound_so.count(n.set)) out.so.insert(n.set);
            } else if constexpr (std::is_same_v<T, EqAtom>) {
                if (!bound_fo.count(n.lhs.var)) out.fo.insert(n.lhs.var);
                if (!bound_fo.count(n.rhs.var)) out.fo.insert(n.rhs.var);
            } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                if (!bound_so.count(n.set)) out.so.insert(n.set);
            } else if constexpr (std::is_same_v<T, Unary>) {
                collect_free(n.child, bound_fo, bound_so, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_free(n.lhs, bound_fo, bound_so, out);
                collect_free(n.rhs, bound_fo, bound_so, out);
            } else if constexpr (std::is_same_v<T, Quantified>) {
                auto& scope = is_fo(n.q) ? bound_fo : bound_so;
                bool added = scope.insert(n.var).second;
                collect_free(n.body, bound_fo, bound_so, out);
                if (added) scope.erase(n.var);
            }
        },
        f->node);
}

}  // namespace

FreeVars free_vars(const Fptr& f) {
    FreeVars out;
    std::set<std::string> bfo, bso;
    collect_free(f, bfo, bso, out);
    return out;
}

namespace {

std::atomic<std::uint64_t> fresh_counter{0};

std::string fresh_name(bool so) {
    auto n = fresh_counter.fetch_add(1);
    return (so ? "V" : "v") + std::to_string(n);
}

Fptr subst_fo_impl(const Fptr& f, const std::string& var, const Term& t) {
    auto subst_term = [&](const Term& tm) -> Term {
        if (tm.var == var) return Term{t.var, t.off + tm.off};
        return tm;
    };
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolConst> || std::is_same_v<T, AtMostOneAtom>) {
                return f;
            } else if constexpr (std::is_same_v<T, ColorAtom>) {
                return f_color(n.color, subst_term(n.t));
            } else if constexpr (std::is_same_v<T, SetAtom>) {
                return f_inset(n.set, subst_term(n.t));
            } else if constexpr (std::is_same_v<T, EqAtom>) {
                return f_eq(subst_term(n.lhs), subst_term(n.rhs));
            } else if constexpr (std::is_same_v<T, Unary>) {
                return f_not(subst_fo_impl(n.child, var, t));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mk(Binary{n.op, subst_fo_impl(n.lhs, var, t),
                                 subst_fo_impl(n.rhs, var, t)});
            } else {
                static_assert(std::is_same_v<T, Quantified>);
                if (is_fo(n.q) && n.var == var) return f;  // shadowed
                if (is_fo(n.q) && n.var == t.var) {
                    // capture: rename the bound variable first
                    std::string nv = fresh_name(false);
                    Fptr body = subst_fo_impl(n.body, n.var, Term{nv, {0, 0}});
                    return f_quant(n.q, nv, subst_fo_impl(body, var, t));
                }
                return f_quant(n.q, n.var, subst_fo_impl(n.body, var, t));
            }
        },
        f->node);
}

}  // namespace

Fptr substitute_fo(const Fptr& f, const std::string& var, const Term& t) {
    return subst_fo_impl(f, var, t);
}

Fptr rename_so(const Fptr& f, const std::string& from, const std::string& to) {
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SetAtom>) {
                return n.set == from ? f_inset(to, n.t) : f;
            } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                return n.set == from ? f_atmostone(to) : f;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return f_not(rename_so(n.child, from, to));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mk(Binary{n.op, rename_so(n.lhs, from, to), rename_so(n.rhs, from, to)});
            } else if constexpr (std::is_same_v<T, Quantified>) {
                if (!is_fo(n.q) && n.var == from) return f;  // shadowed
                return f_quant(n.q, n.var, rename_so(n.body, from, to));
            } else {
                return f;
            }
        },
        f->node);
}

namespace {

void validate_colors(const Fptr& f, int num_colors) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ColorAtom>) {
                if (n.color < 0 || n.color >= num_colors)
                    throw Error("color id outside declared alphabet");
            } else if constexpr (std::is_same_v<T, Unary>) {
                validate_colors(n.child, num_colors);
            } else if constexpr (std::is_same_v<T, Binary>) {
                validate_colors(n.lhs, num_colors);
                validate_colors(n.rhs, num_colors);
            } else if constexpr (std::is_same_v<T, Quantified>) {
                validate_colors(n.body, num_colors);
            }
        },
        f->node);
}

}  // namespace

void validate_sentence(const Sentence& s) {
    if (!s.body) throw Error("sentence has no body");
    auto fv = free_vars(s.body);
    if (!fv.empty()) {
        std::string names;
        for (const auto& v : fv.fo) names += " " + v;
        for (const auto& v : fv.so) names += " " + v;
        throw Error("sentence is not closed; free:" + names);
    }
    validate_colors(s.body, s.alphabet.size());
}

std::string to_string(FragmentTag t) {
    switch (t) {
        case FragmentTag::QF: return "QF";
        case FragmentTag::UnivSFT: return "UnivSFT";
        case FragmentTag::ClassC: return "ClassC";
        case FragmentTag::EMSO: return "EMSO";
        case FragmentTag::FO: return "FO";
        case FragmentTag::MSO: return "MSO";
        case FragmentTag::EMSONormal: return "EMSONormal";
    }
    return "?";
}

bool is_quantifier_free(const Fptr& f) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Quantified>) {
                return false;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return is_quantifier_free(n.child);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return is_quantifier_free(n.lhs) && is_quantifier_free(n.rhs);
            } else {
                return true;
            }
        },
        f->node);
}

std::vector<Offset> term_offsets(const Fptr& f, const std::string& var) {
    std::set<Offset> offs;
    auto add = [&](const Term& t) {
        if (var.empty() || t.var == var) offs.insert(t.off);
    };
    auto walk = [&](const Fptr& g, auto&& self) -> void {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, ColorAtom> || std::is_same_v<T, SetAtom>) {
                    add(n.t);
                } else if constexpr (std::is_same_v<T, EqAtom>) {
                    add(n.lhs);
                    add(n.rhs);
                } else if constexpr (std::is_same_v<T, Unary>) {
                    self(n.child, self);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    self(n.lhs, self);
                    self(n.rhs, self);
                } else if constexpr (std::is_same_v<T, Quantified>) {
                    self(n.body, self);
                }
            },
            g->node);
    };
    walk(f, walk);
    return {offs.begin(), offs.end()};
}

bool mentions_set_atoms(const Fptr& f) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SetAtom> || std::is_same_v<T, AtMostOneAtom>) {
                return true;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return mentions_set_atoms(n.child);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mentions_set_atoms(n.lhs) || mentions_set_atoms(n.rhs);
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return !is_fo(n.q) || mentions_set_atoms(n.body);
            } else {
                return false;
            }
        },
        f->node);
}

bool mentions_atmostone(const Fptr& f) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                return true;
            } else if constexpr (std::is_same_v<T, Unary>) {
                return mentions_atmostone(n.child);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mentions_atmostone(n.lhs) || mentions_atmostone(n.rhs);
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return mentions_atmostone(n.body);
            } else {
                return false;
            }
        },
        f->node);
}

std::optional<PrenexView> prenex_view(const Fptr& f) {
    PrenexView v;
    Fptr cur = f;
    while (const auto* q = std::get_if<Quantified>(&cur->node)) {
        v.prefix.push_back({q->q, q->var});
        cur = q->body;
    }
    if (!is_quantifier_free(cur)) return std::nullopt;
    v.matrix = cur;
    return v;
}

Fptr from_prenex_view(const PrenexView& v) {
    Fptr body = v.matrix;
    for (auto it = v.prefix.rbegin(); it != v.prefix.rend(); ++it)
        body = f_quant(it->q, it->var, body);
    return body;
}

namespace {

Fptr uniquify_impl(const Fptr& f, std::vector<std::pair<std::string, std::string>>& fo_map,
                   std::vector<std::pair<std::string, std::string>>& so_map) {
    auto lookup = [](const auto& m, const std::string& v) -> std::optional<std::string> {
        for (auto it = m.rbegin(); it != m.rend(); ++it)
            if (it->first == v) return it->second;
        return std::nullopt;
    };
    auto map_term = [&](const Term& t) -> Term {
        if (auto r = lookup(fo_map, t.var)) return Term{*r, t.off};
        return t;
    };
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolConst>) {
                return f;
            } else if constexpr (std::is_same_v<T, ColorAtom>) {
                return f_color(n.color, map_term(n.t));
            } else if constexpr (std::is_same_v<T, SetAtom>) {
                auto s = lookup(so_map, n.set);
                return f_inset(s ? *s : n.set, map_term(n.t));
            } else if constexpr (std::is_same_v<T, EqAtom>) {
                return f_eq(map_term(n.lhs), map_term(n.rhs));
            } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                auto s = lookup(so_map, n.set);
                return f_atmostone(s ? *s : n.set);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return f_not(uniquify_impl(n.child, fo_map, so_map));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return mk(Binary{n.op, uniquify_impl(n.lhs, fo_map, so_map),
                                 uniquify_impl(n.rhs, fo_map, so_map)});
            } else {
                static_assert(std::is_same_v<T, Quantified>);
                std::string nv = fresh_name(!is_fo(n.q));
                auto& m = is_fo(n.q) ? fo_map : so_map;
                m.emplace_back(n.var, nv);
                Fptr body = uniquify_impl(n.body, fo_map, so_map);
                m.pop_back();
                return f_quant(n.q, nv, body);
            }
        },
        f->node);
}

Fptr elim_imp_iff(const Fptr& f) {
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Unary>) {
                return f_not(elim_imp_iff(n.child));
            } else if constexpr (std::is_same_v<T, Binary>) {
                Fptr l = elim_imp_iff(n.lhs), r = elim_imp_iff(n.rhs);
                switch (n.op) {
                    case Conn::Imp: return f_or(f_not(l), r);
                    case Conn::Iff: return f_and(f_or(f_not(l), r), f_or(f_not(r), l));
                    default: return mk(Binary{n.op, std::move(l), std::move(r)});
                }
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return f_quant(n.q, n.var, elim_imp_iff(n.body));
            } else {
                return f;
            }
        },
        f->node);
}

Quant dual(Quant q) {
    switch (q) {
        case Quant::ExistsFo: return Quant::ForallFo;
        case Quant::ForallFo: return Quant::ExistsFo;
        case Quant::ExistsSo: return Quant::ForallSo;
        case Quant::ForallSo: return Quant::ExistsSo;
    }
    return q;
}

/// Negation normal form of an Imp/Iff-free formula.
Fptr to_nnf(const Fptr& f, bool negate) {
    return std::visit(
        [&](const auto& n) -> Fptr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolConst>) {
                return f_bool(negate ? !n.value : n.value);
            } else if constexpr (std::is_same_v<T, Unary>) {
                return to_nnf(n.child, !negate);
            } else if constexpr (std::is_same_v<T, Binary>) {
                Conn op = n.op;
                if (negate) op = (op == Conn::And) ? Conn::Or : Conn::And;
                return mk(Binary{op, to_nnf(n.lhs, negate), to_nnf(n.rhs, negate)});
            } else if constexpr (std::is_same_v<T, Quantified>) {
                return f_quant(negate ? dual(n.q) : n.q, n.var, to_nnf(n.body, negate));
            } else {
                return negate ? f_not(f) : f;
            }
        },
        f->node);
}

struct Hoisted {
    std::vector<PrefixEntry> prefix;
    Fptr matrix;
    bool has_fo_quant = false;
};

Hoisted hoist(const Fptr& f) {
    return std::visit(
        [&](const auto& n) -> Hoisted {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Quantified>) {
                Hoisted h = hoist(n.body);
                h.prefix.insert(h.prefix.begin(), {n.q, n.var});
                h.has_fo_quant = h.has_fo_quant || is_fo(n.q);
                return h;
            } else if constexpr (std::is_same_v<T, Binary>) {
                Hoisted l = hoist(n.lhs);
                Hoisted r = hoist(n.rhs);
                if (l.has_fo_quant && mentions_atmostone(r.matrix))
                    throw Error("prenex: atmostone pseudo-atom may not cross a first-order quantifier");
                if (r.has_fo_quant && mentions_atmostone(l.matrix))
                    throw Error("prenex: atmostone pseudo-atom may not cross a first-order quantifier");
                Hoisted out;
                out.prefix = std::move(l.prefix);
                out.prefix.insert(out.prefix.end(), r.prefix.begin(), r.prefix.end());
                out.matrix = mk(Binary{n.op, l.matrix, r.matrix});
                out.has_fo_quant = l.has_fo_quant || r.has_fo_quant;
                return out;
            } else {
                // NNF leaves: atoms and negated atoms
                return Hoisted{{}, f, false};
            }
        },
        f->node);
}

}  // namespace

Fptr uniquify_bound(const Fptr& f) {
    std::vector<std::pair<std::string, std::string>> fo_map, so_map;
    return uniquify_impl(f, fo_map, so_map);
}

Sentence prenex(const Sentence& s) {
    if (prenex_view(s.body)) return s;
    Fptr body = elim_imp_iff(s.body);
    body = uniquify_bound(body);
    body = to_nnf(body, false);
    Hoisted h = hoist(body);
    return Sentence{s.alphabet, from_prenex_view({std::move(h.prefix), h.matrix})};
}

std::optional<Thm3Form> parse_thm3(const Sentence& s) {
    Thm3Form t;
    t.alphabet = s.alphabet;
    Fptr cur = s.body;
    while (const auto* q = std::get_if<Quantified>(&cur->node)) {
        if (q->q != Quant::ExistsSo) break;
        t.set_vars.push_back(q->var);
        cur = q->body;
    }
    auto parse_univ = [&](const Fptr& f) -> bool {
        const auto* q = std::get_if<Quantified>(&f->node);
        if (!q || q->q != Quant::ForallFo || !is_quantifier_free(q->body)) return false;
        t.univ_var = q->var;
        t.univ_matrix = q->body;
        return true;
    };
    auto parse_exist = [&](const Fptr& f) -> bool {
        Fptr c = f;
        std::vector<std::string> vars;
        while (const auto* q = std::get_if<Quantified>(&c->node)) {
            if (q->q != Quant::ExistsFo) return false;
            vars.push_back(q->var);
            c = q->body;
        }
        if (vars.empty() || !is_quantifier_free(c)) return false;
        t.exist_vars = std::move(vars);
        t.exist_matrix = c;
        return true;
    };
    if (const auto* b = std::get_if<Binary>(&cur->node); b && b->op == Conn::And) {
        if (parse_univ(b->lhs) && parse_exist(b->rhs)) return t;
        return std::nullopt;
    }
    if (parse_univ(cur)) {
        t.exist_matrix = f_true();
        return t;
    }
    if (parse_exist(cur)) {
        t.univ_matrix = nullptr;
        return t;
    }
    return std::nullopt;
}

Sentence Thm3Form::to_sentence() const {
    Fptr body;
    Fptr univ = univ_var.empty() ? nullptr : f_quant(Quant::ForallFo, univ_var, univ_matrix);
    Fptr exist;
    if (!exist_vars.empty()) {
        exist = exist_matrix;
        for (auto it = exist_vars.rbegin(); it != exist_vars.rend(); ++it)
            exist = f_quant(Quant::ExistsFo, *it, exist);
    }
    if (univ && exist) body = f_and(univ, exist);
    else if (univ) body = univ;
    else if (exist) body = exist;
    else body = f_true();
    for (auto it = set_vars.rbegin(); it != set_vars.rend(); ++it)
        body = f_quant(Quant::ExistsSo, *it, body);
    return Sentence{alphabet, body};
}

std::set<FragmentTag> classify(const Sentence& s) {
    validate_sentence(s);
    std::set<FragmentTag> tags{FragmentTag::MSO};
    Sentence p = prenex(s);
    auto view = prenex_view(p.body);
    const auto& prefix = view->prefix;

    bool any_so = false, any_fo = false;
    for (const auto& e : prefix) {
        if (is_fo(e.q)) any_fo = true;
        else any_so = true;
    }
    (void)any_fo;

    if (!any_so) tags.insert(FragmentTag::FO);
    if (prefix.empty()) tags.insert(FragmentTag::QF);

    // ClassC: a block of existential set quantifiers then universal
    // first-order quantifiers over a quantifier-free matrix.
    {
        size_t i = 0;
        while (i < prefix.size() && prefix[i].q == Quant::ExistsSo) ++i;
        size_t j = i;
        while (j < prefix.size() && prefix[j].q == Quant::ForallFo) ++j;
        if (j == prefix.size()) {
            tags.insert(FragmentTag::ClassC);
            if (i == 0 && j == 1) tags.insert(FragmentTag::UnivSFT);
        }
    }

    // EMSO: existential set block then first-order quantifiers only.
    {
        size_t i = 0;
        while (i < prefix.size() && prefix[i].q == Quant::ExistsSo) ++i;
        bool rest_fo = true;
        for (size_t j = i; j < prefix.size(); ++j)
            if (!is_fo(prefix[j].q)) rest_fo = false;
        if (rest_fo) tags.insert(FragmentTag::EMSO);
    }

    if (parse_thm3(s)) tags.insert(FragmentTag::EMSONormal);
    return tags;
}

}  // namespace tess
