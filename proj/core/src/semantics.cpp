#include "tesselogic/semantics.hpp"

#include <bit>
#include <functional>

namespace tess {

namespace {

enum class Overflow { None, North, East, South, West, NE, NW, SE, SW };

struct GridRef {
    bool torus = true;
    int w = 0, h = 0;
    int num_colors = 0;
    const std::vector<ColorId>* cells = nullptr;

    int area() const { return w * h; }
    ColorId color(int idx) const { return (*cells)[static_cast<size_t>(idx)]; }
};

struct Resolved {
    bool inside = true;
    int index = -1;
    Overflow side = Overflow::None;
    int x = 0, y = 0;
};

Resolved resolve(const GridRef& g, int cell, Offset off) {
    int x = cell % g.w + off.dx;
    int y = cell / g.w + off.dy;
    if (g.torus) return {true, floor_mod(y, g.h) * g.w + floor_mod(x, g.w), Overflow::None, x, y};
    bool n = y >= g.h, s = y < 0, e = x >= g.w, w = x < 0;
    if (!n && !s && !e && !w) return {true, y * g.w + x, Overflow::None, x, y};
    Overflow o = Overflow::None;
    if (n && e) o = Overflow::NE;
    else if (n && w) o = Overflow::NW;
    else if (s && e) o = Overflow::SE;
    else if (s && w) o = Overflow::SW;
    else if (n) o = Overflow::North;
    else if (s) o = Overflow::South;
    else if (e) o = Overflow::East;
    else o = Overflow::West;
    return {false, -1, o, x, y};
}

bool flagged_outside(const BoundaryConvention& conv, const GridRef& g, const std::string& set,
                     const Resolved& r, const std::map<std::string, CellMask>& so) {
    auto it = conv.flagged.find(set);
    if (it == conv.flagged.end()) return false;  // undeclared variables read as false
    const FlaggedPolicy& p = it->second;
    if (p.kind == FlaggedPolicy::Kind::Clamp) {
        int cx = std::min(std::max(r.x, 0), g.w - 1);
        int cy = std::min(std::max(r.y, 0), g.h - 1);
        auto m = so.find(set);
        if (m == so.end()) throw Error("unbound set variable " + set);
        return (m->second >> (cy * g.w + cx)) & 1;
    }
    switch (r.side) {
        case Overflow::North:
        case Overflow::East:
        case Overflow::NE: return p.ne;
        case Overflow::South:
        case Overflow::West:
        case Overflow::SW: return p.sw;
        default: return false;  // NW and SE corners
    }
}

class Evaluator {
public:
    Evaluator(const GridRef& g, const BoundaryConvention& conv) : g_(g), conv_(conv) {
        if (g_.area() > 64) throw Error("evaluation domain larger than 64 cells");
    }

    bool eval(const Fptr& f, Assignment& env) {
        if (auto fast = try_fast(f, env)) return *fast;
        return eval_rec(f, env);
    }

    bool eval_rec(const Fptr& f, Assignment& env) {
        return std::visit(
            [&](const auto& n) -> bool {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, BoolConst>) {
                    return n.value;
                } else if constexpr (std::is_same_v<T, ColorAtom>) {
                    Resolved r = resolve(g_, fo_cell(env, n.t.var), n.t.off);
                    if (!r.inside) return false;
                    return g_.color(r.index) == n.color;
                } else if constexpr (std::is_same_v<T, SetAtom>) {
                    Resolved r = resolve(g_, fo_cell(env, n.t.var), n.t.off);
                    if (r.inside) return (so_mask(env, n.set) >> r.index) & 1;
                    if (conv_.mode == ConvMode::WindowFlagged)
                        return flagged_outside(conv_, g_, n.set, r, env.so);
                    return false;
                } else if constexpr (std::is_same_v<T, EqAtom>) {
                    Resolved a = resolve(g_, fo_cell(env, n.lhs.var), n.lhs.off);
                    Resolved b = resolve(g_, fo_cell(env, n.rhs.var), n.rhs.off);
                    if (!a.inside || !b.inside) return false;
                    return a.index == b.index;
                } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                    return std::popcount(so_mask(env, n.set)) <= 1;
                } else if constexpr (std::is_same_v<T, Unary>) {
                    return !eval_rec(n.child, env);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    switch (n.op) {
                        case Conn::And: return eval_rec(n.lhs, env) && eval_rec(n.rhs, env);
                        case Conn::Or: return eval_rec(n.lhs, env) || eval_rec(n.rhs, env);
                        case Conn::Imp: return !eval_rec(n.lhs, env) || eval_rec(n.rhs, env);
                        case Conn::Iff: return eval_rec(n.lhs, env) == eval_rec(n.rhs, env);
                        default: throw Error("bad connective");
                    }
                } else {
                    static_assert(std::is_same_v<T, Quantified>);
                    if (is_fo(n.q)) {
                        bool exists = n.q == Quant::ExistsFo;
                        auto saved = env.fo.find(n.var) != env.fo.end()
                                         ? std::optional<int>(env.fo[n.var])
                                         : std::nullopt;
                        for (int c = 0; c < g_.area(); ++c) {
                            env.fo[n.var] = c;
                            bool v = eval(n.body, env);
                            if (v == exists) {
                                restore_fo(env, n.var, saved);
                                return exists;
                            }
                        }
                        restore_fo(env, n.var, saved);
                        return !exists;
                    }
                    bool exists = n.q == Quant::ExistsSo;
                    if (g_.area() > 24)
                        throw BudgetError("second-order quantification over more than 24 cells",
                                          1u << 24);
                    auto saved = env.so.find(n.var) != env.so.end()
                                     ? std::optional<CellMask>(env.so[n.var])
                                     : std::nullopt;
                    CellMask end = CellMask{1} << g_.area();
                    for (CellMask m = 0; m < end; ++m) {
                        env.so[n.var] = m;
                        bool v = eval(n.body, env);
                        if (v == exists) {
                            restore_so(env, n.var, saved);
                            return exists;
                        }
                    }
                    restore_so(env, n.var, saved);
                    return !exists;
                }
            },
            f->node);
    }

private:
    int fo_cell(const Assignment& env, const std::string& var) const {
        auto it = env.fo.find(var);
        if (it == env.fo.end()) throw Error("unbound variable " + var);
        return it->second;
    }
    CellMask so_mask(const Assignment& env, const std::string& set) const {
        auto it = env.so.find(set);
        if (it == env.so.end()) throw Error("unbound set variable " + set);
        return it->second;
    }
    static void restore_fo(Assignment& env, const std::string& var, std::optional<int> saved) {
        if (saved) env.fo[var] = *saved;
        else env.fo.erase(var);
    }
    static void restore_so(Assignment& env, const std::string& var,
                           std::optional<CellMask> saved) {
        if (saved) env.so[var] = *saved;
        else env.so.erase(var);
    }

    // --- backtracking fast path for existential set prefixes -------------
    //
    // Shape: E2 X1..Xn over a conjunction whose conjuncts are single-variable
    // universal chains, existential first-order chains, or bare
    // quantifier-free formulas. Assigns set bits cell by cell with
    // three-valued pruning of the universal conjuncts; same semantics as the
    // exhaustive loop, just ordered differently.

    enum class Tri { False, True, Unknown };

    struct FastShape {
        std::vector<std::string> sets;
        struct Univ {
            std::string var;
            Fptr matrix;
        };
        std::vector<Univ> univs;
        struct Exist {
            std::vector<std::string> vars;
            Fptr matrix;
        };
        std::vector<Exist> exists;
        std::vector<Fptr> bare;
    };

    static bool collect_conjuncts(const Fptr& f, FastShape& shape) {
        if (const auto* b = std::get_if<Binary>(&f->node); b && b->op == Conn::And)
            return collect_conjuncts(b->lhs, shape) && collect_conjuncts(b->rhs, shape);
        if (const auto* q = std::get_if<Quantified>(&f->node)) {
            if (q->q == Quant::ForallFo) {
                if (!is_quantifier_free(q->body)) return false;
                shape.univs.push_back({q->var, q->body});
                return true;
            }
            if (q->q == Quant::ExistsFo) {
                FastShape::Exist e;
                Fptr cur = f;
                while (const auto* qq = std::get_if<Quantified>(&cur->node)) {
                    if (qq->q != Quant::ExistsFo) return false;
                    e.vars.push_back(qq->var);
                    cur = qq->body;
                }
                if (!is_quantifier_free(cur)) return false;
                e.matrix = cur;
                shape.exists.push_back(std::move(e));
                return true;
            }
            return false;
        }
        if (!is_quantifier_free(f)) return false;
        shape.bare.push_back(f);
        return true;
    }

    std::optional<bool> try_fast(const Fptr& f, Assignment& env) {
        const auto* q = std::get_if<Quantified>(&f->node);
        if (!q || q->q != Quant::ExistsSo) return std::nullopt;
        FastShape shape;
        Fptr cur = f;
        while (const auto* qq = std::get_if<Quantified>(&cur->node)) {
            if (qq->q != Quant::ExistsSo) break;
            shape.sets.push_back(qq->var);
            cur = qq->body;
        }
        if (!collect_conjuncts(cur, shape)) return std::nullopt;
        for (const auto& u : shape.univs)
            if (env.fo.count(u.var)) return std::nullopt;  // shadowing: fall back
        return fast_search(shape, env);
    }

    Tri tri_eval(const Fptr& f, Assignment& env, int assigned_upto) {
        return std::visit(
            [&](const auto& n) -> Tri {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, BoolConst>) {
                    return n.value ? Tri::True : Tri::False;
                } else if constexpr (std::is_same_v<T, ColorAtom>) {
                    Resolved r = resolve(g_, fo_cell(env, n.t.var), n.t.off);
                    if (!r.inside) return Tri::False;
                    return g_.color(r.index) == n.color ? Tri::True : Tri::False;
                } else if constexpr (std::is_same_v<T, EqAtom>) {
                    Resolved a = resolve(g_, fo_cell(env, n.lhs.var), n.lhs.off);
                    Resolved b = resolve(g_, fo_cell(env, n.rhs.var), n.rhs.off);
                    if (!a.inside || !b.inside) return Tri::False;
                    return a.index == b.index ? Tri::True : Tri::False;
                } else if constexpr (std::is_same_v<T, SetAtom>) {
                    Resolved r = resolve(g_, fo_cell(env, n.t.var), n.t.off);
                    if (!r.inside) {
                        if (conv_.mode == ConvMode::WindowFlagged) {
                            // clamp reads may touch unassigned cells
                            auto it = conv_.flagged.find(n.set);
                            if (it != conv_.flagged.end() &&
                                it->second.kind == FlaggedPolicy::Kind::Clamp) {
                                int cx = std::min(std::max(r.x, 0), g_.w - 1);
                                int cy = std::min(std::max(r.y, 0), g_.h - 1);
                                int idx = cy * g_.w + cx;
                                if (fixed_sets_.count(n.set) == 0 && idx > assigned_upto)
                                    return Tri::Unknown;
                            }
                            return flagged_outside(conv_, g_, n.set, r, env.so) ? Tri::True
                                                                                : Tri::False;
                        }
                        return Tri::False;
                    }
                    if (fixed_sets_.count(n.set) == 0 && r.index > assigned_upto)
                        return Tri::Unknown;
                    return ((so_mask(env, n.set) >> r.index) & 1) ? Tri::True : Tri::False;
                } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                    if (fixed_sets_.count(n.set))
                        return std::popcount(so_mask(env, n.set)) <= 1 ? Tri::True : Tri::False;
                    if (std::popcount(so_mask(env, n.set)) > 1) return Tri::False;
                    return assigned_upto + 1 >= g_.area() ? Tri::True : Tri::Unknown;
                } else if constexpr (std::is_same_v<T, Unary>) {
                    Tri v = tri_eval(n.child, env, assigned_upto);
                    if (v == Tri::Unknown) return v;
                    return v == Tri::True ? Tri::False : Tri::True;
                } else if constexpr (std::is_same_v<T, Binary>) {
                    Tri a = tri_eval(n.lhs, env, assigned_upto);
                    if (n.op == Conn::And) {
                        if (a == Tri::False) return Tri::False;
                        Tri b = tri_eval(n.rhs, env, assigned_upto);
                        if (b == Tri::False) return Tri::False;
                        if (a == Tri::True && b == Tri::True) return Tri::True;
                        return Tri::Unknown;
                    }
                    if (n.op == Conn::Or) {
                        if (a == Tri::True) return Tri::True;
                        Tri b = tri_eval(n.rhs, env, assigned_upto);
                        if (b == Tri::True) return Tri::True;
                        if (a == Tri::False && b == Tri::False) return Tri::False;
                        return Tri::Unknown;
                    }
                    if (n.op == Conn::Imp) {
                        Tri b = tri_eval(n.rhs, env, assigned_upto);
                        if (a == Tri::False || b == Tri::True) return Tri::True;
                        if (a == Tri::True && b == Tri::False) return Tri::False;
                        return Tri::Unknown;
                    }
                    Tri b = tri_eval(n.rhs, env, assigned_upto);
                    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
                    return a == b ? Tri::True : Tri::False;
                } else {
                    throw Error("quantifier inside fast-path matrix");
                }
            },
            f->node);
    }

    bool fast_search(const FastShape& shape, Assignment& env) {
        const int area = g_.area();
        const int n = static_cast<int>(shape.sets.size());
        fixed_sets_.clear();
        for (const auto& [name, _] : env.so) fixed_sets_.insert(name);
        for (const auto& s : shape.sets) fixed_sets_.erase(s);

        std::vector<std::optional<CellMask>> saved;
        saved.reserve(shape.sets.size());
        for (const auto& s : shape.sets) {
            saved.push_back(env.so.count(s) ? std::optional<CellMask>(env.so[s]) : std::nullopt);
            env.so[s] = 0;
        }

        // bare conjuncts never mention the searched sets' unassigned cells
        // only if they avoid those sets entirely; check them last instead.
        std::function<bool(int)> go = [&](int cell) -> bool {
            if (cell == area) {
                for (const auto& u : shape.univs) {
                    for (int c = 0; c < area; ++c) {
                        env.fo[u.var] = c;
                        Tri v = tri_eval(u.matrix, env, area - 1);
                        env.fo.erase(u.var);
                        if (v != Tri::True) return false;
                    }
                }
                for (const auto& b : shape.bare)
                    if (tri_eval(b, env, area - 1) != Tri::True) return false;
                for (const auto& e : shape.exists)
                    if (!exist_holds(e, env)) return false;
                return true;
            }
            CellMask bits_end = CellMask{1} << n;
            for (CellMask bits = 0; bits < bits_end; ++bits) {
                for (int i = 0; i < n; ++i) {
                    CellMask& m = env.so[shape.sets[static_cast<size_t>(i)]];
                    if ((bits >> i) & 1) m |= CellMask{1} << cell;
                    else m &= ~(CellMask{1} << cell);
                }
                bool viable = true;
                for (const auto& u : shape.univs) {
                    for (int c = 0; c <= cell && viable; ++c) {
                        env.fo[u.var] = c;
                        if (tri_eval(u.matrix, env, cell) == Tri::False) viable = false;
                        env.fo.erase(u.var);
                    }
                    if (!viable) break;
                }
                if (viable && go(cell + 1)) return true;
            }
            return false;
        };
        bool found = go(0);

        for (size_t i = 0; i < shape.sets.size(); ++i) {
            if (saved[i]) env.so[shape.sets[i]] = *saved[i];
            else env.so.erase(shape.sets[i]);
        }
        return found;
    }

    bool exist_holds(const FastShape::Exist& e, Assignment& env) {
        const int area = g_.area();
        std::vector<int> tuple(e.vars.size(), 0);
        while (true) {
            for (size_t i = 0; i < e.vars.size(); ++i) env.fo[e.vars[i]] = tuple[i];
            Tri v = tri_eval(e.matrix, env, area - 1);
            for (const auto& var : e.vars) env.fo.erase(var);
            if (v == Tri::True) return true;
            size_t i = 0;
            while (i < tuple.size() && ++tuple[i] == area) tuple[i++] = 0;
            if (i == tuple.size()) return false;
        }
    }

    GridRef g_;
    BoundaryConvention conv_;
    std::set<std::string> fixed_sets_;
};

GridRef grid_of(const TorusConfig& c) {
    return {true, c.width(), c.height(), c.num_colors(), &c.cells()};
}
GridRef grid_of(const WindowConfig& c) {
    return {false, c.width(), c.height(), c.num_colors(), &c.cells()};
}

}  // namespace

bool eval_formula(const Fptr& f, const Alphabet& alphabet, const TorusConfig& c,
                  const BoundaryConvention& conv, const Assignment& env) {
    if (c.num_colors() != alphabet.size()) throw Error("alphabet mismatch");
    if (conv.mode != ConvMode::Torus) throw Error("torus configuration needs TORUS convention");
    Evaluator ev(grid_of(c), conv);
    Assignment scratch = env;
    return ev.eval(f, scratch);
}

bool eval_formula(const Fptr& f, const Alphabet& alphabet, const WindowConfig& c,
                  const BoundaryConvention& conv, const Assignment& env) {
    if (c.num_colors() != alphabet.size()) throw Error("alphabet mismatch");
    if (conv.mode == ConvMode::Torus) throw Error("window configuration needs a window convention");
    Evaluator ev(grid_of(c), conv);
    Assignment scratch = env;
    return ev.eval(f, scratch);
}

bool eval(const Sentence& s, const TorusConfig& c, const BoundaryConvention& conv,
          const Assignment& env) {
    return eval_formula(s.body, s.alphabet, c, conv, env);
}

bool eval(const Sentence& s, const WindowConfig& c, const BoundaryConvention& conv,
          const Assignment& env) {
    return eval_formula(s.body, s.alphabet, c, conv, env);
}

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t budget) {
    std::uint64_t n = 1;
    for (int i = 0; i < exp; ++i) {
        if (n > budget / base + 1) return budget + 1;
        n *= base;
        if (n > budget) return budget + 1;
    }
    return n;
}

}  // namespace

void for_each_torus(int w, int h, int q, std::uint64_t budget,
                    const std::function<void(const TorusConfig&)>& fn) {
    std::uint64_t total = checked_pow(static_cast<std::uint64_t>(q), w * h, budget);
    if (total > budget)
        throw BudgetError("torus enumeration exceeds budget of " + std::to_string(budget), budget);
    std::vector<ColorId> cells(static_cast<size_t>(w) * h, 0);
    while (true) {
        fn(TorusConfig(w, h, q, cells));
        // lexicographic order: cell 0 is the most significant digit
        int i = static_cast<int>(cells.size()) - 1;
        while (i >= 0 && cells[static_cast<size_t>(i)] == q - 1) cells[static_cast<size_t>(i--)] = 0;
        if (i < 0) break;
        ++cells[static_cast<size_t>(i)];
    }
}

void for_each_window(int w, int h, int q, std::uint64_t budget,
                     const std::function<void(const WindowConfig&)>& fn) {
    std::uint64_t total = checked_pow(static_cast<std::uint64_t>(q), w * h, budget);
    if (total > budget)
        throw BudgetError("window enumeration exceeds budget of " + std::to_string(budget), budget);
    std::vector<ColorId> cells(static_cast<size_t>(w) * h, 0);
    while (true) {
        fn(WindowConfig(w, h, q, cells));
        int i = static_cast<int>(cells.size()) - 1;
        while (i >= 0 && cells[static_cast<size_t>(i)] == q - 1) cells[static_cast<size_t>(i--)] = 0;
        if (i < 0) break;
        ++cells[static_cast<size_t>(i)];
    }
}

std::vector<TorusConfig> models_torus(const Sentence& s, int w, int h, std::uint64_t budget) {
    validate_sentence(s);
    std::vector<TorusConfig> out;
    for_each_torus(w, h, s.alphabet.size(), budget, [&](const TorusConfig& c) {
        if (eval(s, c)) out.push_back(c);
    });
    return out;
}

std::vector<WindowConfig> models_window(const Sentence& s, int w, int h,
                                        const BoundaryConvention& conv, std::uint64_t budget) {
    validate_sentence(s);
    std::vector<WindowConfig> out;
    for_each_window(w, h, s.alphabet.size(), budget, [&](const WindowConfig& c) {
        if (eval(s, c, conv)) out.push_back(c);
    });
    return out;
}

namespace {

template <class Config>
int preimage_run(const Projection& pi, const Sentence& s, const Config& c,
                 const BoundaryConvention& conv, std::uint64_t budget, bool want_all) {
    if (c.num_colors() != pi.target().size())
        throw Error("alphabet mismatch: configuration not over projection target");
    if (s.alphabet != pi.source()) throw Error("alphabet mismatch: sentence not over source");
    std::vector<std::vector<ColorId>> choices;
    choices.reserve(c.cells().size());
    std::uint64_t total = 1;
    for (ColorId col : c.cells()) {
        choices.push_back(pi.preimage(col));
        if (choices.back().empty()) return want_all ? 1 : 0;  // no preimage at all
        total *= choices.back().size();
        if (total > budget)
            throw BudgetError("preimage enumeration exceeds budget", budget);
    }
    std::vector<size_t> idx(choices.size(), 0);
    std::vector<ColorId> cells(choices.size());
    while (true) {
        for (size_t i = 0; i < choices.size(); ++i) cells[i] = choices[i][idx[i]];
        Config cand(c.width(), c.height(), pi.source().size(), cells);
        bool v;
        if constexpr (std::is_same_v<Config, TorusConfig>) v = eval(s, cand, conv);
        else v = eval(s, cand, conv);
        if (want_all && !v) return 0;
        if (!want_all && v) return 1;
        size_t i = 0;
        while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
    }
    return want_all ? 1 : 0;
}

}  // namespace

bool e_projection_member(const Projection& pi, const Sentence& s, const TorusConfig& c,
                         const BoundaryConvention& conv, std::uint64_t budget) {
    return preimage_run(pi, s, c, conv, budget, false) != 0;
}

bool a_projection_member(const Projection& pi, const Sentence& s, const TorusConfig& c,
                         const BoundaryConvention& conv, std::uint64_t budget) {
    return preimage_run(pi, s, c, conv, budget, true) != 0;
}

}  // namespace tess
