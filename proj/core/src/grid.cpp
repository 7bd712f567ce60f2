#include "tesselogic/grid.hpp"

#include <algorithm>
#include <unordered_set>

namespace tess {

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw Error("alphabet must be nonempty");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw Error("alphabet color name must be nonempty");
        if (!seen.insert(n).second) throw Error("duplicate color name: " + n);
    }
}

std::optional<ColorId> Alphabet::find(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<ColorId>(i);
    return std::nullopt;
}

Pattern::Pattern(std::vector<std::pair<Offset, ColorId>> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw Error("pattern domain must be nonempty");
    std::sort(cells_.begin(), cells_.end());
    for (size_t i = 1; i < cells_.size(); ++i)
        if (cells_[i].first == cells_[i - 1].first)
            throw Error("pattern assigns an offset twice");
    for (const auto& [_, c] : cells_)
        if (c < 0) throw Error("pattern color id must be >= 0");
}

std::vector<Offset> Pattern::domain() const {
    std::vector<Offset> d;
    d.reserve(cells_.size());
    for (const auto& [off, _] : cells_) d.push_back(off);
    return d;
}

std::optional<ColorId> Pattern::at(Offset o) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), o,
                               [](const auto& cell, Offset key) { return cell.first < key; });
    if (it != cells_.end() && it->first == o) return it->second;
    return std::nullopt;
}

ColorId Pattern::max_color() const {
    ColorId m = 0;
    for (const auto& [_, c] : cells_) m = std::max(m, c);
    return m;
}

namespace {

std::vector<ColorId> checked_cells(int w, int h, int num_colors, std::vector<ColorId> cells,
                                   const char* what) {
    if (w < 1 || h < 1) throw Error(std::string(what) + " dimensions must be >= 1");
    if (num_colors < 1) throw Error(std::string(what) + " needs a nonempty alphabet");
    if (cells.size() != static_cast<size_t>(w) * static_cast<size_t>(h))
        throw Error(std::string(what) + " cell count does not match dimensions");
    for (ColorId c : cells)
        if (c < 0 || c >= num_colors) throw Error(std::string(what) + " cell color out of range");
    return cells;
}

}  // namespace

TorusConfig::TorusConfig(int w, int h, int num_colors, std::vector<ColorId> cells)
    : w_(w), h_(h), num_colors_(num_colors),
      cells_(checked_cells(w, h, num_colors, std::move(cells), "torus")) {}

ColorId TorusConfig::at(int x, int y) const {
    return cells_[static_cast<size_t>(floor_mod(y, h_)) * w_ + floor_mod(x, w_)];
}

TorusConfig TorusConfig::translated(Offset v) const {
    std::vector<ColorId> out(cells_.size());
    for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x)
            out[static_cast<size_t>(y) * w_ + x] = at(x - v.dx, y - v.dy);
    return TorusConfig(w_, h_, num_colors_, std::move(out));
}

WindowConfig::WindowConfig(int w, int h, int num_colors, std::vector<ColorId> cells)
    : w_(w), h_(h), num_colors_(num_colors),
      cells_(checked_cells(w, h, num_colors, std::move(cells), "window")) {}

ColorId WindowConfig::at(int x, int y) const {
    if (!contains(x, y)) throw Error("window access out of bounds");
    return at_raw(x, y);
}

Projection::Projection(Alphabet source, Alphabet target, std::vector<ColorId> map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
    if (map_.size() != static_cast<size_t>(source_.size()))
        throw Error("projection map must be total on the source alphabet");
    for (ColorId c : map_)
        if (c < 0 || c >= target_.size()) throw Error("projection maps outside target alphabet");
}

Projection Projection::identity(const Alphabet& a) {
    std::vector<ColorId> map(static_cast<size_t>(a.size()));
    for (int i = 0; i < a.size(); ++i) map[static_cast<size_t>(i)] = i;
    return Projection(a, a, std::move(map));
}

std::vector<ColorId> Projection::preimage(ColorId target_color) const {
    std::vector<ColorId> pre;
    for (size_t i = 0; i < map_.size(); ++i)
        if (map_[i] == target_color) pre.push_back(static_cast<ColorId>(i));
    return pre;
}

bool occurs_at(const Pattern& p, const TorusConfig& c, Offset z0) {
    if (p.max_color() >= c.num_colors())
        throw Error("alphabet mismatch: pattern color outside configuration alphabet");
    for (const auto& [off, col] : p.cells())
        if (c.at(z0.dx + off.dx, z0.dy + off.dy) != col) return false;
    return true;
}

int count_occurrences(const Pattern& p, const TorusConfig& c, int cap) {
    if (cap < 0) throw Error("count cap must be >= 0");
    if (p.max_color() >= c.num_colors())
        throw Error("alphabet mismatch: pattern color outside configuration alphabet");
    int count = 0;
    for (int y = 0; y < c.height() && count < cap; ++y)
        for (int x = 0; x < c.width() && count < cap; ++x)
            if (occurs_at(p, c, {x, y})) ++count;
    return count;
}

std::set<Pattern> language(const TorusConfig& c, const std::vector<Offset>& domain) {
    if (domain.empty()) throw Error("language domain must be nonempty");
    std::set<Pattern> out;
    for (int y = 0; y < c.height(); ++y)
        for (int x = 0; x < c.width(); ++x) {
            std::vector<std::pair<Offset, ColorId>> cells;
            cells.reserve(domain.size());
            for (Offset off : domain) cells.emplace_back(off, c.at(x + off.dx, y + off.dy));
            out.insert(Pattern(std::move(cells)));
        }
    return out;
}

TorusConfig project(const Projection& pi, const TorusConfig& c) {
    if (c.num_colors() != pi.source().size())
        throw Error("alphabet mismatch: configuration not over projection source");
    std::vector<ColorId> out;
    out.reserve(c.cells().size());
    for (ColorId col : c.cells()) out.push_back(pi.apply(col));
    return TorusConfig(c.width(), c.height(), pi.target().size(), std::move(out));
}

WindowConfig project(const Projection& pi, const WindowConfig& c) {
    if (c.num_colors() != pi.source().size())
        throw Error("alphabet mismatch: configuration not over projection source");
    std::vector<ColorId> out;
    out.reserve(c.cells().size());
    for (ColorId col : c.cells()) out.push_back(pi.apply(col));
    return WindowConfig(c.width(), c.height(), pi.target().size(), std::move(out));
}

HanfSignature hanf_signature(const TorusConfig& c, int n, int k) {
    if (n < 1) throw Error("hanf signature needs n >= 1");
    if (k < 0) throw Error("hanf signature needs k >= 0");
    // "Size n" patterns are n x n squares anchored at (0,0); counts are capped
    // at k+1 so signature equality matches the symmetrized (n,k)-equivalence.
    HanfSignature sig{n, k, {}};
    for (int y = 0; y < c.height(); ++y)
        for (int x = 0; x < c.width(); ++x) {
            std::vector<std::pair<Offset, ColorId>> cells;
            cells.reserve(static_cast<size_t>(n) * n);
            for (int dy = 0; dy < n; ++dy)
                for (int dx = 0; dx < n; ++dx)
                    cells.emplace_back(Offset{dx, dy}, c.at(x + dx, y + dy));
            Pattern p(std::move(cells));
            auto [it, _] = sig.counts.try_emplace(std::move(p), 0);
            it->second = std::min(it->second + 1, k + 1);
        }
    return sig;
}

bool hanf_equiv(const TorusConfig& m, const TorusConfig& n, int n_size, int k) {
    if (m.num_colors() != n.num_colors()) throw Error("alphabet mismatch: different color counts");
    return hanf_signature(m, n_size, k) == hanf_signature(n, n_size, k);
}

}  // namespace tess
