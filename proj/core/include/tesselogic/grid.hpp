#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tess {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetError : Error {
    explicit BudgetError(const std::string& what, std::uint64_t bound)
        : Error(what), bound(bound) {}
    std::uint64_t bound;
};

constexpr std::uint64_t kDefaultBudget = 10'000'000;

using ColorId = int;

/// Integer displacement on the grid, east-positive / north-positive.
struct Offset {
    int dx = 0;
    int dy = 0;

    friend auto operator<=>(const Offset&, const Offset&) = default;
    Offset operator+(Offset o) const { return {dx + o.dx, dy + o.dy}; }
    Offset operator-(Offset o) const { return {dx - o.dx, dy - o.dy}; }
};

/// Ordered set of distinct color names; a ColorId is an index into it.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(ColorId c) const { return names_.at(static_cast<size_t>(c)); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<ColorId> find(const std::string& name) const;

    friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
    std::vector<std::string> names_;
};

/// Finite partial coloring: a nonempty set of offsets, each with one color.
/// Cells are kept sorted by offset, so equality and ordering are structural.
class Pattern {
public:
    Pattern() = default;
    explicit Pattern(std::vector<std::pair<Offset, ColorId>> cells);

    const std::vector<std::pair<Offset, ColorId>>& cells() const { return cells_; }
    int size() const { return static_cast<int>(cells_.size()); }
    std::vector<Offset> domain() const;
    std::optional<ColorId> at(Offset o) const;
    ColorId max_color() const;

    friend auto operator<=>(const Pattern&, const Pattern&) = default;

private:
    std::vector<std::pair<Offset, ColorId>> cells_;
};

/// Total coloring of a w x h rectangle read periodically: the finite
/// stand-in for a Z^2 configuration. Cells are row-major, bottom row first.
class TorusConfig {
public:
    TorusConfig() = default;
    TorusConfig(int w, int h, int num_colors, std::vector<ColorId> cells);

    int width() const { return w_; }
    int height() const { return h_; }
    int area() const { return w_ * h_; }
    int num_colors() const { return num_colors_; }
    const std::vector<ColorId>& cells() const { return cells_; }

    /// Color of the periodic lift at arbitrary integer coordinates.
    ColorId at(int x, int y) const;
    ColorId at_raw(int x, int y) const { return cells_[static_cast<size_t>(y) * w_ + x]; }

    TorusConfig translated(Offset v) const;

    friend auto operator<=>(const TorusConfig&, const TorusConfig&) = default;

private:
    int w_ = 0, h_ = 0;
    int num_colors_ = 0;
    std::vector<ColorId> cells_;
};

/// Total coloring of a bounded rectangle, no wraparound.
class WindowConfig {
public:
    WindowConfig() = default;
    WindowConfig(int w, int h, int num_colors, std::vector<ColorId> cells);

    int width() const { return w_; }
    int height() const { return h_; }
    int area() const { return w_ * h_; }
    int num_colors() const { return num_colors_; }
    const std::vector<ColorId>& cells() const { return cells_; }
    bool contains(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
    ColorId at(int x, int y) const;
    ColorId at_raw(int x, int y) const { return cells_[static_cast<size_t>(y) * w_ + x]; }

    friend auto operator<=>(const WindowConfig&, const WindowConfig&) = default;

private:
    int w_ = 0, h_ = 0;
    int num_colors_ = 0;
    std::vector<ColorId> cells_;
};

/// Total per-letter map between alphabets.
class Projection {
public:
    Projection() = default;
    Projection(Alphabet source, Alphabet target, std::vector<ColorId> map);

    static Projection identity(const Alphabet& a);

    const Alphabet& source() const { return source_; }
    const Alphabet& target() const { return target_; }
    ColorId apply(ColorId c) const { return map_.at(static_cast<size_t>(c)); }
    std::vector<ColorId> preimage(ColorId target_color) const;

private:
    Alphabet source_, target_;
    std::vector<ColorId> map_;
};

/// Occurrence counts of every n x n pattern, capped at k+1. Patterns that
/// never occur are absent.
struct HanfSignature {
    int n = 1;
    int k = 0;
    std::map<Pattern, int> counts;

    friend bool operator==(const HanfSignature&, const HanfSignature&) = default;
};

bool occurs_at(const Pattern& p, const TorusConfig& c, Offset z0);
int count_occurrences(const Pattern& p, const TorusConfig& c, int cap);
std::set<Pattern> language(const TorusConfig& c, const std::vector<Offset>& domain);
TorusConfig project(const Projection& pi, const TorusConfig& c);
WindowConfig project(const Projection& pi, const WindowConfig& c);
HanfSignature hanf_signature(const TorusConfig& c, int n, int k);
bool hanf_equiv(const TorusConfig& m, const TorusConfig& n, int n_size, int k);

/// Floor modulus: result in [0, m) for m > 0.
inline int floor_mod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace tess
