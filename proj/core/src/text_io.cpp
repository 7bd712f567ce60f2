#include "tesselogic/text_io.hpp"

#include <fstream>
#include <sstream>

namespace tess {

namespace {

/// Token stream over whitespace-separated tokens with # comments; the grid
/// formats are simple enough that punctuation can be handled by splitting on
/// the few structural characters.
class Tokens {
public:
    explicit Tokens(std::string_view text) {
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) {
                toks_.push_back(cur);
                cur.clear();
            }
        };
        for (size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (c == '#') {
                while (i < text.size() && text[i] != '\n') ++i;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                flush();
                continue;
            }
            if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',' || c == '=') {
                flush();
                toks_.push_back(std::string(1, c));
                continue;
            }
            if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
                flush();
                toks_.push_back("->");
                ++i;
                continue;
            }
            cur.push_back(c);
        }
        flush();
    }

    bool done() const { return pos_ >= toks_.size(); }
    const std::string& peek() const {
        if (done()) throw Error("unexpected end of input");
        return toks_[pos_];
    }
    std::string take() {
        if (done()) throw Error("unexpected end of input");
        return toks_[pos_++];
    }
    void expect(const std::string& s) {
        std::string t = take();
        if (t != s) throw Error("expected '" + s + "', got '" + t + "'");
    }

private:
    std::vector<std::string> toks_;
    size_t pos_ = 0;
};

int take_int(Tokens& t) {
    std::string s = t.take();
    try {
        size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw Error("");
        return v;
    } catch (...) {
        throw Error("expected integer, got '" + s + "'");
    }
}

Offset take_offset(Tokens& t) {
    t.expect("(");
    int dx = take_int(t);
    t.expect(",");
    int dy = take_int(t);
    t.expect(")");
    return {dx, dy};
}

ColorId take_color(Tokens& t, const Alphabet& a) {
    std::string name = t.take();
    auto c = a.find(name);
    if (!c) throw Error("undeclared color '" + name + "'");
    return *c;
}

Pattern take_pattern_body(Tokens& t, const Alphabet& a) {
    t.expect("{");
    std::vector<std::pair<Offset, ColorId>> cells;
    while (t.peek() != "}") {
        Offset off = take_offset(t);
        t.expect("=");
        cells.emplace_back(off, take_color(t, a));
    }
    t.expect("}");
    return Pattern(std::move(cells));
}

std::vector<ColorId> take_cell_list(Tokens& t, const Alphabet& a, int count) {
    t.expect("{");
    std::vector<ColorId> cells;
    cells.reserve(static_cast<size_t>(count));
    while (t.peek() != "}") cells.push_back(take_color(t, a));
    t.expect("}");
    if (static_cast<int>(cells.size()) != count)
        throw Error("expected " + std::to_string(count) + " cells, got " +
                    std::to_string(cells.size()));
    return cells;
}

Alphabet take_alphabet(Tokens& t, const char* keyword) {
    t.expect(keyword);
    std::vector<std::string> names;
    while (!t.done() && t.peek() != "pattern" && t.peek() != "torus" && t.peek() != "window" &&
           t.peek() != "forbid" && t.peek() != "inner" && t.peek() != "project")
        names.push_back(t.take());
    return Alphabet(std::move(names));
}

}  // namespace

GridFile parse_grid_file(std::string_view text) {
    Tokens t(text);
    GridFile out;
    out.alphabet = take_alphabet(t, "alphabet");
    while (!t.done()) {
        std::string kind = t.take();
        if (kind == "pattern") {
            std::string name = t.take();
            out.patterns.push_back({name, take_pattern_body(t, out.alphabet)});
        } else if (kind == "torus") {
            std::string name = t.take();
            int w = take_int(t), h = take_int(t);
            out.tori.push_back(
                {name, TorusConfig(w, h, out.alphabet.size(),
                                   take_cell_list(t, out.alphabet, w * h))});
        } else if (kind == "window") {
            std::string name = t.take();
            int w = take_int(t), h = take_int(t);
            out.windows.push_back(
                {name, WindowConfig(w, h, out.alphabet.size(),
                                    take_cell_list(t, out.alphabet, w * h))});
        } else {
            throw Error("unexpected token '" + kind + "' in grid file");
        }
    }
    return out;
}

std::string format_pattern(const Pattern& p, const Alphabet& a) {
    std::ostringstream os;
    os << "{";
    for (const auto& [off, c] : p.cells())
        os << " (" << off.dx << "," << off.dy << ")=" << a.name(c);
    os << " }";
    return os.str();
}

std::string format_torus(const TorusConfig& c, const Alphabet& a, const std::string& name) {
    std::ostringstream os;
    os << "torus " << name << " " << c.width() << " " << c.height() << " {";
    for (ColorId col : c.cells()) os << " " << a.name(col);
    os << " }";
    return os.str();
}

std::string format_window(const WindowConfig& c, const Alphabet& a, const std::string& name) {
    std::ostringstream os;
    os << "window " << name << " " << c.width() << " " << c.height() << " {";
    for (ColorId col : c.cells()) os << " " << a.name(col);
    os << " }";
    return os.str();
}

Sft parse_sft(std::string_view text) {
    Tokens t(text);
    Alphabet a = take_alphabet(t, "alphabet");
    std::vector<Pattern> forbidden;
    while (!t.done()) {
        t.expect("forbid");
        forbidden.push_back(take_pattern_body(t, a));
    }
    return Sft(std::move(a), std::move(forbidden));
}

std::string format_sft(const Sft& x) {
    std::ostringstream os;
    os << "alphabet";
    for (const auto& n : x.alphabet.names()) os << " " << n;
    os << "\n";
    for (const auto& p : x.forbidden) os << "forbid " << format_pattern(p, x.alphabet) << "\n";
    return os.str();
}

SoficRepr parse_sofic(std::string_view text) {
    Tokens t(text);
    Alphabet target = take_alphabet(t, "alphabet");
    Alphabet inner = take_alphabet(t, "inner");
    t.expect("project");
    std::vector<ColorId> map(static_cast<size_t>(inner.size()), -1);
    for (int i = 0; i < inner.size(); ++i) {
        std::string from = t.take();
        t.expect("->");
        std::string to = t.take();
        auto fi = inner.find(from);
        auto ti = target.find(to);
        if (!fi) throw Error("project source '" + from + "' not in inner alphabet");
        if (!ti) throw Error("project target '" + to + "' not in alphabet");
        map[static_cast<size_t>(*fi)] = *ti;
    }
    for (ColorId c : map)
        if (c < 0) throw Error("projection must be total on the inner alphabet");
    std::vector<Pattern> forbidden;
    while (!t.done()) {
        t.expect("forbid");
        forbidden.push_back(take_pattern_body(t, inner));
    }
    return SoficRepr{Sft(inner, std::move(forbidden)), Projection(inner, target, std::move(map))};
}

std::string format_sofic(const SoficRepr& r) {
    std::ostringstream os;
    os << "alphabet";
    for (const auto& n : r.pi.target().names()) os << " " << n;
    os << "\ninner";
    for (const auto& n : r.inner.alphabet.names()) os << " " << n;
    os << "\nproject";
    for (int i = 0; i < r.inner.alphabet.size(); ++i)
        os << " " << r.inner.alphabet.name(i) << "->" << r.pi.target().name(r.pi.apply(i));
    os << "\n";
    for (const auto& p : r.inner.forbidden)
        os << "forbid " << format_pattern(p, r.inner.alphabet) << "\n";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

}  // namespace tess
