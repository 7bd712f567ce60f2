#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "tesselogic/compile_types.hpp"
#include "tesselogic/grid.hpp"

namespace tess {

/// Text formats shared by the CLI and the test suites. Whitespace-separated
/// tokens; `#` starts a comment to end of line.
///
///   alphabet W L B
///   pattern PLL { (0,0)=L (1,0)=L }
///   torus T1 2 1 { L B }        # row-major, bottom row first
///   window W1 2 2 { W L B W }
///
/// SFT files use `forbid` lines instead of named patterns; sofic files add an
/// `inner` alphabet and `project` lines:
///
///   alphabet G W
///   inner a b c
///   project a->G b->G c->W
///   forbid { (0,0)=a (1,0)=a }

struct NamedPattern {
    std::string name;
    Pattern pattern;
};
struct NamedTorus {
    std::string name;
    TorusConfig torus;
};
struct NamedWindow {
    std::string name;
    WindowConfig window;
};

struct GridFile {
    Alphabet alphabet;
    std::vector<NamedPattern> patterns;
    std::vector<NamedTorus> tori;
    std::vector<NamedWindow> windows;
};

GridFile parse_grid_file(std::string_view text);

std::string format_pattern(const Pattern& p, const Alphabet& a);
std::string format_torus(const TorusConfig& c, const Alphabet& a, const std::string& name = "T");
std::string format_window(const WindowConfig& c, const Alphabet& a, const std::string& name = "W");

Sft parse_sft(std::string_view text);
std::string format_sft(const Sft& x);

SoficRepr parse_sofic(std::string_view text);
std::string format_sofic(const SoficRepr& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace tess
