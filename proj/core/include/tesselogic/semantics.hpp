#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "tesselogic/formula.hpp"
#include "tesselogic/grid.hpp"

namespace tess {

enum class ConvMode { Torus, WindowAtomFalse, WindowFlagged };

/// Out-of-window policy for a set variable under WINDOW_FLAGGED. The
/// constant form is the primary definition: ne_default answers reads past
/// the north/east sides, sw_default past south/west, NE corner -> ne, SW
/// corner -> sw, NW and SE corners -> false. The Clamp form answers reads
/// with the membership of the nearest window cell; the quarter-plane gadget
/// suite uses it (constant defaults collapse the gadget, see docs).
struct FlaggedPolicy {
    enum class Kind { Constants, Clamp };
    Kind kind = Kind::Constants;
    bool ne = false;
    bool sw = false;

    static FlaggedPolicy constants(bool ne, bool sw) {
        return {Kind::Constants, ne, sw};
    }
    static FlaggedPolicy clamp() { return {Kind::Clamp, false, false}; }
};

struct BoundaryConvention {
    ConvMode mode = ConvMode::Torus;
    std::map<std::string, FlaggedPolicy> flagged;

    static BoundaryConvention torus() { return {ConvMode::Torus, {}}; }
    static BoundaryConvention window_atom_false() { return {ConvMode::WindowAtomFalse, {}}; }
    static BoundaryConvention window_flagged(std::map<std::string, FlaggedPolicy> defaults) {
        return {ConvMode::WindowFlagged, std::move(defaults)};
    }
};

/// Cells are indexed row-major, bottom row first; set values are bitmasks,
/// so evaluation domains are limited to 64 cells.
using CellMask = std::uint64_t;

struct Assignment {
    std::map<std::string, int> fo;
    std::map<std::string, CellMask> so;
};

bool eval(const Sentence& s, const TorusConfig& c, const BoundaryConvention& conv = {},
          const Assignment& env = {});
bool eval(const Sentence& s, const WindowConfig& c, const BoundaryConvention& conv,
          const Assignment& env = {});

/// Evaluates an open formula against an explicit assignment.
bool eval_formula(const Fptr& f, const Alphabet& alphabet, const TorusConfig& c,
                  const BoundaryConvention& conv, const Assignment& env);
bool eval_formula(const Fptr& f, const Alphabet& alphabet, const WindowConfig& c,
                  const BoundaryConvention& conv, const Assignment& env);

/// All w x h tori over the sentence's alphabet satisfying it, in
/// lexicographic cell order. Throws BudgetError when |Q|^(w*h) exceeds the
/// budget.
std::vector<TorusConfig> models_torus(const Sentence& s, int w, int h,
                                      std::uint64_t budget = kDefaultBudget);
std::vector<WindowConfig> models_window(const Sentence& s, int w, int h,
                                        const BoundaryConvention& conv,
                                        std::uint64_t budget = kDefaultBudget);

/// Membership in E(pi)(models of s): some same-size preimage of c satisfies s.
bool e_projection_member(const Projection& pi, const Sentence& s, const TorusConfig& c,
                         const BoundaryConvention& conv = {},
                         std::uint64_t budget = kDefaultBudget);
/// Membership in A(pi)(models of s): every same-size preimage satisfies s.
bool a_projection_member(const Projection& pi, const Sentence& s, const TorusConfig& c,
                         const BoundaryConvention& conv = {},
                         std::uint64_t budget = kDefaultBudget);

/// Enumerates all tori of the given size over an alphabet of q colors in
/// lexicographic order, calling fn on each. Subject to the budget.
void for_each_torus(int w, int h, int q, std::uint64_t budget,
                    const std::function<void(const TorusConfig&)>& fn);
void for_each_window(int w, int h, int q, std::uint64_t budget,
                     const std::function<void(const WindowConfig&)>& fn);

}  // namespace tess
