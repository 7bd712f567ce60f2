#pragma once

#include <vector>

#include "tesselogic/grid.hpp"

namespace tess {

/// Subshift of finite type: alphabet plus a finite, deduplicated set of
/// forbidden patterns.
struct Sft {
    Alphabet alphabet;
    std::vector<Pattern> forbidden;

    Sft() = default;
    Sft(Alphabet a, std::vector<Pattern> patterns);
};

/// A sofic representation: an SFT over an extended alphabet plus a
/// letter-to-letter projection onto the visible alphabet.
struct SoficRepr {
    Sft inner;
    Projection pi;
};

}  // namespace tess
