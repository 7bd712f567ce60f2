#pragma once

#include <string>
#include <string_view>

#include "tesselogic/formula.hpp"

namespace tess {

struct ParseError : Error {
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line(line), col(col) {}
    int line;
    int col;
};

/// Parses a sentence file: an `alphabet` line followed by one sentence.
/// `#` starts a comment to end of line.
Sentence parse_sentence(std::string_view text);

/// Parses a sentence body against an already-declared alphabet.
Fptr parse_body(std::string_view text, const Alphabet& alphabet);

/// Prints the alphabet line and the sentence; parse(print(s)) reparses to an
/// identical AST.
std::string print_sentence(const Sentence& s);

/// Prints the body only.
std::string print_formula(const Fptr& f, const Alphabet& alphabet);

std::string print_term(const Term& t);

}  // namespace tess
