#include "tesselogic/parser.hpp"

#include <cctype>
#include <sstream>

namespace tess {

namespace {

struct Token {
    enum Kind { Ident, Int, Sym, End } kind = End;
    std::string text;
    long value = 0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    text_[pos_] == '\''))
                bump();
            tok_.kind = Token::Ident;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            size_t start = pos_;
            bump();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                bump();
            tok_.kind = Token::Int;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            tok_.value = std::stol(tok_.text);
            return;
        }
        // multi-char symbols
        if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            tok_.kind = Token::Sym;
            tok_.text = "->";
            bump();
            bump();
            return;
        }
        if (c == '<' && pos_ + 2 < text_.size() + 1 && text_.substr(pos_, 3) == "<->") {
            tok_.kind = Token::Sym;
            tok_.text = "<->";
            bump();
            bump();
            bump();
            return;
        }
        tok_.kind = Token::Sym;
        tok_.text = std::string(1, c);
        bump();
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

bool is_reserved(const std::string& s) {
    static const char* words[] = {"E",  "A",  "E2", "A2",   "N1",    "S1",
                                  "E1", "W1", "true", "false", "atmostone", "alphabet"};
    for (const char* w : words)
        if (s == w) return true;
    return false;
}

class Parser {
public:
    Parser(std::string_view text, const Alphabet* alphabet)
        : lex_(text), alphabet_(alphabet) {}

    Sentence parse_file() {
        Token t = expect_ident();
        if (t.text != "alphabet") fail(t, "expected 'alphabet'");
        std::vector<std::string> colors;
        while (lex_.peek().kind == Token::Ident) colors.push_back(lex_.take().text);
        if (colors.empty()) fail(lex_.peek(), "alphabet needs at least one color");
        for (const auto& c : colors)
            if (is_reserved(c)) fail(t, "color name '" + c + "' is reserved");
        owned_alphabet_ = Alphabet(colors);
        alphabet_ = &*owned_alphabet_;
        Fptr body = parse_body_toplevel();
        Sentence s{*owned_alphabet_, body};
        validate(s);
        return s;
    }

    Fptr parse_only_body() {
        Fptr body = parse_body_toplevel();
        return body;
    }

private:
    Fptr parse_body_toplevel() {
        Fptr f = parse_iff();
        if (lex_.peek().kind != Token::End) fail(lex_.peek(), "unexpected trailing input");
        return f;
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        throw ParseError(msg, t.line, t.col);
    }

    Token expect_ident() {
        Token t = lex_.take();
        if (t.kind != Token::Ident) fail(t, "expected identifier");
        return t;
    }

    void expect_sym(const std::string& s) {
        Token t = lex_.take();
        if (t.kind != Token::Sym || t.text != s) fail(t, "expected '" + s + "'");
    }

    bool peek_sym(const std::string& s) {
        return lex_.peek().kind == Token::Sym && lex_.peek().text == s;
    }

    bool at_quantifier() {
        const Token& t = lex_.peek();
        if (t.kind != Token::Ident) return false;
        if (t.text != "E" && t.text != "A" && t.text != "E2" && t.text != "A2") return false;
        // lookahead: quantifier iff followed by a variable and '.'
        Lexer probe = lex_;
        probe.take();
        if (probe.peek().kind != Token::Ident) return false;
        probe.take();
        return probe.peek().kind == Token::Sym && probe.peek().text == ".";
    }

    Fptr parse_quantified() {
        Token q = lex_.take();
        Token v = expect_ident();
        bool so = q.text == "E2" || q.text == "A2";
        bool lower = std::islower(static_cast<unsigned char>(v.text[0])) != 0;
        if (so && lower) fail(v, "set variable must begin with an uppercase letter");
        if (!so && !lower) fail(v, "first-order variable must begin with a lowercase letter");
        expect_sym(".");
        Fptr body = parse_iff();  // quantifiers extend maximally right
        Quant quant = q.text == "E"    ? Quant::ExistsFo
                      : q.text == "A"  ? Quant::ForallFo
                      : q.text == "E2" ? Quant::ExistsSo
                                       : Quant::ForallSo;
        return f_quant(quant, v.text, body);
    }

    Fptr parse_iff() {
        Fptr l = parse_imp();
        if (peek_sym("<->")) {
            lex_.take();
            return f_iff(l, parse_iff());
        }
        return l;
    }

    Fptr parse_imp() {
        Fptr l = parse_or();
        if (peek_sym("->")) {
            lex_.take();
            return f_imp(l, parse_imp());
        }
        return l;
    }

    Fptr parse_or() {
        Fptr l = parse_and();
        while (peek_sym("|")) {
            lex_.take();
            l = f_or(l, parse_and());
        }
        return l;
    }

    Fptr parse_and() {
        Fptr l = parse_unary();
        while (peek_sym("&")) {
            lex_.take();
            l = f_and(l, parse_unary());
        }
        return l;
    }

    Fptr parse_unary() {
        if (peek_sym("!")) {
            lex_.take();
            return f_not(parse_unary());
        }
        if (peek_sym("(")) {
            lex_.take();
            Fptr f = parse_iff();
            expect_sym(")");
            return f;
        }
        if (at_quantifier()) return parse_quantified();
        return parse_atom();
    }

    bool is_term_function(const std::string& s) {
        return s == "N1" || s == "S1" || s == "E1" || s == "W1";
    }

    Term parse_term() {
        Token t = expect_ident();
        if (is_term_function(t.text)) {
            expect_sym("(");
            Term inner = parse_term();
            expect_sym(")");
            Offset step = t.text == "N1"   ? Offset{0, 1}
                          : t.text == "S1" ? Offset{0, -1}
                          : t.text == "E1" ? Offset{1, 0}
                                           : Offset{-1, 0};
            return Term{inner.var, inner.off + step};
        }
        if (!std::islower(static_cast<unsigned char>(t.text[0])))
            fail(t, "term variable must begin with a lowercase letter");
        Term term{t.text, {0, 0}};
        if (peek_sym("@")) {
            lex_.take();
            expect_sym("(");
            Token dx = lex_.take();
            if (dx.kind != Token::Int) fail(dx, "expected integer offset");
            expect_sym(",");
            Token dy = lex_.take();
            if (dy.kind != Token::Int) fail(dy, "expected integer offset");
            expect_sym(")");
            term.off = {static_cast<int>(dx.value), static_cast<int>(dy.value)};
        }
        return term;
    }

    Fptr parse_atom() {
        Token t = lex_.peek();
        if (t.kind != Token::Ident) fail(t, "expected an atom");
        if (t.text == "true") {
            lex_.take();
            return f_true();
        }
        if (t.text == "false") {
            lex_.take();
            return f_false();
        }
        if (t.text == "atmostone") {
            lex_.take();
            expect_sym("(");
            Token v = expect_ident();
            if (!std::isupper(static_cast<unsigned char>(v.text[0])))
                fail(v, "atmostone takes a set variable");
            expect_sym(")");
            return f_atmostone(v.text);
        }
        if (!is_term_function(t.text)) {
            // predicate application: declared color or set variable
            Lexer probe = lex_;
            probe.take();
            if (probe.peek().kind == Token::Sym && probe.peek().text == "(") {
                std::optional<ColorId> color =
                    alphabet_ ? alphabet_->find(t.text) : std::nullopt;
                if (color) {
                    lex_.take();
                    expect_sym("(");
                    Term term = parse_term();
                    expect_sym(")");
                    return f_color(*color, term);
                }
                if (std::isupper(static_cast<unsigned char>(t.text[0]))) {
                    lex_.take();
                    expect_sym("(");
                    Term term = parse_term();
                    expect_sym(")");
                    return f_inset(t.text, term);
                }
                fail(t, "undeclared color '" + t.text + "'");
            }
        }
        // otherwise it must be an equality between terms
        Term lhs = parse_term();
        expect_sym("=");
        Term rhs = parse_term();
        return f_eq(lhs, rhs);
    }

    void validate(const Sentence& s) { validate_sentence(s); }

    Lexer lex_;
    const Alphabet* alphabet_;
    std::optional<Alphabet> owned_alphabet_;
};

int level_of(const Fptr& f) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Quantified>) {
                return 0;
            } else if constexpr (std::is_same_v<T, Binary>) {
                switch (n.op) {
                    case Conn::Iff: return 1;
                    case Conn::Imp: return 2;
                    case Conn::Or: return 3;
                    case Conn::And: return 4;
                    default: return 5;
                }
            } else if constexpr (std::is_same_v<T, Unary>) {
                return 5;
            } else {
                return 6;
            }
        },
        f->node);
}

void print_impl(const Fptr& f, const Alphabet& a, std::ostringstream& os);

void print_child(const Fptr& f, const Alphabet& a, std::ostringstream& os, int min_level) {
    if (level_of(f) < min_level) {
        os << "(";
        print_impl(f, a, os);
        os << ")";
    } else {
        print_impl(f, a, os);
    }
}

void print_impl(const Fptr& f, const Alphabet& a, std::ostringstream& os) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolConst>) {
                os << (n.value ? "true" : "false");
            } else if constexpr (std::is_same_v<T, ColorAtom>) {
                os << a.name(n.color) << "(" << print_term(n.t) << ")";
            } else if constexpr (std::is_same_v<T, SetAtom>) {
                os << n.set << "(" << print_term(n.t) << ")";
            } else if constexpr (std::is_same_v<T, EqAtom>) {
                os << print_term(n.lhs) << " = " << print_term(n.rhs);
            } else if constexpr (std::is_same_v<T, AtMostOneAtom>) {
                os << "atmostone(" << n.set << ")";
            } else if constexpr (std::is_same_v<T, Unary>) {
                os << "!";
                print_child(n.child, a, os, 5);
            } else if constexpr (std::is_same_v<T, Binary>) {
                switch (n.op) {
                    case Conn::And:
                        print_child(n.lhs, a, os, 4);
                        os << " & ";
                        print_child(n.rhs, a, os, 5);
                        break;
                    case Conn::Or:
                        print_child(n.lhs, a, os, 3);
                        os << " | ";
                        print_child(n.rhs, a, os, 4);
                        break;
                    case Conn::Imp:
                        print_child(n.lhs, a, os, 3);
                        os << " -> ";
                        print_child(n.rhs, a, os, 2);
                        break;
                    case Conn::Iff:
                        print_child(n.lhs, a, os, 2);
                        os << " <-> ";
                        print_child(n.rhs, a, os, 1);
                        break;
                    default: break;
                }
            } else {
                static_assert(std::is_same_v<T, Quantified>);
                switch (n.q) {
                    case Quant::ExistsFo: os << "E "; break;
                    case Quant::ForallFo: os << "A "; break;
                    case Quant::ExistsSo: os << "E2 "; break;
                    case Quant::ForallSo: os << "A2 "; break;
                }
                os << n.var << ". ";
                print_impl(n.body, a, os);
            }
        },
        f->node);
}

}  // namespace

Sentence parse_sentence(std::string_view text) {
    Parser p(text, nullptr);
    return p.parse_file();
}

Fptr parse_body(std::string_view text, const Alphabet& alphabet) {
    Parser p(text, &alphabet);
    return p.parse_only_body();
}

std::string print_term(const Term& t) {
    if (t.off == Offset{0, 0}) return t.var;
    return t.var + "@(" + std::to_string(t.off.dx) + "," + std::to_string(t.off.dy) + ")";
}

std::string print_formula(const Fptr& f, const Alphabet& alphabet) {
    std::ostringstream os;
    print_impl(f, alphabet, os);
    return os.str();
}

std::string print_sentence(const Sentence& s) {
    std::ostringstream os;
    os << "alphabet";
    for (const auto& n : s.alphabet.names()) os << " " << n;
    os << "\n" << print_formula(s.body, s.alphabet) << "\n";
    return os.str();
}

}  // namespace tess
