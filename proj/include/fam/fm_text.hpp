#pragma once

// Textual feature-model notation:
//
//   model       := "FM" "(" production+ constraint* ")"
//   production  := ID ":" element* ";"
//   element     := ID | "[" ID "]" | "(" ID ("|" ID)+ ")" ("+" | "?")?
//   constraint  := formula ";"
//
// `(a|b)` is an xor group, `(a|b)+` an or group, `(a|b)?` a mutex group.
// Formula operators bind ! > & > | > -> (right) > <->; `//` starts a comment.

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fam/error.hpp"
#include "fam/feature_model.hpp"
#include "fam/formula.hpp"

namespace fam {

namespace fm_text {

enum class Tok { id, kw_true, kw_false, lparen, rparen, lbracket, rbracket, colon, semi,
                 bar, plus, question, bang, amp, arrow, iff, end };

inline const char* describe(Tok t) {
    switch (t) {
    case Tok::id: return "identifier";
    case Tok::kw_true: return "'true'";
    case Tok::kw_false: return "'false'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::colon: return "':'";
    case Tok::semi: return "';'";
    case Tok::bar: return "'|'";
    case Tok::plus: return "'+'";
    case Tok::question: return "'?'";
    case Tok::bang: return "'!'";
    case Tok::amp: return "'&'";
    case Tok::arrow: return "'->'";
    case Tok::iff: return "'<->'";
    case Tok::end: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
    };
    auto push = [&](Tok t, std::size_t len) {
        Span s{line, col, line, col + static_cast<int>(len)};
        out.push_back({t, std::string(src.substr(i, len)), s});
        advance(len);
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            std::string_view word = src.substr(i, j - i);
            push(word == "true" ? Tok::kw_true : word == "false" ? Tok::kw_false : Tok::id, j - i);
            continue;
        }
        if (src.substr(i, 3) == "<->") { push(Tok::iff, 3); continue; }
        if (src.substr(i, 2) == "->") { push(Tok::arrow, 2); continue; }
        switch (c) {
        case '(': push(Tok::lparen, 1); continue;
        case ')': push(Tok::rparen, 1); continue;
        case '[': push(Tok::lbracket, 1); continue;
        case ']': push(Tok::rbracket, 1); continue;
        case ':': push(Tok::colon, 1); continue;
        case ';': push(Tok::semi, 1); continue;
        case '|': push(Tok::bar, 1); continue;
        case '+': push(Tok::plus, 1); continue;
        case '?': push(Tok::question, 1); continue;
        case '!': push(Tok::bang, 1); continue;
        case '&': push(Tok::amp, 1); continue;
        default: break;
        }
        throw ParseError(Span{line, col, line, col + 1},
                         std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::end, "", Span{line, col, line, col}});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    FeatureModel model() {
        const Token& head = peek();
        if (head.kind != Tok::id || head.text != "FM") error({"'FM'"});
        ++pos_;
        expect(Tok::lparen);

        struct Production {
            Token lhs;
            std::vector<std::string> children;
        };
        std::vector<Production> productions;
        FeatureModel raw;
        std::map<std::string, Span> declared;

        auto declare = [&](const Token& t) {
            if (declared.count(t.text))
                throw Error(ErrorKind::semantic, "duplicate feature '" + t.text + "'", t.span);
            declared.emplace(t.text, t.span);
        };

        do {
            Production p{expect(Tok::id), {}};
            expect(Tok::colon);
            if (productions.empty()) {
                raw.root = p.lhs.text;
                declare(p.lhs);
            }
            const std::string& parent = p.lhs.text;
            for (;;) {
                const Token& t = peek();
                if (t.kind == Tok::id) {
                    ++pos_;
                    declare(t);
                    p.children.push_back(t.text);
                    raw.parent[t.text] = parent;
                    raw.optionality[t.text] = Optionality::mandatory;
                } else if (t.kind == Tok::lbracket) {
                    ++pos_;
                    Token id = expect(Tok::id);
                    expect(Tok::rbracket);
                    declare(id);
                    p.children.push_back(id.text);
                    raw.parent[id.text] = parent;
                    raw.optionality[id.text] = Optionality::optional;
                } else if (t.kind == Tok::lparen) {
                    ++pos_;
                    Group g{parent, {}, GroupKind::xor_group};
                    std::vector<Token> members{expect(Tok::id)};
                    do {
                        expect(Tok::bar);
                        members.push_back(expect(Tok::id));
                    } while (peek().kind != Tok::rparen);
                    ++pos_;
                    if (accept(Tok::plus)) g.kind = GroupKind::or_group;
                    else if (accept(Tok::question)) g.kind = GroupKind::mutex_group;
                    for (const auto& m : members) {
                        declare(m);
                        p.children.push_back(m.text);
                        raw.parent[m.text] = parent;
                        g.members.push_back(m.text);
                    }
                    raw.groups.push_back(std::move(g));
                } else if (t.kind == Tok::semi) {
                    ++pos_;
                    break;
                } else {
                    error({"identifier", "'['", "'('", "';'"});
                }
            }
            productions.push_back(std::move(p));
        } while (peek().kind == Tok::id && peek(1).kind == Tok::colon);

        std::vector<Token> constraint_starts;
        while (peek().kind != Tok::rparen) {
            if (peek().kind == Tok::end) error({"')'", "constraint"});
            constraint_starts.push_back(peek());
            raw.constraints.push_back(formula());
            expect(Tok::semi);
        }
        expect(Tok::rparen);
        expect(Tok::end);

        std::set<std::string> expanded;
        raw.features.push_back(raw.root);
        for (const auto& p : productions) {
            if (!declared.count(p.lhs.text))
                throw Error(ErrorKind::semantic,
                            "production for undeclared feature '" + p.lhs.text + "'", p.lhs.span);
            if (!expanded.insert(p.lhs.text).second)
                throw Error(ErrorKind::semantic,
                            "feature '" + p.lhs.text + "' has two productions", p.lhs.span);
            for (const auto& c : p.children) raw.features.push_back(c);
        }
        for (std::size_t i = 0; i < raw.constraints.size(); ++i)
            for (const auto& v : variables(raw.constraints[i]))
                if (!declared.count(v))
                    throw Error(ErrorKind::semantic, "constraint mentions unknown feature '" + v + "'",
                                constraint_starts[i].span);
        try {
            return FeatureModel::make(std::move(raw));
        } catch (const Error& e) {
            throw Error(e.kind(), e.message(), productions.front().lhs.span);
        }
    }

    Formula standalone_formula() {
        Formula f = formula();
        expect(Tok::end);
        return f;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }

    bool accept(Tok t) {
        if (peek().kind != t) return false;
        ++pos_;
        return true;
    }

    Token expect(Tok t) {
        if (peek().kind != t) error({describe(t)});
        return toks_[pos_++];
    }

    [[noreturn]] void error(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.span, "unexpected " + found, std::move(expected), t.kind == Tok::end);
    }

    Formula formula() {
        Formula f = implication();
        while (accept(Tok::iff)) f = Formula::equivalence(f, implication());
        return f;
    }

    Formula implication() {
        Formula f = disjunction();
        if (accept(Tok::arrow)) return Formula::implication(f, implication());
        return f;
    }

    Formula disjunction() {
        Formula f = conjunction();
        while (accept(Tok::bar)) f = Formula::disjunction(f, conjunction());
        return f;
    }

    Formula conjunction() {
        Formula f = unary();
        while (accept(Tok::amp)) f = Formula::conjunction(f, unary());
        return f;
    }

    Formula unary() {
        if (accept(Tok::bang)) return Formula::negation(unary());
        const Token& t = peek();
        switch (t.kind) {
        case Tok::id: ++pos_; return Formula::var(t.text);
        case Tok::kw_true: ++pos_; return Formula::truth();
        case Tok::kw_false: ++pos_; return Formula::falsity();
        case Tok::lparen: {
            ++pos_;
            Formula f = formula();
            expect(Tok::rparen);
            return f;
        }
        default: error({"identifier", "'true'", "'false'", "'!'", "'('"});
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace fm_text

inline FeatureModel parse_fm(std::string_view text) { return fm_text::Parser(text).model(); }

inline Formula parse_formula(std::string_view text) { return fm_text::Parser(text).standalone_formula(); }

/// Canonical text: productions in tree pre-order, constraints last.
inline std::string render_fm(const FeatureModel& m) {
    std::string out = "FM (";
    bool first = true;
    for (const auto& f : m.features) {
        auto kids = m.children(f);
        if (kids.empty() && f != m.root) continue;
        if (!first) out += ' ';
        first = false;
        out += f + " :";
        std::set<int> emitted;
        for (const auto& c : kids) {
            int gi = m.group_of(c);
            if (gi < 0) {
                out += ' ';
                out += m.optionality.at(c) == Optionality::optional ? "[" + c + "]" : c;
                continue;
            }
            if (!emitted.insert(gi).second) continue;
            const Group& g = m.groups[static_cast<std::size_t>(gi)];
            out += " (";
            for (std::size_t i = 0; i < g.members.size(); ++i) {
                if (i) out += '|';
                out += g.members[i];
            }
            out += ')';
            if (g.kind == GroupKind::or_group) out += '+';
            if (g.kind == GroupKind::mutex_group) out += '?';
        }
        out += " ;";
    }
    for (const auto& c : m.constraints) out += ' ' + to_string(c) + " ;";
    return out + ")";
}

} // namespace fam
