#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fam/error.hpp"

namespace fam::script {

enum class TokenKind { id, keyword, param, integer, string, fm_literal, punct, newline };

struct Token {
    TokenKind kind;
    std::string text;  // decoded contents for strings, raw text otherwise
    Span span;

    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
};

inline const std::set<std::string, std::less<>>& keywords() {
    static const std::set<std::string, std::less<>> words{
        "counting", "isValid", "configs", "cores", "deads", "features", "merge", "slice", "rename",
        "run", "foreach", "if", "then", "else", "do", "end", "in", "as", "true", "false",
        "sunion", "sinter", "sdiff", "including", "excluding", "with"};
    return words;
}

/// Lexical error. `at_end()` is set when more input could complete the text
/// (an unclosed FM literal), which the REPL uses to ask for another line.
class LexError : public Error {
public:
    LexError(Span span, std::string message, bool at_end = false)
        : Error(ErrorKind::lex, std::move(message), span), at_end_(at_end) {}
    bool at_end() const { return at_end_; }
    void rethrow_at(Span) const override { throw *this; }

private:
    bool at_end_;
};

/// Splits script text into tokens. Newlines inside () and {} are dropped, so
/// a statement may continue across lines inside brackets.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    int depth = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
    };
    auto here = [&] { return Span{line, col, line, col}; };
    auto finish = [&](Token t) {
        t.span.end_line = line;
        t.span.end_column = col;
        out.push_back(std::move(t));
    };
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r') { advance(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Span start = here();
        if (c == '\n') {
            advance(1);
            if (depth == 0 && !(out.size() && out.back().kind == TokenKind::newline))
                out.push_back({TokenKind::newline, "\n", start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && is_word(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            if (word == "FM") {
                std::size_t k = j;
                while (k < src.size() && (src[k] == ' ' || src[k] == '\t' || src[k] == '\r' || src[k] == '\n')) ++k;
                if (k < src.size() && src[k] == '(') {
                    int nesting = 0;
                    std::size_t m = k;
                    for (; m < src.size(); ++m) {
                        if (src[m] == '/' && m + 1 < src.size() && src[m + 1] == '/') {
                            while (m < src.size() && src[m] != '\n') ++m;
                            if (m == src.size()) break;
                            continue;
                        }
                        if (src[m] == '(') ++nesting;
                        if (src[m] == ')' && --nesting == 0) break;
                    }
                    if (m >= src.size()) {
                        advance(src.size() - i);
                        throw LexError(start, "unterminated FM literal", true);
                    }
                    std::string text(src.substr(i, m + 1 - i));
                    advance(m + 1 - i);
                    finish({TokenKind::fm_literal, std::move(text), start});
                    continue;
                }
            }
            advance(j - i);
            TokenKind kind = keywords().count(word) ? TokenKind::keyword : TokenKind::id;
            finish({kind, std::move(word), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && is_word(src[j])) {
                advance(j - i);
                throw LexError(here(), std::string("illegal character '") + src[j] + "' in number");
            }
            std::string digits(src.substr(i, j - i));
            advance(j - i);
            finish({TokenKind::integer, std::move(digits), start});
            continue;
        }
        if (c == '%') {
            std::size_t j = i + 1;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j == i + 1) throw LexError(Span{line, col, line, col + 1}, "expected a digit after '%'");
            std::string name(src.substr(i, j - i));
            advance(j - i);
            finish({TokenKind::param, std::move(name), start});
            continue;
        }
        if (c == '"') {
            std::string value;
            advance(1);
            while (true) {
                if (i >= src.size() || src[i] == '\n') throw LexError(start, "unterminated string");
                char d = src[i];
                if (d == '"') { advance(1); break; }
                if (d == '\\') {
                    if (i + 1 >= src.size()) throw LexError(start, "unterminated string");
                    char e = src[i + 1];
                    switch (e) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default:
                        throw LexError(here(), std::string("unknown escape '\\") + e + "'");
                    }
                    advance(2);
                    continue;
                }
                value += d;
                advance(1);
            }
            finish({TokenKind::string, std::move(value), start});
            continue;
        }
        static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||", ";;"};
        bool matched = false;
        for (auto op : two) {
            if (src.substr(i, 2) == op) {
                advance(2);
                finish({TokenKind::punct, std::string(op), start});
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("=<>+-!(){}").find(c) != std::string_view::npos) {
            if (c == '(' || c == '{') ++depth;
            if ((c == ')' || c == '}') && depth > 0) --depth;
            advance(1);
            finish({TokenKind::punct, std::string(1, c), start});
            continue;
        }
        throw LexError(Span{line, col, line, col + 1}, std::string("illegal character '") + c + "'");
    }
    return out;
}

} // namespace fam::script
