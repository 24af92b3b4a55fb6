#pragma once

// Script grammar. Statements end at a newline or `;;`.
//
//   stmt    := ID "=" expr | expr | foreach | if
//   foreach := "foreach" "(" ID "in" expr ")" "do" stmt* "end"
//   if      := "if" expr "then" stmt* ("else" stmt*)? "end"
//   expr    := or ;  or := and ("||" and)* ;  and := cmp ("&&" cmp)*
//   cmp     := add (("=="|"!="|"<"|"<="|">"|">=") add)?
//   add     := unary (("+"|"-") unary)* ;  unary := "!" unary | operation | primary
//   operation := ("counting"|"isValid"|"configs"|"cores"|"deads"|"features") unary
//              | "merge" ("sunion"|"sinter"|"sdiff") "{" expr expr+ "}"
//              | "slice" unary ("including"|"excluding") "{" ID+ "}"
//              | "rename" unary ID "as" ID
//              | "run" STRING ("with" unary+)?
//   primary := FMLIT | INT | STRING | "true" | "false" | ID | PARAM | "(" expr ")"

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "fam/script/ast.hpp"
#include "fam/script/lexer.hpp"

namespace fam::script {

class ScriptParser {
public:
    explicit ScriptParser(std::string_view text) : toks_(tokenize(text)) {
        // End of input sits just past the last character.
        int line = 1, col = 1;
        for (char c : text) {
            if (c == '\n') { ++line; col = 1; } else { ++col; }
        }
        end_span_ = Span{line, col, line, col};
    }

    Script script() {
        Script s{block({})};
        if (!diagnostics_.empty()) throw ParseError(diagnostics_);
        return s;
    }

private:
    using Terms = std::initializer_list<std::string_view>;

    bool at_end() const { return pos_ >= toks_.size(); }

    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
    }

    bool peek_is(TokenKind k, std::string_view text, std::size_t ahead = 0) const {
        const Token* t = peek(ahead);
        return t && t->is(k, text);
    }

    bool separator() const {
        const Token* t = peek();
        return t && (t->kind == TokenKind::newline || t->is(TokenKind::punct, ";;"));
    }

    bool terminator(Terms terms) const {
        const Token* t = peek();
        if (!t || t->kind != TokenKind::keyword) return false;
        for (auto w : terms)
            if (t->text == w) return true;
        return false;
    }

    const Token& take() {
        last_ = toks_[pos_].span;
        return toks_[pos_++];
    }

    bool accept(TokenKind k, std::string_view text) {
        if (!peek_is(k, text)) return false;
        take();
        return true;
    }

    const Token& expect(TokenKind k, std::string_view text) {
        if (!peek_is(k, text)) error({"'" + std::string(text) + "'"});
        return take();
    }

    const Token& expect(TokenKind k, const char* what) {
        const Token* t = peek();
        if (!t || t->kind != k) error({what});
        return take();
    }

    [[noreturn]] void error(std::vector<std::string> expected) const {
        const Token* t = peek();
        if (!t) throw ParseError(end_span_, "unexpected end of input", std::move(expected), true);
        std::string found = t->kind == TokenKind::newline ? "newline"
                            : t->kind == TokenKind::string ? "string"
                                                           : "'" + t->text + "'";
        throw ParseError(t->span, "unexpected " + found, std::move(expected));
    }

    Span from(Span start) const {
        return Span{start.line, start.column, last_.end_line, last_.end_column};
    }

    Block block(Terms terms) {
        Block out;
        for (;;) {
            while (separator()) take();
            if (at_end() || terminator(terms)) break;
            try {
                out.push_back(statement());
                if (!at_end() && !separator() && !terminator(terms)) error({"newline", "';;'"});
            } catch (const ParseError& e) {
                for (const auto& d : e.diagnostics()) diagnostics_.push_back(d);
                while (!at_end() && !separator() && !terminator(terms)) take();
            }
        }
        return out;
    }

    Stmt statement() {
        Span start = peek()->span;
        if (accept(TokenKind::keyword, "foreach")) {
            expect(TokenKind::punct, "(");
            std::string var = expect(TokenKind::id, "identifier").text;
            expect(TokenKind::keyword, "in");
            ExprRef domain = expression();
            expect(TokenKind::punct, ")");
            expect(TokenKind::keyword, "do");
            Block body = block({"end"});
            expect(TokenKind::keyword, "end");
            return Stmt{Foreach{std::move(var), domain, std::move(body)}, from(start)};
        }
        if (accept(TokenKind::keyword, "if")) {
            ExprRef cond = expression();
            expect(TokenKind::keyword, "then");
            Block then_block = block({"else", "end"});
            std::optional<Block> else_block;
            if (accept(TokenKind::keyword, "else")) else_block = block({"end"});
            expect(TokenKind::keyword, "end");
            return Stmt{If{cond, std::move(then_block), std::move(else_block)}, from(start)};
        }
        if (peek()->kind == TokenKind::id && peek_is(TokenKind::punct, "=", 1)) {
            std::string name = take().text;
            take();
            ExprRef value = expression();
            return Stmt{Assign{std::move(name), value}, from(start)};
        }
        ExprRef e = expression();
        return Stmt{ExprStmt{e}, from(start)};
    }

    ExprRef expression() { return disjunction(); }

    ExprRef binary_chain(ExprRef (ScriptParser::*next)(), std::initializer_list<std::pair<const char*, BinaryOp>> ops,
                         bool chain) {
        Span start = peek() ? peek()->span : end_span_;
        ExprRef lhs = (this->*next)();
        for (;;) {
            bool matched = false;
            for (auto [text, op] : ops) {
                if (accept(TokenKind::punct, text)) {
                    ExprRef rhs = (this->*next)();
                    lhs = make_expr(Binary{op, lhs, rhs}, from(start));
                    matched = true;
                    break;
                }
            }
            if (!matched || !chain) return lhs;
        }
    }

    ExprRef disjunction() { return binary_chain(&ScriptParser::conjunction, {{"||", BinaryOp::disj}}, true); }
    ExprRef conjunction() { return binary_chain(&ScriptParser::comparison, {{"&&", BinaryOp::conj}}, true); }
    ExprRef comparison() {
        return binary_chain(&ScriptParser::additive,
                            {{"==", BinaryOp::eq}, {"!=", BinaryOp::ne}, {"<=", BinaryOp::le},
                             {">=", BinaryOp::ge}, {"<", BinaryOp::lt}, {">", BinaryOp::gt}},
                            false);
    }
    ExprRef additive() {
        return binary_chain(&ScriptParser::unary, {{"+", BinaryOp::add}, {"-", BinaryOp::sub}}, true);
    }

    bool starts_unary() const {
        const Token* t = peek();
        if (!t) return false;
        switch (t->kind) {
        case TokenKind::id:
        case TokenKind::param:
        case TokenKind::integer:
        case TokenKind::string:
        case TokenKind::fm_literal: return true;
        case TokenKind::keyword:
            for (auto w : {"true", "false", "counting", "isValid", "configs", "cores", "deads", "features",
                           "merge", "slice", "rename", "run"})
                if (t->text == w) return true;
            return false;
        case TokenKind::punct: return t->text == "(" || t->text == "!";
        default: return false;
        }
    }

    ExprRef unary() {
        if (!peek()) error({"expression"});
        Span start = peek()->span;
        if (accept(TokenKind::punct, "!")) {
            ExprRef operand = unary();
            return make_expr(Unary{UnaryOp::negation, operand}, from(start));
        }
        if (peek()->kind == TokenKind::keyword) {
            static const std::pair<const char*, Query> queries[] = {
                {"counting", Query::counting}, {"isValid", Query::is_valid}, {"configs", Query::configs},
                {"cores", Query::cores},       {"deads", Query::deads},      {"features", Query::features}};
            for (auto [word, q] : queries) {
                if (accept(TokenKind::keyword, word)) {
                    ExprRef operand = unary();
                    return make_expr(QueryExpr{q, operand}, from(start));
                }
            }
            if (accept(TokenKind::keyword, "merge")) return merge(start);
            if (accept(TokenKind::keyword, "slice")) return slice(start);
            if (accept(TokenKind::keyword, "rename")) {
                ExprRef operand = unary();
                std::string old_name = expect(TokenKind::id, "feature name").text;
                expect(TokenKind::keyword, "as");
                std::string new_name = expect(TokenKind::id, "feature name").text;
                return make_expr(Rename{operand, std::move(old_name), std::move(new_name)}, from(start));
            }
            if (accept(TokenKind::keyword, "run")) {
                std::string path = expect(TokenKind::string, "string").text;
                std::vector<ExprRef> args;
                if (accept(TokenKind::keyword, "with")) {
                    do args.push_back(unary());
                    while (starts_unary());
                }
                return make_expr(Run{std::move(path), std::move(args)}, from(start));
            }
        }
        return primary();
    }

    ExprRef merge(Span start) {
        MergeMode mode;
        if (accept(TokenKind::keyword, "sunion")) mode = MergeMode::sunion;
        else if (accept(TokenKind::keyword, "sinter")) mode = MergeMode::sinter;
        else if (accept(TokenKind::keyword, "sdiff")) mode = MergeMode::sdiff;
        else error({"'sunion'", "'sinter'", "'sdiff'"});
        expect(TokenKind::punct, "{");
        std::vector<ExprRef> operands;
        while (!peek_is(TokenKind::punct, "}")) {
            if (!starts_unary()) error(operands.size() < 2 ? std::vector<std::string>{"expression"}
                                                           : std::vector<std::string>{"expression", "'}'"});
            operands.push_back(expression());
        }
        if (operands.size() < 2) error({"expression"});
        take();
        return make_expr(Merge{mode, std::move(operands)}, from(start));
    }

    ExprRef slice(Span start) {
        ExprRef operand = unary();
        SliceMode mode;
        if (accept(TokenKind::keyword, "including")) mode = SliceMode::including;
        else if (accept(TokenKind::keyword, "excluding")) mode = SliceMode::excluding;
        else error({"'including'", "'excluding'"});
        expect(TokenKind::punct, "{");
        std::vector<std::string> names;
        do names.push_back(expect(TokenKind::id, "feature name").text);
        while (!accept(TokenKind::punct, "}"));
        return make_expr(Slice{operand, mode, std::move(names)}, from(start));
    }

    ExprRef primary() {
        const Token* t = peek();
        static const std::vector<std::string> wanted{"expression"};
        if (!t) error(wanted);
        Span start = t->span;
        switch (t->kind) {
        case TokenKind::fm_literal: return make_expr(FmLiteral{take().text}, start);
        case TokenKind::integer: return make_expr(IntLit{BigInt(take().text)}, start);
        case TokenKind::string: return make_expr(StrLit{take().text}, start);
        case TokenKind::id:
        case TokenKind::param: return make_expr(Var{take().text}, start);
        case TokenKind::keyword:
            if (t->text == "true" || t->text == "false") return make_expr(BoolLit{take().text == "true"}, start);
            break;
        case TokenKind::punct:
            if (t->text == "(") {
                take();
                ExprRef inner = expression();
                expect(TokenKind::punct, ")");
                return inner;
            }
            break;
        default: break;
        }
        error(wanted);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Span last_;
    Span end_span_;
    std::vector<Diagnostic> diagnostics_;
};

/// Parses a whole script. Syntax errors are collected across statements and
/// raised together as one ParseError.
inline Script parse_script(std::string_view text) { return ScriptParser(text).script(); }

/// True when the error would go away with more input (unclosed block,
/// bracket, or FM literal).
inline bool incomplete(const Error& e) {
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
        for (const auto& d : p->diagnostics())
            if (!d.at_end) return false;
        return true;
    }
    if (const auto* l = dynamic_cast<const LexError*>(&e)) return l->at_end();
    return false;
}

} // namespace fam::script
