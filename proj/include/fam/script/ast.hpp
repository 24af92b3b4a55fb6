#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fam/error.hpp"
#include "fam/reasoner.hpp"

namespace fam::script {

struct Expr;

/// Shared, immutable expression handle. Equality is structural.
class ExprRef {
public:
    ExprRef() = default;
    ExprRef(std::shared_ptr<const Expr> p) : ptr_(std::move(p)) {}

    const Expr& operator*() const { return *ptr_; }
    const Expr* operator->() const { return ptr_.get(); }
    explicit operator bool() const { return ptr_ != nullptr; }

    friend bool operator==(const ExprRef& a, const ExprRef& b);

private:
    std::shared_ptr<const Expr> ptr_;
};

enum class Query { counting, is_valid, configs, cores, deads, features };
enum class BinaryOp { add, sub, eq, ne, lt, le, gt, ge, conj, disj };
enum class UnaryOp { negation };

inline const char* keyword(Query q) {
    switch (q) {
    case Query::counting: return "counting";
    case Query::is_valid: return "isValid";
    case Query::configs: return "configs";
    case Query::cores: return "cores";
    case Query::deads: return "deads";
    case Query::features: return "features";
    }
    return "?";
}

inline const char* spelling(BinaryOp op) {
    switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::conj: return "&&";
    case BinaryOp::disj: return "||";
    }
    return "?";
}

// Binding strength shared by every shape: || < && < comparisons < + -.
inline int precedence(BinaryOp op) {
    switch (op) {
    case BinaryOp::disj: return 1;
    case BinaryOp::conj: return 2;
    case BinaryOp::add:
    case BinaryOp::sub: return 4;
    default: return 3;
    }
}

struct FmLiteral {
    std::string text;
    bool operator==(const FmLiteral&) const = default;
};
struct Var {
    std::string name;
    bool operator==(const Var&) const = default;
};
struct QueryExpr {
    Query op;
    ExprRef operand;
    bool operator==(const QueryExpr&) const = default;
};
struct Merge {
    MergeMode mode;
    std::vector<ExprRef> operands;
    bool operator==(const Merge&) const = default;
};
struct Slice {
    ExprRef operand;
    SliceMode mode;
    std::vector<std::string> names;
    bool operator==(const Slice&) const = default;
};
struct Rename {
    ExprRef operand;
    std::string from;
    std::string to;
    bool operator==(const Rename&) const = default;
};
struct Run {
    std::string path;
    std::vector<ExprRef> args;
    bool operator==(const Run&) const = default;
};
struct IntLit {
    BigInt value;
    bool operator==(const IntLit&) const = default;
};
struct StrLit {
    std::string value;
    bool operator==(const StrLit&) const = default;
};
struct BoolLit {
    bool value;
    bool operator==(const BoolLit&) const = default;
};
struct Binary {
    BinaryOp op;
    ExprRef lhs;
    ExprRef rhs;
    bool operator==(const Binary&) const = default;
};
struct Unary {
    UnaryOp op;
    ExprRef operand;
    bool operator==(const Unary&) const = default;
};

using ExprNode = std::variant<FmLiteral, Var, QueryExpr, Merge, Slice, Rename, Run, IntLit, StrLit,
                              BoolLit, Binary, Unary>;

struct Expr {
    ExprNode node;
    Span span;

    /// Structural equality; spans are ignored.
    friend bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }
};

inline bool operator==(const ExprRef& a, const ExprRef& b) {
    if (a.ptr_ == b.ptr_) return true;
    if (!a.ptr_ || !b.ptr_) return false;
    return *a.ptr_ == *b.ptr_;
}

inline ExprRef make_expr(ExprNode node, Span span = {}) {
    return ExprRef(std::make_shared<const Expr>(Expr{std::move(node), span}));
}

struct Stmt;
using Block = std::vector<Stmt>;

struct Assign {
    std::string name;
    ExprRef value;
    bool operator==(const Assign&) const = default;
};
struct ExprStmt {
    ExprRef expr;
    bool operator==(const ExprStmt&) const = default;
};
struct Foreach {
    std::string var;
    ExprRef domain;
    Block body;
    bool operator==(const Foreach&) const;
};
struct If {
    ExprRef cond;
    Block then_block;
    std::optional<Block> else_block;
    bool operator==(const If&) const;
};

using StmtNode = std::variant<Assign, ExprStmt, Foreach, If>;

struct Stmt {
    StmtNode node;
    Span span;

    friend bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }
};

inline bool Foreach::operator==(const Foreach& o) const {
    return var == o.var && domain == o.domain && body == o.body;
}
inline bool If::operator==(const If& o) const {
    return cond == o.cond && then_block == o.then_block && else_block == o.else_block;
}

/// The pivot syntax tree shared by every shape of the language.
struct Script {
    Block statements;
    friend bool operator==(const Script&, const Script&) = default;
};

/// Name of the node kind, as used by dialect templates.
inline std::string node_kind(const Expr& e) {
    struct {
        std::string operator()(const FmLiteral&) const { return "FmLiteral"; }
        std::string operator()(const Var&) const { return "Var"; }
        std::string operator()(const QueryExpr& q) const {
            switch (q.op) {
            case Query::counting: return "Counting";
            case Query::is_valid: return "IsValid";
            case Query::configs: return "Configs";
            case Query::cores: return "Cores";
            case Query::deads: return "Deads";
            case Query::features: return "Features";
            }
            return "?";
        }
        std::string operator()(const Merge&) const { return "Merge"; }
        std::string operator()(const Slice&) const { return "Slice"; }
        std::string operator()(const Rename&) const { return "Rename"; }
        std::string operator()(const Run&) const { return "Run"; }
        std::string operator()(const IntLit&) const { return "IntLit"; }
        std::string operator()(const StrLit&) const { return "StrLit"; }
        std::string operator()(const BoolLit&) const { return "BoolLit"; }
        std::string operator()(const Binary&) const { return "Binary"; }
        std::string operator()(const Unary&) const { return "Unary"; }
    } visitor;
    return std::visit(visitor, e.node);
}

inline std::string node_kind(const Stmt& s) {
    switch (s.node.index()) {
    case 0: return "Assign";
    case 1: return "ExprStmt";
    case 2: return "Foreach";
    default: return "If";
    }
}

} // namespace fam::script
