#pragma once

// Walks a script AST and performs the matching fluent calls, the same calls
// the embedded dialect writes out as source. Lets the suites run the
// embedded shape of any script without compiling it.

#include <map>
#include <string>
#include <vector>

#include "fam/fluent.hpp"

namespace fam::testing {

class FluentDriver {
public:
    explicit FluentDriver(const fluent::Context& ctx) : ctx_(ctx) { frames_.emplace_back(); }

    /// Runs every statement, then publishes the script-level variables.
    void run(const script::Script& s) {
        block(s.statements);
        for (const auto& [name, h] : frames_.front()) ctx_.publish(name, h);
    }

    fluent::Handle eval(const script::ExprRef& e) {
        using namespace script;
        return std::visit(
            [&](const auto& n) -> fluent::Handle {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, FmLiteral>) return ctx_.load(n.text);
                else if constexpr (std::is_same_v<T, Var>) return lookup(n.name);
                else if constexpr (std::is_same_v<T, QueryExpr>) {
                    fluent::Handle m = eval(n.operand);
                    switch (n.op) {
                    case Query::counting: return m.counting();
                    case Query::is_valid: return m.isValid();
                    case Query::configs: return m.configs();
                    case Query::cores: return m.cores();
                    case Query::deads: return m.deads();
                    case Query::features: return m.features();
                    }
                    return m;
                } else if constexpr (std::is_same_v<T, Merge>) {
                    auto builder = ctx_.merge(n.mode);
                    for (const auto& o : n.operands) builder = builder.with(eval(o));
                    return builder.get();
                } else if constexpr (std::is_same_v<T, Slice>) {
                    fluent::Handle m = eval(n.operand);
                    std::vector<std::string> names;
                    for (const auto& id : n.names) names.push_back(fluent::name(find(id), id));
                    return n.mode == SliceMode::including ? m.slice().including(names) : m.slice().excluding(names);
                } else if constexpr (std::is_same_v<T, Rename>) {
                    fluent::Handle m = eval(n.operand);
                    return m.rename(fluent::name(find(n.from), n.from), fluent::name(find(n.to), n.to));
                } else if constexpr (std::is_same_v<T, Run>) {
                    std::vector<fluent::Handle> args;
                    for (const auto& a : n.args) args.push_back(eval(a));
                    return ctx_.run(n.path, args);
                } else if constexpr (std::is_same_v<T, IntLit>) return ctx_.integer(n.value);
                else if constexpr (std::is_same_v<T, StrLit>) return ctx_.string(n.value);
                else if constexpr (std::is_same_v<T, BoolLit>) return ctx_.boolean(n.value);
                else if constexpr (std::is_same_v<T, Unary>) return !eval(n.operand);
                else {
                    fluent::Handle l = eval(n.lhs);
                    fluent::Handle r = eval(n.rhs);
                    switch (n.op) {
                    case BinaryOp::add: return l + r;
                    case BinaryOp::sub: return l - r;
                    case BinaryOp::eq: return l == r;
                    case BinaryOp::ne: return l != r;
                    case BinaryOp::lt: return l < r;
                    case BinaryOp::le: return l <= r;
                    case BinaryOp::gt: return l > r;
                    case BinaryOp::ge: return l >= r;
                    case BinaryOp::conj: return l && r;
                    case BinaryOp::disj: return l || r;
                    }
                    return l;
                }
            },
            e->node);
    }

private:
    void block(const script::Block& b) {
        for (const auto& s : b) statement(s);
    }

    void statement(const script::Stmt& s) {
        using namespace script;
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            fluent::Handle h = eval(a->value);
            for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
                auto found = it->find(a->name);
                if (found != it->end()) {
                    found->second = h;
                    return;
                }
            }
            frames_.front()[a->name] = h;
        } else if (const auto* e = std::get_if<ExprStmt>(&s.node)) {
            eval(e->expr);
        } else if (const auto* f = std::get_if<Foreach>(&s.node)) {
            for (const auto& item : eval(f->domain).each()) {
                frames_.emplace_back();
                frames_.back()[f->var] = item;
                block(f->body);
                frames_.pop_back();
            }
        } else if (const auto* i = std::get_if<If>(&s.node)) {
            if (eval(i->cond).truth()) block(i->then_block);
            else if (i->else_block) block(*i->else_block);
        }
    }

    fluent::Handle find(const std::string& name) const {
        for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return found->second;
        }
        return {};
    }

    fluent::Handle lookup(const std::string& name) const {
        fluent::Handle h = find(name);
        if (h.empty()) throw Error(ErrorKind::unbound_variable, "'" + name + "' is not defined");
        return h;
    }

    fluent::Context ctx_;
    std::vector<std::map<std::string, fluent::Handle>> frames_;
};

/// True when the script has no foreach or if.
inline bool straight_line(const script::Script& s) {
    for (const auto& stmt : s.statements)
        if (std::holds_alternative<script::Foreach>(stmt.node) || std::holds_alternative<script::If>(stmt.node))
            return false;
    return true;
}

} // namespace fam::testing
