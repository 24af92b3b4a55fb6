#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fam {

/// Immutable propositional formula. Nodes are shared, so copies are cheap and
/// subformulas may be reused (extracted formulas are DAGs in memory).
class Formula {
public:
    enum class Kind { var, negation, conjunction, disjunction, implication, equivalence, truth, falsity };

    Formula() : Formula(make(Kind::truth)) {}

    static Formula var(std::string name) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::var;
        n->name = std::move(name);
        return Formula(std::move(n));
    }
    static Formula truth() { return make(Kind::truth); }
    static Formula falsity() { return make(Kind::falsity); }
    static Formula negation(Formula f) { return make(Kind::negation, std::move(f)); }
    static Formula conjunction(Formula a, Formula b) { return make(Kind::conjunction, std::move(a), std::move(b)); }
    static Formula disjunction(Formula a, Formula b) { return make(Kind::disjunction, std::move(a), std::move(b)); }
    static Formula implication(Formula a, Formula b) { return make(Kind::implication, std::move(a), std::move(b)); }
    static Formula equivalence(Formula a, Formula b) { return make(Kind::equivalence, std::move(a), std::move(b)); }

    Kind kind() const { return node_->kind; }
    const std::string& name() const { return node_->name; }
    /// Operand of a negation, or left operand of a binary node.
    const Formula& lhs() const { return *node_->lhs; }
    const Formula& rhs() const { return *node_->rhs; }
    const Formula& operand() const { return *node_->lhs; }

    bool is_binary() const {
        return kind() == Kind::conjunction || kind() == Kind::disjunction ||
               kind() == Kind::implication || kind() == Kind::equivalence;
    }

    /// Identity of the shared node; stable for memoization.
    const void* id() const { return node_.get(); }

    friend bool operator==(const Formula& a, const Formula& b) {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
        case Kind::var: return a.name() == b.name();
        case Kind::truth:
        case Kind::falsity: return true;
        case Kind::negation: return a.operand() == b.operand();
        default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
        }
    }

private:
    struct Node {
        Kind kind = Kind::truth;
        std::string name;
        std::shared_ptr<const Formula> lhs;
        std::shared_ptr<const Formula> rhs;
    };

    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Formula make(Kind k) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        return Formula(std::move(n));
    }
    static Formula make(Kind k, Formula a) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::make_shared<const Formula>(std::move(a));
        return Formula(std::move(n));
    }
    static Formula make(Kind k, Formula a, Formula b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::make_shared<const Formula>(std::move(a));
        n->rhs = std::make_shared<const Formula>(std::move(b));
        return Formula(std::move(n));
    }

    std::shared_ptr<const Node> node_;
};

/// Left-nested conjunction; the empty conjunction is `true`.
inline Formula conjoin(const std::vector<Formula>& parts) {
    if (parts.empty()) return Formula::truth();
    Formula acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::conjunction(acc, parts[i]);
    return acc;
}

inline Formula disjoin(const std::vector<Formula>& parts) {
    if (parts.empty()) return Formula::falsity();
    Formula acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::disjunction(acc, parts[i]);
    return acc;
}

inline bool evaluate(const Formula& f, const std::function<bool(const std::string&)>& value_of) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::var: return value_of(f.name());
    case K::truth: return true;
    case K::falsity: return false;
    case K::negation: return !evaluate(f.operand(), value_of);
    case K::conjunction: return evaluate(f.lhs(), value_of) && evaluate(f.rhs(), value_of);
    case K::disjunction: return evaluate(f.lhs(), value_of) || evaluate(f.rhs(), value_of);
    case K::implication: return !evaluate(f.lhs(), value_of) || evaluate(f.rhs(), value_of);
    case K::equivalence: return evaluate(f.lhs(), value_of) == evaluate(f.rhs(), value_of);
    }
    return false;
}

inline void collect_variables(const Formula& f, std::set<std::string>& out) {
    if (f.kind() == Formula::Kind::var) {
        out.insert(f.name());
    } else if (f.kind() == Formula::Kind::negation) {
        collect_variables(f.operand(), out);
    } else if (f.is_binary()) {
        collect_variables(f.lhs(), out);
        collect_variables(f.rhs(), out);
    }
}

inline std::set<std::string> variables(const Formula& f) {
    std::set<std::string> out;
    collect_variables(f, out);
    return out;
}

inline Formula substitute(const Formula& f, const std::string& from, const std::string& to) {
    using K = Formula::Kind;
    switch (f.kind()) {
    case K::var: return f.name() == from ? Formula::var(to) : f;
    case K::truth:
    case K::falsity: return f;
    case K::negation: return Formula::negation(substitute(f.operand(), from, to));
    case K::conjunction: return Formula::conjunction(substitute(f.lhs(), from, to), substitute(f.rhs(), from, to));
    case K::disjunction: return Formula::disjunction(substitute(f.lhs(), from, to), substitute(f.rhs(), from, to));
    case K::implication: return Formula::implication(substitute(f.lhs(), from, to), substitute(f.rhs(), from, to));
    case K::equivalence: return Formula::equivalence(substitute(f.lhs(), from, to), substitute(f.rhs(), from, to));
    }
    return f;
}

namespace detail {

// Binding strength: <-> (left) < -> (right) < | < & < ! < atoms.
inline int precedence(Formula::Kind k) {
    using K = Formula::Kind;
    switch (k) {
    case K::equivalence: return 1;
    case K::implication: return 2;
    case K::disjunction: return 3;
    case K::conjunction: return 4;
    case K::negation: return 5;
    default: return 6;
    }
}

inline const char* spelling(Formula::Kind k) {
    using K = Formula::Kind;
    switch (k) {
    case K::equivalence: return " <-> ";
    case K::implication: return " -> ";
    case K::disjunction: return " | ";
    case K::conjunction: return " & ";
    default: return "";
    }
}

inline void render(const Formula& f, std::string& out) {
    using K = Formula::Kind;
    auto child = [&out](const Formula& c, int min_prec) {
        bool wrap = precedence(c.kind()) < min_prec;
        if (wrap) out += '(';
        render(c, out);
        if (wrap) out += ')';
    };
    switch (f.kind()) {
    case K::var: out += f.name(); return;
    case K::truth: out += "true"; return;
    case K::falsity: out += "false"; return;
    case K::negation:
        out += '!';
        child(f.operand(), 5);
        return;
    default: {
        int p = precedence(f.kind());
        bool right_assoc = f.kind() == K::implication;
        child(f.lhs(), right_assoc ? p + 1 : p);
        out += spelling(f.kind());
        child(f.rhs(), right_assoc ? p : p + 1);
    }
    }
}

} // namespace detail

/// Canonical text with minimal parentheses; re-parses to an equal tree.
inline std::string to_string(const Formula& f) {
    std::string out;
    detail::render(f, out);
    return out;
}

} // namespace fam
