#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <string>
#include <unordered_map>
#include <vector>

#include "fam/error.hpp"

namespace fam::bdd {

using NodeId = std::uint32_t;

inline constexpr NodeId false_node = 0;
inline constexpr NodeId true_node = 1;

enum class Op : std::uint8_t { conj, disj, implies, iff, exclusive };

/// Reduced ordered BDD arena with hash-consing. Variable v is tested at
/// level v; terminals sit at level num_vars(). Single-owner mutable state.
class Manager {
public:
    Manager(unsigned num_vars, std::size_t max_nodes) : num_vars_(num_vars), max_nodes_(max_nodes) {
        nodes_.push_back({num_vars, false_node, false_node});
        nodes_.push_back({num_vars, true_node, true_node});
    }

    unsigned num_vars() const { return num_vars_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t max_nodes() const { return max_nodes_; }

    unsigned level(NodeId n) const { return nodes_[n].var; }
    NodeId low(NodeId n) const { return nodes_[n].low; }
    NodeId high(NodeId n) const { return nodes_[n].high; }
    bool is_terminal(NodeId n) const { return n <= true_node; }

    /// Unique node for (v, low, high); collapses redundant tests.
    NodeId make(unsigned v, NodeId lo, NodeId hi) {
        if (lo == hi) return lo;
        Key key{v, lo, hi};
        auto it = unique_.find(key);
        if (it != unique_.end()) return it->second;
        if (nodes_.size() >= max_nodes_)
            throw Error(ErrorKind::capacity_exceeded,
                        "decision diagram exceeds the budget of " + std::to_string(max_nodes_) + " nodes");
        auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({v, lo, hi});
        unique_.emplace(key, id);
        return id;
    }

    NodeId var(unsigned v) { return make(v, false_node, true_node); }
    NodeId nvar(unsigned v) { return make(v, true_node, false_node); }
    NodeId literal(unsigned v, bool positive) { return positive ? var(v) : nvar(v); }

    NodeId apply(Op op, NodeId a, NodeId b) {
        if (auto t = terminal_case(op, a, b)) return *t;
        Key key{static_cast<unsigned>(op), a, b};
        auto it = apply_cache_.find(key);
        if (it != apply_cache_.end()) return it->second;
        unsigned v = std::min(level(a), level(b));
        auto [a0, a1] = cofactors(a, v);
        auto [b0, b1] = cofactors(b, v);
        NodeId lo = apply(op, a0, b0);
        NodeId hi = apply(op, a1, b1);
        NodeId r = make(v, lo, hi);
        apply_cache_.emplace(key, r);
        return r;
    }

    NodeId conj(NodeId a, NodeId b) { return apply(Op::conj, a, b); }
    NodeId disj(NodeId a, NodeId b) { return apply(Op::disj, a, b); }
    NodeId negate(NodeId a) { return apply(Op::exclusive, a, true_node); }

    /// Existential quantification of every variable v with quantified[v].
    NodeId exists(NodeId f, const std::vector<bool>& quantified) {
        std::unordered_map<NodeId, NodeId> memo;
        return exists_rec(f, quantified, memo);
    }

    /// Cofactor of f with variable v fixed to value.
    NodeId restrict(NodeId f, unsigned v, bool value) {
        std::unordered_map<NodeId, NodeId> memo;
        return restrict_rec(f, v, value, memo);
    }

    /// Number of satisfying assignments over all num_vars() variables.
    BigInt sat_count(NodeId f) const {
        std::unordered_map<NodeId, BigInt> memo;
        return count_rec(f, memo) << level(f);
    }

    /// Follows low edges: is the assignment with every remaining variable
    /// false a model of f?
    bool all_false_satisfies(NodeId f) const {
        while (!is_terminal(f)) f = low(f);
        return f == true_node;
    }

private:
    struct Node {
        unsigned var;
        NodeId low;
        NodeId high;
    };

    struct Key {
        unsigned tag;
        NodeId a;
        NodeId b;
        bool operator==(const Key&) const = default;
    };

    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = k.tag * 0x9E3779B97F4A7C15ull;
            h ^= (static_cast<std::uint64_t>(k.a) << 32 | k.b) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };

    // Result when the pair is decided without recursion.
    std::optional<NodeId> terminal_case(Op op, NodeId a, NodeId b) const {
        auto done = [](NodeId n) { return std::optional<NodeId>(n); };
        switch (op) {
        case Op::conj:
            if (a == false_node || b == false_node) return done(false_node);
            if (a == true_node) return done(b);
            if (b == true_node || a == b) return done(a);
            break;
        case Op::disj:
            if (a == true_node || b == true_node) return done(true_node);
            if (a == false_node) return done(b);
            if (b == false_node || a == b) return done(a);
            break;
        case Op::implies:
            if (a == false_node || b == true_node || a == b) return done(true_node);
            if (a == true_node) return done(b);
            break;
        case Op::iff:
            if (a == b) return done(true_node);
            if (is_terminal(a) && is_terminal(b)) return done(false_node);
            if (a == true_node) return done(b);
            if (b == true_node) return done(a);
            break;
        case Op::exclusive:
            if (a == b) return done(false_node);
            if (a == false_node) return done(b);
            if (b == false_node) return done(a);
            if (is_terminal(a) && is_terminal(b)) return done(true_node);
            break;
        }
        return std::nullopt;
    }

    std::pair<NodeId, NodeId> cofactors(NodeId n, unsigned v) const {
        if (level(n) != v) return {n, n};
        return {low(n), high(n)};
    }

    NodeId exists_rec(NodeId f, const std::vector<bool>& q, std::unordered_map<NodeId, NodeId>& memo) {
        if (is_terminal(f)) return f;
        auto it = memo.find(f);
        if (it != memo.end()) return it->second;
        unsigned v = level(f);
        NodeId lo = exists_rec(low(f), q, memo);
        NodeId r;
        if (q[v] && lo == true_node) {
            r = true_node;
        } else {
            NodeId hi = exists_rec(high(f), q, memo);
            r = q[v] ? disj(lo, hi) : make(v, lo, hi);
        }
        memo.emplace(f, r);
        return r;
    }

    NodeId restrict_rec(NodeId f, unsigned v, bool value, std::unordered_map<NodeId, NodeId>& memo) {
        if (is_terminal(f) || level(f) > v) return f;
        if (level(f) == v) return value ? high(f) : low(f);
        auto it = memo.find(f);
        if (it != memo.end()) return it->second;
        NodeId r = make(level(f), restrict_rec(low(f), v, value, memo), restrict_rec(high(f), v, value, memo));
        memo.emplace(f, r);
        return r;
    }

    // Models of the sub-function rooted at f over variables level(f)..num_vars-1.
    BigInt count_rec(NodeId f, std::unordered_map<NodeId, BigInt>& memo) const {
        if (f == false_node) return 0;
        if (f == true_node) return 1;
        auto it = memo.find(f);
        if (it != memo.end()) return it->second;
        unsigned v = level(f);
        BigInt lo = count_rec(low(f), memo) << (level(low(f)) - v - 1);
        BigInt hi = count_rec(high(f), memo) << (level(high(f)) - v - 1);
        BigInt r = lo + hi;
        memo.emplace(f, r);
        return r;
    }

    unsigned num_vars_;
    std::size_t max_nodes_;
    std::vector<Node> nodes_;
    std::unordered_map<Key, NodeId, KeyHash> unique_;
    std::unordered_map<Key, NodeId, KeyHash> apply_cache_;
};

} // namespace fam::bdd
