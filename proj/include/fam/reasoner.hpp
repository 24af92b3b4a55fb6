#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fam/bdd.hpp"
#include "fam/error.hpp"
#include "fam/feature_model.hpp"
#include "fam/formula.hpp"
#include "fam/oracle.hpp"
#include "fam/settings.hpp"

namespace fam {

enum class Status { selected, deselected, undecided };
enum class Origin { user, propagated, initial };
enum class SliceMode { including, excluding };
enum class MergeMode { sunion, sinter, sdiff };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::selected: return "selected";
    case Status::deselected: return "deselected";
    case Status::undecided: return "undecided";
    }
    return "?";
}

inline const char* to_string(Origin o) {
    switch (o) {
    case Origin::user: return "user";
    case Origin::propagated: return "propagated";
    case Origin::initial: return "initial";
    }
    return "?";
}

inline const char* to_string(SliceMode m) { return m == SliceMode::including ? "including" : "excluding"; }

inline const char* to_string(MergeMode m) {
    switch (m) {
    case MergeMode::sunion: return "sunion";
    case MergeMode::sinter: return "sinter";
    case MergeMode::sdiff: return "sdiff";
    }
    return "?";
}

struct FeatureStatus {
    std::string name;
    Status status = Status::undecided;
    Origin origin = Origin::initial;

    friend bool operator==(const FeatureStatus&, const FeatureStatus&) = default;
};

/// Per-feature decision state of a configurator, in alphabet order.
struct TriState {
    std::vector<FeatureStatus> features;
    bool conflict = false;

    friend bool operator==(const TriState&, const TriState&) = default;

    const FeatureStatus* find(const std::string& name) const {
        for (const auto& f : features)
            if (f.name == name) return &f;
        return nullptr;
    }
};

struct Decision {
    std::string feature;
    bool selected = true;

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Everything undecided except the listed user decisions.
inline TriState user_decisions(const std::vector<std::string>& alphabet, const std::vector<Decision>& decisions) {
    TriState t;
    for (const auto& a : alphabet) t.features.push_back({a, Status::undecided, Origin::initial});
    for (const auto& d : decisions) {
        auto it = std::find_if(t.features.begin(), t.features.end(),
                               [&](const FeatureStatus& f) { return f.name == d.feature; });
        if (it == t.features.end()) throw Error(ErrorKind::unknown_feature, "unknown feature '" + d.feature + "'");
        it->status = d.selected ? Status::selected : Status::deselected;
        it->origin = Origin::user;
    }
    return t;
}

/// A space compiled into a BDD arena. Variable i is order()[i]: tree pre-order
/// for feature models, alphabet order for flat models.
class Bdd {
public:
    Bdd(std::vector<std::string> order, const Settings& settings)
        : order_(std::move(order)),
          arena_(static_cast<unsigned>(order_.size()), settings.max_bdd_nodes) {
        for (std::size_t i = 0; i < order_.size(); ++i) index_[order_[i]] = static_cast<unsigned>(i);
    }

    const std::vector<std::string>& order() const { return order_; }
    bdd::Manager& arena() { return arena_; }
    const bdd::Manager& arena() const { return arena_; }
    bdd::NodeId root() const { return root_; }
    void set_root(bdd::NodeId r) { root_ = r; }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    unsigned index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error(ErrorKind::unknown_feature, "unknown feature '" + name + "'");
        return it->second;
    }

    bdd::NodeId compile(const Formula& f) {
        std::unordered_map<const void*, bdd::NodeId> memo;
        return compile(f, memo);
    }

    /// Formula over names equivalent to node n (if-then-else expansion with
    /// the obvious simplifications; shared sub-diagrams share subformulas).
    Formula extract(bdd::NodeId n) const {
        std::unordered_map<bdd::NodeId, Formula> memo;
        return extract(n, memo);
    }

private:
    bdd::NodeId compile(const Formula& f, std::unordered_map<const void*, bdd::NodeId>& memo) {
        using K = Formula::Kind;
        auto it = memo.find(f.id());
        if (it != memo.end()) return it->second;
        bdd::NodeId r = bdd::false_node;
        switch (f.kind()) {
        case K::var: r = arena_.var(index(f.name())); break;
        case K::truth: r = bdd::true_node; break;
        case K::falsity: r = bdd::false_node; break;
        case K::negation: r = arena_.negate(compile(f.operand(), memo)); break;
        case K::conjunction: r = binary(bdd::Op::conj, f, memo); break;
        case K::disjunction: r = binary(bdd::Op::disj, f, memo); break;
        case K::implication: r = binary(bdd::Op::implies, f, memo); break;
        case K::equivalence: r = binary(bdd::Op::iff, f, memo); break;
        }
        memo.emplace(f.id(), r);
        return r;
    }

    bdd::NodeId binary(bdd::Op op, const Formula& f, std::unordered_map<const void*, bdd::NodeId>& memo) {
        bdd::NodeId a = compile(f.lhs(), memo);
        if (op == bdd::Op::conj && a == bdd::false_node) return a;
        return arena_.apply(op, a, compile(f.rhs(), memo));
    }

    Formula extract(bdd::NodeId n, std::unordered_map<bdd::NodeId, Formula>& memo) const {
        using F = Formula;
        if (n == bdd::false_node) return F::falsity();
        if (n == bdd::true_node) return F::truth();
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
        F v = F::var(order_[arena_.level(n)]);
        bdd::NodeId lo = arena_.low(n), hi = arena_.high(n);
        F r;
        if (lo == bdd::false_node && hi == bdd::true_node) r = v;
        else if (lo == bdd::true_node && hi == bdd::false_node) r = F::negation(v);
        else if (lo == bdd::false_node) r = F::conjunction(v, extract(hi, memo));
        else if (hi == bdd::false_node) r = F::conjunction(F::negation(v), extract(lo, memo));
        else if (hi == bdd::true_node) r = F::disjunction(v, extract(lo, memo));
        else if (lo == bdd::true_node) r = F::implication(v, extract(hi, memo));
        else
            r = F::disjunction(F::conjunction(v, extract(hi, memo)),
                               F::conjunction(F::negation(v), extract(lo, memo)));
        memo.emplace(n, r);
        return r;
    }

    std::vector<std::string> order_;
    std::map<std::string, unsigned> index_;
    bdd::Manager arena_;
    bdd::NodeId root_ = bdd::false_node;
};

/// Compiles `space` with the given variable order (which must cover its
/// alphabet) into `target`, returning the root.
inline bdd::NodeId compile_space(Bdd& target, const Space& space) {
    if (const auto* fm = std::get_if<FeatureModel>(&space)) {
        // Tree part first, one conjunct at a time, keeps intermediates small.
        bdd::NodeId acc = bdd::true_node;
        Formula f = encode(*fm);
        std::vector<Formula> conjuncts;
        while (f.kind() == Formula::Kind::conjunction) {
            conjuncts.push_back(f.rhs());
            f = f.lhs();
        }
        conjuncts.push_back(f);
        for (auto it = conjuncts.rbegin(); it != conjuncts.rend(); ++it) {
            acc = target.arena().conj(acc, target.compile(*it));
            if (acc == bdd::false_node) break;
        }
        return acc;
    }
    return target.compile(std::get<FlatModel>(space).formula);
}

inline Bdd build(const Space& space, const Settings& settings = Settings::from_env()) {
    Bdd b(alphabet(space), settings);
    b.set_root(compile_space(b, space));
    return b;
}

/// Repeated queries over one compiled space.
class Analysis {
public:
    explicit Analysis(const Space& space, const Settings& settings = Settings::from_env())
        : bdd_(build(space, settings)) {}

    const std::vector<std::string>& alphabet() const { return bdd_.order(); }
    Bdd& bdd() { return bdd_; }

    bool is_valid() const { return bdd_.root() != bdd::false_node; }

    BigInt counting() const { return bdd_.arena().sat_count(bdd_.root()); }

    /// Root conjoined with the decisions.
    bdd::NodeId restricted(const std::vector<Decision>& decisions) {
        auto& a = bdd_.arena();
        bdd::NodeId r = bdd_.root();
        for (const auto& d : decisions) r = a.conj(r, a.literal(bdd_.index(d.feature), d.selected));
        return r;
    }

    BigInt counting(const std::vector<Decision>& decisions) {
        return bdd_.arena().sat_count(restricted(decisions));
    }

    std::vector<std::string> cores() { return forced(true); }
    std::vector<std::string> deads() { return forced(false); }

    TriState propagate(const TriState& input) {
        std::vector<Decision> decisions;
        for (const auto& f : input.features) {
            bdd_.index(f.name);
            if (f.origin == Origin::user && f.status != Status::undecided)
                decisions.push_back({f.name, f.status == Status::selected});
        }
        bdd::NodeId r = restricted(decisions);
        if (r == bdd::false_node) {
            TriState out = input;
            out.conflict = true;
            return out;
        }
        auto& a = bdd_.arena();
        TriState out;
        for (const auto& name : bdd_.order()) {
            const FeatureStatus* given = input.find(name);
            if (given && given->origin == Origin::user && given->status != Status::undecided) {
                out.features.push_back(*given);
                continue;
            }
            unsigned v = bdd_.index(name);
            FeatureStatus s{name, Status::undecided, Origin::initial};
            if (a.restrict(r, v, false) == bdd::false_node) {
                s.status = Status::selected;
                s.origin = Origin::propagated;
            } else if (a.restrict(r, v, true) == bdd::false_node) {
                s.status = Status::deselected;
                s.origin = Origin::propagated;
            }
            out.features.push_back(s);
        }
        return out;
    }

    /// Up to `limit` configurations consistent with the decisions, in
    /// lexicographic order of their sorted feature names.
    std::vector<Configuration> configurations(const std::vector<Decision>& decisions, std::size_t limit) {
        bdd::NodeId r = restricted(decisions);
        std::vector<std::string> names = bdd_.order();
        std::sort(names.begin(), names.end());
        std::vector<Configuration> out;
        if (limit == 0) return out;
        std::vector<std::string> partial;
        std::function<void(std::size_t, bdd::NodeId, bool)> walk =
            [&](std::size_t i, bdd::NodeId node, bool skip_all_false) {
                if (out.size() >= limit) return;
                auto& a = bdd_.arena();
                if (!skip_all_false && a.all_false_satisfies(node)) {
                    out.push_back({{partial.begin(), partial.end()}});
                    if (out.size() >= limit) return;
                }
                if (i == names.size()) return;
                unsigned v = bdd_.index(names[i]);
                bdd::NodeId with = a.restrict(node, v, true);
                if (with != bdd::false_node) {
                    partial.push_back(names[i]);
                    walk(i + 1, with, false);
                    partial.pop_back();
                }
                bdd::NodeId without = a.restrict(node, v, false);
                if (without != bdd::false_node) walk(i + 1, without, true);
            };
        if (r != bdd::false_node) walk(0, r, false);
        return out;
    }

    /// Every configuration; LimitExceeded (carrying the count) above `limit`.
    std::vector<Configuration> configs(std::size_t limit) {
        BigInt n = counting();
        if (n > limit) throw LimitExceeded(n, limit);
        return configurations({}, limit);
    }

private:
    std::vector<std::string> forced(bool value) {
        if (!is_valid()) throw Error(ErrorKind::invalid_model, "model has no configuration");
        auto& a = bdd_.arena();
        std::vector<std::string> out;
        for (const auto& name : bdd_.order())
            if (a.restrict(bdd_.root(), bdd_.index(name), !value) == bdd::false_node) out.push_back(name);
        return out;
    }

    Bdd bdd_;
};

inline BigInt counting(const Space& space, const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).counting();
}

inline bool is_valid(const Space& space, const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).is_valid();
}

inline std::vector<std::string> cores(const Space& space, const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).cores();
}

inline std::vector<std::string> deads(const Space& space, const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).deads();
}

inline TriState propagate(const Space& space, const TriState& decisions,
                          const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).propagate(decisions);
}

inline std::vector<Configuration> configs(const Space& space, std::size_t limit,
                                          const Settings& settings = Settings::from_env()) {
    return Analysis(space, settings).configs(limit);
}

/// Projection of the configuration set onto the kept features.
inline FlatModel slice(const Space& space, SliceMode mode, const std::vector<std::string>& names,
                       const Settings& settings = Settings::from_env()) {
    const auto& alpha = alphabet(space);
    std::set<std::string> listed;
    for (const auto& n : names) {
        if (std::find(alpha.begin(), alpha.end(), n) == alpha.end())
            throw Error(ErrorKind::unknown_feature, "unknown feature '" + n + "'");
        listed.insert(n);
    }
    Bdd b = build(space, settings);
    std::vector<bool> quantified(alpha.size());
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        bool keep = listed.count(b.order()[i]) ? mode == SliceMode::including : mode == SliceMode::excluding;
        quantified[i] = !keep;
        if (keep) kept.push_back(b.order()[i]);
    }
    bdd::NodeId projected = b.arena().exists(b.root(), quantified);
    return FlatModel::make(std::move(kept), b.extract(projected));
}

/// Set operation over configuration sets lifted to the union alphabet
/// (features missing from an operand are deselected in its configurations).
inline FlatModel merge(MergeMode mode, const std::vector<Space>& spaces,
                       const Settings& settings = Settings::from_env()) {
    if (spaces.size() < 2) throw Error(ErrorKind::arity, "merge needs at least two models");
    if (mode == MergeMode::sdiff && spaces.size() != 2)
        throw Error(ErrorKind::arity, "sdiff takes exactly two models, got " + std::to_string(spaces.size()));

    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& s : spaces)
        for (const auto& n : alphabet(s))
            if (seen.insert(n).second) names.push_back(n);

    Bdd b(names, settings);
    auto& a = b.arena();
    std::vector<bdd::NodeId> lifted;
    for (const auto& s : spaces) {
        bdd::NodeId r = compile_space(b, s);
        const auto& own = alphabet(s);
        std::set<std::string> mine(own.begin(), own.end());
        for (const auto& n : names)
            if (!mine.count(n)) r = a.conj(r, a.nvar(b.index(n)));
        lifted.push_back(r);
    }
    bdd::NodeId result = lifted.front();
    for (std::size_t i = 1; i < lifted.size(); ++i) {
        switch (mode) {
        case MergeMode::sunion: result = a.disj(result, lifted[i]); break;
        case MergeMode::sinter: result = a.conj(result, lifted[i]); break;
        case MergeMode::sdiff: result = a.conj(result, a.negate(lifted[i])); break;
        }
    }
    return FlatModel::make(std::move(names), b.extract(result));
}

} // namespace fam
