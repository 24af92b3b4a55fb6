#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fam/error.hpp"
#include "fam/formula.hpp"

namespace fam {

enum class Optionality { mandatory, optional };
enum class GroupKind { xor_group, or_group, mutex_group };

inline const char* to_string(GroupKind k) {
    switch (k) {
    case GroupKind::xor_group: return "xor";
    case GroupKind::or_group: return "or";
    case GroupKind::mutex_group: return "mutex";
    }
    return "?";
}

inline const char* to_string(Optionality o) {
    return o == Optionality::mandatory ? "mandatory" : "optional";
}

struct Group {
    std::string parent;
    std::vector<std::string> members;
    GroupKind kind = GroupKind::xor_group;

    friend bool operator==(const Group&, const Group&) = default;
};

/// Feature tree plus cross-tree constraints. Construct through
/// `FeatureModel::make`, which checks the invariants and puts `features` in
/// tree pre-order with each parent's children in declaration order.
struct FeatureModel {
    std::string root;
    std::vector<std::string> features;
    std::map<std::string, std::string> parent;
    std::map<std::string, Optionality> optionality;
    std::vector<Group> groups;
    std::vector<Formula> constraints;

    friend bool operator==(const FeatureModel&, const FeatureModel&) = default;

    bool contains(const std::string& name) const {
        return std::find(features.begin(), features.end(), name) != features.end();
    }

    /// Children of `p`, in declaration order.
    std::vector<std::string> children(const std::string& p) const {
        std::vector<std::string> out;
        for (const auto& f : features) {
            auto it = parent.find(f);
            if (it != parent.end() && it->second == p) out.push_back(f);
        }
        return out;
    }

    /// Index into `groups` of the group `f` belongs to, or -1.
    int group_of(const std::string& f) const {
        for (std::size_t i = 0; i < groups.size(); ++i)
            for (const auto& m : groups[i].members)
                if (m == f) return static_cast<int>(i);
        return -1;
    }

    /// Validates and normalizes a raw model. `features` must list every
    /// feature (root first); the relative order of siblings is kept.
    static FeatureModel make(FeatureModel raw);
};

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s.front())) return false;
    return std::all_of(s.begin() + 1, s.end(), tail);
}

/// Valid feature name: an identifier that is not a formula keyword.
inline bool is_feature_name(std::string_view s) {
    return is_identifier(s) && s != "true" && s != "false";
}

inline FeatureModel FeatureModel::make(FeatureModel m) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::semantic, msg); };

    if (m.features.empty() || m.features.front() != m.root) fail("root must be the first feature");
    std::set<std::string> seen;
    for (const auto& f : m.features) {
        if (!is_feature_name(f)) fail("invalid feature name '" + f + "'");
        if (!seen.insert(f).second) fail("duplicate feature '" + f + "'");
    }
    if (m.parent.count(m.root)) fail("root '" + m.root + "' cannot have a parent");
    for (const auto& f : m.features) {
        if (f == m.root) continue;
        auto it = m.parent.find(f);
        if (it == m.parent.end()) fail("feature '" + f + "' has no parent");
        if (!seen.count(it->second)) fail("unknown parent '" + it->second + "' of '" + f + "'");
    }
    for (const auto& [child, p] : m.parent)
        if (!seen.count(child)) fail("unknown feature '" + child + "' in tree");

    std::set<std::string> grouped;
    for (const auto& g : m.groups) {
        if (g.members.size() < 2) fail("group under '" + g.parent + "' needs at least two members");
        for (const auto& x : g.members) {
            if (!seen.count(x)) fail("unknown group member '" + x + "'");
            if (!grouped.insert(x).second) fail("feature '" + x + "' belongs to more than one group");
            auto px = m.parent.find(x);
            if (px == m.parent.end() || px->second != g.parent)
                fail("group member '" + x + "' is not a child of '" + g.parent + "'");
            if (m.optionality.count(x)) fail("group member '" + x + "' cannot carry optionality");
        }
    }
    for (const auto& f : m.features) {
        if (f == m.root || grouped.count(f)) continue;
        if (!m.optionality.count(f)) fail("feature '" + f + "' lacks optionality");
    }
    for (const auto& [f, o] : m.optionality) {
        (void)o;
        if (!seen.count(f) || f == m.root) fail("optionality given for '" + f + "'");
    }
    for (const auto& c : m.constraints)
        for (const auto& v : variables(c))
            if (!seen.count(v)) fail("constraint mentions unknown feature '" + v + "'");

    // Sibling order: declaration order, with each group's members pulled
    // together at its first member's position.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < m.features.size(); ++i) position[m.features[i]] = i;
    for (auto& g : m.groups)
        std::sort(g.members.begin(), g.members.end(),
                  [&](const std::string& a, const std::string& b) { return position[a] < position[b]; });

    std::map<std::string, std::vector<std::string>> kids;
    for (const auto& f : m.features) {
        if (f == m.root) continue;
        const auto& p = m.parent.at(f);
        auto& list = kids[p];
        if (std::find(list.begin(), list.end(), f) != list.end()) continue;
        int gi = m.group_of(f);
        if (gi < 0) {
            list.push_back(f);
        } else {
            for (const auto& x : m.groups[static_cast<std::size_t>(gi)].members) list.push_back(x);
        }
    }

    std::vector<std::string> order;
    std::set<std::string> visiting;
    std::vector<std::string> stack{m.root};
    while (!stack.empty()) {
        std::string f = stack.back();
        stack.pop_back();
        if (!visiting.insert(f).second) fail("feature tree contains a cycle at '" + f + "'");
        order.push_back(f);
        auto it = kids.find(f);
        if (it == kids.end()) continue;
        for (auto c = it->second.rbegin(); c != it->second.rend(); ++c) stack.push_back(*c);
    }
    if (order.size() != m.features.size()) fail("feature tree is not connected to root '" + m.root + "'");
    m.features = std::move(order);

    for (std::size_t i = 0; i < m.features.size(); ++i) position[m.features[i]] = i;
    std::stable_sort(m.groups.begin(), m.groups.end(), [&](const Group& a, const Group& b) {
        return position[a.members.front()] < position[b.members.front()];
    });
    return m;
}

/// Alphabet plus formula: the closed form of slice and merge results.
struct FlatModel {
    std::vector<std::string> alphabet;
    Formula formula;

    friend bool operator==(const FlatModel&, const FlatModel&) = default;

    static FlatModel make(std::vector<std::string> alphabet, Formula formula) {
        std::set<std::string> names;
        for (const auto& a : alphabet) {
            if (!is_feature_name(a)) throw Error(ErrorKind::semantic, "invalid feature name '" + a + "'");
            if (!names.insert(a).second) throw Error(ErrorKind::semantic, "duplicate feature '" + a + "'");
        }
        for (const auto& v : variables(formula))
            if (!names.count(v)) throw Error(ErrorKind::semantic, "formula mentions unknown feature '" + v + "'");
        return FlatModel{std::move(alphabet), std::move(formula)};
    }
};

/// Anything with a configuration semantics.
using Space = std::variant<FeatureModel, FlatModel>;

inline const std::vector<std::string>& alphabet(const Space& s) {
    if (const auto* fm = std::get_if<FeatureModel>(&s)) return fm->features;
    return std::get<FlatModel>(s).alphabet;
}

/// A product: the set of selected features. Ordered by name, so comparing
/// two configurations is the lexicographic order of their sorted names.
struct Configuration {
    std::set<std::string> selected;

    auto operator<=>(const Configuration&) const = default;
    bool operator==(const Configuration&) const = default;
};

inline std::string to_string(const Configuration& c) {
    std::string out = "{";
    bool first = true;
    for (const auto& f : c.selected) {
        if (!first) out += ", ";
        out += f;
        first = false;
    }
    return out + "}";
}

/// Fresh model with feature `from` called `to` everywhere.
inline FeatureModel rename(const FeatureModel& m, const std::string& from, const std::string& to) {
    if (!m.contains(from)) throw Error(ErrorKind::unknown_feature, "unknown feature '" + from + "'");
    if (from == to) return m;
    if (m.contains(to)) throw Error(ErrorKind::name_clash, "feature '" + to + "' already exists");
    if (!is_feature_name(to)) throw Error(ErrorKind::semantic, "invalid feature name '" + to + "'");

    auto sub = [&](const std::string& s) { return s == from ? to : s; };
    FeatureModel r;
    r.root = sub(m.root);
    for (const auto& f : m.features) r.features.push_back(sub(f));
    for (const auto& [c, p] : m.parent) r.parent[sub(c)] = sub(p);
    for (const auto& [c, o] : m.optionality) r.optionality[sub(c)] = o;
    for (const auto& g : m.groups) {
        Group ng{sub(g.parent), {}, g.kind};
        for (const auto& x : g.members) ng.members.push_back(sub(x));
        r.groups.push_back(std::move(ng));
    }
    for (const auto& c : m.constraints) r.constraints.push_back(substitute(c, from, to));
    return r;
}

inline FlatModel rename(const FlatModel& m, const std::string& from, const std::string& to) {
    auto& names = m.alphabet;
    if (std::find(names.begin(), names.end(), from) == names.end())
        throw Error(ErrorKind::unknown_feature, "unknown feature '" + from + "'");
    if (from == to) return m;
    if (std::find(names.begin(), names.end(), to) != names.end())
        throw Error(ErrorKind::name_clash, "feature '" + to + "' already exists");
    if (!is_feature_name(to)) throw Error(ErrorKind::semantic, "invalid feature name '" + to + "'");
    FlatModel r{{}, substitute(m.formula, from, to)};
    for (const auto& a : names) r.alphabet.push_back(a == from ? to : a);
    return r;
}

inline Space rename(const Space& s, const std::string& from, const std::string& to) {
    return std::visit([&](const auto& m) { return Space{rename(m, from, to)}; }, s);
}

} // namespace fam
