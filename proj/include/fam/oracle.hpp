#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fam/error.hpp"
#include "fam/feature_model.hpp"
#include "fam/formula.hpp"

namespace fam {

/// Propositional semantics of a feature model: a configuration satisfies the
/// result (selected = true, rest = false) iff it is a product of the model.
inline Formula encode(const FeatureModel& m) {
    using F = Formula;
    std::vector<F> parts{F::var(m.root)};
    for (const auto& f : m.features) {
        auto it = m.parent.find(f);
        if (it == m.parent.end()) continue;
        parts.push_back(F::implication(F::var(f), F::var(it->second)));
    }
    for (const auto& f : m.features) {
        auto it = m.optionality.find(f);
        if (it != m.optionality.end() && it->second == Optionality::mandatory)
            parts.push_back(F::implication(F::var(m.parent.at(f)), F::var(f)));
    }
    for (const auto& g : m.groups) {
        std::vector<F> any;
        std::vector<F> pairs;
        for (std::size_t i = 0; i < g.members.size(); ++i) {
            any.push_back(F::var(g.members[i]));
            for (std::size_t j = i + 1; j < g.members.size(); ++j)
                pairs.push_back(F::negation(F::conjunction(F::var(g.members[i]), F::var(g.members[j]))));
        }
        F parent = F::var(g.parent);
        switch (g.kind) {
        case GroupKind::xor_group:
            parts.push_back(F::implication(parent, F::conjunction(disjoin(any), conjoin(pairs))));
            break;
        case GroupKind::or_group:
            parts.push_back(F::implication(parent, disjoin(any)));
            break;
        case GroupKind::mutex_group:
            parts.push_back(conjoin(pairs));
            break;
        }
    }
    for (const auto& c : m.constraints) parts.push_back(c);
    return conjoin(parts);
}

inline Formula encode(const Space& s) {
    if (const auto* fm = std::get_if<FeatureModel>(&s)) return encode(*fm);
    return std::get<FlatModel>(s).formula;
}

inline constexpr std::size_t oracle_max_features = 24;

/// Brute-force enumeration over every subset of the alphabet. Used as the
/// reference against which the BDD reasoner is checked.
inline std::set<Configuration> enumerate(const Space& space, std::uint64_t limit) {
    const auto& names = alphabet(space);
    if (names.size() > oracle_max_features)
        throw Error(ErrorKind::alphabet_too_large,
                    std::to_string(names.size()) + " features exceed the enumeration cap of " +
                        std::to_string(oracle_max_features));
    Formula f = encode(space);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;

    std::set<Configuration> out;
    std::uint64_t total = std::uint64_t{1} << names.size();
    for (std::uint64_t bits = 0; bits < total; ++bits) {
        auto value_of = [&](const std::string& v) { return ((bits >> index.at(v)) & 1u) != 0; };
        if (!evaluate(f, value_of)) continue;
        Configuration c;
        for (std::size_t i = 0; i < names.size(); ++i)
            if ((bits >> i) & 1u) c.selected.insert(names[i]);
        out.insert(std::move(c));
        if (out.size() > limit) {
            // Count the rest so the error carries the exact total.
            BigInt count = out.size();
            for (++bits; bits < total; ++bits)
                if (evaluate(f, value_of)) ++count;
            throw LimitExceeded(count, limit);
        }
    }
    return out;
}

} // namespace fam
