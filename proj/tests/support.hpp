#pragma once

// Shared fixtures: random feature-model generation and small helpers used by
// the unit and acceptance suites.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fam/feature_model.hpp"
#include "fam/formula.hpp"

namespace fam::testing {

class ModelGenerator {
public:
    explicit ModelGenerator(std::uint64_t seed) : rng_(seed) {}

    /// Random tree with 1..max_features features, 0-2 groups of each kind
    /// and 0-3 binary cross-tree constraints.
    FeatureModel next(std::size_t max_features) {
        std::size_t n = pick(1, max_features);
        FeatureModel raw;
        for (std::size_t i = 0; i < n; ++i) raw.features.push_back("f" + std::to_string(i));
        raw.root = raw.features.front();
        std::vector<std::vector<std::size_t>> kids(n);
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t p = pick(0, i - 1);
            raw.parent[raw.features[i]] = raw.features[p];
            kids[p].push_back(i);
        }

        std::set<std::size_t> grouped;
        for (GroupKind kind : {GroupKind::xor_group, GroupKind::or_group, GroupKind::mutex_group}) {
            std::size_t groups = pick(0, 2);
            for (std::size_t g = 0; g < groups; ++g) {
                std::vector<std::size_t> parents;
                for (std::size_t p = 0; p < n; ++p) {
                    std::size_t free = 0;
                    for (auto c : kids[p]) free += grouped.count(c) ? 0 : 1;
                    if (free >= 2) parents.push_back(p);
                }
                if (parents.empty()) break;
                std::size_t p = parents[pick(0, parents.size() - 1)];
                std::vector<std::size_t> free;
                for (auto c : kids[p])
                    if (!grouped.count(c)) free.push_back(c);
                std::shuffle(free.begin(), free.end(), rng_);
                free.resize(pick(2, std::min<std::size_t>(free.size(), 4)));
                std::sort(free.begin(), free.end());
                Group grp{raw.features[p], {}, kind};
                for (auto c : free) {
                    grouped.insert(c);
                    grp.members.push_back(raw.features[c]);
                }
                raw.groups.push_back(std::move(grp));
            }
        }
        for (std::size_t i = 1; i < n; ++i)
            if (!grouped.count(i))
                raw.optionality[raw.features[i]] = pick(0, 1) ? Optionality::optional : Optionality::mandatory;

        std::size_t constraints = n >= 2 ? pick(0, 3) : 0;
        for (std::size_t k = 0; k < constraints; ++k) {
            Formula a = literal(raw.features[pick(0, n - 1)]);
            Formula b = literal(raw.features[pick(0, n - 1)]);
            switch (pick(0, 3)) {
            case 0: raw.constraints.push_back(Formula::implication(a, b)); break;
            case 1: raw.constraints.push_back(Formula::conjunction(a, b)); break;
            case 2: raw.constraints.push_back(Formula::disjunction(a, b)); break;
            default: raw.constraints.push_back(Formula::equivalence(a, b)); break;
            }
        }
        return FeatureModel::make(std::move(raw));
    }

    std::size_t pick(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    std::mt19937_64& rng() { return rng_; }

private:
    Formula literal(const std::string& name) {
        Formula v = Formula::var(name);
        return pick(0, 3) == 0 ? Formula::negation(v) : v;
    }

    std::mt19937_64 rng_;
};

inline Configuration config(std::initializer_list<const char*> names) {
    Configuration c;
    for (const char* n : names) c.selected.insert(n);
    return c;
}

/// Root with `n` optional children F1..Fn.
inline std::string optional_chain(int n) {
    std::string text = "FM (A :";
    for (int i = 1; i <= n; ++i) text += " [F" + std::to_string(i) + "]";
    return text + " ;)";
}

} // namespace fam::testing
