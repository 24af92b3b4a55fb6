#pragma once

#include <cstdlib>
#include <cstddef>
#include <string>

namespace fam {

/// Resource limits shared by the reasoner and everything above it.
struct Settings {
    std::size_t max_bdd_nodes = std::size_t{1} << 22;
    std::size_t max_enum = 4096;

    /// Defaults overridden by FAM_MAX_BDD_NODES / FAM_MAX_ENUM when set.
    static Settings from_env() {
        Settings s;
        read_env("FAM_MAX_BDD_NODES", s.max_bdd_nodes);
        read_env("FAM_MAX_ENUM", s.max_enum);
        return s;
    }

private:
    static void read_env(const char* name, std::size_t& target) {
        const char* raw = std::getenv(name);
        if (!raw || !*raw) return;
        char* end = nullptr;
        unsigned long long v = std::strtoull(raw, &end, 10);
        if (end && *end == '\0' && v > 0) target = static_cast<std::size_t>(v);
    }
};

} // namespace fam
