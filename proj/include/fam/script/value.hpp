#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fam/fm_text.hpp"
#include "fam/reasoner.hpp"
#include "fam/settings.hpp"

namespace fam::script {

struct Unit {
    bool operator==(const Unit&) const = default;
};

struct ConfigList {
    std::vector<Configuration> items;
    bool operator==(const ConfigList&) const = default;
};

/// Ordered feature names (alphabet order for features/cores/deads).
struct FeatureSet {
    std::vector<std::string> names;
    bool operator==(const FeatureSet&) const = default;
};

using ModelRef = std::shared_ptr<const Space>;

struct Value {
    std::variant<Unit, ModelRef, BigInt, bool, std::string, ConfigList, FeatureSet> data;

    Value() = default;
    Value(Unit u) : data(u) {}
    Value(Space s) : data(std::make_shared<const Space>(std::move(s))) {}
    Value(ModelRef m) : data(std::move(m)) {}
    Value(BigInt i) : data(std::move(i)) {}
    Value(int i) : data(BigInt(i)) {}
    Value(bool b) : data(b) {}
    Value(std::string s) : data(std::move(s)) {}
    Value(const char* s) : data(std::string(s)) {}
    Value(ConfigList c) : data(std::move(c)) {}
    Value(FeatureSet f) : data(std::move(f)) {}

    template <class T> bool holds() const { return std::holds_alternative<T>(data); }
    template <class T> const T& as() const { return std::get<T>(data); }
    const Space& model() const { return *std::get<ModelRef>(data); }
};

inline const char* type_name(const Value& v) {
    static const char* names[] = {"unit", "model", "int", "bool", "str", "configs", "features"};
    return names[v.data.index()];
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

inline std::string render_names(const std::vector<std::string>& names) {
    std::string out = "{";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out + "}";
}

inline std::string render_model(const Space& s, const Settings& settings) {
    std::string out = "FM model (" + std::to_string(alphabet(s).size()) + " features, " +
                      counting(s, settings).str() + " configurations)\n";
    if (const auto* fm = std::get_if<FeatureModel>(&s)) return out + render_fm(*fm);
    return out + to_string(std::get<FlatModel>(s).formula);
}

/// Deterministic printed form of a value.
inline std::string render(const Value& v, const Settings& settings = Settings::from_env()) {
    struct {
        const Settings& settings;
        std::string operator()(const Unit&) const { return "()"; }
        std::string operator()(const ModelRef& m) const { return render_model(*m, settings); }
        std::string operator()(const BigInt& i) const { return i.str(); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return quote(s); }
        std::string operator()(const ConfigList& c) const {
            std::string out;
            for (std::size_t i = 0; i < c.items.size(); ++i) {
                if (i) out += "\n";
                out += to_string(c.items[i]);
            }
            return out;
        }
        std::string operator()(const FeatureSet& f) const { return render_names(f.names); }
    } visitor{settings};
    return std::visit(visitor, v.data);
}

/// Variable scopes. The bottom frame is the top-level script; `run` pushes
/// a fresh script frame and loops push plain frames.
class Environment {
public:
    Environment() { frames_.push_back({{}, true}); }

    const Value* lookup(const std::string& name) const {
        for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
            auto found = it->vars.find(name);
            if (found != it->vars.end()) return &found->second;
            if (it->script) break;
        }
        return nullptr;
    }

    /// Updates the innermost visible binding, else binds in the script frame.
    void assign(const std::string& name, Value v) {
        for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
            auto found = it->vars.find(name);
            if (found != it->vars.end()) {
                found->second = std::move(v);
                return;
            }
            if (it->script) {
                it->vars.emplace(name, std::move(v));
                return;
            }
        }
    }

    void bind_local(const std::string& name, Value v) { frames_.back().vars[name] = std::move(v); }

    void push(bool script) { frames_.push_back({{}, script}); }
    void pop() {
        if (frames_.size() > 1) frames_.pop_back();
    }
    std::size_t depth() const { return frames_.size(); }

    /// Bindings of the top-level script, sorted by name.
    const std::map<std::string, Value>& bindings() const { return frames_.front().vars; }

private:
    struct Frame {
        std::map<std::string, Value> vars;
        bool script;
    };
    std::vector<Frame> frames_;
};

/// One line per binding: `name : tag = rendering`.
inline std::string render_environment(const Environment& env, const Settings& settings = Settings::from_env()) {
    std::string out;
    for (const auto& [name, value] : env.bindings())
        out += name + " : " + type_name(value) + " = " + render(value, settings) + "\n";
    return out;
}

} // namespace fam::script
