#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fam/error.hpp"
#include "fam/feature_model.hpp"
#include "fam/fm_text.hpp"

namespace fam {

// Interchange document layout:
//   { "root": "A",
//     "features": ["A", "B", ...],                       // tree pre-order
//     "edges": [{"child", "parent", "optionality"}],      // children outside groups
//     "groups": [{"parent", "kind", "members": [...]}],
//     "constraints": ["C -> B", ...] }                    // canonical formula text

inline nlohmann::json to_interchange(const FeatureModel& m) {
    nlohmann::json doc;
    doc["root"] = m.root;
    doc["features"] = m.features;
    doc["edges"] = nlohmann::json::array();
    for (const auto& f : m.features) {
        auto it = m.optionality.find(f);
        if (it == m.optionality.end()) continue;
        doc["edges"].push_back({{"child", f}, {"parent", m.parent.at(f)}, {"optionality", to_string(it->second)}});
    }
    doc["groups"] = nlohmann::json::array();
    for (const auto& g : m.groups)
        doc["groups"].push_back({{"parent", g.parent}, {"kind", to_string(g.kind)}, {"members", g.members}});
    doc["constraints"] = nlohmann::json::array();
    for (const auto& c : m.constraints) doc["constraints"].push_back(to_string(c));
    return doc;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& msg) { throw Error(ErrorKind::schema, msg); }

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key, nlohmann::json::value_t type) {
    if (!obj.is_object()) schema_error("expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(std::string("missing \"") + key + "\"");
    if (it->type() != type) schema_error(std::string("\"") + key + "\" has the wrong type");
    return *it;
}

inline std::string text_field(const nlohmann::json& obj, const char* key) {
    return field(obj, key, nlohmann::json::value_t::string).get<std::string>();
}

} // namespace detail

inline FeatureModel from_interchange(const nlohmann::json& doc) {
    using detail::field;
    using detail::schema_error;
    using detail::text_field;
    using VT = nlohmann::json::value_t;

    FeatureModel raw;
    raw.root = text_field(doc, "root");
    for (const auto& f : field(doc, "features", VT::array)) {
        if (!f.is_string()) schema_error("\"features\" must hold strings");
        raw.features.push_back(f.get<std::string>());
    }
    for (const auto& e : field(doc, "edges", VT::array)) {
        std::string child = text_field(e, "child");
        std::string opt = text_field(e, "optionality");
        raw.parent[child] = text_field(e, "parent");
        if (opt == "mandatory") raw.optionality[child] = Optionality::mandatory;
        else if (opt == "optional") raw.optionality[child] = Optionality::optional;
        else schema_error("unknown optionality \"" + opt + "\"");
    }
    for (const auto& g : field(doc, "groups", VT::array)) {
        Group group;
        group.parent = text_field(g, "parent");
        std::string kind = text_field(g, "kind");
        if (kind == "xor") group.kind = GroupKind::xor_group;
        else if (kind == "or") group.kind = GroupKind::or_group;
        else if (kind == "mutex") group.kind = GroupKind::mutex_group;
        else schema_error("unknown group kind \"" + kind + "\"");
        for (const auto& m : field(g, "members", VT::array)) {
            if (!m.is_string()) schema_error("group members must be strings");
            group.members.push_back(m.get<std::string>());
            raw.parent[m.get<std::string>()] = group.parent;
        }
        raw.groups.push_back(std::move(group));
    }
    for (const auto& c : field(doc, "constraints", VT::array)) {
        if (!c.is_string()) schema_error("constraints must be formula strings");
        try {
            raw.constraints.push_back(parse_formula(c.get<std::string>()));
        } catch (const Error& e) {
            schema_error("bad constraint \"" + c.get<std::string>() + "\": " + e.message());
        }
    }
    try {
        return FeatureModel::make(std::move(raw));
    } catch (const Error& e) {
        schema_error(e.message());
    }
}

inline FeatureModel parse_interchange(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        detail::schema_error(e.what());
    }
    return from_interchange(doc);
}

} // namespace fam
