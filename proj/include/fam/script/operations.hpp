#pragma once

// Semantics of every language operation on values. Both the interpreter and
// the fluent handles call these, so the two shapes cannot drift apart.
// Errors raised here carry no span; callers attach one.

#include <string>
#include <vector>

#include "fam/script/ast.hpp"
#include "fam/script/value.hpp"

namespace fam::script {

[[noreturn]] inline void type_error(const std::string& expected, const Value& found) {
    throw Error(ErrorKind::type, "expected " + expected + ", found " + type_name(found));
}

template <class T>
const T& expect_value(const Value& v, const char* expected) {
    if (!v.holds<T>()) type_error(expected, v);
    return v.as<T>();
}

inline const Space& expect_model(const Value& v) {
    if (!v.holds<ModelRef>()) type_error("model", v);
    return v.model();
}

/// Parses FM notation. `at` is where the text starts in an enclosing
/// source; error spans are shifted to be absolute there.
inline Value load_model(const std::string& text, Span at = {}) {
    auto shift = [&](Span s) {
        if (!at.known()) return s;
        if (!s.known()) return at;
        auto move = [&](int& line, int& col) {
            if (line == 1) col += at.column - 1;
            line += at.line - 1;
        };
        move(s.line, s.column);
        move(s.end_line, s.end_column);
        return s;
    };
    try {
        return Value(Space{parse_fm(text)});
    } catch (const ParseError& e) {
        auto diags = e.diagnostics();
        for (auto& d : diags) d.span = shift(d.span);
        throw ParseError(diags);
    } catch (const Error& e) {
        throw Error(e.kind(), e.message(), shift(e.span()));
    }
}

inline Value query(Query q, const Value& operand, const Settings& settings) {
    const Space& s = expect_model(operand);
    switch (q) {
    case Query::counting: return counting(s, settings);
    case Query::is_valid: return is_valid(s, settings);
    case Query::configs: return ConfigList{configs(s, settings.max_enum, settings)};
    case Query::cores: return FeatureSet{cores(s, settings)};
    case Query::deads: return FeatureSet{deads(s, settings)};
    case Query::features: return FeatureSet{alphabet(s)};
    }
    return Unit{};
}

inline Value merge_models(MergeMode mode, const std::vector<Value>& operands, const Settings& settings) {
    std::vector<Space> spaces;
    for (const auto& v : operands) spaces.push_back(expect_model(v));
    return Value(Space{merge(mode, spaces, settings)});
}

inline Value slice_model(const Value& operand, SliceMode mode, const std::vector<std::string>& names,
                         const Settings& settings) {
    return Value(Space{slice(expect_model(operand), mode, names, settings)});
}

inline Value rename_model(const Value& operand, const std::string& from, const std::string& to) {
    return Value(rename(expect_model(operand), from, to));
}

inline Value apply(UnaryOp, const Value& v) { return !expect_value<bool>(v, "bool"); }

inline Value apply(BinaryOp op, const Value& l, const Value& r, const Settings& settings) {
    auto text = [&](const Value& v) {
        return v.holds<std::string>() ? v.as<std::string>() : render(v, settings);
    };
    auto num = [](const Value& v, const char* what) -> const BigInt& { return expect_value<BigInt>(v, what); };
    auto flag = [](const Value& v) { return expect_value<bool>(v, "bool"); };
    switch (op) {
    case BinaryOp::add:
        if (l.holds<std::string>() || r.holds<std::string>()) return text(l) + text(r);
        return BigInt(num(l, "int or str") + num(r, "int or str"));
    case BinaryOp::sub: return BigInt(num(l, "int") - num(r, "int"));
    case BinaryOp::lt: return num(l, "int") < num(r, "int");
    case BinaryOp::le: return num(l, "int") <= num(r, "int");
    case BinaryOp::gt: return num(l, "int") > num(r, "int");
    case BinaryOp::ge: return num(l, "int") >= num(r, "int");
    case BinaryOp::conj: {
        bool x = flag(l), y = flag(r);
        return x && y;
    }
    case BinaryOp::disj: {
        bool x = flag(l), y = flag(r);
        return x || y;
    }
    case BinaryOp::eq:
    case BinaryOp::ne: {
        if (l.holds<ModelRef>()) type_error("int, bool, str, configs or features", l);
        if (l.data.index() != r.data.index()) type_error(type_name(l), r);
        bool same = l.data == r.data;
        return op == BinaryOp::eq ? same : !same;
    }
    }
    throw Error(ErrorKind::type, "unsupported operator");
}

/// Elements a foreach visits: names of a feature set, or each configuration
/// of a list as a feature set.
inline std::vector<Value> elements(const Value& domain) {
    std::vector<Value> items;
    if (domain.holds<ConfigList>()) {
        for (const auto& c : domain.as<ConfigList>().items)
            items.emplace_back(FeatureSet{{c.selected.begin(), c.selected.end()}});
    } else if (domain.holds<FeatureSet>()) {
        for (const auto& n : domain.as<FeatureSet>().names) items.emplace_back(n);
    } else {
        type_error("configs or features", domain);
    }
    return items;
}

inline bool truth(const Value& v) { return expect_value<bool>(v, "bool"); }

} // namespace fam::script
