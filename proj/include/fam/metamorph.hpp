#pragma once

// Template-driven emitters from the script AST to text shapes.
//
// A dialect file holds one `Key = template` per line; `#` starts a comment
// line. Templates use `%{child}` placeholders and the escapes \n \t \s \\.
// Keys starting with `@` are settings:
//
//   @name, @operand_style (prefix|postfix), @indent, @base_indent,
//   @preamble (%{declarations}), @postamble (%{publish}), @reserved,
//   @reserved_suffix, @param (%{n}), @unsupported
//
// Besides one template per node kind there are helper templates: Else,
// MergeOperand, Name, NameVar, RunArgs, RunArg, Paren, Declare, Publish.
// `Key.sep` sets the separator between list items.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fam/script/ast.hpp"
#include "fam/script/interpreter.hpp"
#include "fam/script/parser.hpp"
#include "fam/script/value.hpp"

#ifndef FAM_DIALECT_DIR
#define FAM_DIALECT_DIR "dialects"
#endif

namespace fam::metamorph {

enum class OperandStyle { prefix, postfix };

namespace detail {

// Children of each node kind; inner lists are alternative spellings.
inline const std::map<std::string, std::vector<std::vector<std::string>>>& node_children() {
    static const std::map<std::string, std::vector<std::vector<std::string>>> table{
        {"Assign", {{"name"}, {"value"}}},
        {"ExprStmt", {{"expr"}}},
        {"Foreach", {{"var"}, {"domain"}, {"body"}}},
        {"If", {{"cond"}, {"then"}, {"else"}}},
        {"FmLiteral", {{"text", "quoted"}}},
        {"Var", {{"name"}}},
        {"Counting", {{"operand"}}},
        {"IsValid", {{"operand"}}},
        {"Configs", {{"operand"}}},
        {"Cores", {{"operand"}}},
        {"Deads", {{"operand"}}},
        {"Features", {{"operand"}}},
        {"Merge", {{"mode"}, {"operands"}}},
        {"Slice", {{"operand"}, {"mode"}, {"names"}}},
        {"Rename", {{"operand"}, {"from"}, {"to"}}},
        {"Run", {{"path"}, {"args"}}},
        {"IntLit", {{"value"}}},
        {"StrLit", {{"value"}}},
        {"BoolLit", {{"value"}}},
        {"Binary", {{"lhs"}, {"op"}, {"rhs"}}},
        {"Unary", {{"op"}, {"operand"}}},
    };
    return table;
}

inline const std::map<std::string, std::set<std::string>>& helper_placeholders() {
    static const std::map<std::string, std::set<std::string>> table{
        {"Else", {"body"}},        {"MergeOperand", {"operand"}}, {"Name", {"name"}},
        {"NameVar", {"var", "name"}}, {"RunArgs", {"items"}},     {"RunArg", {"arg"}},
        {"Paren", {"expr"}},       {"Declare", {"names"}},        {"Publish", {"name", "var"}},
    };
    return table;
}

inline std::set<std::string> placeholders(std::string_view tmpl) {
    std::set<std::string> out;
    for (std::size_t i = 0; i + 1 < tmpl.size(); ++i) {
        if (tmpl[i] == '%' && tmpl[i + 1] == '{') {
            auto close = tmpl.find('}', i + 2);
            if (close == std::string_view::npos) break;
            out.insert(std::string(tmpl.substr(i + 2, close - i - 2)));
            i = close;
        }
    }
    return out;
}

inline std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '%' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            auto close = tmpl.find('}', i + 2);
            if (close != std::string_view::npos) {
                std::string key(tmpl.substr(i + 2, close - i - 2));
                auto it = values.find(key);
                if (it == values.end())
                    throw Error(ErrorKind::missing_template, "no value for placeholder '" + key + "'");
                out += it->second;
                i = close;
                continue;
            }
        }
        out += tmpl[i];
    }
    return out;
}

inline std::string unescape(std::string_view raw, int line) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '\\' || i + 1 == raw.size()) {
            out += raw[i];
            continue;
        }
        switch (raw[++i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 's': out += ' '; break;
        case '\\': out += '\\'; break;
        default:
            throw Error(ErrorKind::semantic, std::string("unknown escape '\\") + raw[i] + "'", Span{line, 1, line, 1});
        }
    }
    return out;
}

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

} // namespace detail

/// A target shape: templates plus layout settings.
struct Dialect {
    std::string name;
    OperandStyle operand_style = OperandStyle::prefix;
    std::string indent = "    ";
    int base_indent = 0;
    std::string preamble;
    std::string postamble;
    std::set<std::string> reserved;
    std::string reserved_suffix = "_";
    std::string param = "%%{n}";
    std::set<std::string> unsupported;
    std::map<std::string, std::string> templates;

    bool has(const std::string& key) const { return templates.count(key) != 0; }

    std::string separator(const std::string& key) const {
        auto it = templates.find(key + ".sep");
        return it == templates.end() ? " " : it->second;
    }

    /// Parses dialect text and checks every template's placeholders.
    static Dialect parse(std::string_view text) {
        Dialect d;
        std::istringstream in{std::string(text)};
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorKind::semantic, "expected 'key = template'", Span{number, 1, number, 1});
            std::string key = line.substr(first, eq - first);
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            std::string raw = line.substr(eq + 1);
            if (!raw.empty() && raw.front() == ' ') raw.erase(0, 1);
            std::string value = detail::unescape(raw, number);
            Span at{number, 1, number, static_cast<int>(line.size()) + 1};

            if (key == "@name") d.name = value;
            else if (key == "@operand_style") {
                if (value == "prefix") d.operand_style = OperandStyle::prefix;
                else if (value == "postfix") d.operand_style = OperandStyle::postfix;
                else throw Error(ErrorKind::semantic, "operand_style must be prefix or postfix", at);
            } else if (key == "@indent") d.indent = value;
            else if (key == "@base_indent") d.base_indent = std::atoi(value.c_str());
            else if (key == "@preamble") d.preamble = value;
            else if (key == "@postamble") d.postamble = value;
            else if (key == "@reserved") {
                for (auto& w : detail::words(value)) d.reserved.insert(w);
            } else if (key == "@reserved_suffix") d.reserved_suffix = value;
            else if (key == "@param") d.param = value;
            else if (key == "@unsupported") {
                for (auto& w : detail::words(value)) d.unsupported.insert(w);
            } else if (!key.empty() && key[0] == '@') {
                throw Error(ErrorKind::semantic, "unknown setting '" + key + "'", at);
            } else {
                check(key, value, at);
                d.templates[key] = value;
            }
        }
        return d;
    }

    static Dialect load(const std::filesystem::path& path) {
        try {
            return parse(script::read_file(path));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::io) throw;
            throw Error(e.kind(), path.filename().string() + ": " + e.what());
        }
    }

    /// A shipped dialect by name. FAM_DIALECT_DIR in the environment
    /// overrides the directory chosen at build time.
    static Dialect builtin(const std::string& name) {
        const char* env = std::getenv("FAM_DIALECT_DIR");
        std::filesystem::path dir = env && *env ? env : FAM_DIALECT_DIR;
        return load(dir / (name + ".dialect"));
    }

private:
    static void check(const std::string& key, const std::string& value, Span at) {
        auto found = detail::placeholders(value);
        found.erase("indent");
        std::string base = key;
        if (auto dot = key.find('.'); dot != std::string::npos) {
            if (key.substr(dot) != ".sep") throw Error(ErrorKind::semantic, "unknown key '" + key + "'", at);
            base = key.substr(0, dot);
            if (!found.empty()) throw Error(ErrorKind::semantic, "separator '" + key + "' takes no placeholders", at);
        }
        const auto& nodes = detail::node_children();
        const auto& helpers = detail::helper_placeholders();
        if (auto n = nodes.find(base); n != nodes.end()) {
            if (base != key) return;
            std::set<std::string> remaining = found;
            for (const auto& alternatives : n->second) {
                bool present = false;
                for (const auto& a : alternatives) present |= remaining.erase(a) > 0;
                if (!present)
                    throw Error(ErrorKind::semantic,
                                "template '" + key + "' lacks placeholder %{" + alternatives.front() + "}", at);
            }
            if (!remaining.empty())
                throw Error(ErrorKind::semantic,
                            "template '" + key + "' has unknown placeholder %{" + *remaining.begin() + "}", at);
            return;
        }
        if (auto h = helpers.find(base); h != helpers.end()) {
            for (const auto& p : found)
                if (!h->second.count(p))
                    throw Error(ErrorKind::semantic, "template '" + key + "' has unknown placeholder %{" + p + "}", at);
            return;
        }
        throw Error(ErrorKind::semantic, "unknown template '" + key + "'", at);
    }
};

class Emitter {
public:
    explicit Emitter(const Dialect& d) : d_(d) {}

    std::string script(const script::Script& s) {
        declared_.clear();
        collect(s.statements, {});
        std::string body = block(s.statements, d_.base_indent, {});

        std::vector<std::string> names;
        for (const auto& n : declared_) names.push_back(mangle(n));
        std::string declarations;
        if (!names.empty() && d_.has("Declare"))
            declarations = fill("Declare", {{"names", join(names, d_.separator("Declare"))}}, 1);
        std::string publish;
        if (d_.has("Publish"))
            for (const auto& n : declared_)
                if (n[0] != '%') publish += fill("Publish", {{"name", script::quote(n)}, {"var", mangle(n)}}, 1);

        std::string out = detail::fill(d_.preamble, {{"declarations", declarations}, {"indent", indent(1)}});
        out += body;
        out += detail::fill(d_.postamble, {{"publish", publish}, {"indent", indent(1)}});
        return out;
    }

    std::string expression(const script::Expr& e) { return expr(e, 0); }

private:
    using Scope = std::set<std::string>;

    std::string indent(int depth) const {
        std::string out;
        for (int i = 0; i < depth; ++i) out += d_.indent;
        return out;
    }

    static std::string join(const std::vector<std::string>& items, const std::string& sep) {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += sep;
            out += items[i];
        }
        return out;
    }

    const std::string& tmpl(const std::string& kind) const {
        if (d_.unsupported.count(kind))
            throw Error(ErrorKind::unsupported_node, "dialect '" + d_.name + "' does not support " + kind);
        auto it = d_.templates.find(kind);
        if (it == d_.templates.end())
            throw Error(ErrorKind::missing_template, "dialect '" + d_.name + "' has no template for " + kind);
        return it->second;
    }

    std::string fill(const std::string& kind, std::map<std::string, std::string> values, int depth) const {
        values.emplace("indent", indent(depth));
        return detail::fill(tmpl(kind), values);
    }

    std::string mangle(const std::string& name) const {
        if (!name.empty() && name[0] == '%') return detail::fill(d_.param, {{"n", name.substr(1)}});
        if (d_.reserved.count(name)) return name + d_.reserved_suffix;
        return name;
    }

    // Script-level variables: everything assigned or read outside the loop
    // that binds it.
    void collect(const script::Block& b, const Scope& loops) {
        for (const auto& s : b) {
            if (const auto* a = std::get_if<script::Assign>(&s.node)) {
                if (!loops.count(a->name)) declared_.insert(a->name);
                collect(*a->value, loops);
            } else if (const auto* e = std::get_if<script::ExprStmt>(&s.node)) {
                collect(*e->expr, loops);
            } else if (const auto* f = std::get_if<script::Foreach>(&s.node)) {
                collect(*f->domain, loops);
                Scope inner = loops;
                inner.insert(f->var);
                collect(f->body, inner);
            } else if (const auto* i = std::get_if<script::If>(&s.node)) {
                collect(*i->cond, loops);
                collect(i->then_block, loops);
                if (i->else_block) collect(*i->else_block, loops);
            }
        }
    }

    void collect(const script::Expr& e, const Scope& loops) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, script::Var>) {
                    if (!loops.count(n.name)) declared_.insert(n.name);
                } else if constexpr (std::is_same_v<T, script::QueryExpr> || std::is_same_v<T, script::Unary> ||
                                     std::is_same_v<T, script::Slice> || std::is_same_v<T, script::Rename>) {
                    collect(*n.operand, loops);
                } else if constexpr (std::is_same_v<T, script::Merge>) {
                    for (const auto& o : n.operands) collect(*o, loops);
                } else if constexpr (std::is_same_v<T, script::Run>) {
                    for (const auto& a : n.args) collect(*a, loops);
                } else if constexpr (std::is_same_v<T, script::Binary>) {
                    collect(*n.lhs, loops);
                    collect(*n.rhs, loops);
                }
            },
            e.node);
    }

    std::string block(const script::Block& b, int depth, const Scope& loops) {
        std::string out;
        for (const auto& s : b) out += indent(depth) + statement(s, depth, loops) + "\n";
        return out;
    }

    bool postfix() const { return d_.operand_style == OperandStyle::postfix; }

    std::string statement(const script::Stmt& s, int depth, const Scope& loops) {
        using namespace script;
        std::string kind = node_kind(s);
        if (d_.unsupported.count(kind)) tmpl(kind);
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            loops_ = loops;
            return fill(kind, {{"name", mangle(a->name)}, {"value", expr(*a->value, 0)}}, depth);
        }
        if (const auto* e = std::get_if<ExprStmt>(&s.node)) {
            loops_ = loops;
            return fill(kind, {{"expr", expr(*e->expr, 0)}}, depth);
        }
        if (const auto* f = std::get_if<Foreach>(&s.node)) {
            loops_ = loops;
            std::string domain = expr(*f->domain, postfix() ? 6 : 0);
            Scope inner = loops;
            inner.insert(f->var);
            return fill(kind, {{"var", mangle(f->var)}, {"domain", domain}, {"body", block(f->body, depth + 1, inner)}},
                        depth);
        }
        const auto& i = std::get<If>(s.node);
        loops_ = loops;
        std::string cond = expr(*i.cond, postfix() ? 6 : 0);
        std::string else_text;
        if (i.else_block) else_text = fill("Else", {{"body", block(*i.else_block, depth + 1, loops)}}, depth);
        return fill(kind, {{"cond", cond}, {"then", block(i.then_block, depth + 1, loops)}, {"else", else_text}},
                    depth);
    }

    // Binding strength of the emitted form: 1-4 binary operators, 5 prefix
    // forms, 6 atoms and method calls.
    int level(const script::Expr& e) const {
        if (const auto* b = std::get_if<script::Binary>(&e.node)) return script::precedence(b->op);
        if (std::holds_alternative<script::Unary>(e.node)) return 5;
        if (std::holds_alternative<script::QueryExpr>(e.node) || std::holds_alternative<script::Merge>(e.node) ||
            std::holds_alternative<script::Slice>(e.node) || std::holds_alternative<script::Rename>(e.node) ||
            std::holds_alternative<script::Run>(e.node))
            return postfix() ? 6 : 5;
        return 6;
    }

    // In prefix form a trailing `run ... with args` would swallow whatever
    // operand follows it.
    static bool greedy(const script::Expr& e) {
        if (const auto* r = std::get_if<script::Run>(&e.node)) return !r->args.empty();
        if (const auto* q = std::get_if<script::QueryExpr>(&e.node)) return greedy(*q->operand);
        if (const auto* u = std::get_if<script::Unary>(&e.node)) return greedy(*u->operand);
        if (const auto* b = std::get_if<script::Binary>(&e.node)) return greedy(*b->rhs);
        return false;
    }

    std::string operand(const script::Expr& e, int min_level, bool followed = false) {
        std::string text = expr(e, 0);
        bool wrap = level(e) < min_level || (followed && !postfix() && greedy(e));
        return wrap ? fill("Paren", {{"expr", text}}, 0) : text;
    }

    std::string expr(const script::Expr& e, int min_level) {
        if (min_level > 0) return operand(e, min_level);
        return std::visit([&](const auto& n) { return node(n, e); }, e.node);
    }

    std::string feature_name(const std::string& id) {
        if (declared_.count(id) || loops_.count(id))
            return fill("NameVar", {{"var", mangle(id)}, {"name", id}}, 0);
        return fill("Name", {{"name", id}}, 0);
    }

    int receiver() const { return postfix() ? 6 : 5; }

    std::string node(const script::FmLiteral& n, const script::Expr& e) {
        return fill(node_kind(e), {{"text", n.text}, {"quoted", script::quote(n.text)}}, 0);
    }
    std::string node(const script::Var& n, const script::Expr& e) {
        return fill(node_kind(e), {{"name", mangle(n.name)}}, 0);
    }
    std::string node(const script::QueryExpr& n, const script::Expr& e) {
        return fill(node_kind(e), {{"operand", operand(*n.operand, receiver())}}, 0);
    }
    std::string node(const script::Merge& n, const script::Expr& e) {
        std::vector<std::string> items;
        for (const auto& o : n.operands) items.push_back(fill("MergeOperand", {{"operand", operand(*o, 0, true)}}, 0));
        return fill(node_kind(e), {{"mode", to_string(n.mode)}, {"operands", join(items, d_.separator("MergeOperand"))}},
                    0);
    }
    std::string node(const script::Slice& n, const script::Expr& e) {
        std::vector<std::string> names;
        for (const auto& id : n.names) names.push_back(feature_name(id));
        return fill(node_kind(e),
                    {{"operand", operand(*n.operand, receiver())},
                     {"mode", to_string(n.mode)},
                     {"names", join(names, d_.separator("Name"))}},
                    0);
    }
    std::string node(const script::Rename& n, const script::Expr& e) {
        return fill(node_kind(e),
                    {{"operand", operand(*n.operand, receiver(), true)},
                     {"from", feature_name(n.from)},
                     {"to", feature_name(n.to)}},
                    0);
    }
    std::string node(const script::Run& n, const script::Expr& e) {
        std::string args;
        if (!n.args.empty()) {
            std::vector<std::string> items;
            for (const auto& a : n.args)
                items.push_back(fill("RunArg", {{"arg", operand(*a, postfix() ? 0 : 5, true)}}, 0));
            args = fill("RunArgs", {{"items", join(items, d_.separator("RunArg"))}}, 0);
        }
        return fill(node_kind(e), {{"path", script::quote(n.path)}, {"args", args}}, 0);
    }
    std::string node(const script::IntLit& n, const script::Expr& e) {
        if (n.value < 0) throw Error(ErrorKind::unsupported_node, "negative integer literals have no source form");
        return fill(node_kind(e), {{"value", n.value.str()}}, 0);
    }
    std::string node(const script::StrLit& n, const script::Expr& e) {
        return fill(node_kind(e), {{"value", script::quote(n.value)}}, 0);
    }
    std::string node(const script::BoolLit& n, const script::Expr& e) {
        return fill(node_kind(e), {{"value", n.value ? "true" : "false"}}, 0);
    }
    std::string node(const script::Binary& n, const script::Expr& e) {
        int p = script::precedence(n.op);
        bool comparison = p == 3;  // comparisons do not chain
        return fill(node_kind(e),
                    {{"lhs", operand(*n.lhs, comparison ? p + 1 : p)},
                     {"op", script::spelling(n.op)},
                     {"rhs", operand(*n.rhs, p + 1)}},
                    0);
    }
    std::string node(const script::Unary& n, const script::Expr& e) {
        return fill(node_kind(e), {{"op", "!"}, {"operand", operand(*n.operand, 5)}}, 0);
    }

    const Dialect& d_;
    std::set<std::string> declared_;
    Scope loops_;
};

/// Renders a script in the given dialect.
inline std::string emit(const script::Script& s, const Dialect& d) { return Emitter(d).script(s); }

/// Re-shapes external script text. `from` must be "external": it is the
/// only shape with a parser; other shapes come back through record mode.
inline std::string morph(std::string_view text, const std::string& from, const std::string& to) {
    if (from != "external")
        throw Error(ErrorKind::unsupported_node, "cannot read the '" + from + "' shape; only 'external' has a parser");
    script::Script ast = script::parse_script(text);
    return emit(ast, Dialect::builtin(to));
}

} // namespace fam::metamorph
