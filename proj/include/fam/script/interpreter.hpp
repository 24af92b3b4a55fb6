#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fam/script/ast.hpp"
#include "fam/script/operations.hpp"
#include "fam/script/parser.hpp"
#include "fam/script/value.hpp"

namespace fam::script {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Tree-walking evaluator over one environment.
class Interpreter {
public:
    explicit Interpreter(Settings settings = Settings::from_env(),
                         std::filesystem::path base = std::filesystem::current_path())
        : settings_(settings) {
        bases_.push_back(std::move(base));
    }

    Environment& environment() { return env_; }
    const Environment& environment() const { return env_; }
    const Settings& settings() const { return settings_; }

    /// Runs every statement; the result is the value of the last one.
    Value execute(const Script& s) { return execute(s.statements); }

    Value execute(const Block& block) {
        Value last;
        for (const auto& stmt : block) last = execute(stmt);
        return last;
    }

    Value execute(const Stmt& stmt) {
        return std::visit([&](const auto& node) { return exec(node, stmt.span); }, stmt.node);
    }

    Value evaluate(const ExprRef& e) { return evaluate(*e); }

    Value evaluate(const Expr& e) {
        try {
            return std::visit([&](const auto& node) { return eval(node, e.span); }, e.node);
        } catch (const Error& err) {
            err.rethrow_at(e.span);
            throw;
        }
    }

    /// Parses and runs script text in the current environment.
    Value run_text(std::string_view text) { return execute(parse_script(text)); }

    /// Runs the script at `path` (relative to the calling script) in a
    /// fresh script scope with %1..%n bound to `args`.
    Value call(const std::string& path, const std::vector<Value>& args, Span span = {}) {
        std::filesystem::path file = path;
        if (file.is_relative()) file = bases_.back() / file;
        if (bases_.size() > 64) throw Error(ErrorKind::io, "scripts nested too deeply at '" + path + "'", span);

        Script script;
        try {
            script = parse_script(read_file(file));
        } catch (const Error& e) {
            throw Error(e.kind(), "in '" + path + "': " + e.what(), span);
        }
        Scope scope(env_, true);
        for (std::size_t i = 0; i < args.size(); ++i) env_.bind_local("%" + std::to_string(i + 1), args[i]);
        bases_.push_back(file.parent_path());
        try {
            Value result = execute(script);
            bases_.pop_back();
            return result;
        } catch (const Error& e) {
            bases_.pop_back();
            throw Error(e.kind(), "in '" + path + "': " + e.what(), span);
        }
    }

    /// Resolves a feature-name identifier of rename/slice: an identifier
    /// bound to a string (say a foreach variable over `features`) stands
    /// for that string, any other identifier for itself.
    std::string feature_name(const std::string& id) const {
        const Value* v = env_.lookup(id);
        if (v && v->holds<std::string>()) return v->as<std::string>();
        return id;
    }

private:
    struct Scope {
        Scope(Environment& env, bool script) : env(env) { env.push(script); }
        ~Scope() { env.pop(); }
        Environment& env;
    };

    // -- statements --

    Value exec(const Assign& a, Span) {
        Value v = evaluate(a.value);
        env_.assign(a.name, v);
        return v;
    }

    Value exec(const ExprStmt& s, Span) { return evaluate(s.expr); }

    Value exec(const Foreach& f, Span) {
        std::vector<Value> items;
        Value domain = evaluate(f.domain);
        try {
            items = elements(domain);
        } catch (const Error& e) {
            e.rethrow_at(f.domain->span);
        }
        Scope scope(env_, false);
        for (auto& item : items) {
            env_.bind_local(f.var, std::move(item));
            execute(f.body);
        }
        return Unit{};
    }

    Value exec(const If& s, Span) {
        bool taken = false;
        Value cond = evaluate(s.cond);
        try {
            taken = truth(cond);
        } catch (const Error& e) {
            e.rethrow_at(s.cond->span);
        }
        if (taken) {
            Scope scope(env_, false);
            execute(s.then_block);
        } else if (s.else_block) {
            Scope scope(env_, false);
            execute(*s.else_block);
        }
        return Unit{};
    }

    // -- expressions --

    Value eval(const FmLiteral& lit, Span span) { return load_model(lit.text, span); }

    Value eval(const Var& v, Span span) {
        const Value* found = env_.lookup(v.name);
        if (!found) throw Error(ErrorKind::unbound_variable, "'" + v.name + "' is not defined", span);
        return *found;
    }

    Value eval(const QueryExpr& q, Span) { return query(q.op, evaluate(q.operand), settings_); }

    Value eval(const Merge& m, Span) {
        std::vector<Value> operands;
        for (const auto& operand : m.operands) operands.push_back(evaluate(operand));
        return merge_models(m.mode, operands, settings_);
    }

    Value eval(const Slice& s, Span) {
        Value operand = evaluate(s.operand);
        std::vector<std::string> names;
        for (const auto& n : s.names) names.push_back(feature_name(n));
        return slice_model(operand, s.mode, names, settings_);
    }

    Value eval(const Rename& r, Span) {
        return rename_model(evaluate(r.operand), feature_name(r.from), feature_name(r.to));
    }

    Value eval(const Run& r, Span span) {
        std::vector<Value> args;
        for (const auto& a : r.args) args.push_back(evaluate(a));
        return call(r.path, args, span);
    }

    Value eval(const IntLit& i, Span) { return i.value; }
    Value eval(const StrLit& s, Span) { return s.value; }
    Value eval(const BoolLit& b, Span) { return b.value; }
    Value eval(const Unary& u, Span) { return apply(u.op, evaluate(u.operand)); }

    Value eval(const Binary& b, Span) {
        Value l = evaluate(b.lhs);
        Value r = evaluate(b.rhs);
        return apply(b.op, l, r, settings_);
    }

    Settings settings_;
    Environment env_;
    std::vector<std::filesystem::path> bases_;
};

/// Runs a script file in a fresh environment and returns that environment.
inline Environment run_file(const std::filesystem::path& path, const Settings& settings = Settings::from_env()) {
    Script script = parse_script(read_file(path));
    std::filesystem::path base = path.has_parent_path() ? path.parent_path() : std::filesystem::current_path();
    Interpreter interp(settings, base);
    interp.execute(script);
    return interp.environment();
}

} // namespace fam::script
