#pragma once

// Embedded shape of the language: chainable handles over the same operations
// the script interpreter offers, one fluent call per script construct.
//
//   fam::fluent::Context ctx;
//   auto fm1 = ctx.load("FM (A : B [C] ;)");
//   auto n1 = fm1.counting();                       // 2
//   auto both = ctx.merge(fam::MergeMode::sinter).with(fm1).with(fm2).get();
//
// In record mode nothing is computed; every call appends `vN = <expr>` to a
// script that extract_script() hands back.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fam/script/interpreter.hpp"
#include "fam/script/operations.hpp"

namespace fam::fluent {

using script::Value;

enum class Mode { execute, record };

class Handle;
class SliceBuilder;
class Context;

namespace detail {

struct State {
    State(Mode mode, Settings settings, std::filesystem::path base)
        : mode(mode), settings(settings), interp(settings, base), base(std::move(base)) {}

    Mode mode;
    Settings settings;
    script::Interpreter interp;  // runs `run` targets in execute mode
    std::filesystem::path base;
    std::size_t counter = 0;
    script::Script recorded;
    script::Environment published_env;
    std::vector<std::string> published;
};

// Whether a recorded expression may evaluate to a string.
inline bool may_be_string(const script::ExprNode& node) {
    if (std::holds_alternative<script::StrLit>(node) || std::holds_alternative<script::Var>(node) ||
        std::holds_alternative<script::Run>(node))
        return true;
    if (const auto* b = std::get_if<script::Binary>(&node)) return b->op == script::BinaryOp::add;
    return false;
}

} // namespace detail

/// Result of a fluent call: a value (execute mode) plus the expression that
/// produced it. Handles are immutable; every call returns a new one.
class Handle {
public:
    Handle() = default;

    Handle counting() const { return query(script::Query::counting); }
    Handle isValid() const { return query(script::Query::is_valid); }
    Handle cores() const { return query(script::Query::cores); }
    Handle deads() const { return query(script::Query::deads); }
    Handle features() const { return query(script::Query::features); }

    /// All configurations, capped by the context's max_enum setting.
    Handle configs() const { return query(script::Query::configs); }

    /// Configurations with an explicit cap. Scripts have no such form, so
    /// this is only available in execute mode.
    Handle configs(std::size_t limit) const;

    Handle rename(const std::string& from, const std::string& to) const;

    /// `m.slice().including({...})` / `.excluding({...})`.
    SliceBuilder slice() const;

    /// Host-side truth of a bool handle (execute mode).
    bool truth() const;

    /// Loop domain: one handle per feature name or per configuration.
    std::vector<Handle> each() const;

    const Value& value() const;
    std::string render() const { return script::render(value(), state_->settings); }

    const script::ExprRef& provenance() const { return expr_; }
    const std::string& name() const { return name_; }
    bool empty() const { return state_ == nullptr; }

    friend Handle operator+(const Handle& a, const Handle& b) { return binary(script::BinaryOp::add, a, b); }
    friend Handle operator-(const Handle& a, const Handle& b) { return binary(script::BinaryOp::sub, a, b); }
    friend Handle operator==(const Handle& a, const Handle& b) { return binary(script::BinaryOp::eq, a, b); }
    friend Handle operator!=(const Handle& a, const Handle& b) { return binary(script::BinaryOp::ne, a, b); }
    friend Handle operator<(const Handle& a, const Handle& b) { return binary(script::BinaryOp::lt, a, b); }
    friend Handle operator<=(const Handle& a, const Handle& b) { return binary(script::BinaryOp::le, a, b); }
    friend Handle operator>(const Handle& a, const Handle& b) { return binary(script::BinaryOp::gt, a, b); }
    friend Handle operator>=(const Handle& a, const Handle& b) { return binary(script::BinaryOp::ge, a, b); }
    // Both operands are always evaluated, as in scripts.
    friend Handle operator&&(const Handle& a, const Handle& b) { return binary(script::BinaryOp::conj, a, b); }
    friend Handle operator||(const Handle& a, const Handle& b) { return binary(script::BinaryOp::disj, a, b); }
    friend Handle operator!(const Handle& a);

    friend std::string name(const Handle& h, const std::string& literal);

private:
    friend class Context;
    friend class SliceBuilder;

    using StatePtr = std::shared_ptr<detail::State>;

    Handle(StatePtr state, std::optional<Value> value, script::ExprRef expr, std::string name, bool maybe_str)
        : state_(std::move(state)), value_(std::move(value)), expr_(std::move(expr)), name_(std::move(name)),
          maybe_str_(maybe_str) {}

    void require() const {
        if (!state_) throw Error(ErrorKind::unbound_variable, "handle holds no value");
    }

    void same_context(const Handle& other) const {
        other.require();
        if (other.state_ != state_) throw Error(ErrorKind::mixed_context, "handles belong to different contexts");
    }

    bool recording() const { return state_->mode == Mode::record; }

    template <class Compute>
    static Handle emit(const StatePtr& state, script::ExprNode node, Compute compute);

    Handle query(script::Query q) const {
        require();
        Handle self = *this;
        return emit(state_, script::QueryExpr{q, expr_},
                    [self, q] { return script::query(q, self.value(), self.state_->settings); });
    }

    static Handle binary(script::BinaryOp op, const Handle& a, const Handle& b) {
        a.require();
        a.same_context(b);
        return emit(a.state_, script::Binary{op, a.expr_, b.expr_},
                    [a, b, op] { return script::apply(op, a.value(), b.value(), a.state_->settings); });
    }

    StatePtr state_;
    std::optional<Value> value_;
    script::ExprRef expr_;
    std::string name_;
    bool maybe_str_ = false;
};

class SliceBuilder {
public:
    Handle including(const std::vector<std::string>& names) const { return make(SliceMode::including, names); }
    Handle excluding(const std::vector<std::string>& names) const { return make(SliceMode::excluding, names); }

private:
    friend class Handle;
    explicit SliceBuilder(Handle h) : operand_(std::move(h)) {}
    Handle make(SliceMode mode, const std::vector<std::string>& names) const;
    Handle operand_;
};

inline SliceBuilder Handle::slice() const {
    require();
    return SliceBuilder(*this);
}

/// Aliases naming what a handle is expected to hold.
using Any = Handle;
using FluentModel = Handle;
using FluentCount = Handle;
using FluentBool = Handle;

template <class Compute>
Handle Handle::emit(const StatePtr& state, script::ExprNode node, Compute compute) {
    std::string name = "v" + std::to_string(++state->counter);
    bool maybe_str = detail::may_be_string(node);
    if (state->mode == Mode::record) {
        state->recorded.statements.push_back(
            script::Stmt{script::Assign{name, script::make_expr(std::move(node))}, {}});
        return Handle(state, std::nullopt, script::make_expr(script::Var{name}), name, maybe_str);
    }
    Value v = compute();
    return Handle(state, std::move(v), script::make_expr(std::move(node)), name, maybe_str);
}

inline Handle operator!(const Handle& a) {
    a.require();
    return Handle::emit(a.state_, script::Unary{script::UnaryOp::negation, a.expr_},
                        [a] { return script::apply(script::UnaryOp::negation, a.value()); });
}

inline const Value& Handle::value() const {
    require();
    if (recording()) throw Error(ErrorKind::wrong_mode, "values are not computed in record mode");
    return *value_;
}

inline Handle Handle::configs(std::size_t limit) const {
    require();
    if (recording()) throw Error(ErrorKind::wrong_mode, "configs with an explicit limit cannot be recorded");
    Settings capped = state_->settings;
    capped.max_enum = limit;
    Handle self = *this;
    return emit(state_, script::QueryExpr{script::Query::configs, expr_},
                [self, capped] { return script::query(script::Query::configs, self.value(), capped); });
}

inline Handle Handle::rename(const std::string& from, const std::string& to) const {
    require();
    Handle self = *this;
    return emit(state_, script::Rename{expr_, from, to},
                [self, from, to] { return script::rename_model(self.value(), from, to); });
}

inline Handle SliceBuilder::make(SliceMode mode, const std::vector<std::string>& names) const {
    Handle self = operand_;
    return Handle::emit(self.state_, script::Slice{self.expr_, mode, names}, [self, mode, names] {
        return script::slice_model(self.value(), mode, names, self.state_->settings);
    });
}

inline bool Handle::truth() const {
    require();
    if (recording()) throw Error(ErrorKind::wrong_mode, "host control flow cannot be recorded");
    return script::truth(*value_);
}

inline std::vector<Handle> Handle::each() const {
    require();
    if (recording()) throw Error(ErrorKind::wrong_mode, "host control flow cannot be recorded");
    std::vector<Handle> out;
    for (auto& item : script::elements(*value_)) {
        std::string n = "v" + std::to_string(++state_->counter);
        bool is_str = item.holds<std::string>();
        out.push_back(Handle(state_, std::move(item), script::make_expr(script::Var{n}), n, is_str));
    }
    return out;
}

/// Feature name for rename/slice given as a host variable `h` written
/// `literal` in script form: a string handle stands for its contents, any
/// other (or empty) handle for the literal.
inline std::string name(const Handle& h, const std::string& literal) {
    if (h.empty()) return literal;
    if (h.recording()) return h.maybe_str_ ? h.name_ : literal;
    return h.value_->holds<std::string>() ? h.value_->as<std::string>() : literal;
}

class Context {
public:
    explicit Context(Mode mode = Mode::execute, Settings settings = Settings::from_env(),
                     std::filesystem::path base = std::filesystem::current_path())
        : state_(std::make_shared<detail::State>(mode, settings, std::move(base))) {}

    Mode mode() const { return state_->mode; }

    /// Model from FM notation. Parsed right away in execute mode only.
    Handle load(const std::string& text) const {
        return Handle::emit(state_, script::FmLiteral{text}, [text] { return script::load_model(text); });
    }

    Handle integer(BigInt i) const {
        return Handle::emit(state_, script::IntLit{i}, [i] { return Value(i); });
    }
    Handle string(const std::string& s) const {
        return Handle::emit(state_, script::StrLit{s}, [s] { return Value(s); });
    }
    Handle boolean(bool b) const {
        return Handle::emit(state_, script::BoolLit{b}, [b] { return Value(b); });
    }

    class MergeBuilder {
    public:
        MergeBuilder with(const Handle& h) const {
            MergeBuilder next = *this;
            next.operands_.push_back(h);
            return next;
        }

        Handle get() const {
            if (operands_.size() < 2) throw Error(ErrorKind::arity, "merge needs at least two models");
            std::vector<script::ExprRef> exprs;
            for (const auto& h : operands_) {
                h.require();
                if (h.state_ != state_) throw Error(ErrorKind::mixed_context, "handles belong to different contexts");
                exprs.push_back(h.expr_);
            }
            auto operands = operands_;
            auto mode = mode_;
            auto state = state_;
            return Handle::emit(state_, script::Merge{mode_, exprs}, [operands, mode, state] {
                std::vector<Value> values;
                for (const auto& h : operands) values.push_back(h.value());
                return script::merge_models(mode, values, state->settings);
            });
        }

    private:
        friend class Context;
        MergeBuilder(std::shared_ptr<detail::State> state, MergeMode mode) : state_(std::move(state)), mode_(mode) {}
        std::shared_ptr<detail::State> state_;
        MergeMode mode_;
        std::vector<Handle> operands_;
    };

    MergeBuilder merge(MergeMode mode) const { return MergeBuilder(state_, mode); }

    /// Runs a script file with %1..%n bound to `args`.
    Handle run(const std::string& path, const std::vector<Handle>& args = {}) const {
        std::vector<script::ExprRef> exprs;
        for (const auto& h : args) {
            h.require();
            if (h.state_ != state_) throw Error(ErrorKind::mixed_context, "handles belong to different contexts");
            exprs.push_back(h.expr_);
        }
        auto state = state_;
        return Handle::emit(state_, script::Run{path, exprs}, [state, path, args] {
            std::vector<Value> values;
            for (const auto& h : args) values.push_back(h.value());
            return state->interp.call(path, values);
        });
    }

    /// Exposes `h` under a script-level name. Empty handles are skipped,
    /// like a variable a script never assigned.
    void publish(const std::string& name, const Handle& h) const {
        if (h.empty()) return;
        if (h.state_ != state_) throw Error(ErrorKind::mixed_context, "handles belong to different contexts");
        if (std::find(state_->published.begin(), state_->published.end(), name) == state_->published.end())
            state_->published.push_back(name);
        if (state_->mode == Mode::record) {
            state_->recorded.statements.push_back(
                script::Stmt{script::Assign{name, script::make_expr(script::Var{h.name_})}, {}});
        } else {
            state_->published_env.assign(name, *h.value_);
        }
    }

    const std::vector<std::string>& published() const { return state_->published; }

    /// Published bindings (execute mode).
    const script::Environment& environment() const {
        if (state_->mode == Mode::record) throw Error(ErrorKind::wrong_mode, "record mode computes no values");
        return state_->published_env;
    }

    /// The script recorded so far (record mode).
    script::Script extract_script() const {
        if (state_->mode != Mode::record) throw Error(ErrorKind::wrong_mode, "context is not recording");
        return state_->recorded;
    }

    const Settings& settings() const { return state_->settings; }
    const std::filesystem::path& base() const { return state_->base; }

private:
    std::shared_ptr<detail::State> state_;
};

/// Evaluates the script a recording context captured and returns its
/// published bindings, as an execute-mode context would hold them.
inline script::Environment replay(const Context& recorded) {
    script::Interpreter interp(recorded.settings(), recorded.base());
    interp.execute(recorded.extract_script());
    script::Environment out;
    for (const auto& name : recorded.published())
        if (const Value* v = interp.environment().lookup(name)) out.assign(name, *v);
    return out;
}

/// Published bindings in `name : tag = value` form: the execute-mode
/// environment, or the replayed one for a recording context.
inline std::string render_environment(const Context& ctx) {
    if (ctx.mode() == Mode::record) return script::render_environment(replay(ctx), ctx.settings());
    return script::render_environment(ctx.environment(), ctx.settings());
}

} // namespace fam::fluent
