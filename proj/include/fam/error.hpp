#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace fam {

using BigInt = boost::multiprecision::cpp_int;

/// 1-based source region. A default-constructed span means "no source".
struct Span {
    int line = 0;
    int column = 0;
    int end_line = 0;
    int end_column = 0;

    bool known() const { return line > 0; }
    friend bool operator==(const Span&, const Span&) = default;
};

enum class ErrorKind {
    parse,
    lex,
    semantic,
    schema,
    alphabet_too_large,
    limit_exceeded,
    unknown_feature,
    name_clash,
    capacity_exceeded,
    invalid_model,
    arity,
    type,
    unbound_variable,
    io,
    mixed_context,
    wrong_mode,
    missing_template,
    unsupported_node,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::parse: return "ParseError";
    case ErrorKind::lex: return "LexError";
    case ErrorKind::semantic: return "SemanticError";
    case ErrorKind::schema: return "SchemaError";
    case ErrorKind::alphabet_too_large: return "AlphabetTooLarge";
    case ErrorKind::limit_exceeded: return "LimitExceeded";
    case ErrorKind::unknown_feature: return "UnknownFeature";
    case ErrorKind::name_clash: return "NameClash";
    case ErrorKind::capacity_exceeded: return "CapacityExceeded";
    case ErrorKind::invalid_model: return "InvalidModel";
    case ErrorKind::arity: return "ArityError";
    case ErrorKind::type: return "TypeError";
    case ErrorKind::unbound_variable: return "UnboundVariable";
    case ErrorKind::io: return "IoError";
    case ErrorKind::mixed_context: return "MixedContext";
    case ErrorKind::wrong_mode: return "WrongMode";
    case ErrorKind::missing_template: return "MissingTemplate";
    case ErrorKind::unsupported_node: return "UnsupportedNode";
    }
    return "Error";
}

/// Base of every error raised by the library. Carries a kind tag, the bare
/// message, and an optional source span that outer layers may attach.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, Span span = {})
        : std::runtime_error(format(kind, message, span)),
          kind_(kind), message_(std::move(message)), span_(span) {}

    ErrorKind kind() const { return kind_; }
    const std::string& message() const { return message_; }
    const Span& span() const { return span_; }

    /// Copy of this error with `span` attached, unless one is already set.
    virtual void rethrow_at(Span span) const {
        if (span_.known() || !span.known()) throw *this;
        throw Error(kind_, message_, span);
    }

protected:
    static std::string format(ErrorKind kind, const std::string& message, Span span) {
        std::string out;
        if (span.known())
            out += std::to_string(span.line) + ":" + std::to_string(span.column) + ": ";
        out += kind_name(kind);
        out += ": ";
        out += message;
        return out;
    }

private:
    ErrorKind kind_;
    std::string message_;
    Span span_;
};

struct Diagnostic {
    Span span;
    std::string message;
    std::vector<std::string> expected;
    bool at_end = false;  // raised because the input ended early
};

/// Syntax error. `diagnostics` holds every error found in batch mode; the
/// first one is the primary error reported by what().
class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics)
        : Error(ErrorKind::parse, describe(diagnostics.front()), diagnostics.front().span),
          diagnostics_(std::move(diagnostics)) {}

    ParseError(Span span, std::string message, std::vector<std::string> expected = {},
               bool at_end = false)
        : ParseError(std::vector<Diagnostic>{{span, std::move(message), std::move(expected), at_end}}) {}

    int line() const { return span().line; }
    int column() const { return span().column; }
    const std::vector<std::string>& expected() const { return diagnostics_.front().expected; }
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
    bool at_end() const { return diagnostics_.front().at_end; }

    void rethrow_at(Span) const override { throw *this; }

private:
    static std::string describe(const Diagnostic& d) {
        std::string out = d.message;
        if (!d.expected.empty()) {
            out += " (expected ";
            for (std::size_t i = 0; i < d.expected.size(); ++i) {
                if (i) out += ", ";
                out += d.expected[i];
            }
            out += ")";
        }
        return out;
    }

    std::vector<Diagnostic> diagnostics_;
};

/// Raised when an enumeration would produce more than the allowed number of
/// configurations; `count()` is the exact number that exists.
class LimitExceeded : public Error {
public:
    LimitExceeded(BigInt count, BigInt limit, Span span = {})
        : Error(ErrorKind::limit_exceeded,
                count.str() + " configurations exceed the limit of " + limit.str(), span),
          count_(std::move(count)), limit_(std::move(limit)) {}

    const BigInt& count() const { return count_; }
    const BigInt& limit() const { return limit_; }

    void rethrow_at(Span span) const override {
        if (this->span().known() || !span.known()) throw *this;
        throw LimitExceeded(count_, limit_, span);
    }

private:
    BigInt count_;
    BigInt limit_;
};

} // namespace fam
