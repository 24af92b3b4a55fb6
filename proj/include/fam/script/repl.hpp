#pragma once

#include <iostream>
#include <string>

#include "fam/script/interpreter.hpp"

namespace fam::script {

inline constexpr const char* prompt = "fml> ";
inline constexpr const char* continuation_prompt = "...> ";

inline const char* repl_help =
    "statements:  name = expr | expr | foreach (x in e) do ... end | if e then ... else ... end\n"
    "operations:  counting isValid configs cores deads features e\n"
    "             merge sunion|sinter|sdiff { e e ... }\n"
    "             slice e including|excluding { names }   rename e old as new\n"
    "             run \"file.fml\" with e ...\n"
    "commands:    :env  :help  :quit\n";

/// Line-oriented read-eval-print loop. Expression results are printed;
/// assignments are silent. Errors are reported and the session goes on.
class Repl {
public:
    Repl(std::istream& in, std::ostream& out, Settings settings = Settings::from_env())
        : in_(in), out_(out), interp_(settings) {}

    Interpreter& interpreter() { return interp_; }

    void run() {
        std::string buffer;
        std::string line;
        out_ << prompt << std::flush;
        while (std::getline(in_, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (buffer.empty()) {
                std::string cmd = trim(line);
                if (!cmd.empty() && cmd.front() == ':') {
                    if (!command(cmd)) return;
                    out_ << prompt << std::flush;
                    continue;
                }
            }
            buffer += line + "\n";
            if (!step(buffer)) {
                out_ << continuation_prompt << std::flush;
                continue;
            }
            buffer.clear();
            out_ << prompt << std::flush;
        }
        out_ << "\n";
    }

    /// Evaluates one complete chunk. Returns false when more lines are needed.
    bool step(const std::string& text) {
        Script script;
        try {
            script = parse_script(text);
        } catch (const Error& e) {
            if (incomplete(e)) return false;
            out_ << "error: " << e.what() << "\n";
            return true;
        }
        try {
            for (const auto& stmt : script.statements) {
                Value v = interp_.execute(stmt);
                if (std::holds_alternative<ExprStmt>(stmt.node) && !v.holds<Unit>())
                    out_ << render(v, interp_.settings()) << "\n";
            }
        } catch (const Error& e) {
            out_ << "error: " << e.what() << "\n";
        }
        return true;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    }

    bool command(const std::string& cmd) {
        if (cmd == ":quit" || cmd == ":q") return false;
        if (cmd == ":env") {
            out_ << render_environment(interp_.environment(), interp_.settings());
        } else if (cmd == ":help") {
            out_ << repl_help;
        } else {
            out_ << "error: unknown command '" << cmd << "' (try :help)\n";
        }
        return true;
    }

    std::istream& in_;
    std::ostream& out_;
    Interpreter interp_;
};

} // namespace fam::script
