#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fam/metamorph.hpp"
#include "fam/reasoner.hpp"
#include "fam/script/interpreter.hpp"
#include "fam/script/repl.hpp"
#include "fam/server.hpp"

namespace {

fam::service::HttpServer* running = nullptr;

void on_signal(int) {
    if (running) running->stop();
}

fam::FeatureModel load_fm(const std::string& path) { return fam::parse_fm(fam::script::read_file(path)); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature model workbench: analysis, scripting, shape conversion and a configurator service"};
    app.require_subcommand(1);

    auto* repl = app.add_subcommand("repl", "Interactive script session");

    auto* run = app.add_subcommand("run", "Run a script file");
    std::string script_path;
    bool print_env = false;
    run->add_option("file", script_path, "Script file")->required();
    run->add_flag("--print-env", print_env, "Print the script-level bindings when done");

    auto* count = app.add_subcommand("count", "Print the number of configurations of a model");
    std::string count_path;
    count->add_option("file", count_path, "Feature model file")->required();

    auto* check = app.add_subcommand("check", "Check that a model has a configuration (exit 0 iff it does)");
    std::string check_path;
    check->add_option("file", check_path, "Feature model file")->required();

    auto* morph = app.add_subcommand("morph", "Convert a script to another shape");
    std::string from = "external", to;
    std::string morph_path;
    morph->add_option("--from", from, "Source shape")->capture_default_str();
    morph->add_option("--to", to, "Target dialect (a shipped name or a .dialect file)")->required();
    std::string morph_out;
    morph->add_option("file", morph_path, "Script file")->required();
    morph->add_option("-o,--output", morph_out, "Write here instead of standard output");

    auto* serve = app.add_subcommand("serve", "Serve the configurator API");
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string static_dir;
    serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
    serve->add_option("--host", host, "Address to bind")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory served at /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*repl) {
            fam::script::Repl(std::cin, std::cout).run();
            return 0;
        }
        if (*run) {
            std::filesystem::path file(script_path);
            fam::script::Interpreter interp(fam::Settings::from_env(), file.has_parent_path()
                                                                           ? file.parent_path()
                                                                           : std::filesystem::current_path());
            fam::script::Value last = interp.execute(fam::script::parse_script(fam::script::read_file(script_path)));
            if (print_env) std::cout << fam::script::render_environment(interp.environment(), interp.settings());
            else if (!last.holds<fam::script::Unit>()) std::cout << fam::script::render(last, interp.settings()) << "\n";
            return 0;
        }
        if (*count) {
            std::cout << fam::counting(fam::Space{load_fm(count_path)}) << "\n";
            return 0;
        }
        if (*check) {
            fam::Analysis a(fam::Space{load_fm(check_path)});
            if (!a.is_valid()) {
                std::cout << "void: no configuration\n";
                return 1;
            }
            std::cout << "valid: " << a.counting() << " configurations\n";
            return 0;
        }
        if (*morph) {
            std::string text = fam::script::read_file(morph_path);
            if (from != "external")
                throw fam::Error(fam::ErrorKind::unsupported_node, "cannot read the '" + from + "' shape");
            auto dialect = to.find('/') != std::string::npos || to.ends_with(".dialect")
                               ? fam::metamorph::Dialect::load(to)
                               : fam::metamorph::Dialect::builtin(to);
            std::string emitted = fam::metamorph::emit(fam::script::parse_script(text), dialect);
            if (morph_out.empty()) {
                std::cout << emitted;
            } else {
                std::ofstream out(morph_out, std::ios::binary);
                if (!(out << emitted)) throw fam::Error(fam::ErrorKind::io, "cannot write '" + morph_out + "'");
            }
            return 0;
        }
        if (*serve) {
            fam::service::Configurator configurator;
            fam::service::HttpServer server(configurator, static_dir);
            int bound = server.bind(host, port);
            if (bound < 0) throw fam::Error(fam::ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
            running = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            server.listen();
            return 0;
        }
    } catch (const fam::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
