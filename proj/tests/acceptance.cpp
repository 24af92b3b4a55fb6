// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <pty.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include <httplib.h>

#include "fam/fluent.hpp"
#include "fam/metamorph.hpp"
#include "fam/oracle.hpp"
#include "fam/server.hpp"

#include "fluent_driver.hpp"
#include "parity_cases.hpp"
#include "service_check.hpp"
#include "support.hpp"

using namespace fam;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path corpus_dir = FAM_CORPUS_DIR;
const fs::path sample_dir = FAM_SAMPLE_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> problems;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (problems.size() < 5) problems.push_back(what);
        }
    }
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
    Outcome out;
    auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("unexpected exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_seconds > 0)
        out.require(seconds < budget_seconds, "took " + std::to_string(seconds) + " s, budget " +
                                                  std::to_string(budget_seconds) + " s");
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", seconds);
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << name << ": " << out.detail << " (" << timing << ")\n";
    for (const auto& p : out.problems) std::cout << "      " << p << "\n";
    std::cout.flush();
    if (!out.pass) ++failures;
}

std::vector<fs::path> corpus_files() {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.path().extension() == ".fml") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::set<std::string> project(const Configuration& c, const std::set<std::string>& kept) {
    std::set<std::string> out;
    for (const auto& n : c.selected)
        if (kept.count(n)) out.insert(n);
    return out;
}

std::string error_kind(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return kind_name(e.kind());
    }
    return "none";
}

// Node kinds appearing anywhere in a script.
void kinds(const script::Expr& e, std::set<std::string>& out);

void kinds(const script::Block& b, std::set<std::string>& out) {
    for (const auto& s : b) {
        out.insert(script::node_kind(s));
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, script::Assign>) kinds(*n.value, out);
                else if constexpr (std::is_same_v<T, script::ExprStmt>) kinds(*n.expr, out);
                else if constexpr (std::is_same_v<T, script::Foreach>) {
                    kinds(*n.domain, out);
                    kinds(n.body, out);
                } else {
                    kinds(*n.cond, out);
                    kinds(n.then_block, out);
                    if (n.else_block) kinds(*n.else_block, out);
                }
            },
            s.node);
    }
}

void kinds(const script::Expr& e, std::set<std::string>& out) {
    out.insert(script::node_kind(e));
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, script::QueryExpr> || std::is_same_v<T, script::Unary> ||
                          std::is_same_v<T, script::Slice> || std::is_same_v<T, script::Rename>)
                kinds(*n.operand, out);
            else if constexpr (std::is_same_v<T, script::Merge>)
                for (const auto& o : n.operands) kinds(*o, out);
            else if constexpr (std::is_same_v<T, script::Run>)
                for (const auto& a : n.args) kinds(*a, out);
            else if constexpr (std::is_same_v<T, script::Binary>) {
                kinds(*n.lhs, out);
                kinds(*n.rhs, out);
            }
        },
        e.node);
}

void fm_literals(const script::Expr& e, std::vector<std::string>& out) {
    if (const auto* f = std::get_if<script::FmLiteral>(&e.node)) out.push_back(f->text);
    else if (const auto* q = std::get_if<script::QueryExpr>(&e.node)) fm_literals(*q->operand, out);
    else if (const auto* m = std::get_if<script::Merge>(&e.node))
        for (const auto& o : m->operands) fm_literals(*o, out);
}

// Reads from the pty until `needle` shows up or the deadline passes.
bool read_until(int fd, std::string& log, const std::string& needle, std::size_t from, double seconds) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    while (log.find(needle, from) == std::string::npos) {
        if (std::chrono::steady_clock::now() > deadline) return false;
        fd_set set;
        FD_ZERO(&set);
        FD_SET(fd, &set);
        timeval tv{0, 100000};
        if (select(fd + 1, &set, nullptr, nullptr, &tv) <= 0) continue;
        char buf[4096];
        ssize_t n = read(fd, buf, sizeof buf);
        if (n <= 0) return log.find(needle, from) != std::string::npos;
        log.append(buf, static_cast<std::size_t>(n));
    }
    return true;
}

} // namespace

int main() {
    std::cout << "acceptance suite\n";

    criterion("oracle equivalence", 60, [](Outcome& out) {
        testing::ModelGenerator gen(20240101);
        std::mt19937_64 rng(99);
        int models = 0, checks = 0;
        for (int i = 0; i < 200; ++i, ++models) {
            FeatureModel fm = gen.next(12);
            Space space{fm};
            auto all = enumerate(space, 1u << 20);
            Analysis a(space, Settings{});
            std::string tag = "model " + std::to_string(i) + " " + render_fm(fm);

            out.require(a.counting() == all.size(), tag + ": count");
            auto listed = a.configs(all.size() + 1);
            out.require(std::set<Configuration>(listed.begin(), listed.end()) == all && listed.size() == all.size(),
                        tag + ": configs");

            if (all.empty()) {
                out.require(error_kind([&] { a.cores(); }) == "InvalidModel", tag + ": cores of void model");
                out.require(error_kind([&] { a.deads(); }) == "InvalidModel", tag + ": deads of void model");
            } else {
                std::vector<std::string> core, dead;
                for (const auto& f : fm.features) {
                    std::size_t on = 0;
                    for (const auto& c : all) on += c.selected.count(f);
                    if (on == all.size()) core.push_back(f);
                    if (on == 0) dead.push_back(f);
                }
                out.require(a.cores() == core, tag + ": cores");
                out.require(a.deads() == dead, tag + ": deads");
            }

            // Three user decisions on distinct features.
            std::vector<std::string> pool = fm.features;
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<Decision> decisions;
            for (std::size_t k = 0; k < std::min<std::size_t>(3, pool.size()); ++k)
                decisions.push_back({pool[k], rng() % 2 == 0});
            TriState got = a.propagate(user_decisions(fm.features, decisions));
            json want = testing::oracle_state(fm, all, decisions);
            bool consistent = want["count"] != "0";
            out.require(got.conflict == !consistent, tag + ": conflict flag");
            if (consistent) {
                json statuses = json::array();
                for (const auto& f : got.features)
                    statuses.push_back({{"name", f.name}, {"status", to_string(f.status)}, {"origin", to_string(f.origin)}});
                out.require(statuses == want["features"], tag + ": propagate");
                out.require(a.counting(decisions).str() == want["count"], tag + ": count under decisions");
            }
            checks += 7;
        }
        out.detail = std::to_string(models) + " models up to 12 features, " + std::to_string(checks) +
                     " comparisons with the enumerator";
    });

    criterion("slice and merge algebra", 60, [](Outcome& out) {
        testing::ModelGenerator gen(777);
        std::mt19937_64 rng(778);
        for (int i = 0; i < 100; ++i) {
            FeatureModel x = gen.next(10), y = gen.next(10);
            auto ex = enumerate(Space{x}, 1u << 20), ey = enumerate(Space{y}, 1u << 20);
            std::string tag = "pair " + std::to_string(i) + " " + render_fm(x) + " / " + render_fm(y);
            std::size_t uni = ex.size(), inter = 0, diff = 0;
            for (const auto& c : ey) uni += ex.count(c) ? 0 : 1;
            for (const auto& c : ex) {
                inter += ey.count(c);
                diff += ey.count(c) ? 0 : 1;
            }
            auto count = [](const FlatModel& m) { return counting(Space{m}, Settings{}); };
            out.require(count(merge(MergeMode::sunion, {Space{x}, Space{y}}, Settings{})) == uni, tag + ": sunion");
            out.require(count(merge(MergeMode::sinter, {Space{x}, Space{y}}, Settings{})) == inter, tag + ": sinter");
            out.require(count(merge(MergeMode::sdiff, {Space{x}, Space{y}}, Settings{})) == diff, tag + ": sdiff");

            std::vector<std::string> names;
            for (const auto& f : x.features)
                if (rng() % 2) names.push_back(f);
            SliceMode mode = rng() % 2 ? SliceMode::including : SliceMode::excluding;
            std::set<std::string> kept;
            for (const auto& f : x.features) {
                bool listed = std::find(names.begin(), names.end(), f) != names.end();
                if (listed == (mode == SliceMode::including)) kept.insert(f);
            }
            std::set<std::set<std::string>> projected;
            for (const auto& c : ex) projected.insert(project(c, kept));
            out.require(count(slice(Space{x}, mode, names, Settings{})) == projected.size(), tag + ": slice");
        }
        out.detail = "100 model pairs up to 10 features; sunion, sinter, sdiff and slice counts match set operations";
    });

    criterion("arbitrary-precision counting", 1, [](Outcome& out) {
        BigInt n = counting(Space{parse_fm(testing::optional_chain(49))}, Settings{});
        out.require(n == BigInt("562949953421312"), "count was " + n.str());
        out.detail = "49 optional features count " + n.str();
    });

    criterion("six-statement workflow script", 0, [](Outcome& out) {
        fs::path path = sample_dir / "workflow.fml";
        auto ast = script::parse_script(script::read_file(path));
        const std::vector<std::pair<std::string, std::string>> expected{
            {"fm1", "model"}, {"n1", "int"}, {"b1", "bool"}, {"fm2", "model"}, {"fm3", "model"}, {"fm4", "model"}};
        out.require(ast.statements.size() == 6, "statement count " + std::to_string(ast.statements.size()));
        std::string shapes;
        for (std::size_t i = 0; i < std::min<std::size_t>(6, ast.statements.size()); ++i) {
            const auto* a = std::get_if<script::Assign>(&ast.statements[i].node);
            out.require(a && a->name == expected[i].first, "statement " + std::to_string(i + 1) + " binds the wrong name");
            if (a) shapes += (shapes.empty() ? "" : ", ") + a->name + " <- " + script::node_kind(*a->value);
        }
        auto env = script::run_file(path, Settings{});
        std::string types;
        for (const auto& [name, type] : expected) {
            const script::Value* v = env.lookup(name);
            out.require(v && script::type_name(*v) == type,
                        name + " has type " + (v ? script::type_name(*v) : std::string("(unbound)")));
            types += (types.empty() ? "" : "/") + (v ? script::type_name(*v) : std::string("?"));
        }
        const auto* fm3 = std::get_if<script::Assign>(&ast.statements[4].node);
        const auto* fm4 = std::get_if<script::Assign>(&ast.statements[5].node);
        out.require(fm3 && std::holds_alternative<script::Merge>(fm3->value->node), "fm3 is not a merge");
        out.require(fm4 && std::holds_alternative<script::Slice>(fm4->value->node), "fm4 is not a slice");
        out.detail = "samples/workflow.fml runs with types " + types + " (" + shapes + ")";
    });

    criterion("shape round trip", 0, [](Outcome& out) {
        auto files = corpus_files();
        out.require(files.size() == 30, "corpus holds " + std::to_string(files.size()) + " scripts");
        metamorph::Dialect external = metamorph::Dialect::builtin("external");
        std::set<std::string> seen;
        int straight = 0;
        for (const auto& path : files) {
            std::string name = path.filename().string();
            auto ast = script::parse_script(script::read_file(path));
            kinds(ast.statements, seen);
            out.require(script::parse_script(metamorph::emit(ast, external)) == ast, name + ": parse/emit/parse differs");
            if (!testing::straight_line(ast)) continue;
            ++straight;
            std::string evaluated = script::render_environment(script::run_file(path));
            fluent::Context rec(fluent::Mode::record, Settings::from_env(), corpus_dir);
            testing::FluentDriver(rec).run(ast);
            std::string replayed = fluent::render_environment(rec);
            out.require(replayed == evaluated, name + ": record/replay environment differs");
            // The recorded script itself survives the external shape.
            auto recorded = rec.extract_script();
            out.require(script::parse_script(metamorph::emit(recorded, external)) == recorded,
                        name + ": recorded script does not round-trip");
        }
        const std::set<std::string> all_kinds{"Assign",  "ExprStmt", "Foreach", "If",     "FmLiteral", "Var",
                                              "Counting", "IsValid", "Configs", "Cores",  "Deads",     "Features",
                                              "Merge",   "Slice",    "Rename",  "Run",    "IntLit",    "StrLit",
                                              "BoolLit", "Binary",   "Unary"};
        for (const auto& k : all_kinds) out.require(seen.count(k) != 0, "corpus never uses " + k);
        out.detail = std::to_string(files.size()) + " scripts covering " + std::to_string(seen.size()) +
                     " node kinds round-trip; " + std::to_string(straight) +
                     " straight-line scripts replay byte-identically";
    });

    criterion("fluent parity", 0, [](Outcome& out) {
        auto files = corpus_files();
        std::vector<std::string> models;
        for (const auto& path : files) {
            auto ast = script::parse_script(script::read_file(path));
            std::string evaluated = script::render_environment(script::run_file(path));
            fluent::Context exec(fluent::Mode::execute, Settings::from_env(), corpus_dir);
            testing::FluentDriver(exec).run(ast);
            out.require(fluent::render_environment(exec) == evaluated, path.filename().string() + ": environments differ");
            for (const auto& s : ast.statements)
                if (const auto* a = std::get_if<script::Assign>(&s.node)) fm_literals(*a->value, models);
        }
        int compared = 0;
        for (std::size_t i = 0; i < models.size(); ++i) {
            const std::string& a = models[i];
            const std::string& b = models[(i + 1) % models.size()];
            for (const auto& pc : testing::parity_cases()) {
                script::Interpreter interp(Settings{}, corpus_dir);
                interp.run_text("m = " + a + "\nm2 = " + b);
                std::string want = testing::outcome([&] { return script::render(interp.run_text(pc.script)); });
                fluent::Context ctx(fluent::Mode::execute, Settings{}, corpus_dir);
                fluent::Handle m = ctx.load(a), m2 = ctx.load(b);
                std::string got = testing::outcome([&] { return pc.fluent(ctx, m, m2).render(); });
                out.require(got == want, pc.script + " on " + a + ": fluent gave " + got + ", script gave " + want);
                ++compared;
            }
        }
        out.detail = std::to_string(files.size()) + " corpus scripts through the fluent handles, " +
                     std::to_string(testing::parity_cases().size()) + " operations on " +
                     std::to_string(models.size()) + " corpus models (" + std::to_string(compared) +
                     " results) byte-identical";
    });

    criterion("repl session over a pseudo-terminal", 30, [](Outcome& out) {
        int fd = -1;
        pid_t pid = forkpty(&fd, nullptr, nullptr, nullptr);
        if (pid < 0) {
            out.require(false, "forkpty failed");
            return;
        }
        if (pid == 0) {
            execl(FAM_CLI_PATH, FAM_CLI_PATH, "repl", static_cast<char*>(nullptr));
            _exit(127);
        }
        std::string log;
        std::size_t mark = 0;
        auto send = [&](const std::string& line, const std::string& expect) {
            mark = log.size();
            std::string text = line + "\n";
            if (write(fd, text.data(), text.size()) < 0) return false;
            return read_until(fd, log, expect, mark, 10);
        };
        out.require(read_until(fd, log, "fml> ", 0, 10), "no prompt");
        out.require(send("fm = FM (A : B [C] ;)", "fml> "), "first statement hung");
        out.require(send("counting fm", "2\r\n"), "counting did not print 2");
        out.require(send("broken = counting missing", "error: "), "no error reported");
        out.require(read_until(fd, log, "fml> ", mark, 10), "session did not survive the error");
        out.require(log.find("UnboundVariable", mark) != std::string::npos, "error does not name the failure");
        out.require(send(":env", "fm : model"), ":env does not list fm");
        out.require(read_until(fd, log, "fml> ", mark, 10), "no prompt after :env");
        std::string env = log.substr(mark);
        out.require(env.find("broken") == std::string::npos, ":env lists the failed binding");
        send(":quit", "\n");
        int status = 0;
        waitpid(pid, &status, 0);
        close(fd);
        out.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "repl did not exit cleanly");
        out.detail = "three statements (one failing) then :env listing fm only";
    });

    criterion("service contract", 0, [](Outcome& out) {
        service::Configurator app;
        service::HttpServer server(app);
        int port = server.bind("127.0.0.1", 0);
        out.require(port > 0, "could not bind");
        if (port <= 0) return;
        std::thread serving([&] { server.listen(); });
        server.wait_until_ready();
        httplib::Client client("127.0.0.1", port);
        testing::Transport http = [&](const std::string& method, const std::string& path, const std::string& body,
                                      const std::map<std::string, std::string>& query) {
            service::Response r;
            httplib::Result res = method == "GET"
                                      ? client.Get(httplib::append_query_params(
                                            path, httplib::Params(query.begin(), query.end())))
                                      : client.Post(path, body, "application/json");
            if (!res) {
                r.status = 0;
                return r;
            }
            r.status = res->status;
            r.body = json::parse(res->body, nullptr, false);
            return r;
        };

        testing::ModelGenerator gen(5150);
        std::mt19937_64 rng(5151);
        int steps = 0;
        for (int i = 0; i < 50; ++i) {
            FeatureModel fm = gen.next(10);
            while (enumerate(Space{fm}, 1u << 20).empty()) fm = gen.next(10);
            auto report = testing::fuzz_session(http, fm, rng, 40);
            steps += report.steps;
            for (const auto& f : report.failures) out.require(false, "sequence " + std::to_string(i) + ": " + f);
        }
        server.stop();
        serving.join();
        out.detail = "50 decision sequences over HTTP (" + std::to_string(steps) +
                     " requests) match oracle propagation and counts; every undo restores the prior state";
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures;
}
