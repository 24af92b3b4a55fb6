#pragma once

// Configurator backend: models, sessions and their JSON documents, routed
// without any transport so the same code serves HTTP and the test suites.
//
// Routes
//   POST /api/models                          {source}
//   GET  /api/models/{id}
//   POST /api/models/{id}/sessions
//   GET  /api/sessions/{sid}
//   POST /api/sessions/{sid}/decide           {feature, decision}
//   POST /api/sessions/{sid}/undo
//   POST /api/sessions/{sid}/reset
//   GET  /api/sessions/{sid}/configurations?limit=k
//
// State document
//   {features: [{name, status, origin}], count: "<decimal>", conflict, undoDepth}

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fam/fm_text.hpp"
#include "fam/reasoner.hpp"

namespace fam::service {

using nlohmann::json;

struct Response {
    int status = 200;
    json body = json::object();
};

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

/// Default and largest `limit` accepted by the configurations route.
inline constexpr std::size_t default_limit = 100;
inline constexpr std::size_t max_limit = 10000;

namespace detail {

inline json error_body(const std::string& message) { return json{{"message", message}}; }

inline json tree(const FeatureModel& m, const std::string& f) {
    json node{{"name", f}};
    auto opt = m.optionality.find(f);
    node["optionality"] = f == m.root ? "root" : opt != m.optionality.end() ? to_string(opt->second) : "grouped";
    int g = m.group_of(f);
    node["group"] = g < 0 ? json(nullptr) : json(to_string(m.groups[static_cast<std::size_t>(g)].kind));
    node["children"] = json::array();
    for (const auto& c : m.children(f)) node["children"].push_back(tree(m, c));
    return node;
}

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

} // namespace detail

/// Thrown inside request handling; becomes the response as is.
struct Reject {
    Response response;
};

[[noreturn]] inline void reject(int status, const std::string& message, json extra = json::object()) {
    json body = detail::error_body(message);
    body.update(extra);
    throw Reject{{status, body}};
}

class Configurator {
public:
    explicit Configurator(Settings settings = Settings::from_env(), std::uint64_t seed = std::random_device{}())
        : settings_(settings), rng_(seed) {}

    Response handle(const Request& req) {
        try {
            return route(req);
        } catch (const Reject& r) {
            return r.response;
        } catch (const Error& e) {
            return {500, detail::error_body(e.what())};
        }
    }

    Response handle(const std::string& method, const std::string& path, const std::string& body = "",
                    std::map<std::string, std::string> query = {}) {
        return handle(Request{method, path, std::move(query), body});
    }

private:
    struct Model {
        FeatureModel fm;
        BigInt count;
    };

    struct Session {
        std::mutex mu;
        std::shared_ptr<const Model> model;
        Analysis analysis;
        std::vector<Decision> decisions;
        std::vector<std::vector<Decision>> history;  // decisions before each change
        TriState state;
        bool conflict = false;

        Session(std::shared_ptr<const Model> m, const Settings& s) : model(m), analysis(Space{m->fm}, s) {}
    };

    Response route(const Request& req) {
        auto parts = detail::split_path(req.path);
        if (parts.size() < 2 || parts[0] != "api") reject(404, "no such route");
        const std::string& m = req.method;
        auto need = [&](const char* method) {
            if (m != method) reject(405, "method not allowed");
        };
        if (parts[1] == "models") {
            if (parts.size() == 2) {
                need("POST");
                return create_model(req.body);
            }
            if (parts.size() == 3) {
                need("GET");
                return {200, model_document(parts[2], *find_model(parts[2]))};
            }
            if (parts.size() == 4 && parts[3] == "sessions") {
                need("POST");
                expect_fields(req.body, {});
                return create_session(parts[2]);
            }
        } else if (parts[1] == "sessions" && parts.size() >= 3) {
            auto session = find_session(parts[2]);
            std::lock_guard lock(session->mu);
            if (parts.size() == 3) {
                need("GET");
                return {200, state_document(*session)};
            }
            if (parts.size() == 4) {
                const std::string& action = parts[3];
                if (action == "decide") {
                    need("POST");
                    return decide(*session, req.body);
                }
                if (action == "undo") {
                    need("POST");
                    expect_fields(req.body, {});
                    if (!session->history.empty()) {
                        session->decisions = session->history.back();
                        session->history.pop_back();
                    }
                    recompute(*session);
                    return {200, state_document(*session)};
                }
                if (action == "reset") {
                    need("POST");
                    expect_fields(req.body, {});
                    session->decisions.clear();
                    session->history.clear();
                    recompute(*session);
                    return {200, state_document(*session)};
                }
                if (action == "configurations") {
                    need("GET");
                    return configurations(*session, req.query);
                }
            }
        }
        reject(404, "no such route");
    }

    // Parses a request body as an object whose keys are all in `allowed`.
    // An empty body counts as {}.
    static json expect_fields(const std::string& body, const std::set<std::string>& allowed) {
        if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
        json doc = json::parse(body, nullptr, false);
        if (doc.is_discarded()) reject(400, "body is not valid JSON");
        if (!doc.is_object()) reject(400, "body must be a JSON object");
        for (const auto& [key, _] : doc.items())
            if (!allowed.count(key)) reject(400, "unknown field \"" + key + "\"");
        return doc;
    }

    static std::string string_field(const json& doc, const char* key) {
        auto it = doc.find(key);
        if (it == doc.end()) reject(400, std::string("missing field \"") + key + "\"");
        if (!it->is_string()) reject(400, std::string("field \"") + key + "\" must be a string");
        return it->get<std::string>();
    }

    std::string fresh_id(const char* prefix) {
        std::lock_guard lock(rng_mu_);
        static const char* hex = "0123456789abcdef";
        std::string id = prefix;
        for (int i = 0; i < 16; ++i) id += hex[rng_() % 16];
        return id;
    }

    Response create_model(const std::string& body) {
        json doc = expect_fields(body, {"source"});
        std::string source = string_field(doc, "source");
        FeatureModel fm;
        try {
            fm = parse_fm(source);
        } catch (const ParseError& e) {
            reject(400, e.message(), {{"line", e.line()}, {"column", e.column()}});
        } catch (const Error& e) {
            json where = json::object();
            if (e.span().known()) where = {{"line", e.span().line}, {"column", e.span().column}};
            reject(400, e.message(), where);
        }
        BigInt count;
        try {
            count = counting(Space{fm}, settings_);
        } catch (const Error& e) {
            reject(422, e.message());
        }
        if (count == 0) reject(422, "model is unsatisfiable", {{"count", "0"}});

        auto model = std::make_shared<const Model>(Model{std::move(fm), count});
        std::string id = fresh_id("m");
        {
            std::unique_lock lock(models_mu_);
            models_[id] = model;
        }
        return {201, model_document(id, *model)};
    }

    static json model_document(const std::string& id, const Model& m) {
        return json{{"id", id},
                    {"root", m.fm.root},
                    {"features", m.fm.features},
                    {"tree", detail::tree(m.fm, m.fm.root)},
                    {"count", m.count.str()}};
    }

    std::shared_ptr<const Model> find_model(const std::string& id) {
        std::shared_lock lock(models_mu_);
        auto it = models_.find(id);
        if (it == models_.end()) reject(404, "unknown model '" + id + "'");
        return it->second;
    }

    std::shared_ptr<Session> find_session(const std::string& id) {
        std::shared_lock lock(sessions_mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) reject(404, "unknown session '" + id + "'");
        return it->second;
    }

    Response create_session(const std::string& model_id) {
        auto model = find_model(model_id);
        auto session = std::make_shared<Session>(model, settings_);
        recompute(*session);
        std::string id = fresh_id("s");
        {
            std::unique_lock lock(sessions_mu_);
            sessions_[id] = session;
        }
        return {201, json{{"sessionId", id}, {"state", state_document(*session)}}};
    }

    static void recompute(Session& s) {
        s.state = s.analysis.propagate(user_decisions(s.analysis.alphabet(), s.decisions));
        s.conflict = false;
    }

    static json state_document(Session& s) {
        json features = json::array();
        for (const auto& f : s.state.features)
            features.push_back({{"name", f.name}, {"status", to_string(f.status)}, {"origin", to_string(f.origin)}});
        return json{{"features", features},
                    {"count", s.analysis.counting(s.decisions).str()},
                    {"conflict", s.conflict},
                    {"undoDepth", s.history.size()}};
    }

    Response decide(Session& s, const std::string& body) {
        json doc = expect_fields(body, {"feature", "decision"});
        std::string feature = string_field(doc, "feature");
        std::string decision = string_field(doc, "decision");
        const FeatureStatus* current = s.state.find(feature);
        if (!current) reject(400, "unknown feature '" + feature + "'");
        if (decision != "selected" && decision != "deselected" && decision != "undecided")
            reject(400, "decision must be selected, deselected or undecided");

        std::vector<Decision> next = s.decisions;
        if (decision == "undecided") {
            for (auto it = next.rbegin(); it != next.rend(); ++it)
                if (it->feature == feature) {
                    next.erase(std::next(it).base());
                    break;
                }
        } else {
            bool select = decision == "selected";
            Status wanted = select ? Status::selected : Status::deselected;
            if (current->origin == Origin::propagated && current->status != wanted)
                reject(409, "'" + feature + "' is " + to_string(current->status) + " by propagation",
                       {{"blocking", {{"name", feature}, {"status", to_string(current->status)}, {"origin", "propagated"}}}});
            if (current->origin == Origin::user && current->status != wanted) {
                // The earlier decision stays in place; the two contradict.
                s.conflict = true;
                return {200, state_document(s)};
            }
            if (current->origin != Origin::user) next.push_back({feature, select});
        }
        if (next == s.decisions) {
            s.conflict = false;
            return {200, state_document(s)};
        }

        TriState trial = s.analysis.propagate(user_decisions(s.analysis.alphabet(), next));
        if (trial.conflict) {
            s.conflict = true;
            return {200, state_document(s)};
        }
        s.history.push_back(s.decisions);
        s.decisions = std::move(next);
        s.state = std::move(trial);
        s.conflict = false;
        return {200, state_document(s)};
    }

    Response configurations(Session& s, const std::map<std::string, std::string>& query) {
        std::size_t limit = default_limit;
        if (auto it = query.find("limit"); it != query.end()) {
            const std::string& v = it->second;
            if (v.empty() || v.size() > 6 || v.find_first_not_of("0123456789") != std::string::npos)
                reject(400, "limit must be a non-negative integer");
            limit = std::stoul(v);
            if (limit > max_limit) reject(400, "limit must be at most " + std::to_string(max_limit));
        }
        for (const auto& [key, _] : query)
            if (key != "limit") reject(400, "unknown parameter \"" + key + "\"");
        auto found = s.analysis.configurations(s.decisions, limit + 1);
        bool truncated = found.size() > limit;
        if (truncated) found.pop_back();
        json list = json::array();
        for (const auto& c : found) list.push_back(std::vector<std::string>(c.selected.begin(), c.selected.end()));
        return {200, json{{"configurations", list}, {"truncated", truncated}}};
    }

    Settings settings_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
    std::shared_mutex models_mu_;
    std::map<std::string, std::shared_ptr<const Model>> models_;
    std::shared_mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

} // namespace fam::service
