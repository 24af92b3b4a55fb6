#pragma once

// HTTP binding of the configurator routes, with CORS and an optional static
// directory served at `/`.

#include <filesystem>
#include <string>

#include <httplib.h>

#include "fam/service.hpp"

namespace fam::service {

class HttpServer {
public:
    explicit HttpServer(Configurator& app, const std::filesystem::path& static_dir = {}) : app_(app) {
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                     {"Access-Control-Allow-Headers", "Content-Type"}});
        if (!static_dir.empty() && !server_.set_mount_point("/", static_dir.string()))
            throw Error(ErrorKind::io, "cannot serve static files from '" + static_dir.string() + "'");
        server_.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            Request r{req.method, req.path, {}, req.body};
            for (const auto& [k, v] : req.params) r.query[k] = v;
            Response out = app_.handle(r);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        server_.Get(R"(/api/.*)", forward);
        server_.Post(R"(/api/.*)", forward);
    }

    /// Binds `host:port` (0 picks a free port) and returns the port, or -1.
    int bind(const std::string& host, int port) {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    /// Serves until stop(); call after bind().
    bool listen() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }

private:
    Configurator& app_;
    httplib::Server server_;
};

} // namespace fam::service
