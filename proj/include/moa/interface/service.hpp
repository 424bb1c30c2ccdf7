#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "moa/interface/app.hpp"

namespace moa {

/// HTTP/1.1 JSON front end over an App:
///
///   POST /v1/query                {pipeline_id, question, mode?}
///   GET  /v1/runs/{run_id}/trace  persisted trace, byte for byte
///   POST /v1/kb/{kb_id}/ingest    multipart text files
///   GET  /v1/pipelines
///   GET  /healthz
///
/// Errors are {"error": {"code", "message"}} with 400, 404, 429 (more than
/// max_inflight_runs queries running) or 500 (run failure, with run_id and
/// failing_node).
class Service {
public:
    explicit Service(App& app);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds without serving yet; port 0 picks a free port. Returns the
    /// bound port. Throws kIo.
    int bind(const std::string& host, int port);

    /// Serves until stop(). Call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Builds the App, binds config.host:config.port and serves forever.
void serve(const ServiceConfig& config, std::ostream& log);

}  // namespace moa
