#include "moa/interface/service.hpp"

#include <atomic>
#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "moa/error.hpp"

namespace moa {
namespace {

using nlohmann::json;

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kNotFound:
        case ErrorCode::kUnknownKb:
            return 404;
        case ErrorCode::kNodeFailure:
        case ErrorCode::kTimeout:
        case ErrorCode::kTransport:
        case ErrorCode::kRemoteStatus:
        case ErrorCode::kUnscripted:
        case ErrorCode::kIo:
            return 500;
        default:
            return 400;
    }
}

json error_body(std::string_view code, std::string_view message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    send(res, status_for(e.code()), error_body(code_name(e.code()), e.what()));
}

// Releases an in-flight slot on every exit path.
class Slot {
public:
    Slot(std::atomic<std::size_t>& counter, std::size_t limit) : counter_(counter) {
        acquired_ = counter_.fetch_add(1) < limit;
        if (!acquired_) counter_.fetch_sub(1);
    }
    ~Slot() {
        if (acquired_) counter_.fetch_sub(1);
    }
    bool acquired() const { return acquired_; }

private:
    std::atomic<std::size_t>& counter_;
    bool acquired_ = false;
};

}  // namespace

struct Service::Impl {
    explicit Impl(App& a) : app(a) {
        const std::size_t workers = app.config().max_inflight_runs + 4;
        server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
        routes();
    }

    void routes() {
        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            send(res, 200, {{"status", "ok"}});
        });

        server.Get("/v1/pipelines", [this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& plan : app.engine().plans()) out.push_back(plan_summary(*plan));
            send(res, 200, {{"pipelines", out}});
        });

        server.Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) { query(req, res); });

        server.Get(R"(/v1/runs/([^/]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string run_id = req.matches[1];
            const auto text = app.engine().trace_text(run_id);
            if (!text) return send(res, 404, error_body("not_found", "unknown run '" + run_id + "'"));
            res.status = 200;
            res.set_content(*text, "application/json");
        });

        server.Post(R"(/v1/kb/([^/]+)/ingest)", [this](const httplib::Request& req, httplib::Response& res) {
            ingest(req, res);
        });
    }

    void query(const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            return send(res, 400, error_body("syntax_error", "request body must be a JSON object"));
        }
        const auto pid = body.find("pipeline_id");
        const auto question = body.find("question");
        if (pid == body.end() || !pid->is_string() || question == body.end() || !question->is_string()) {
            return send(res, 400, error_body("missing_field", "pipeline_id and question are required strings"));
        }
        Mode mode = app.config().default_mode;
        try {
            if (const auto m = body.find("mode"); m != body.end()) {
                if (!m->is_string()) throw Error(ErrorCode::kInvalidValue, "mode must be a string");
                mode = mode_from_string(m->get<std::string>());
            }
        } catch (const Error& e) {
            return send_error(res, e);
        }

        Slot slot(inflight, app.config().max_inflight_runs);
        if (!slot.acquired()) return send(res, 429, error_body("too_many_runs", "in-flight run limit reached"));
        try {
            const RunTrace trace = app.engine().query(pid->get<std::string>(), question->get<std::string>(), mode);
            send(res, 200, query_response(trace));
        } catch (const RunFailure& f) {
            json out = error_body(code_name(f.cause()), f.what());
            out["run_id"] = f.trace().run_id;
            out["failing_node"] = f.failing_node();
            send(res, 500, out);
        } catch (const Error& e) {
            send_error(res, e);
        }
    }

    void ingest(const httplib::Request& req, httplib::Response& res) {
        const std::string kb_id = req.matches[1];
        if (!is_safe_identifier(kb_id)) return send(res, 400, error_body("invalid_value", "invalid kb_id"));
        if (!req.is_multipart_form_data() || req.files.empty()) {
            return send(res, 400, error_body("invalid_value", "expected multipart/form-data text files"));
        }
        std::vector<SourceDocument> docs;
        for (const auto& [field, file] : req.files) {
            std::string doc_id = std::filesystem::path(file.filename.empty() ? file.name : file.filename).filename().string();
            if (doc_id.empty()) return send(res, 400, error_body("invalid_value", "every file needs a name"));
            docs.push_back({std::move(doc_id), file.content});
        }
        try {
            const IngestionReport report = app.ingest(kb_id, docs);
            std::size_t total = 0;
            for (const auto& [doc, n] : report) total += n;
            send(res, 200, {{"kb_id", kb_id}, {"report", report}, {"chunks_ingested", total}});
        } catch (const Error& e) {
            send_error(res, e);
        }
    }

    App& app;
    httplib::Server server;
    std::atomic<std::size_t> inflight{0};
};

Service::Service(App& app) : impl_(std::make_unique<Impl>(app)) {}
Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void serve(const ServiceConfig& config, std::ostream& log) {
    App app(config);
    Service service(app);
    const int port = service.bind(config.host, config.port);
    log << "listening on " << config.host << ":" << port << std::endl;
    service.listen();
}

}  // namespace moa
