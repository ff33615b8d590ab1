#include "climalign/service/http.hpp"

#include <httplib.h>

#include <thread>

#include "climalign/errors.hpp"

namespace climalign::service {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg, const std::vector<std::string>& errors = {}) {
    nlohmann::json b = {{"error", msg}};
    if (!errors.empty()) b["errors"] = errors;
    send_json(res, status, b);
}

int status_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::runtime: return 500;
        case ErrorKind::not_found: return 404;
        default: return 422;
    }
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const RequestError& e) {
        send_error(res, e.status(), e.what(), e.errors());
    } catch (const nlohmann::json::parse_error& e) {
        send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
        send_error(res, status_for(e), e.what());
    } catch (const std::length_error& e) {
        send_error(res, 503, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

nlohmann::json body_of(const httplib::Request& req) {
    if (req.body.empty()) throw RequestError(400, "request body is empty");
    return nlohmann::json::parse(req.body);
}

void reject_query(const httplib::Request& req) {
    if (!req.params.empty()) throw RequestError(400, "unexpected query parameter '" + req.params.begin()->first + "'");
    const auto q = req.target.find('?');
    if (q != std::string::npos && q + 1 < req.target.size()) throw RequestError(400, "malformed query string");
}

}  // namespace

struct HttpServer::Impl {
    std::shared_ptr<Engine> engine;
    JobQueue jobs;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    Impl(std::shared_ptr<Engine> e, const ServerOptions& opt)
        : engine(std::move(e)), jobs(opt.job_workers, opt.job_capacity) {
        const std::size_t threads = std::max<std::size_t>(1, opt.http_threads);
        server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
        routes();
    }

    void submit(httplib::Response& res, const std::string& kind, Engine::Task task) {
        const auto s = jobs.submit(kind, task.config_hash, std::move(task.run));
        auto body = to_json(s.job);
        body["existing"] = s.existing;
        send_json(res, s.existing ? 200 : 202, body);
    }

    void routes() {
        server.Get("/scenarios", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                reject_query(req);
                send_json(res, 200, engine->scenarios());
            });
        });
        server.Post("/align", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, engine->align(body_of(req))); });
        });
        server.Post("/propagate", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, engine->propagate(body_of(req))); });
        });
        server.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, engine->predict(body_of(req))); });
        });
        server.Post("/calibrate", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { submit(res, "calibrate", engine->calibration_task(body_of(req))); });
        });
        server.Post("/emulator/train", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { submit(res, "train-emulator", engine->emulator_task(body_of(req))); });
        });
        server.Get("/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = req.path_params.at("id");
                const auto j = jobs.get(id);
                if (!j) throw RequestError(404, "unknown job '" + id + "'");
                send_json(res, 200, to_json(*j));
            });
        });
        server.Get("/spec", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, openapi()); });
    }
};

HttpServer::HttpServer(std::shared_ptr<Engine> engine, ServerOptions opt)
    : impl_(std::make_unique<Impl>(std::move(engine), opt)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port < 0) throw RuntimeError("cannot bind " + host + ":" + std::to_string(port));
    return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->port; }

JobQueue& HttpServer::jobs() { return impl_->jobs; }

nlohmann::json openapi() {
    auto ref = [](const char* name) { return nlohmann::json{{"$ref", std::string("#/components/schemas/") + name}}; };
    auto json_body = [&](const char* schema) {
        return nlohmann::json{{"required", true}, {"content", {{"application/json", {{"schema", ref(schema)}}}}}};
    };
    auto reply = [&](const char* desc, const char* schema) {
        return nlohmann::json{{"description", desc}, {"content", {{"application/json", {{"schema", ref(schema)}}}}}};
    };
    const nlohmann::json errors = {{"400", reply("malformed request", "Error")}, {"422", reply("invalid request content", "Error")}};
    auto with_errors = [&](nlohmann::json r) {
        r.update(errors);
        return r;
    };
    nlohmann::json paths = {
        {"/scenarios", {{"get", {{"summary", "Scenario catalog"}, {"responses", with_errors({{"200", reply("catalog", "Scenarios")}})}}}}},
        {"/align",
         {{"post",
           {{"summary", "Implied temperature of a portfolio per scenario"},
            {"requestBody", json_body("AlignRequest")},
            {"responses", with_errors({{"200", reply("summaries per scenario", "AlignResponse")}})}}}}},
        {"/propagate",
         {{"post",
           {{"summary", "Credible band of one scenario"},
            {"requestBody", json_body("PropagateRequest")},
            {"responses", with_errors({{"200", reply("band", "PropagateResponse")}})}}}}},
        {"/predict",
         {{"post",
           {{"summary", "Emulator prediction"},
            {"requestBody", json_body("PredictRequest")},
            {"responses", with_errors({{"200", reply("prediction", "Prediction")}})}}}}},
        {"/calibrate",
         {{"post",
           {{"summary", "Start a calibration job"},
            {"requestBody", json_body("CalibrateRequest")},
            {"responses",
             with_errors({{"202", reply("job queued", "Job")}, {"200", reply("identical job already known", "Job")}, {"503", reply("queue full", "Error")}})}}}}},
        {"/emulator/train",
         {{"post",
           {{"summary", "Start an emulator training job"},
            {"requestBody", json_body("TrainRequest")},
            {"responses",
             with_errors({{"202", reply("job queued", "Job")}, {"200", reply("identical job already known", "Job")}, {"503", reply("queue full", "Error")}})}}}}},
        {"/jobs/{id}",
         {{"get",
           {{"summary", "Job status"},
            {"parameters", {{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}}}},
            {"responses", {{"200", reply("job", "Job")}, {"404", reply("unknown job", "Error")}}}}}}},
        {"/spec", {{"get", {{"summary", "This description"}, {"responses", {{"200", {{"description", "OpenAPI document"}}}}}}}}}};

    const nlohmann::json str = {{"type", "string"}}, num = {{"type", "number"}}, integer = {{"type", "integer"}};
    const nlohmann::json obj = {{"type", "object"}}, boolean = {{"type", "boolean"}};
    const nlohmann::json uncertainty = {{"type", "object"},
                                        {"properties", {{"family", {{"type", "string"}, {"enum", {"normal", "lognormal"}}}}, {"mu", num}, {"sigma", num}}}};
    const nlohmann::json constituent = {{"type", "object"},
                                        {"required", {"sector"}},
                                        {"properties",
                                         {{"name", str},
                                          {"sector", str},
                                          {"scope1_kt", num},
                                          {"scope2_kt", num},
                                          {"scope3_kt", num},
                                          {"gva_musd", num},
                                          {"gva", num},
                                          {"currency", str},
                                          {"reporting_year", integer},
                                          {"fiscal_years", {{"type", "array"}, {"items", obj}}}}}};
    nlohmann::json schemas = {
        {"Error", {{"type", "object"}, {"properties", {{"error", str}, {"errors", {{"type", "array"}, {"items", str}}}}}}},
        {"Scenarios", {{"type", "object"}, {"properties", {{"scenarios", {{"type", "array"}, {"items", obj}}}}}}},
        {"Portfolio",
         {{"type", "object"},
          {"required", {"base_year", "constituents"}},
          {"properties",
           {{"name", str},
            {"base_year", integer},
            {"currency", str},
            {"constituents", {{"type", "array"}, {"items", constituent}}},
            {"reported_eei", {{"type", "object"}, {"additionalProperties", num}}}}}}},
        {"AlignRequest",
         {{"type", "object"},
          {"required", {"portfolio"}},
          {"properties",
           {{"portfolio", ref("Portfolio")},
            {"benchmark", ref("Portfolio")},
            {"scenarios", {{"type", "array"}, {"items", str}}},
            {"mode", {{"type", "string"}, {"enum", {"mcmc", "emulator"}}}},
            {"chain", str},
            {"n_draws", integer},
            {"seed", integer},
            {"uncertainty", uncertainty},
            {"levels", {{"type", "array"}, {"items", num}}},
            {"scopes", {{"type", "array"}, {"items", integer}}},
            {"use_reported_eei", boolean},
            {"include_bands", boolean}}}}},
        {"AlignResponse",
         {{"type", "object"},
          {"properties",
           {{"provenance", obj}, {"adjustment", obj}, {"results", {{"type", "array"}, {"items", obj}}}, {"summary", obj}, {"warnings", {{"type", "array"}, {"items", str}}}}}}},
        {"PropagateRequest",
         {{"type", "object"},
          {"required", {"scenario"}},
          {"properties",
           {{"scenario", str}, {"chain", str}, {"n_draws", integer}, {"seed", integer}, {"uncertainty", uncertainty}, {"levels", {{"type", "array"}, {"items", num}}}, {"first_output_year", integer}}}}},
        {"PropagateResponse", {{"type", "object"}, {"properties", {{"provenance", obj}, {"band", obj}}}}},
        {"PredictRequest", {{"type", "object"}, {"properties", {{"co2e", num}, {"inputs", {{"type", "array"}, {"items", num}}}, {"factor", num}}}}},
        {"Prediction", {{"type", "object"}, {"properties", {{"years", {{"type", "array"}, {"items", integer}}}, {"scenarios", {{"type", "array"}, {"items", obj}}}, {"extrapolated", boolean}, {"warnings", {{"type", "array"}, {"items", str}}}, {"provenance", obj}}}}},
        {"CalibrateRequest", {{"type", "object"}, {"properties", {{"scenario", str}, {"config", obj}}}}},
        {"TrainRequest",
         {{"type", "object"},
          {"properties",
           {{"chain", str}, {"n_draws", integer}, {"grid_points", integer}, {"scale_lo", num}, {"scale_hi", num}, {"epochs", integer}, {"seed", integer}, {"train_seed", integer}, {"input_mode", str}}}}},
        {"Job",
         {{"type", "object"},
          {"properties",
           {{"id", str},
            {"kind", str},
            {"status", {{"type", "string"}, {"enum", {"queued", "running", "done", "failed"}}}},
            {"progress", num},
            {"config_hash", str},
            {"result", obj},
            {"error", str},
            {"existing", boolean}}}}}};
    return {{"openapi", "3.0.3"},
            {"info", {{"title", "climalign service"}, {"version", "0.1.0"}}},
            {"paths", paths},
            {"components", {{"schemas", schemas}}}};
}

}  // namespace climalign::service
