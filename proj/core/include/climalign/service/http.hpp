#pragma once

#include <memory>
#include <string>

#include "climalign/service/engine.hpp"
#include "climalign/service/jobs.hpp"

namespace climalign::service {

struct ServerOptions {
    std::size_t job_workers = 1;
    std::size_t job_capacity = 16;
    std::size_t http_threads = 8;
};

// Routes: GET /scenarios, POST /align, POST /propagate, POST /predict,
// POST /calibrate, POST /emulator/train, GET /jobs/{id}, GET /spec.
class HttpServer {
public:
    HttpServer(std::shared_ptr<Engine> engine, ServerOptions opt = {});
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 binds an ephemeral port. Returns the bound port.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void start();   // listen() on a background thread
    void stop();
    int port() const;

    JobQueue& jobs();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// OpenAPI 3 description of the routes above.
nlohmann::json openapi();

}  // namespace climalign::service
