#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

#include "climalign/calibration/prior.hpp"
#include "climalign/service/engine.hpp"
#include "climalign/service/http.hpp"
#include "climalign/util/csv.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen's headers.
#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace climalign;
using namespace climalign::service;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("climalign_service_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json ssab() { return json::parse(util::read_file(fs::path(CLIMALIGN_TEST_DATA) / "portfolios" / "ssab.json")); }

// One engine and server shared by the HTTP cases; a tiny emulator is trained once.
struct Fixture {
    std::shared_ptr<Engine> engine;
    std::unique_ptr<HttpServer> server;

    Fixture() {
        EngineConfig cfg;
        cfg.data_dir = CLIMALIGN_TEST_DATA;
        cfg.artifacts_dir = scratch("artifacts");
        engine = std::make_shared<Engine>(cfg);
        engine->emulator_task({{"chain", "prior"}, {"n_draws", 50}, {"grid_points", 12}, {"epochs", 300}}).run([](double) {});
        server = std::make_unique<HttpServer>(engine, ServerOptions{1, 16, 8});
        server->bind("127.0.0.1", 0);
        server->start();
    }
    ~Fixture() { server->stop(); }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", server->port());
        c.set_read_timeout(120, 0);
        return c;
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

httplib::Result post(const std::string& path, const json& body) {
    return fixture().client().Post(path, body.dump(), "application/json");
}

json align_request(std::uint64_t seed = 42) {
    return {{"portfolio", ssab()}, {"scenarios", {"SSP2-RCP4.5"}}, {"chain", "prior"}, {"n_draws", 200}, {"seed", seed}};
}

// Numeric payload without the per-request hash.
json numbers_of(json j) {
    j["provenance"].erase("config_hash");
    return j;
}

}  // namespace

TEST_CASE("GET /scenarios lists the bundled catalog") {
    auto c = fixture().client();
    auto r = c.Get("/scenarios");
    REQUIRE(r);
    CHECK(r->status == 200);
    const auto j = json::parse(r->body);
    REQUIRE(j["scenarios"].size() == 5);
    std::vector<std::string> ids;
    for (const auto& s : j["scenarios"]) ids.push_back(s["id"]);
    CHECK(std::find(ids.begin(), ids.end(), "SSP5-RCP8.5") != ids.end());

    auto bad = c.Get("/scenarios?x=1");
    REQUIRE(bad);
    CHECK(bad->status == 400);
}

TEST_CASE("empty store yields an empty catalog") {
    EngineConfig cfg;
    cfg.data_dir = scratch("empty_data");
    cfg.artifacts_dir = scratch("empty_artifacts");
    Engine e(cfg);
    CHECK(e.scenarios()["scenarios"].empty());
}

TEST_CASE("POST /align is deterministic and carries provenance") {
    auto a = post("/align", align_request());
    auto b = post("/align", align_request());
    REQUIRE(a);
    REQUIRE(b);
    REQUIRE(a->status == 200);
    CHECK(a->body == b->body);
    const auto j = json::parse(a->body);
    CHECK(j["provenance"]["source"].get<std::string>().rfind("prior:", 0) == 0);
    CHECK(j["provenance"]["seed"] == 42);
    REQUIRE(j["summary"]["rows"].size() == 1);
    const auto& row = j["summary"]["rows"][0];
    CHECK(row["scenario"] == "SSP2-RCP4.5");
    CHECK(row["portfolio"].get<double>() < row["baseline"].get<double>());

    auto c = post("/align", align_request(43));
    REQUIRE(c);
    CHECK(json::parse(c->body)["summary"] != j["summary"]);
}

TEST_CASE("POST /align rejects invalid input") {
    auto bad = align_request();
    bad["portfolio"]["constituents"][0].erase("gva_musd");
    bad["portfolio"]["constituents"][0]["scope1_kt"] = -1;
    auto r = post("/align", bad);
    REQUIRE(r);
    CHECK(r->status == 422);
    const auto j = json::parse(r->body);
    REQUIRE(j.contains("errors"));
    std::string all;
    for (const auto& e : j["errors"]) all += e.get<std::string>() + "\n";
    CHECK(all.find("gva") != std::string::npos);
    CHECK(all.find("scope1_kt") != std::string::npos);

    auto unknown = align_request();
    unknown["colour"] = "green";
    r = post("/align", unknown);
    REQUIRE(r);
    CHECK(r->status == 422);

    auto scen = align_request();
    scen["scenarios"] = {"SSP9-RCP0.0"};
    r = post("/align", scen);
    REQUIRE(r);
    CHECK(r->status == 422);

    r = fixture().client().Post("/align", "{\"portfolio\": ", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
}

TEST_CASE("POST /align in emulator mode is fast and flags extrapolation") {
    json req = {{"portfolio", ssab()}, {"mode", "emulator"}};
    const auto t0 = std::chrono::steady_clock::now();
    auto r = post("/align", req);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(r);
    REQUIRE(r->status == 200);
    CHECK(ms < 500.0);
    auto j = json::parse(r->body);
    CHECK(j["provenance"].contains("model_id"));
    CHECK(j["provenance"]["extrapolated"] == false);
    CHECK(j["summary"]["rows"].size() == 3);

    // Reported EEI far above the benchmark pushes the global factor outside the training envelope.
    req["portfolio"]["reported_eei"]["Iron and steel"] = 5183.11 * 40.0;
    r = post("/align", req);
    REQUIRE(r);
    CHECK(r->status == 200);
    j = json::parse(r->body);
    CHECK(j["provenance"]["extrapolated"] == true);
    CHECK_FALSE(j["warnings"].empty());
}

TEST_CASE("POST /predict and /propagate") {
    auto r = post("/predict", {{"factor", 1.0}});
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["scenarios"].size() == 5);
    r = post("/predict", {{"factor", 1.0}, {"co2e", 50.0}});
    REQUIRE(r);
    CHECK(r->status == 422);

    r = post("/propagate", {{"scenario", "SSP1-RCP2.6"}, {"chain", "prior"}, {"n_draws", 100}, {"levels", {0.9}}});
    REQUIRE(r);
    REQUIRE(r->status == 200);
    const auto j = json::parse(r->body);
    CHECK(j["band"]["bands"].size() == 1);
    CHECK(j["provenance"]["n_draws"] == 100);
}

TEST_CASE("POST /calibrate runs as a job") {
    const json req = {{"config", {{"n_iter", 1500}, {"seed", 3}}}};
    auto r = post("/calibrate", req);
    REQUIRE(r);
    REQUIRE(r->status == 202);
    const auto job = json::parse(r->body);
    const auto id = job["id"].get<std::string>();
    CHECK(job["kind"] == "calibrate");

    auto dup = post("/calibrate", req);
    REQUIRE(dup);
    CHECK(dup->status == 200);
    CHECK(json::parse(dup->body)["id"] == id);

    auto c = fixture().client();
    json status;
    double last_progress = 0.0;
    for (int i = 0; i < 600; ++i) {
        auto g = c.Get("/jobs/" + id);
        REQUIRE(g);
        REQUIRE(g->status == 200);
        status = json::parse(g->body);
        CHECK(status["progress"].get<double>() >= last_progress);
        last_progress = status["progress"].get<double>();
        if (status["status"] == "done" || status["status"] == "failed") break;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    REQUIRE(status["status"] == "done");
    CHECK(last_progress == 1.0);
    fs::path chain = status["result"]["path"].get<std::string>();
    CHECK(fs::exists(chain.string() + ".chain"));
    CHECK(fs::exists(chain.string() + ".json"));

    // The finished chain is addressable by id.
    const auto chain_id = status["result"]["chain_id"].get<std::string>();
    auto a = align_request();
    a["chain"] = chain_id;
    auto al = post("/align", a);
    REQUIRE(al);
    CHECK(al->status == 200);
    CHECK(json::parse(al->body)["provenance"]["source"] == "chain:" + chain_id);

    auto missing = c.Get("/jobs/no-such-job");
    REQUIRE(missing);
    CHECK(missing->status == 404);
}

TEST_CASE("POST /calibrate rejects invalid prior bounds") {
    auto prior = calibration::to_json(calibration::PriorSpec::fair_defaults());
    auto& first = prior["priors"][0];
    first["lower"] = 2.0;
    first["upper"] = 1.0;
    auto r = post("/calibrate", {{"config", {{"n_iter", 100}, {"prior", prior}}}});
    REQUIRE(r);
    CHECK(r->status == 422);
    CHECK(json::parse(r->body).contains("errors"));
}

TEST_CASE("GET /spec serves the OpenAPI description") {
    auto r = fixture().client().Get("/spec");
    REQUIRE(r);
    CHECK(r->status == 200);
    const auto j = json::parse(r->body);
    CHECK(j["openapi"].get<std::string>().rfind("3.", 0) == 0);
    for (const char* p : {"/scenarios", "/align", "/propagate", "/predict", "/calibrate", "/emulator/train", "/jobs/{id}"})
        CHECK_MESSAGE(j["paths"].contains(p), p);
}

TEST_CASE("32 concurrent /align clients match the serial result") {
    std::vector<json> requests;
    for (int i = 0; i < 32; ++i) {
        auto req = align_request(100 + static_cast<std::uint64_t>(i % 4));
        req["scenarios"] = {"SSP1-RCP2.6", "SSP5-RCP8.5"};
        requests.push_back(req);
    }
    std::vector<json> serial;
    for (const auto& q : requests) {
        auto r = post("/align", q);
        REQUIRE(r);
        REQUIRE(r->status == 200);
        serial.push_back(numbers_of(json::parse(r->body)));
    }
    std::vector<std::future<json>> parallel;
    for (const auto& q : requests)
        parallel.push_back(std::async(std::launch::async, [q] {
            auto r = post("/align", q);
            return r && r->status == 200 ? numbers_of(json::parse(r->body)) : json();
        }));
    for (std::size_t i = 0; i < parallel.size(); ++i) CHECK(parallel[i].get() == serial[i]);
}

// Command-line tool.

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(CLIMALIGN_CLI) + " --data " + CLIMALIGN_TEST_DATA + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int st = ::pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

}  // namespace

TEST_CASE("CLI verbs print seed and config hash and map failures to exit codes") {
    const auto art = scratch("cli_artifacts");
    const std::string a = "--artifacts " + art.string() + " ";

    auto r = cli(a + "calibrate --iterations 3000 --seed 5");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed 5  config ") == 0);
    CHECK(fs::exists(art / "posterior.chain"));

    const auto prior_json = art / "prior.json", post_json = art / "post.json";
    r = cli(a + "propagate --scenario SSP5-RCP8.5 --chain prior --n 300 --json " + prior_json.string());
    REQUIRE(r.code == 0);
    r = cli(a + "propagate --scenario SSP5-RCP8.5 --chain posterior --n 300 --json " + post_json.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed 42  config ") == 0);
    auto width_2050 = [](const fs::path& p) {
        const auto band = uncertainty::band_from_json(json::parse(util::read_file(p))["band"]);
        return band.width(0.9, 2050);
    };
    CHECK(width_2050(post_json) < width_2050(prior_json));

    const auto csv = art / "align.csv";
    r = cli(a + "align --portfolio " + (fs::path(CLIMALIGN_TEST_DATA) / "portfolios" / "ssab.json").string() +
            " --scenario SSP2-RCP4.5 --mode mcmc --n 200 --csv " + csv.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("SSP2-RCP4.5") != std::string::npos);
    CHECK(util::read_file(csv).rfind("scenario,baseline,portfolio,delta\nSSP2-RCP4.5,", 0) == 0);

    r = cli(a + "emulate-train --chain prior --n 40 --grid 10 --epochs 200");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(art / "emulator.emu"));
    r = cli(a + "emulate-predict --co2e 50");
    CHECK(r.code == 0);
    CHECK(r.out.find("SSP1-RCP1.9") != std::string::npos);

    CHECK(cli(a + "propagate").code == 2);
    CHECK(cli(a + "frobnicate").code == 2);
    CHECK(cli(a + "propagate --scenario NOPE --chain prior").code == 3);
    CHECK(cli(a + "propagate --scenario SSP1-RCP2.6 --chain " + (art / "missing").string()).code == 5);
    CHECK(cli(a + "emulate-predict --co2e 50 --factor 1").code == 3);
}

TEST_CASE("CLI serve --port 0 binds an ephemeral port and prints it") {
    const auto art = scratch("serve_artifacts").string();
    int fds[2];
    REQUIRE(::pipe(fds) == 0);
    const pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[0]);
        ::close(fds[1]);
        ::execl(CLIMALIGN_CLI, CLIMALIGN_CLI, "--data", CLIMALIGN_TEST_DATA, "--artifacts", art.c_str(), "serve", "--port", "0",
                static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    std::string line;
    char ch = 0;
    while (::read(fds[0], &ch, 1) == 1 && ch != '\n') line += ch;
    ::close(fds[0]);
    const auto colon = line.rfind(':');
    REQUIRE(line.rfind("listening on http://127.0.0.1:", 0) == 0);
    const int port = std::stoi(line.substr(colon + 1));
    CHECK(port > 0);
    httplib::Client c("127.0.0.1", port);
    auto r = c.Get("/scenarios");
    REQUIRE(r);
    CHECK(r->status == 200);
    ::kill(pid, SIGTERM);
    int st = 0;
    ::waitpid(pid, &st, 0);
}
