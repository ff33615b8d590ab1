#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "climalign/calibration/chain.hpp"
#include "climalign/errors.hpp"
#include "climalign/service/engine.hpp"
#include "climalign/service/http.hpp"
#include "climalign/util/csv.hpp"

namespace fs = std::filesystem;
using namespace climalign;
using nlohmann::json;

namespace {

enum Exit : int { ok = 0, unexpected = 1, usage = 2, config = 3, data = 4, not_found = 5, domain = 6, runtime = 7 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::config: return config;
        case ErrorKind::schema:
        case ErrorKind::format:
        case ErrorKind::data: return data;
        case ErrorKind::not_found: return not_found;
        case ErrorKind::domain: return domain;
        case ErrorKind::runtime: return runtime;
    }
    return unexpected;
}

struct Common {
    std::string data_dir;
    std::string artifacts;
    std::string json_out;
    std::string csv_out;
};

struct Uncertainty {
    std::string family;
    double mu = 1.0;
    double sigma = -1.0;

    void add(CLI::App* c) {
        c->add_option("--family", family, "Emission error family (normal | lognormal)");
        c->add_option("--mu", mu, "Emission error mean, percent");
        c->add_option("--sigma", sigma, "Emission error SD, percent; enables emission uncertainty");
    }
    std::optional<json> to_json() const {
        if (family.empty() && sigma < 0.0) return std::nullopt;
        return json{{"family", family.empty() ? "lognormal" : family}, {"mu", mu}, {"sigma", sigma < 0.0 ? 13.0 : sigma}};
    }
};

fs::path artifacts_dir(const Common& c) {
    if (!c.artifacts.empty()) return c.artifacts;
    if (const char* env = std::getenv("CLIMALIGN_ARTIFACTS"); env && *env) return env;
    return "artifacts";
}

bool chain_exists(const fs::path& stem) {
    auto p = stem;
    p += ".chain";
    return fs::exists(p);
}

bool model_exists(const fs::path& stem) {
    auto p = stem;
    p += ".emu";
    return fs::exists(p);
}

std::shared_ptr<service::Engine> make_engine(const Common& c, const std::string& model = {}) {
    service::EngineConfig cfg;
    if (!c.data_dir.empty()) cfg.data_dir = c.data_dir;
    cfg.artifacts_dir = artifacts_dir(c);
    if (chain_exists(cfg.artifacts_dir / "posterior")) cfg.chain = cfg.artifacts_dir / "posterior";
    if (!model.empty())
        cfg.model = fs::path(model);
    else if (model_exists(cfg.artifacts_dir / "emulator"))
        cfg.model = cfg.artifacts_dir / "emulator";
    return std::make_shared<service::Engine>(cfg);
}

// "prior" and "posterior" pass through; anything else is a chain file stem.
std::string chain_name(service::Engine& e, const std::string& arg) {
    if (arg == "prior" || arg == "posterior") return arg;
    auto c = std::make_shared<const calibration::PosteriorChain>(calibration::load_chain(arg));
    e.register_chain(c, false);
    return c->id;
}

void write_outputs(const Common& c, const json& j, const std::string& csv) {
    if (!c.json_out.empty()) util::write_file(c.json_out, j.dump(2));
    if (!c.csv_out.empty()) util::write_file(c.csv_out, csv);
}

void print_header(std::uint64_t seed, const std::string& hash) {
    std::printf("seed %llu  config %s\n", static_cast<unsigned long long>(seed), hash.c_str());
}

std::string band_csv(const json& band) {
    std::string out = "year,median,mean";
    for (const auto& b : band["bands"]) {
        const auto tag = util::format_double(std::round(b["level"].get<double>() * 100.0 * 1e9) / 1e9);
        out += ",lo" + tag + ",hi" + tag;
    }
    out += "\n";
    const auto& years = band["years"];
    for (std::size_t y = 0; y < years.size(); ++y) {
        out += std::to_string(years[y].get<int>()) + "," + util::format_double(band["median"][y].get<double>()) + "," +
               util::format_double(band["mean"][y].get<double>());
        for (const auto& b : band["bands"])
            out += "," + util::format_double(b["lower"][y].get<double>()) + "," + util::format_double(b["upper"][y].get<double>());
        out += "\n";
    }
    return out;
}

int run_calibrate(const Common& c, const std::string& scenario, const std::string& config_file, std::size_t iterations,
                  std::uint64_t seed, const std::string& out) {
    auto engine = make_engine(c);
    json cfg = config_file.empty() ? json::object() : json::parse(util::read_file(config_file));
    if (iterations) cfg["n_iter"] = iterations;
    cfg["seed"] = seed;
    auto task = engine->calibration_task({{"scenario", scenario}, {"config", cfg}});
    print_header(seed, task.config_hash);
    int last = -1;
    const auto result = task.run([&](double p) {
        const int pct = static_cast<int>(p * 100.0);
        if (pct / 10 != last / 10) {
            std::fprintf(stderr, "calibrate: %d%%\n", pct);
            last = pct;
        }
    });
    const auto chain = calibration::load_chain(result["path"].get<std::string>());
    const fs::path stem = out.empty() ? artifacts_dir(c) / "posterior" : fs::path(out);
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    calibration::save_chain(chain, stem);
    std::printf("chain %s  acceptance %.3f  samples %zu  burn-in %zu\nwritten %s.chain\n", chain.id.c_str(),
                chain.acceptance_rate, chain.size(), chain.burn_in, stem.string().c_str());
    std::string csv = "parameter,mean,sd,iat,rhat\n";
    auto cell = [](const json& v) { return v.is_number() ? util::format_double(v.get<double>()) : std::string(); };
    for (const auto& p : result["diagnostics"]["parameters"])
        csv += p["name"].get<std::string>() + "," + cell(p["mean"]) + "," + cell(p["sd"]) + "," + cell(p["iat"]) + "," +
               cell(p["rhat"]) + "\n";
    write_outputs(c, result, csv);
    return ok;
}

int run_propagate(const Common& c, const std::string& scenario, const std::string& chain, std::size_t n,
                  std::uint64_t seed, const Uncertainty& u, const std::vector<double>& levels) {
    auto engine = make_engine(c);
    json req = {{"scenario", scenario}, {"chain", chain_name(*engine, chain)}, {"n_draws", n}, {"seed", seed}, {"levels", levels}};
    if (auto uj = u.to_json()) req["uncertainty"] = *uj;
    const auto res = engine->propagate(req);
    print_header(seed, res["provenance"]["config_hash"].get<std::string>());
    std::printf("scenario %s  source %s  draws %zu\n", scenario.c_str(), res["provenance"]["source"].get<std::string>().c_str(), n);
    const auto& band = res["band"];
    std::printf("%6s %8s %8s", "year", "median", "mean");
    for (const auto& b : band["bands"]) std::printf("   %5.1f%% band      ", b["level"].get<double>() * 100.0);
    std::printf("\n");
    const auto& years = band["years"];
    for (std::size_t y = 0; y < years.size(); ++y) {
        const int yr = years[y].get<int>();
        if (yr != 2020 && yr != 2030 && yr != 2050 && yr != 2075 && yr != 2100) continue;
        std::printf("%6d %8.3f %8.3f", yr, band["median"][y].get<double>(), band["mean"][y].get<double>());
        for (const auto& b : band["bands"]) std::printf("   (%6.3f, %6.3f)", b["lower"][y].get<double>(), b["upper"][y].get<double>());
        std::printf("\n");
    }
    write_outputs(c, res, band_csv(band));
    return ok;
}

int run_align(const Common& c, const std::string& portfolio, const std::string& benchmark,
              const std::vector<std::string>& scenarios, const std::string& mode, const std::string& chain,
              const std::string& model, std::size_t n, std::uint64_t seed, const Uncertainty& u,
              const std::vector<int>& scopes, bool computed_eei) {
    auto engine = make_engine(c, model);
    json req = {{"portfolio", json::parse(util::read_file(portfolio))},
                {"mode", mode},
                {"n_draws", n},
                {"seed", seed},
                {"scopes", scopes},
                {"use_reported_eei", !computed_eei}};
    if (mode == "mcmc") req["chain"] = chain_name(*engine, chain);
    if (!benchmark.empty()) req["benchmark"] = json::parse(util::read_file(benchmark));
    if (!scenarios.empty()) req["scenarios"] = scenarios;
    if (auto uj = u.to_json()) req["uncertainty"] = *uj;
    const auto res = engine->align(req);
    print_header(seed, res["provenance"]["config_hash"].get<std::string>());
    const auto& prov = res["provenance"];
    std::printf("portfolio %s  benchmark %s  mode %s  %s %s\n", res["portfolio"].get<std::string>().c_str(),
                res["benchmark"].get<std::string>().c_str(), mode.c_str(), mode == "mcmc" ? "source" : "model",
                (mode == "mcmc" ? prov["source"] : prov["model_id"]).get<std::string>().c_str());
    std::printf("global emission factor %.6f\n", res["adjustment"]["factor"].get<double>());
    const int year = res["summary"]["year"].get<int>();
    std::printf("%-14s %10s %10s %10s   (mean temperature %d, K)\n", "scenario", "baseline", "portfolio", "delta", year);
    std::string csv = "scenario,baseline,portfolio,delta\n";
    for (const auto& r : res["summary"]["rows"]) {
        const double b = r["baseline"].get<double>(), p = r["portfolio"].get<double>();
        std::printf("%-14s %10.3f %10.3f %10.4f\n", r["scenario"].get<std::string>().c_str(), b, p, b - p);
        csv += r["scenario"].get<std::string>() + "," + util::format_double(b) + "," + util::format_double(p) + "," +
               util::format_double(b - p) + "\n";
    }
    for (const auto& w : res["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
    write_outputs(c, res, csv);
    return ok;
}

int run_emulate_train(const Common& c, const std::string& chain, std::size_t n, std::size_t grid, std::size_t epochs,
                      std::uint64_t seed, const std::string& out) {
    auto engine = make_engine(c);
    json req = {{"chain", chain_name(*engine, chain)}, {"n_draws", n}, {"grid_points", grid}, {"epochs", epochs}, {"seed", seed}};
    auto task = engine->emulator_task(req);
    print_header(seed, task.config_hash);
    int last = -1;
    const auto result = task.run([&](double p) {
        const int pct = static_cast<int>(p * 100.0);
        if (pct / 10 != last / 10) {
            std::fprintf(stderr, "emulate-train: %d%%\n", pct);
            last = pct;
        }
    });
    const auto model = emulator::load_model(result["path"].get<std::string>());
    const fs::path stem = out.empty() ? artifacts_dir(c) / "emulator" : fs::path(out);
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    emulator::save_model(model, stem);
    const auto& v = result["validation"];
    std::printf("model %s  converged %s\nholdout rmse median %.4f K  quantiles %.4f K  mean %.4f K  (%zu samples)\nwritten %s.emu\n",
                model.id.c_str(), model.converged ? "yes" : "no", v["rmse_median"].get<double>(),
                v["rmse_quantiles"].get<double>(), v["rmse_mean"].get<double>(), v["samples"].get<std::size_t>(),
                stem.string().c_str());
    write_outputs(c, result, "");
    return ok;
}

int run_emulate_predict(const Common& c, const std::string& model, std::optional<double> co2e, std::optional<double> factor) {
    auto engine = make_engine(c, model);
    if (co2e.has_value() == factor.has_value()) throw service::RequestError(422, "give exactly one of --co2e, --factor");
    const json req = co2e ? json{{"co2e", *co2e}} : json{{"factor", *factor}};
    const auto res = engine->predict(req);
    print_header(0, res["provenance"]["config_hash"].get<std::string>());
    std::printf("model %s  input %s\n", res["provenance"]["model_id"].get<std::string>().c_str(), res["input"].dump().c_str());
    const auto& years = res["years"];
    std::string csv = "scenario,year,mean,median,q05,q95\n";
    std::printf("%-14s %6s %8s %8s %8s %8s\n", "scenario", "year", "mean", "median", "q05", "q95");
    for (const auto& s : res["scenarios"]) {
        const auto id = s["scenario"].get<std::string>();
        for (std::size_t y = 0; y < years.size(); ++y) {
            const int yr = years[y].get<int>();
            const double m = s["mean"][y], md = s["median"][y], lo = s["q05"][y], hi = s["q95"][y];
            csv += id + "," + std::to_string(yr) + "," + util::format_double(m) + "," + util::format_double(md) + "," +
                   util::format_double(lo) + "," + util::format_double(hi) + "\n";
            if (yr == 2050 || yr == years.back().get<int>())
                std::printf("%-14s %6d %8.3f %8.3f %8.3f %8.3f\n", id.c_str(), yr, m, md, lo, hi);
        }
    }
    for (const auto& w : res["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
    write_outputs(c, res, csv);
    return ok;
}

int run_serve(const Common& c, const std::string& host, int port, std::size_t workers, std::size_t threads,
              const std::string& model) {
    auto engine = make_engine(c, model);
    service::ServerOptions opt;
    opt.job_workers = workers;
    opt.http_threads = threads;
    service::HttpServer server(engine, opt);
    const int bound = server.bind(host, port);
    std::printf("listening on http://%s:%d\n", host.c_str(), bound);
    std::fflush(stdout);
    server.listen();
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Portfolio temperature alignment with calibrated climate-model uncertainty"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--data", common.data_dir, "Data bundle directory (default $CLIMALIGN_DATA or the bundled data)");
    app.add_option("--artifacts", common.artifacts, "Directory for chains and models (default $CLIMALIGN_ARTIFACTS or ./artifacts)");

    auto outputs = [&](CLI::App* s) {
        s->add_option("--json", common.json_out, "Write the full result as JSON");
        s->add_option("--csv", common.csv_out, "Write a CSV table");
    };

    std::string scenario = "SSP2-RCP4.5", config_file, out, chain = "posterior", model, portfolio, benchmark, mode = "mcmc";
    std::string host = "127.0.0.1";
    std::size_t iterations = 0, n = 1000, grid = 200, epochs = 2000, workers = 1, threads = 8;
    std::uint64_t seed = 42;
    int port = 8080;
    std::vector<std::string> scenarios;
    std::vector<double> levels = {0.90, 0.99};
    std::vector<int> scopes = {1, 2, 3};
    bool computed_eei = false;
    Uncertainty unc;
    std::optional<double> co2e, factor;

    auto* cal = app.add_subcommand("calibrate", "Run DRAM calibration against the bundled observations");
    cal->add_option("--scenario", scenario, "Scenario providing the historical emissions");
    cal->add_option("--config", config_file, "Calibration config JSON");
    cal->add_option("--iterations", iterations, "Chain length (overrides the config)");
    cal->add_option("--seed", seed, "Sampler seed");
    cal->add_option("--out", out, "Chain file stem (default <artifacts>/posterior)");
    outputs(cal);

    auto* prop = app.add_subcommand("propagate", "Credible band of one scenario");
    prop->add_option("--scenario", scenario, "Scenario id")->required();
    prop->add_option("--chain", chain, "prior, posterior or a chain file stem");
    prop->add_option("--n", n, "Monte Carlo draws");
    prop->add_option("--seed", seed, "Draw seed");
    prop->add_option("--levels", levels, "Credible levels");
    unc.add(prop);
    outputs(prop);

    auto* al = app.add_subcommand("align", "Implied temperature of a portfolio");
    al->add_option("--portfolio", portfolio, "Portfolio JSON")->required()->check(CLI::ExistingFile);
    al->add_option("--benchmark", benchmark, "Benchmark ensemble JSON (default: bundled)")->check(CLI::ExistingFile);
    al->add_option("--scenario", scenarios, "Scenario id (repeatable)");
    al->add_option("--mode", mode, "mcmc or emulator")->check(CLI::IsMember({"mcmc", "emulator"}));
    al->add_option("--chain", chain, "prior, posterior or a chain file stem");
    al->add_option("--model", model, "Emulator model stem (default <artifacts>/emulator)");
    al->add_option("--n", n, "Monte Carlo draws");
    al->add_option("--seed", seed, "Draw seed");
    al->add_option("--scopes", scopes, "Emission scopes to include");
    al->add_flag("--computed-eei", computed_eei, "Ignore reported sector EEIs");
    unc.add(al);
    outputs(al);

    auto* et = app.add_subcommand("emulate-train", "Generate labels and train the emulator");
    et->add_option("--chain", chain, "prior, posterior or a chain file stem");
    et->add_option("--n", n, "Draws per label");
    et->add_option("--grid", grid, "Grid points");
    et->add_option("--epochs", epochs, "Training epochs");
    et->add_option("--seed", seed, "Draw seed");
    et->add_option("--out", out, "Model stem (default <artifacts>/emulator)");
    outputs(et);

    auto* ep = app.add_subcommand("emulate-predict", "Emulator prediction");
    ep->add_option("--model", model, "Model stem (default <artifacts>/emulator)");
    ep->add_option("--co2e", co2e, "Base-year emissions, GtCO2e/yr");
    ep->add_option("--factor", factor, "Multiple of the reference base-year emissions");
    outputs(ep);

    auto* sv = app.add_subcommand("serve", "Run the HTTP service");
    sv->add_option("--host", host, "Bind address");
    sv->add_option("--port", port, "Port; 0 picks a free one");
    sv->add_option("--workers", workers, "Job worker threads");
    sv->add_option("--threads", threads, "HTTP worker threads");
    sv->add_option("--model", model, "Emulator model stem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (cal->parsed()) return run_calibrate(common, scenario, config_file, iterations, seed, out);
        if (prop->parsed()) return run_propagate(common, scenario, chain, n, seed, unc, levels);
        if (al->parsed())
            return run_align(common, portfolio, benchmark, scenarios, mode, chain, model, n, seed, unc, scopes, computed_eei);
        if (et->parsed()) return run_emulate_train(common, chain, n, grid, epochs, seed, out);
        if (ep->parsed()) return run_emulate_predict(common, model, co2e, factor);
        if (sv->parsed()) return run_serve(common, host, port, workers, threads, model);
    } catch (const service::RequestError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        for (const auto& m : e.errors()) std::fprintf(stderr, "  %s\n", m.c_str());
        return e.status() == 404 ? not_found : config;
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
        return data;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return unexpected;
    }
    return usage;
}
