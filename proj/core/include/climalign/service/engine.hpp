#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "climalign/calibration/chain.hpp"
#include "climalign/emulator/emulator.hpp"
#include "climalign/scenario/store.hpp"
#include "climalign/socioecon/portfolio.hpp"
#include "climalign/uncertainty/propagate.hpp"

namespace climalign::service {

// Rejected request; status is the HTTP status a client should see.
class RequestError : public std::runtime_error {
public:
    RequestError(int status, const std::string& what, std::vector<std::string> errors = {})
        : std::runtime_error(what), status_(status), errors_(std::move(errors)) {}
    int status() const noexcept { return status_; }
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    int status_;
    std::vector<std::string> errors_;
};

struct EngineConfig {
    std::filesystem::path data_dir;       // empty = scenario::default_bundle_path()
    std::filesystem::path artifacts_dir;  // chains/ and models/ are written here
    std::optional<std::filesystem::path> chain;  // posterior chain stem loaded at start
    std::optional<std::filesystem::path> model;  // emulator model stem loaded at start
    std::size_t cache_capacity = 8;              // retained parameter-draw caches
    std::size_t max_draws = 100000;
};

// Canonical hash of a request or configuration.
std::string config_hash(const nlohmann::json& j);

// Request handling shared by the HTTP service and the command-line tool.
// Stored chains, models and scenarios are immutable snapshots; registering a
// new one swaps a pointer and never mutates what a running request holds.
class Engine {
public:
    explicit Engine(EngineConfig cfg);

    const EngineConfig& config() const { return cfg_; }
    std::shared_ptr<const scenario::DataBundle> bundle() const;

    // {"scenarios": [{id, source, first_year, last_year, branch_year, gases}]}
    nlohmann::json scenarios() const;

    // See the OpenAPI description for the request fields.
    nlohmann::json align(const nlohmann::json& req) const;
    nlohmann::json propagate(const nlohmann::json& req) const;
    nlohmann::json predict(const nlohmann::json& req) const;

    // Validates a calibration request; the returned callable runs it.
    using Progress = std::function<void(double)>;
    struct Task {
        std::string config_hash;
        std::function<nlohmann::json(const Progress&)> run;
    };
    Task calibration_task(const nlohmann::json& req);
    Task emulator_task(const nlohmann::json& req);

    void register_chain(std::shared_ptr<const calibration::PosteriorChain> c, bool make_default);
    void set_model(std::shared_ptr<const emulator::EmulatorModel> m);
    std::shared_ptr<const calibration::PosteriorChain> posterior() const;
    std::shared_ptr<const emulator::EmulatorModel> model() const;

    // "prior", "posterior" or a registered chain id.
    uncertainty::ParameterSource resolve_source(const std::string& name) const;
    std::shared_ptr<const uncertainty::DrawCache> draw_cache(const std::string& source, std::size_t n,
                                                             std::uint64_t seed, const scenario::Scenario& history) const;

private:
    EngineConfig cfg_;
    std::shared_ptr<const scenario::DataBundle> bundle_;
    std::shared_ptr<const socioecon::BenchmarkEnsemble> benchmark_;

    mutable std::mutex state_mu_;
    std::shared_ptr<const calibration::PosteriorChain> posterior_;
    std::map<std::string, std::shared_ptr<const calibration::PosteriorChain>> chains_;
    std::shared_ptr<const emulator::EmulatorModel> model_;

    using CacheFuture = std::shared_future<std::shared_ptr<const uncertainty::DrawCache>>;
    mutable std::mutex cache_mu_;
    mutable std::list<std::pair<std::string, CacheFuture>> caches_;  // most recent first
};

}  // namespace climalign::service
