#include "climalign/service/engine.hpp"

#include <algorithm>
#include <set>

#include "climalign/calibration/calibrate.hpp"
#include "climalign/calibration/diagnostics.hpp"
#include "climalign/errors.hpp"
#include "climalign/socioecon/alignment.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::service {

namespace {

const std::vector<std::string> kDefaultAlignScenarios = {"SSP1-RCP2.6", "SSP2-RCP4.5", "SSP5-RCP8.5"};
constexpr int kCacheBaseYear = 2020;

// Typed field access that collects errors and rejects unknown fields.
class Fields {
public:
    explicit Fields(const nlohmann::json& j) : j_(j) {
        if (!j_.is_object()) throw RequestError(400, "request body must be a JSON object");
    }

    bool has(const std::string& k) {
        known_.insert(k);
        return j_.contains(k) && !j_[k].is_null();
    }
    const nlohmann::json& raw(const std::string& k) {
        known_.insert(k);
        return j_[k];
    }
    template <typename T>
    T get(const std::string& k, T def) {
        if (!has(k)) return def;
        try {
            return j_[k].get<T>();
        } catch (const nlohmann::json::exception&) {
            errors_.push_back(k + ": wrong type");
            return def;
        }
    }
    std::size_t count(const std::string& k, std::size_t def, std::size_t lo, std::size_t hi) {
        if (!has(k)) return def;
        if (!j_[k].is_number_integer() || j_[k].get<long long>() < static_cast<long long>(lo) ||
            j_[k].get<long long>() > static_cast<long long>(hi)) {
            errors_.push_back(k + ": expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return def;
        }
        return j_[k].get<std::size_t>();
    }
    std::uint64_t seed(const std::string& k, std::uint64_t def) {
        if (!has(k)) return def;
        if (!j_[k].is_number_unsigned() && !(j_[k].is_number_integer() && j_[k].get<long long>() >= 0)) {
            errors_.push_back(k + ": expected a non-negative integer");
            return def;
        }
        return j_[k].get<std::uint64_t>();
    }
    void error(std::string e) { errors_.push_back(std::move(e)); }
    bool ok() const { return errors_.empty(); }
    void finish() {
        for (const auto& [k, v] : j_.items())
            if (!known_.count(k)) errors_.push_back(k + ": unknown field");
        if (!errors_.empty()) throw RequestError(422, "invalid request", errors_);
    }

private:
    const nlohmann::json& j_;
    std::set<std::string> known_;
    std::vector<std::string> errors_;
};

std::vector<double> parse_levels(Fields& f) {
    auto levels = f.get<std::vector<double>>("levels", uncertainty::kDefaultLevels);
    for (double l : levels)
        if (!(l > 0.0 && l < 1.0)) {
            f.error("levels: each level must lie in (0, 1)");
            break;
        }
    return levels;
}

std::optional<uncertainty::EmissionUncertaintySpec> parse_uncertainty(Fields& f) {
    if (!f.has("uncertainty")) return std::nullopt;
    try {
        auto s = uncertainty::emission_spec_from_json(f.raw("uncertainty"));
        s.validate();
        return s;
    } catch (const Error& e) {
        f.error(std::string("uncertainty: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        f.error(std::string("uncertainty: ") + e.what());
    }
    return std::nullopt;
}

std::optional<socioecon::Portfolio> parse_portfolio(Fields& f, const std::string& key, bool required) {
    if (!f.has(key)) {
        if (required) f.error(key + ": required");
        return std::nullopt;
    }
    const auto& j = f.raw(key);
    const auto errs = socioecon::portfolio_errors(j);
    if (!errs.empty()) {
        for (const auto& e : errs) f.error(key + "." + e);
        return std::nullopt;
    }
    return socioecon::portfolio_from_json(j);
}

nlohmann::json summary_json(const socioecon::TemperatureSummary& s) {
    return {{"year", s.year}, {"mean", s.mean}, {"median", s.median}};
}

nlohmann::json pair_json(const socioecon::TemperatureSummary& mid, const socioecon::TemperatureSummary& end) {
    return {{"mid_century", summary_json(mid)}, {"end_century", summary_json(end)}};
}

socioecon::TemperatureSummary at(const emulator::Prediction& p, std::size_t k, int year) {
    const auto y = p.year_index(year);
    return {year, p.mean[k][y], p.median[k][y]};
}

std::shared_ptr<const calibration::PriorSpec> default_prior() {
    static const auto p = std::make_shared<const calibration::PriorSpec>(calibration::PriorSpec::fair_defaults());
    return p;
}

}  // namespace

std::string config_hash(const nlohmann::json& j) { return util::hex_id(util::fnv1a(j.dump())); }

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.data_dir.empty()) cfg_.data_dir = scenario::default_bundle_path();
    bundle_ = scenario::load_bundle(cfg_.data_dir);
    const auto bench_dir = cfg_.data_dir / "benchmarks";
    if (std::filesystem::is_directory(bench_dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(bench_dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (!files.empty())
            benchmark_ = std::make_shared<const socioecon::BenchmarkEnsemble>(socioecon::load_portfolio(files.front()));
    }
    if (cfg_.chain) register_chain(std::make_shared<const calibration::PosteriorChain>(calibration::load_chain(*cfg_.chain)), true);
    if (cfg_.model) set_model(std::make_shared<const emulator::EmulatorModel>(emulator::load_model(*cfg_.model)));
}

std::shared_ptr<const scenario::DataBundle> Engine::bundle() const { return bundle_; }

nlohmann::json Engine::scenarios() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : bundle_->scenarios)
        list.push_back({{"id", s.id},
                        {"source", s.source},
                        {"first_year", s.emissions.years.front()},
                        {"last_year", s.emissions.years.back()},
                        {"branch_year", s.branch_year},
                        {"gases", s.emissions.gases.size()}});
    return {{"scenarios", list}};
}

void Engine::register_chain(std::shared_ptr<const calibration::PosteriorChain> c, bool make_default) {
    if (!c) return;
    std::lock_guard lk(state_mu_);
    chains_[c->id] = c;
    if (make_default || !posterior_) posterior_ = std::move(c);
}

void Engine::set_model(std::shared_ptr<const emulator::EmulatorModel> m) {
    std::lock_guard lk(state_mu_);
    model_ = std::move(m);
}

std::shared_ptr<const calibration::PosteriorChain> Engine::posterior() const {
    std::lock_guard lk(state_mu_);
    return posterior_;
}

std::shared_ptr<const emulator::EmulatorModel> Engine::model() const {
    std::lock_guard lk(state_mu_);
    return model_;
}

uncertainty::ParameterSource Engine::resolve_source(const std::string& name) const {
    if (name == "prior") return uncertainty::ParameterSource::prior(default_prior());
    std::lock_guard lk(state_mu_);
    if (name == "posterior") {
        if (!posterior_) throw RequestError(422, "no posterior chain available; calibrate first or load one", {"chain: no posterior"});
        return uncertainty::ParameterSource::chain(posterior_);
    }
    auto it = chains_.find(name);
    if (it == chains_.end()) throw RequestError(422, "unknown chain '" + name + "'", {"chain: unknown chain '" + name + "'"});
    return uncertainty::ParameterSource::chain(it->second);
}

std::shared_ptr<const uncertainty::DrawCache> Engine::draw_cache(const std::string& source, std::size_t n,
                                                                 std::uint64_t seed,
                                                                 const scenario::Scenario& history) const {
    const auto src = resolve_source(source);
    const std::string key = src.id() + "|" + std::to_string(n) + "|" + std::to_string(seed) + "|" +
                            util::hex_id(uncertainty::history_hash(history, kCacheBaseYear));
    std::promise<std::shared_ptr<const uncertainty::DrawCache>> promise;
    CacheFuture fut;
    {
        std::lock_guard lk(cache_mu_);
        for (auto it = caches_.begin(); it != caches_.end(); ++it)
            if (it->first == key) {
                caches_.splice(caches_.begin(), caches_, it);
                fut = it->second;
                break;
            }
        if (!fut.valid()) {
            caches_.emplace_front(key, promise.get_future().share());
            while (caches_.size() > std::max<std::size_t>(1, cfg_.cache_capacity)) caches_.pop_back();
        } else {
            return fut.get();
        }
    }
    try {
        auto c = std::make_shared<const uncertainty::DrawCache>(
            uncertainty::build_draw_cache(history, src, n, seed, kCacheBaseYear, {}));
        promise.set_value(c);
        return c;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lk(cache_mu_);
        caches_.remove_if([&](const auto& e) { return e.first == key; });
        throw;
    }
}

nlohmann::json Engine::align(const nlohmann::json& req) const {
    Fields f(req);
    const auto portfolio = parse_portfolio(f, "portfolio", true);
    auto benchmark = parse_portfolio(f, "benchmark", false);
    if (!f.has("benchmark") && !benchmark_) f.error("benchmark: required, the data bundle has none");
    const auto ids = f.get<std::vector<std::string>>("scenarios", {});
    std::vector<const scenario::Scenario*> scen;
    if (ids.empty()) {
        for (const auto& id : kDefaultAlignScenarios)
            if (const auto* s = bundle_->find(id)) scen.push_back(s);
        if (scen.empty())
            for (const auto& s : bundle_->scenarios) scen.push_back(&s);
    } else {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (const auto* s = bundle_->find(ids[i]))
                scen.push_back(s);
            else
                f.error("scenarios[" + std::to_string(i) + "]: unknown scenario '" + ids[i] + "'");
        }
    }
    const auto mode = f.get<std::string>("mode", "mcmc");
    if (mode != "mcmc" && mode != "emulator") f.error("mode: expected 'mcmc' or 'emulator'");
    const auto chain = f.get<std::string>("chain", "posterior");
    const auto n = f.count("n_draws", 1000, 1, cfg_.max_draws);
    const auto seed = f.seed("seed", 42);
    const auto spec = parse_uncertainty(f);
    const auto levels = parse_levels(f);
    const bool include_bands = f.get<bool>("include_bands", false);
    socioecon::AlignmentOptions opt;
    opt.use_reported_eei = f.get<bool>("use_reported_eei", true);
    try {
        opt.scopes = socioecon::scope_mask_from(f.get<std::vector<int>>("scopes", {1, 2, 3}));
    } catch (const ConfigError& e) {
        f.error(std::string("scopes: ") + e.what());
    }
    if (!bundle_->sectors) f.error("data bundle has no sector shares");
    f.finish();
    if (scen.empty()) throw RequestError(422, "no scenarios to align against", {"scenarios: none available"});

    const auto& bm = benchmark ? *benchmark : *benchmark_;
    const auto& shares = *bundle_->sectors;
    const auto adj = socioecon::global_adjustment(*portfolio, bm, shares, opt);

    nlohmann::json results = nlohmann::json::array();
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json warnings = nlohmann::json::array();
    nlohmann::json provenance = {{"mode", mode}, {"config_hash", config_hash(req)}};

    if (mode == "mcmc") {
        if (portfolio->base_year < kCacheBaseYear)
            throw RequestError(422, "portfolio base year precedes " + std::to_string(kCacheBaseYear),
                               {"portfolio.base_year: must be at least " + std::to_string(kCacheBaseYear)});
        const auto cache = draw_cache(chain, n, seed, *scen.front());
        uncertainty::PropagateOptions popt;
        popt.n = n;
        popt.seed = seed;
        popt.levels = levels;
        popt.min_draws = 1;
        provenance["source"] = cache->source_id;
        provenance["seed"] = seed;
        provenance["n_draws"] = n;
        if (spec) provenance["uncertainty"] = uncertainty::to_json(*spec);
        for (const auto* s : scen) {
            const auto base = socioecon::baseline_temperature(*s, *cache, spec, popt);
            const auto port = socioecon::implied_temperature(*portfolio, bm, *s, shares, *cache, spec, popt, opt);
            nlohmann::json r = {{"scenario", s->id},
                                {"baseline", pair_json(base.mid_century, base.end_century)},
                                {"portfolio", pair_json(port.mid_century, port.end_century)},
                                {"delta_end_century_mean", base.end_century.mean - port.end_century.mean}};
            if (include_bands) {
                r["band"] = uncertainty::to_json(port.band);
                r["baseline_band"] = uncertainty::to_json(base.band);
            }
            results.push_back(r);
            rows.push_back({{"scenario", s->id}, {"baseline", base.end_century.mean}, {"portfolio", port.end_century.mean}});
        }
    } else {
        const auto m = model();
        if (!m) throw RequestError(422, "no emulator model loaded", {"mode: no emulator model available"});
        if (spec) warnings.push_back("uncertainty spec ignored in emulator mode");
        const auto pb = emulator::predict_scaled(*m, 1.0);
        const auto pp = emulator::predict_scaled(*m, adj.factor);
        for (const auto& w : pp.warnings) warnings.push_back(w);
        provenance["model_id"] = m->id;
        provenance["seed"] = m->metadata.value("training_set", nlohmann::json::object()).value("seed", std::uint64_t{0});
        provenance["extrapolated"] = pp.extrapolated;
        for (const auto* s : scen) {
            std::size_t k = 0;
            try {
                k = pp.scenario_index(s->id);
            } catch (const NotFoundError&) {
                throw RequestError(422, "emulator has no scenario '" + s->id + "'", {"scenarios: '" + s->id + "' not emulated"});
            }
            const int last = pp.years.back();
            const bool has_mid = std::find(pp.years.begin(), pp.years.end(), 2050) != pp.years.end();
            const auto b_end = at(pb, k, last), p_end = at(pp, k, last);
            nlohmann::json r = {{"scenario", s->id},
                                {"baseline", {{"end_century", summary_json(b_end)}}},
                                {"portfolio", {{"end_century", summary_json(p_end)}}},
                                {"delta_end_century_mean", b_end.mean - p_end.mean}};
            if (has_mid) {
                r["baseline"]["mid_century"] = summary_json(at(pb, k, 2050));
                r["portfolio"]["mid_century"] = summary_json(at(pp, k, 2050));
            }
            if (include_bands)
                r["band"] = {{"years", pp.years}, {"median", pp.median[k]}, {"mean", pp.mean[k]},
                             {"bands", {{{"level", 0.9}, {"lower", pp.q05[k]}, {"upper", pp.q95[k]}}}}};
            results.push_back(r);
            rows.push_back({{"scenario", s->id}, {"baseline", b_end.mean}, {"portfolio", p_end.mean}});
        }
    }
    return {{"portfolio", portfolio->name},
            {"benchmark", bm.name},
            {"provenance", provenance},
            {"adjustment", socioecon::to_json(adj)},
            {"results", results},
            {"summary", {{"statistic", "mean"}, {"year", results.empty() ? 0 : results[0]["baseline"]["end_century"]["year"].get<int>()}, {"rows", rows}}},
            {"warnings", warnings}};
}

nlohmann::json Engine::propagate(const nlohmann::json& req) const {
    Fields f(req);
    const auto id = f.get<std::string>("scenario", "");
    const scenario::Scenario* s = bundle_->find(id);
    if (id.empty())
        f.error("scenario: required");
    else if (!s)
        f.error("scenario: unknown scenario '" + id + "'");
    const auto chain = f.get<std::string>("chain", "posterior");
    const auto n = f.count("n_draws", 1000, 1, cfg_.max_draws);
    const auto seed = f.seed("seed", 42);
    const auto spec = parse_uncertainty(f);
    const auto levels = parse_levels(f);
    const int first = f.get<int>("first_output_year", 0);
    f.finish();

    const auto cache = draw_cache(chain, n, seed, *s);
    uncertainty::PropagateOptions popt;
    popt.n = n;
    popt.seed = seed;
    popt.levels = levels;
    popt.first_output_year = first;
    popt.min_draws = 1;
    const auto res = uncertainty::propagate(*cache, *s, spec, popt);
    return {{"provenance", {{"scenario", s->id}, {"source", cache->source_id}, {"seed", seed}, {"n_draws", n}, {"config_hash", config_hash(req)}}},
            {"band", uncertainty::to_json(res.band)}};
}

nlohmann::json Engine::predict(const nlohmann::json& req) const {
    Fields f(req);
    const auto m = model();
    const int given = static_cast<int>(f.has("co2e")) + static_cast<int>(f.has("inputs")) + static_cast<int>(f.has("factor"));
    if (given != 1) f.error("exactly one of co2e, inputs, factor is required");
    std::vector<double> x;
    if (f.has("co2e")) x = {f.get<double>("co2e", 0.0)};
    if (f.has("inputs")) x = f.get<std::vector<double>>("inputs", {});
    const double factor = f.get<double>("factor", 1.0);
    f.finish();
    if (!m) throw RequestError(422, "no emulator model loaded", {"model: none available"});
    emulator::Prediction p;
    try {
        p = req.contains("factor") ? emulator::predict_scaled(*m, factor) : emulator::predict(*m, x);
    } catch (const ConfigError& e) {
        throw RequestError(422, e.what(), {e.what()});
    }
    auto j = emulator::to_json(p);
    j["provenance"] = {{"model_id", m->id}, {"config_hash", config_hash(req)}};
    return j;
}

Engine::Task Engine::calibration_task(const nlohmann::json& req) {
    Fields f(req);
    const auto id = f.get<std::string>("scenario", "SSP2-RCP4.5");
    const scenario::Scenario* s = bundle_->find(id);
    if (!s) f.error("scenario: unknown scenario '" + id + "'");
    calibration::CalibrationConfig cfg;
    if (f.has("config")) {
        try {
            cfg = calibration::calibration_config_from_json(f.raw("config"));
        } catch (const Error& e) {
            f.error(std::string("config: ") + e.what());
        }
    }
    if (!bundle_->observations) f.error("data bundle has no observations");
    f.finish();

    const nlohmann::json canonical = {{"scenario", id}, {"config", calibration::to_json(cfg)}};
    Task t;
    t.config_hash = config_hash(canonical);
    auto bundle = bundle_;
    t.run = [this, bundle, s, cfg](const Progress& progress) mutable {
        calibration::Likelihood lik(*s, *bundle->observations, cfg.likelihood);
        cfg.dram.progress = [&](std::size_t done, std::size_t total) {
            progress(static_cast<double>(done) / static_cast<double>(total));
        };
        auto chain = std::make_shared<const calibration::PosteriorChain>(calibration::calibrate(lik, cfg));
        const auto dir = cfg_.artifacts_dir / "chains";
        std::filesystem::create_directories(dir);
        calibration::save_chain(*chain, dir / chain->id);
        register_chain(chain, false);
        return nlohmann::json{{"chain_id", chain->id},
                              {"path", (dir / chain->id).string()},
                              {"acceptance_rate", chain->acceptance_rate},
                              {"diagnostics", calibration::to_json(calibration::diagnostics(*chain))}};
    };
    return t;
}

Engine::Task Engine::emulator_task(const nlohmann::json& req) {
    Fields f(req);
    const auto chain = f.get<std::string>("chain", "posterior");
    const auto n = f.count("n_draws", 500, 1, cfg_.max_draws);
    const auto seed = f.seed("seed", 42);
    emulator::TrainingSetConfig tcfg;
    tcfg.grid_points = f.count("grid_points", tcfg.grid_points, 2, 100000);
    tcfg.scale_lo = f.get<double>("scale_lo", tcfg.scale_lo);
    tcfg.scale_hi = f.get<double>("scale_hi", tcfg.scale_hi);
    tcfg.seed = seed;
    try {
        tcfg.mode = emulator::input_mode_from_string(f.get<std::string>("input_mode", "co2e"));
    } catch (const ConfigError& e) {
        f.error(std::string("input_mode: ") + e.what());
    }
    emulator::TrainConfig cfg;
    cfg.adam.epochs = f.count("epochs", cfg.adam.epochs, 1, 1000000);
    cfg.adam.seed = f.seed("train_seed", cfg.adam.seed);
    f.finish();
    if (!(tcfg.scale_lo > 0.0 && tcfg.scale_hi > tcfg.scale_lo))
        throw RequestError(422, "invalid grid", {"scale_lo, scale_hi: need 0 < scale_lo < scale_hi"});
    const auto source = resolve_source(chain);

    Task t;
    t.config_hash = config_hash({{"source", source.id()}, {"request", req}});
    t.run = [this, chain, n, seed, tcfg, cfg](const Progress& progress) {
        std::vector<const scenario::Scenario*> scen;
        for (const auto& s : bundle_->scenarios) scen.push_back(&s);
        if (scen.empty()) throw DataError("no scenarios to train on");
        const auto* ref = bundle_->find(tcfg.reference_scenario);
        const auto cache = draw_cache(chain, n, seed, ref ? *ref : *scen.front());
        const auto ts = emulator::generate_training_set(*cache, scen, tcfg, [&](std::size_t i) {
            progress(0.8 * static_cast<double>(i + 1) / static_cast<double>(tcfg.grid_points));
        });
        auto model = std::make_shared<const emulator::EmulatorModel>(emulator::train(ts, cfg, [&](std::size_t e, double) {
            progress(0.8 + 0.2 * static_cast<double>(e + 1) / static_cast<double>(cfg.adam.epochs));
        }));
        const auto dir = cfg_.artifacts_dir / "models";
        std::filesystem::create_directories(dir);
        emulator::save_model(*model, dir / model->id);
        set_model(model);
        return nlohmann::json{{"model_id", model->id},
                              {"path", (dir / model->id).string()},
                              {"converged", model->converged},
                              {"validation", model->metadata["validation"]},
                              {"skipped", ts.skipped}};
    };
    return t;
}

}  // namespace climalign::service
