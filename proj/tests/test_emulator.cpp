#include <doctest.h>

#include <chrono>
#include <cmath>

#include "climalign/calibration/prior.hpp"
#include "climalign/errors.hpp"
#include "climalign/emulator/emulator.hpp"
#include "climalign/scenario/store.hpp"
#include "climalign/util/csv.hpp"
#include "climalign/util/rng.hpp"

using namespace climalign;
using namespace climalign::emulator;

namespace {

const scenario::DataBundle& bundle() {
    static auto b = scenario::load_bundle(CLIMALIGN_TEST_DATA);
    return *b;
}

std::vector<const scenario::Scenario*> all_scenarios() {
    std::vector<const scenario::Scenario*> out;
    for (const auto& s : bundle().scenarios) out.push_back(&s);
    return out;
}

const uncertainty::DrawCache& cache() {
    static auto c = [] {
        auto prior = std::make_shared<const calibration::PriorSpec>(calibration::PriorSpec::fair_defaults());
        return uncertainty::build_draw_cache(bundle().get("SSP2-RCP4.5"), uncertainty::ParameterSource::prior(prior), 100, 3,
                                             2020, {});
    }();
    return c;
}

// Synthetic set with one scenario and `years` outputs per stat; labels from f.
template <typename F>
TrainingSet synthetic(std::size_t n, std::size_t n_in, std::size_t years, F f) {
    TrainingSet ts;
    for (std::size_t j = 0; j < n_in; ++j) ts.input_names.push_back("x" + std::to_string(j));
    ts.scenarios = {"S"};
    for (std::size_t y = 0; y < years; ++y) ts.years.push_back(2000 + static_cast<int>(y));
    ts.reference.assign(n_in, 1.0);
    auto g = util::stream(99, 0, 0);
    std::vector<double> x(n_in);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = 2.0 * util::uniform01(g) - 1.0;
        ts.inputs.insert(ts.inputs.end(), x.begin(), x.end());
        for (std::size_t y = 0; y < years; ++y) {
            const double c = f(x, y);
            ts.labels.insert(ts.labels.end(), {c + 0.1, c, c - 0.5, c + 0.5});  // mean, median, q05, q95
        }
    }
    return ts;
}

double label_sd(const TrainingSet& ts) {
    double m = 0.0, v = 0.0;
    for (double l : ts.labels) m += l;
    m /= static_cast<double>(ts.labels.size());
    for (double l : ts.labels) v += (l - m) * (l - m);
    return std::sqrt(v / static_cast<double>(ts.labels.size()));
}

}  // namespace

TEST_CASE("co2e and input scaling") {
    const auto& s = bundle().get("SSP2-RCP4.5");
    const auto ref = base_inputs(InputMode::co2e, s.emissions, 2022);
    REQUIRE(ref.size() == 1);
    CHECK(ref[0] > 40.0);
    CHECK(ref[0] < 70.0);
    const std::vector<double> x{1.3 * ref[0]};
    const auto scaled = scale_to_inputs(s, InputMode::co2e, 2022, x, ref);
    CHECK(base_inputs(InputMode::co2e, scaled.emissions, 2022)[0] == doctest::Approx(x[0]).epsilon(1e-12));
    const int b = s.emissions.index_of(2022);
    for (std::size_t g = 0; g < s.emissions.n_gases(); ++g) CHECK(scaled.emissions.at(b - 1, g) == s.emissions.at(b - 1, g));

    const auto mref = base_inputs(InputMode::multigas, s.emissions, 2022);
    REQUIRE(mref.size() == 11);
    auto mx = mref;
    mx[2] *= 2.0;  // CH4 only
    const auto ms = scale_to_inputs(s, InputMode::multigas, 2022, mx, mref);
    CHECK(ms.emissions.at(b + 5, 2) == doctest::Approx(2.0 * s.emissions.at(b + 5, 2)));
    CHECK(ms.emissions.at(b + 5, 0) == s.emissions.at(b + 5, 0));
    CHECK_THROWS_AS(scale_to_inputs(s, InputMode::co2e, 2022, mx, mref), ConfigError);
}

TEST_CASE("generate_training_set: single point at scale 1 equals the plain band") {
    TrainingSetConfig cfg;
    cfg.grid_points = 1;
    cfg.scale_lo = cfg.scale_hi = 1.0;
    const auto ts = generate_training_set(cache(), all_scenarios(), cfg);
    REQUIRE(ts.size() == 1);
    CHECK(ts.check().empty());
    CHECK(ts.years.front() == 2022);
    CHECK(ts.years.back() == 2100);
    uncertainty::PropagateOptions popt;
    popt.levels = {0.90};
    popt.first_output_year = 2022;
    popt.min_draws = 1;
    for (std::size_t k = 0; k < ts.scenarios.size(); ++k) {
        const auto band = uncertainty::propagate(cache(), bundle().get(ts.scenarios[k]), std::nullopt, popt).band;
        for (std::size_t y = 0; y < ts.years.size(); ++y) {
            CHECK(ts.label(0, ts.output_index(k, y, stat_median)) == band.median[y]);
            CHECK(ts.label(0, ts.output_index(k, y, stat_mean)) == band.mean[y]);
            CHECK(ts.label(0, ts.output_index(k, y, stat_q05)) == band.lower[0][y]);
            CHECK(ts.label(0, ts.output_index(k, y, stat_q95)) == band.upper[0][y]);
        }
    }
}

TEST_CASE("generate_training_set: median labels increase with scale") {
    TrainingSetConfig cfg;
    cfg.grid_points = 3;
    const auto ts = generate_training_set(cache(), all_scenarios(), cfg);
    REQUIRE(ts.size() == 3);
    CHECK(ts.inputs[0] == doctest::Approx(0.5 * ts.reference[0]));
    CHECK(ts.inputs[2] == doctest::Approx(1.5 * ts.reference[0]));
    for (std::size_t k = 0; k < ts.scenarios.size(); ++k) {
        const std::size_t y = ts.years.size() - 1;
        const auto o = ts.output_index(k, y, stat_median);
        CHECK(ts.label(0, o) < ts.label(1, o));
        CHECK(ts.label(1, o) < ts.label(2, o));
    }
    CHECK_THROWS_AS(generate_training_set(cache(), {}, cfg), ConfigError);
    auto bad = cfg;
    bad.reference_scenario = "nope";
    CHECK_THROWS_AS(generate_training_set(cache(), all_scenarios(), bad), NotFoundError);
    bad = cfg;
    bad.scale_hi = bad.scale_lo;
    CHECK_THROWS_AS(generate_training_set(cache(), all_scenarios(), bad), ConfigError);
}

TEST_CASE("train: constant labels give a constant predictor") {
    const auto ts = synthetic(50, 1, 3, [](const std::vector<double>&, std::size_t y) { return 1.5 + y; });
    TrainConfig cfg;
    cfg.adam.epochs = 200;
    const auto m = train(ts, cfg);
    const auto rep = evaluate(m, ts, m.validation_indices);
    CHECK(rep.rmse_median < 1e-9);
    CHECK(rep.rmse_quantiles < 1e-9);
    CHECK(m.converged);
}

TEST_CASE("train: linear labels within 1% of label SD in 500 epochs") {
    const std::vector<double> w{0.7, -1.3, 2.1};
    const auto ts = synthetic(400, 3, 4, [&](const std::vector<double>& x, std::size_t y) {
        return (1.0 + 0.2 * static_cast<double>(y)) * (w[0] * x[0] + w[1] * x[1] + w[2] * x[2]);
    });
    TrainConfig cfg;
    cfg.adam.epochs = 500;
    cfg.adam.learning_rate = 3e-3;
    const auto m = train(ts, cfg);
    const auto rep = evaluate(m, ts, m.validation_indices);
    CHECK(m.validation_indices.size() == 80);
    CHECK(rep.rmse_median < 0.01 * label_sd(ts));
    CHECK(rep.rmse_mean < 0.01 * label_sd(ts));
}

TEST_CASE("train: determinism and serialization") {
    const auto ts = synthetic(60, 2, 2, [](const std::vector<double>& x, std::size_t) { return std::sin(x[0]) + x[1] * x[1]; });
    TrainConfig cfg;
    cfg.adam.epochs = 50;
    const auto a = train(ts, cfg);
    const auto b = train(ts, cfg);
    REQUIRE(a.net.layers.size() == 4);
    CHECK(a.net.n_inputs() == 2);
    CHECK(a.net.n_outputs() == 8);
    for (std::size_t i = 0; i < a.net.layers.size(); ++i) {
        CHECK(a.net.layers[i].w == b.net.layers[i].w);
        CHECK(a.net.layers[i].b == b.net.layers[i].b);
    }
    CHECK(a.id == b.id);
    cfg.adam.seed = 2;
    CHECK(train(ts, cfg).id != a.id);

    const auto dir = std::filesystem::temp_directory_path() / "climalign_test_emu";
    std::filesystem::create_directories(dir);
    save_model(a, dir / "m");
    const auto l = load_model(dir / "m");
    const std::vector<double> x{0.3, -0.2};
    CHECK(predict_raw(l, x) == predict_raw(a, x));
    CHECK(l.id == a.id);
    save_training_set(ts, dir / "t");
    const auto lt = load_training_set(dir / "t");
    CHECK(lt.inputs == ts.inputs);
    CHECK(lt.labels == ts.labels);
    CHECK_THROWS_AS(load_model(dir / "missing"), NotFoundError);
    util::write_file(dir / "bad.json", util::read_file(dir / "m.json"));
    util::write_file(dir / "bad.emu", "CLMEMU00");
    CHECK_THROWS_AS(load_model(dir / "bad"), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("predict: ordering, envelope warning and latency") {
    auto crossed = synthetic(10, 1, 1, [](const std::vector<double>& x, std::size_t) { return x[0]; });
    std::swap(crossed.labels[2], crossed.labels[3]);
    CHECK_FALSE(crossed.check().empty());
    CHECK_THROWS_AS(train(crossed), DataError);

    const auto ok = synthetic(80, 1, 5, [](const std::vector<double>& x, std::size_t y) { return x[0] * (1.0 + y); });
    TrainConfig cfg;
    cfg.adam.epochs = 100;
    const auto m = train(ok, cfg);

    auto g = util::stream(5, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        const std::vector<double> x{8.0 * util::uniform01(g) - 4.0};
        const auto p = predict(m, x);
        for (std::size_t y = 0; y < p.years.size(); ++y) {
            REQUIRE(p.q05[0][y] <= p.median[0][y]);
            REQUIRE(p.median[0][y] <= p.q95[0][y]);
        }
    }
    CHECK_FALSE(predict(m, std::vector<double>{0.0}).extrapolated);
    const auto far = predict(m, std::vector<double>{10.0});
    CHECK(far.extrapolated);
    CHECK(far.warnings.size() == 1);
    CHECK_THROWS_AS(predict(m, std::vector<double>{0.0, 1.0}), ConfigError);

    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 100; ++i) predict(m, std::vector<double>{0.1 * i / 100.0});
    const double per_call = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 100.0;
    CHECK(per_call < 0.1);
}

TEST_CASE("emulator on model labels: monotone in base-year emissions") {
    TrainingSetConfig tcfg;
    tcfg.grid_points = 21;
    const auto ts = generate_training_set(cache(), all_scenarios(), tcfg);
    TrainConfig cfg;
    cfg.adam.epochs = 1500;
    const auto m = train(ts, cfg);
    const auto rep = evaluate(m, ts, m.validation_indices);
    CHECK(rep.rmse_median < 0.02);
    const auto lo = predict_scaled(m, 1.0);
    const auto hi = predict_scaled(m, 1.2);
    const auto k = lo.scenario_index("SSP5-RCP8.5");
    const auto y = lo.year_index(2100);
    CHECK(hi.median[k][y] > lo.median[k][y]);
    CHECK(to_json(lo).at("scenarios").size() == 5);
}
