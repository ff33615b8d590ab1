#include <benchmark/benchmark.h>

#include "climalign/calibration/calibrate.hpp"
#include "climalign/emulator/emulator.hpp"
#include "climalign/fair/model.hpp"
#include "climalign/scenario/store.hpp"
#include "climalign/uncertainty/propagate.hpp"

using namespace climalign;
using P = fair::ParameterVector;

namespace {

const scenario::DataBundle& bundle() {
    static auto b = scenario::load_bundle(scenario::default_bundle_path());
    return *b;
}

std::shared_ptr<const calibration::PriorSpec> prior() {
    static auto p = std::make_shared<const calibration::PriorSpec>(calibration::PriorSpec::fair_defaults());
    return p;
}

}  // namespace

// Full multi-gas run over the whole scenario.
static void BM_FairRunFull(benchmark::State& state) {
    const auto& s = bundle().get("SSP5-RCP8.5");
    const auto p = P::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(fair::run(s, p));
}
BENCHMARK(BM_FairRunFull)->Unit(benchmark::kMillisecond);

// 80-year continuation from 2020 on a prepared pathway, the per-draw cost of propagation.
static void BM_FairRunFrom2020(benchmark::State& state) {
    const auto& s = bundle().get("SSP5-RCP8.5");
    const auto e_pi = fair::reference_emissions(s.emissions);
    const auto first = static_cast<std::size_t>(s.emissions.index_of(2020));
    const auto prep = fair::prepare(s.emissions, e_pi, {}, {}, first, 80);
    const std::vector<double> exo(prep.years.size(), 0.0);
    const auto p = P::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(fair::run(prep, exo, p));
}
BENCHMARK(BM_FairRunFrom2020)->Unit(benchmark::kMicrosecond);

// One log-posterior evaluation on the bundled observations, the inner cost of a DRAM step.
static void BM_LogPosterior(benchmark::State& state) {
    const auto& b = bundle();
    const calibration::Likelihood lik(b.get("SSP2-RCP4.5"), *b.observations, {});
    const auto p = P::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(calibration::log_prior(p, *prior()) + lik(p));
}
BENCHMARK(BM_LogPosterior)->Unit(benchmark::kMicrosecond);

// DRAM on a 20-D Gaussian; reports time per iteration.
static void BM_DramGaussian(benchmark::State& state) {
    calibration::LogDensity target = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -0.5 * s;
    };
    calibration::DramConfig cfg;
    cfg.n_iter = static_cast<std::size_t>(state.range(0));
    cfg.initial_sd.assign(20, 0.3);
    const std::vector<double> init(20, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(calibration::dram(target, init, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DramGaussian)->Arg(10000)->Unit(benchmark::kMillisecond);

// Parameter-uncertainty propagation from a warm draw cache.
static void BM_Propagate(benchmark::State& state) {
    const auto& s = bundle().get("SSP2-RCP4.5");
    uncertainty::PropagateOptions opt;
    opt.n = static_cast<std::size_t>(state.range(0));
    const auto cache = uncertainty::build_draw_cache(s, uncertainty::ParameterSource::prior(prior()), opt.n, 1, 2020);
    const uncertainty::EmissionUncertaintySpec spec{};
    for (auto _ : state) benchmark::DoNotOptimize(uncertainty::propagate(cache, s, spec, opt));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Propagate)->Arg(1000)->Unit(benchmark::kMillisecond);

// Single emulator prediction for the default 3x20 network over five scenarios.
static void BM_EmulatorPredict(benchmark::State& state) {
    static const emulator::EmulatorModel model = [] {
        const auto& b = bundle();
        const auto cache = uncertainty::build_draw_cache(b.get("SSP2-RCP4.5"), uncertainty::ParameterSource::prior(prior()), 50, 1, 2020);
        std::vector<const scenario::Scenario*> scen;
        for (const auto& s : b.scenarios) scen.push_back(&s);
        emulator::TrainingSetConfig tcfg;
        tcfg.grid_points = 12;
        emulator::TrainConfig cfg;
        cfg.adam.epochs = 50;
        return emulator::train(emulator::generate_training_set(cache, scen, tcfg), cfg);
    }();
    const std::vector<double> x = {model.reference[0] * 1.1};
    for (auto _ : state) benchmark::DoNotOptimize(emulator::predict(model, x));
}
BENCHMARK(BM_EmulatorPredict)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
