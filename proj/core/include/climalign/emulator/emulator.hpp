#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climalign/emulator/network.hpp"
#include "climalign/scenario/scenario.hpp"
#include "climalign/uncertainty/propagate.hpp"

namespace climalign::emulator {

// co2e: one input, base-year CO2 + CH4 + N2O in GtCO2e/yr (100-year GWPs).
// multigas: one input per major gas (CO2 fossil through NH3) in native units.
enum class InputMode { co2e, multigas };
const char* to_string(InputMode m);
InputMode input_mode_from_string(const std::string& s);

inline const std::vector<std::string> kStats = {"mean", "median", "q05", "q95"};
enum Stat : std::size_t { stat_mean = 0, stat_median, stat_q05, stat_q95, stat_count };

inline constexpr double kGwpCh4 = 28.0;
inline constexpr double kGwpN2o = 265.0;
double co2e(const scenario::EmissionPathway& p, std::size_t year_index);  // GtCO2e/yr

std::vector<std::string> input_names(InputMode m, const scenario::EmissionPathway& p);
std::vector<double> base_inputs(InputMode m, const scenario::EmissionPathway& p, int base_year);

// Scenario with every emission from base_year on multiplied so that its inputs
// relative to the reference inputs equal x / reference. co2e scales every gas;
// multigas scales each major gas separately and leaves the minor gases.
scenario::Scenario scale_to_inputs(const scenario::Scenario& s, InputMode m, int base_year,
                                   std::span<const double> x, std::span<const double> reference);

struct TrainingSetConfig {
    InputMode mode = InputMode::co2e;
    int base_year = 2022;
    int last_year = 2100;
    // Grid in multiples of the reference inputs: evenly spaced for co2e,
    // independent uniform per gas for multigas.
    double scale_lo = 0.5;
    double scale_hi = 1.5;
    std::size_t grid_points = 200;
    std::string reference_scenario = "SSP2-RCP4.5";
    std::optional<uncertainty::EmissionUncertaintySpec> emission;
    std::uint64_t seed = 42;
};

// Labels are stored per sample as [scenario][year][stat], stat order kStats.
struct TrainingSet {
    InputMode mode = InputMode::co2e;
    std::vector<std::string> input_names;
    std::vector<std::string> scenarios;
    std::vector<int> years;
    std::vector<double> reference;  // reference inputs (scale 1)
    std::vector<double> inputs;     // [sample][input]
    std::vector<double> labels;     // [sample][output]
    std::size_t skipped = 0;
    nlohmann::json metadata;

    std::size_t n_inputs() const { return input_names.size(); }
    std::size_t n_outputs() const { return scenarios.size() * years.size() * stat_count; }
    std::size_t size() const { return n_inputs() ? inputs.size() / n_inputs() : 0; }
    std::size_t output_index(std::size_t scenario, std::size_t year, std::size_t stat) const {
        return (scenario * years.size() + year) * stat_count + stat;
    }
    double label(std::size_t sample, std::size_t output) const { return labels[sample * n_outputs() + output]; }
    std::string check() const;  // empty when valid
};

// Every grid point is propagated through the same parameter draws (the cache)
// so labels are smooth in the inputs.
TrainingSet generate_training_set(const uncertainty::DrawCache& cache, const std::vector<const scenario::Scenario*>& scenarios,
                                  const TrainingSetConfig& cfg, const std::function<void(std::size_t)>& progress = {});

void save_training_set(const TrainingSet& ts, const std::filesystem::path& stem);
TrainingSet load_training_set(const std::filesystem::path& stem);

struct TrainConfig {
    std::vector<std::size_t> hidden = {20, 20, 20};
    AdamConfig adam;
    double validation_fraction = 0.2;
    double median_rmse_ceiling = 0.02;  // K, on the validation split
    double extrapolation_margin = 0.1;  // fraction of the training range
    std::uint64_t split_seed = 7;
};

struct EmulatorModel {
    static constexpr int kSchemaVersion = 1;
    InputMode mode = InputMode::co2e;
    std::vector<std::string> input_names;
    std::vector<std::string> scenarios;
    std::vector<int> years;
    std::vector<double> reference;
    Mlp net;
    std::vector<double> in_mean, in_sd, out_mean, out_sd;
    std::vector<double> envelope_lo, envelope_hi;
    double extrapolation_margin = 0.1;
    std::vector<std::size_t> validation_indices;
    bool converged = false;
    std::string id;
    nlohmann::json metadata;  // training set and optimizer settings, loss history, errors

    std::size_t n_outputs() const { return scenarios.size() * years.size() * stat_count; }
};

EmulatorModel train(const TrainingSet& ts, const TrainConfig& cfg = {},
                    const std::function<void(std::size_t, double)>& progress = {});

struct Prediction {
    std::vector<std::string> scenarios;
    std::vector<int> years;
    // [scenario][year]
    std::vector<std::vector<double>> mean, median, q05, q95;
    std::vector<double> input;
    bool extrapolated = false;
    std::vector<std::string> warnings;

    std::size_t scenario_index(std::string_view id) const;  // throws NotFoundError
    std::size_t year_index(int year) const;                 // throws NotFoundError
};

// Label-unit outputs before ordering, laid out as TrainingSet labels.
std::vector<double> predict_raw(const EmulatorModel& m, std::span<const double> input);
Prediction predict(const EmulatorModel& m, std::span<const double> input);
// Inputs equal to factor times the reference inputs.
Prediction predict_scaled(const EmulatorModel& m, double factor);

struct HoldoutReport {
    std::size_t samples = 0;
    double rmse_median = 0.0;
    double rmse_quantiles = 0.0;
    double rmse_mean = 0.0;
    double max_abs_median = 0.0;
    double fraction_within = 0.0;  // cells with every stat inside its tolerance
};
HoldoutReport evaluate(const EmulatorModel& m, const TrainingSet& ts, const std::vector<std::size_t>& samples,
                       double median_tol = 0.02, double quantile_tol = 0.05);

void save_model(const EmulatorModel& m, const std::filesystem::path& stem);  // stem.emu + stem.json
EmulatorModel load_model(const std::filesystem::path& stem);

nlohmann::json to_json(const Prediction& p);
nlohmann::json to_json(const HoldoutReport& r);

}  // namespace climalign::emulator
