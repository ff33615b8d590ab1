#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "climalign/fair/model.hpp"
#include "climalign/scenario/observations.hpp"
#include "climalign/scenario/scenario.hpp"

namespace climalign::calibration {

// Independent Gaussian errors per observation. SDs default to the series' own.
struct LikelihoodConfig {
    bool use_temperature = true;
    bool use_co2 = false;
    std::optional<double> sd_temperature;
    std::optional<double> sd_co2;
    int first_year = 0;  // 0 = first observed year
    int last_year = 0;   // 0 = last observed year
    fair::ModelConfig model;
};

// Sum of log N(r_i; 0, sd^2).
double gaussian_log_likelihood(std::span<const double> residuals, double sd);

// Forward problem over the observation window. The emission history is
// prepared once; each evaluation is a single FaIR run. Thread-safe.
class Likelihood {
public:
    Likelihood(const scenario::Scenario& history, const scenario::ObservationSeries& obs,
               const LikelihoodConfig& cfg = {});

    // -inf when the forward model raises a domain error (counted).
    double operator()(const fair::ParameterVector& theta) const;

    // Model temperatures rebaselined to the observation reference period and
    // model CO2, aligned with `years()`.
    struct Simulated {
        std::vector<double> temperature;
        std::vector<double> co2_ppm;
    };
    Simulated simulate(const fair::ParameterVector& theta) const;

    const std::vector<int>& years() const { return years_; }
    const std::vector<double>& observed_temperature() const { return obs_t_; }
    const std::vector<double>& observed_co2() const { return obs_c_; }
    double sd_temperature() const { return sd_t_; }
    double sd_co2() const { return sd_c_; }
    const LikelihoodConfig& config() const { return cfg_; }
    std::size_t failures() const { return failures_->load(); }

private:
    LikelihoodConfig cfg_;
    fair::PreparedPathway prep_;
    std::vector<double> exo_;
    std::vector<int> years_;
    std::vector<std::size_t> model_index_;  // index into the run for each observation year
    std::size_t ref_first_ = 0, ref_count_ = 0;
    std::vector<double> obs_t_, obs_c_;
    double sd_t_ = 0.1, sd_c_ = 1.0;
    std::shared_ptr<std::atomic<std::size_t>> failures_;
};

}  // namespace climalign::calibration
