#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "climalign/calibration/chain.hpp"
#include "climalign/calibration/dram.hpp"
#include "climalign/calibration/likelihood.hpp"
#include "climalign/calibration/prior.hpp"
#include "climalign/uncertainty/band.hpp"

namespace climalign::calibration {

struct CalibrationConfig {
    PriorSpec prior = PriorSpec::fair_defaults();
    LikelihoodConfig likelihood;
    DramConfig dram;
    std::optional<fair::ParameterVector> init;  // prior mode when absent
    double initial_sd_fraction = 0.05;          // warm-up proposal SD as a fraction of the prior scale
};

nlohmann::json to_json(const CalibrationConfig& c);
// Missing fields keep their defaults. Invalid values raise ConfigError.
CalibrationConfig calibration_config_from_json(const nlohmann::json& j);

// Posterior p(theta | y) ~ L(y | theta) p(theta) sampled with DRAM.
PosteriorChain calibrate(const Likelihood& lik, const CalibrationConfig& cfg);

// Runs the forward model for `n_draws` draws from the retained chain
// (with replacement) and reduces them to median and central bands.
uncertainty::CredibleBand posterior_predictive(const PosteriorChain& chain, const scenario::Scenario& s,
                                               std::size_t n_draws,
                                               const std::vector<double>& levels = uncertainty::kDefaultLevels,
                                               std::uint64_t seed = 42, const fair::ModelConfig& model = {});

// One candidate model for model comparison.
struct ModelEvidenceInput {
    std::string name;
    LogDensity log_likelihood;
    LogDensity log_prior;
    const PosteriorChain* chain = nullptr;
};

struct EvidenceOptions {
    std::size_t n_samples = 20000;
    double covariance_inflation = 1.5;  // proposal covariance = inflation * chain covariance
    std::uint64_t seed = 7;
};

// log marginal likelihood by importance sampling with a Gaussian fitted to the
// retained chain as the proposal.
double log_evidence(const ModelEvidenceInput& m, const EvidenceOptions& opt = {});

// P(M_i | y) from the evidence estimates and prior model probabilities.
std::vector<double> model_posterior(const std::vector<ModelEvidenceInput>& models, std::span<const double> model_priors,
                                    const EvidenceOptions& opt = {});

}  // namespace climalign::calibration
