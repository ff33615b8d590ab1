#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "climalign/calibration/chain.hpp"

namespace climalign::calibration {

using LogDensity = std::function<double(std::span<const double>)>;

struct DramConfig {
    std::size_t n_iter = 10000;
    std::uint64_t seed = 1;
    double sd_scale = 0.0;  // 0 selects 2.4^2 / dim
    double epsilon = 1e-10;
    std::size_t warmup = 1000;           // non-adaptive iterations
    std::size_t adapt_interval = 100;    // covariance refresh period after warm-up
    bool delayed_rejection = true;
    double dr_gamma = 0.2;               // second-stage covariance shrink
    double burn_in_fraction = 0.2;
    std::optional<std::size_t> burn_in;  // overrides the fraction
    std::vector<double> initial_sd;      // diagonal proposal SD for the warm-up
    std::function<void(std::size_t done, std::size_t total)> progress;
    std::size_t progress_every = 1000;
};

// Delayed-rejection adaptive Metropolis. Gaussian random-walk proposals with
// covariance sd_scale * (Cov(history) + epsilon I) refreshed every
// adapt_interval iterations once the warm-up is over; on rejection one second
// proposal from dr_gamma times that covariance, accepted with the two-stage
// Metropolis-Hastings ratio. Deterministic given the seed.
PosteriorChain dram(const LogDensity& log_post, std::span<const double> init, const DramConfig& cfg,
                    std::vector<std::string> names = {});

}  // namespace climalign::calibration
