#pragma once

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "climalign/calibration/chain.hpp"

namespace climalign::calibration {

// Integrated autocorrelation time 1 + 2 sum rho_k, truncated by Sokal's
// self-consistent window (smallest M with M >= c * tau(M)).
double integrated_autocorrelation_time(std::span<const double> x, double window_c = 5.0);

// Split-chain potential scale reduction over `splits` equal segments.
// NaN when the within-segment variance is zero.
double split_rhat(std::span<const double> x, std::size_t splits = 2);

struct ParameterSummary {
    std::string name;
    double mean = 0.0, sd = 0.0, q05 = 0.0, q50 = 0.0, q95 = 0.0;
    double iat = 0.0;   // integrated autocorrelation time
    double ess = 0.0;   // effective sample size
    double rhat = 0.0;  // split-chain statistic
    bool degenerate = false;
};

struct DiagnosticsReport {
    double acceptance_rate = 0.0;
    std::size_t n = 0, burn_in = 0;
    std::vector<ParameterSummary> parameters;
    bool degenerate = false;  // some parameter never moved
    bool stationary = true;   // no degenerate parameter and every rhat below the threshold
    std::vector<std::string> warnings;
};

DiagnosticsReport diagnostics(const PosteriorChain& chain, double rhat_threshold = 1.1);
nlohmann::json to_json(const DiagnosticsReport& r);

}  // namespace climalign::calibration
