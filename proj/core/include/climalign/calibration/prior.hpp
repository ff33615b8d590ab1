#pragma once

#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "climalign/fair/params.hpp"

namespace climalign::calibration {

enum class Family { normal, lognormal, uniform };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

// normal: location = mean, scale = SD.
// lognormal: location = median (> 0), scale = SD of log.
// uniform: support is [lower, upper]; location and scale are ignored.
// Hard bounds truncate every family.
struct PriorComponent {
    std::string name;
    Family family = Family::normal;
    double location = 0.0;
    double scale = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    double log_density(double x) const;  // unnormalized by the truncation mass
    double mode() const;
    double draw(std::mt19937_64& g) const;  // untruncated draw
};

struct PriorSpec {
    std::vector<PriorComponent> components;

    std::size_t size() const { return components.size(); }
    // Empty when consistent, otherwise the first problem found.
    std::string check() const;
    std::vector<double> mode() const;
    // Rejection sampling from the truncated product prior; `accept` can impose
    // joint constraints. Throws DomainError after `max_tries` rejections.
    std::vector<double> sample(std::mt19937_64& g, const std::function<bool(std::span<const double>)>& accept = {},
                               int max_tries = 100000) const;

    // Independent priors for the 20 FaIR parameters centred on the defaults.
    static PriorSpec fair_defaults();
};

double log_prior(std::span<const double> theta, const PriorSpec& prior);
// Adds the ParameterVector invariants (a4 > 0, d1 != d2, ...) as hard support.
double log_prior(const fair::ParameterVector& theta, const PriorSpec& prior);

fair::ParameterVector sample_parameters(const PriorSpec& prior, std::mt19937_64& g);

// {"priors": [{"name", "family", "location", "scale", "lower", "upper"}]}.
// A FaIR prior must name each of the 20 parameters exactly once.
nlohmann::json to_json(const PriorSpec& p);
PriorSpec prior_from_json(const nlohmann::json& j, bool require_fair_names = true);

}  // namespace climalign::calibration
