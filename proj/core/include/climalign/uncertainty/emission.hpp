#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <random>

#include "climalign/scenario/scenario.hpp"

namespace climalign::uncertainty {

enum class ErrorFamily { normal, lognormal };

const char* to_string(ErrorFamily f);
ErrorFamily error_family_from_string(const std::string& s);

// Percentage deviation p of the base-year emissions.
//   normal:    p ~ N(mu, sigma^2).
//   lognormal: the emission factor m = 1 + p/100 is lognormal with median
//              1 + mu/100 and standard deviation sigma/100, so m > 0 always.
struct EmissionUncertaintySpec {
    ErrorFamily family = ErrorFamily::lognormal;
    double mu = 1.0;     // percent
    double sigma = 13.0; // percent

    void validate() const;
};

nlohmann::json to_json(const EmissionUncertaintySpec& s);
EmissionUncertaintySpec emission_spec_from_json(const nlohmann::json& j);

// Log-scale SD s of the lognormal factor: solves
// median^2 * e^{s^2} (e^{s^2} - 1) = (sigma/100)^2.
double lognormal_log_sd(double mu, double sigma);

// Multiplicative factor m = 1 + p/100 for one draw.
double sample_factor(const EmissionUncertaintySpec& spec, std::mt19937_64& g);
double sample_percent(const EmissionUncertaintySpec& spec, std::mt19937_64& g);
// (p/100) * base_year_value.
double sample_offset(const EmissionUncertaintySpec& spec, double base_year_value, std::mt19937_64& g);

struct PerturbResult {
    scenario::EmissionPathway pathway;
    std::size_t clamped_cells = 0;
    bool clamped() const { return clamped_cells > 0; }
};

// Adds `offset_gtc` to total CO2 in every year from `base_year` on. In
// multi-gas mode every gas moves by the same fraction offset / CO2(base) of
// its own base-year value, which shifts total CO2 by exactly the offset.
// Values pushed below the floor (CO2: co2_floor_gtc, other gases: zero unless
// already negative) are clamped and counted.
PerturbResult perturb_pathway(const scenario::EmissionPathway& p, double offset_gtc, int base_year,
                              double co2_floor_gtc = -100.0);

}  // namespace climalign::uncertainty
