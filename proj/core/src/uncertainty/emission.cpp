#include "climalign/uncertainty/emission.hpp"

#include <cmath>

#include "climalign/errors.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::uncertainty {

const char* to_string(ErrorFamily f) { return f == ErrorFamily::normal ? "normal" : "lognormal"; }

ErrorFamily error_family_from_string(const std::string& s) {
    if (s == "normal") return ErrorFamily::normal;
    if (s == "lognormal") return ErrorFamily::lognormal;
    throw ConfigError("unknown emission error family '" + s + "'");
}

void EmissionUncertaintySpec::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma)) throw ConfigError("emission uncertainty: non-finite parameter");
    if (sigma < 0.0) throw ConfigError("emission uncertainty: sigma must be non-negative");
    if (family == ErrorFamily::lognormal && !(mu > -100.0))
        throw ConfigError("emission uncertainty: lognormal median factor 1 + mu/100 must be positive");
}

nlohmann::json to_json(const EmissionUncertaintySpec& s) {
    return {{"family", to_string(s.family)}, {"mu", s.mu}, {"sigma", s.sigma}};
}

EmissionUncertaintySpec emission_spec_from_json(const nlohmann::json& j) {
    EmissionUncertaintySpec s;
    try {
        s.family = error_family_from_string(j.value("family", std::string("lognormal")));
        s.mu = j.value("mu", 1.0);
        s.sigma = j.value("sigma", 13.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("emission uncertainty: ") + e.what());
    }
    s.validate();
    return s;
}

double lognormal_log_sd(double mu, double sigma) {
    const double median = 1.0 + mu / 100.0;
    const double r = (sigma / 100.0) / median;
    // e^{s^2} = (1 + sqrt(1 + 4 r^2)) / 2
    const double e = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * r * r));
    return std::sqrt(std::log(e));
}

double sample_factor(const EmissionUncertaintySpec& spec, std::mt19937_64& g) {
    spec.validate();
    const double z = util::standard_normal(g);
    if (spec.family == ErrorFamily::normal) return 1.0 + (spec.mu + spec.sigma * z) / 100.0;
    const double s = lognormal_log_sd(spec.mu, spec.sigma);
    return (1.0 + spec.mu / 100.0) * std::exp(s * z);
}

double sample_percent(const EmissionUncertaintySpec& spec, std::mt19937_64& g) {
    return 100.0 * (sample_factor(spec, g) - 1.0);
}

double sample_offset(const EmissionUncertaintySpec& spec, double base_year_value, std::mt19937_64& g) {
    if (!std::isfinite(base_year_value)) throw DomainError("sample_offset: non-finite base-year value");
    return sample_percent(spec, g) / 100.0 * base_year_value;
}

PerturbResult perturb_pathway(const scenario::EmissionPathway& p, double offset_gtc, int base_year,
                              double co2_floor_gtc) {
    if (!std::isfinite(offset_gtc)) throw DomainError("perturb_pathway: non-finite offset");
    if (p.years.empty()) throw DataError("perturb_pathway: empty pathway");
    PerturbResult r{p, 0};
    if (base_year > p.years.back()) throw DataError("perturb_pathway: base year after the pathway end");
    const auto first = static_cast<std::size_t>(std::max(0, base_year - p.years.front()));
    if (offset_gtc == 0.0) return r;

    auto& out = r.pathway;
    const std::size_t ng = p.n_gases();
    if (p.mode() == scenario::GasMode::single) {
        for (std::size_t y = first; y < p.n_years(); ++y) {
            double& v = out.at(y, 0);
            v += offset_gtc;
            if (v < co2_floor_gtc) {
                v = co2_floor_gtc;
                ++r.clamped_cells;
            }
        }
        return r;
    }

    const int fossil = p.gas_index("CO2_FOSSIL");
    const int land = p.gas_index("CO2_LAND");
    const double co2_base = p.co2(first);  // GtC
    for (std::size_t y = first; y < p.n_years(); ++y) {
        if (co2_base != 0.0) {
            const double frac = offset_gtc / co2_base;
            for (std::size_t g = 0; g < ng; ++g) out.at(y, g) += frac * p.at(first, g);
        } else {
            out.at(y, static_cast<std::size_t>(fossil)) += offset_gtc;
        }
        const double co2 = out.co2(y);
        if (co2 < co2_floor_gtc) {
            out.at(y, static_cast<std::size_t>(fossil)) += co2_floor_gtc - co2;
            ++r.clamped_cells;
        }
        for (std::size_t g = 0; g < ng; ++g) {
            if (static_cast<int>(g) == fossil || static_cast<int>(g) == land) continue;
            if (out.at(y, g) < 0.0 && p.at(y, g) >= 0.0) {
                out.at(y, g) = 0.0;
                ++r.clamped_cells;
            }
        }
    }
    return r;
}

}  // namespace climalign::uncertainty
