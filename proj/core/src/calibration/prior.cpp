#include "climalign/calibration/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "climalign/errors.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::calibration {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::normal: return "normal";
        case Family::lognormal: return "lognormal";
        case Family::uniform: return "uniform";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "normal") return Family::normal;
    if (s == "lognormal") return Family::lognormal;
    if (s == "uniform") return Family::uniform;
    throw ConfigError("unknown prior family '" + s + "'");
}

double PriorComponent::log_density(double x) const {
    if (!std::isfinite(x) || x < lower || x > upper) return -kInf;
    switch (family) {
        case Family::normal: {
            const double z = (x - location) / scale;
            return -0.5 * z * z - std::log(scale) - kLogSqrt2Pi;
        }
        case Family::lognormal: {
            if (x <= 0.0) return -kInf;
            const double z = (std::log(x) - std::log(location)) / scale;
            return -0.5 * z * z - std::log(scale) - std::log(x) - kLogSqrt2Pi;
        }
        case Family::uniform:
            return -std::log(upper - lower);
    }
    return -kInf;
}

double PriorComponent::mode() const {
    double m = 0.0;
    switch (family) {
        case Family::normal: m = location; break;
        case Family::lognormal: m = location * std::exp(-scale * scale); break;
        case Family::uniform: m = 0.5 * (lower + upper); break;
    }
    return std::clamp(m, lower, upper);
}

double PriorComponent::draw(std::mt19937_64& g) const {
    switch (family) {
        case Family::normal: return location + scale * util::standard_normal(g);
        case Family::lognormal: return location * std::exp(scale * util::standard_normal(g));
        case Family::uniform: return lower + (upper - lower) * util::uniform01(g);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string PriorSpec::check() const {
    if (components.empty()) return "prior has no components";
    std::set<std::string> seen;
    for (const auto& c : components) {
        if (!seen.insert(c.name).second) return "duplicate prior for '" + c.name + "'";
        if (!(c.lower < c.upper)) return "prior '" + c.name + "': lower bound must be below upper bound";
        if (c.family == Family::uniform) {
            if (!std::isfinite(c.lower) || !std::isfinite(c.upper))
                return "prior '" + c.name + "': uniform prior needs finite bounds";
            continue;
        }
        if (!(c.scale > 0.0) || !std::isfinite(c.scale)) return "prior '" + c.name + "': scale must be positive";
        if (!std::isfinite(c.location)) return "prior '" + c.name + "': location must be finite";
        if (c.family == Family::lognormal && !(c.location > 0.0))
            return "prior '" + c.name + "': lognormal median must be positive";
    }
    return {};
}

std::vector<double> PriorSpec::mode() const {
    std::vector<double> m;
    m.reserve(components.size());
    for (const auto& c : components) m.push_back(c.mode());
    return m;
}

std::vector<double> PriorSpec::sample(std::mt19937_64& g, const std::function<bool(std::span<const double>)>& accept,
                                      int max_tries) const {
    std::vector<double> x(components.size());
    for (int t = 0; t < max_tries; ++t) {
        bool ok = true;
        for (std::size_t i = 0; i < components.size() && ok; ++i) {
            x[i] = components[i].draw(g);
            ok = x[i] >= components[i].lower && x[i] <= components[i].upper;
        }
        if (ok && (!accept || accept(x))) return x;
    }
    throw DomainError("prior sampling: no admissible draw after " + std::to_string(max_tries) + " tries");
}

PriorSpec PriorSpec::fair_defaults() {
    using P = fair::ParameterVector;
    const auto d = P::defaults();
    const auto& names = P::names();
    PriorSpec s;
    s.components.resize(P::kSize);
    auto set = [&](std::size_t i, Family f, double loc, double scale, double lo, double hi) {
        s.components[i] = {std::string(names[i]), f, loc, scale, lo, hi};
    };
    // A 5-95% half-width of h (relative) maps to SD h/1.645 for a normal prior.
    auto rel_sd = [](double half_width) { return half_width / 1.6448536269514722; };

    for (std::size_t i = P::a1; i <= P::a3; ++i) set(i, Family::normal, d[i], 0.1 * d[i], 0.0, 1.0);
    set(P::tau1, Family::lognormal, d[P::tau1], 0.1, 1e3, 1e8);
    for (std::size_t i = P::tau2; i <= P::tau4; ++i)
        set(i, Family::lognormal, d[i], 0.1, 0.1 * d[i], 10.0 * d[i]);
    for (std::size_t i = P::r0; i <= P::rt; ++i)
        set(i, Family::normal, d[i], rel_sd(0.13) * d[i], 0.0, 3.0 * d[i]);
    set(P::f2x, Family::normal, d[P::f2x], rel_sd(0.2) * d[P::f2x], 1.0, 8.0);
    set(P::q1, Family::lognormal, d[P::q1], 0.25, 1e-3, 5.0);
    set(P::q2, Family::lognormal, d[P::q2], 0.25, 1e-3, 5.0);
    set(P::d1, Family::lognormal, d[P::d1], 0.25, 20.0, 2000.0);
    set(P::d2, Family::lognormal, d[P::d2], 0.25, 0.1, 20.0);
    set(P::scale_ch4, Family::normal, 1.0, rel_sd(0.2), 0.0, 3.0);
    set(P::scale_n2o, Family::normal, 1.0, rel_sd(0.2), 0.0, 3.0);
    set(P::scale_aerosol, Family::normal, 1.0, rel_sd(0.9), 0.0, 3.0);
    set(P::scale_ozone, Family::normal, 1.0, rel_sd(0.5), 0.0, 3.0);
    set(P::scale_other, Family::normal, 1.0, rel_sd(0.5), 0.0, 3.0);
    return s;
}

double log_prior(std::span<const double> theta, const PriorSpec& prior) {
    if (theta.size() != prior.size()) throw ConfigError("log_prior: dimension mismatch");
    double lp = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        lp += prior.components[i].log_density(theta[i]);
        if (lp == -kInf) return lp;
    }
    return lp;
}

double log_prior(const fair::ParameterVector& theta, const PriorSpec& prior) {
    if (!theta.valid()) return -kInf;
    return log_prior(std::span<const double>(theta.v), prior);
}

fair::ParameterVector sample_parameters(const PriorSpec& prior, std::mt19937_64& g) {
    if (prior.size() != fair::ParameterVector::kSize) throw ConfigError("prior is not a FaIR prior");
    auto x = prior.sample(g, [](std::span<const double> v) {
        fair::ParameterVector p;
        std::copy(v.begin(), v.end(), p.v.begin());
        return p.valid();
    });
    fair::ParameterVector p;
    std::copy(x.begin(), x.end(), p.v.begin());
    return p;
}

nlohmann::json to_json(const PriorSpec& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : p.components) {
        nlohmann::json e = {{"name", c.name}, {"family", to_string(c.family)}};
        if (c.family != Family::uniform) {
            e["location"] = c.location;
            e["scale"] = c.scale;
        }
        if (std::isfinite(c.lower)) e["lower"] = c.lower;
        if (std::isfinite(c.upper)) e["upper"] = c.upper;
        arr.push_back(std::move(e));
    }
    return {{"priors", arr}};
}

PriorSpec prior_from_json(const nlohmann::json& j, bool require_fair_names) {
    const nlohmann::json* arr = &j;
    if (j.is_object()) {
        if (!j.contains("priors")) throw ConfigError("prior: missing 'priors' array");
        arr = &j.at("priors");
    }
    if (!arr->is_array()) throw ConfigError("prior: 'priors' must be an array");
    PriorSpec s;
    try {
        for (const auto& e : *arr) {
            PriorComponent c;
            c.name = e.at("name").get<std::string>();
            c.family = family_from_string(e.at("family").get<std::string>());
            if (c.family != Family::uniform) {
                c.location = e.at("location").get<double>();
                c.scale = e.at("scale").get<double>();
            }
            if (e.contains("lower") && !e["lower"].is_null()) c.lower = e["lower"].get<double>();
            if (e.contains("upper") && !e["upper"].is_null()) c.upper = e["upper"].get<double>();
            s.components.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("prior: ") + ex.what());
    }
    if (auto msg = s.check(); !msg.empty()) throw ConfigError("prior: " + msg);
    if (require_fair_names) {
        const auto& names = fair::ParameterVector::names();
        if (s.size() != names.size()) throw ConfigError("prior: expected 20 FaIR parameters");
        PriorSpec ordered;
        for (const auto& n : names) {
            auto it = std::find_if(s.components.begin(), s.components.end(),
                                   [&](const PriorComponent& c) { return c.name == n; });
            if (it == s.components.end()) throw ConfigError("prior: no entry for '" + std::string(n) + "'");
            ordered.components.push_back(*it);
        }
        using P = fair::ParameterVector;
        for (std::size_t i : {P::tau1, P::tau2, P::tau3, P::tau4, P::f2x, P::q1, P::q2, P::d1, P::d2}) {
            const auto& c = ordered.components[i];
            if (c.lower < 0.0 || (c.family == Family::normal && !std::isfinite(c.lower)))
                throw ConfigError("prior: '" + c.name + "' must be bounded below by zero");
        }
        for (std::size_t i : {P::a1, P::a2, P::a3}) {
            const auto& c = ordered.components[i];
            if (c.lower < 0.0 || c.upper > 1.0) throw ConfigError("prior: '" + c.name + "' must lie in [0, 1]");
        }
        s = std::move(ordered);
    }
    return s;
}

}  // namespace climalign::calibration
