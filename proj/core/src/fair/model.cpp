#include "climalign/fair/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "climalign/errors.hpp"

namespace climalign::fair {

namespace c = constants;
namespace gas = scenario::gas;

double iirf100(double alpha, const ParameterVector& p, double horizon) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double at = alpha * p.tau(i);
        s += p.a(i) * at * -std::expm1(-horizon / at);
    }
    return s;
}

namespace {

double iirf_derivative(double alpha, const ParameterVector& p, double horizon) {
    // d/dalpha of alpha*tau*(1 - exp(-H/(alpha*tau)))
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double at = alpha * p.tau(i);
        double x = horizon / at;
        s += p.a(i) * p.tau(i) * (-std::expm1(-x) - x * std::exp(-x));
    }
    return s;
}

}  // namespace

AlphaResult solve_alpha(double uptake, double temperature, const ParameterVector& p, const ModelConfig& cfg,
                        double guess) {
    if (!std::isfinite(uptake) || !std::isfinite(temperature))
        throw DomainError("solve_alpha: non-finite input (uptake " + std::to_string(uptake) + ", T " +
                          std::to_string(temperature) + ")");
    const double H = cfg.iirf_horizon;
    AlphaResult r;
    double target = p[ParameterVector::r0] + p[ParameterVector::rc] * uptake + p[ParameterVector::rt] * temperature;
    if (target > cfg.iirf_max) {
        target = cfg.iirf_max;
        r.clamped = true;
    }
    double lo = cfg.alpha_min, hi = cfg.alpha_max;
    double flo = iirf100(lo, p, H) - target;
    double fhi = iirf100(hi, p, H) - target;
    if (flo >= 0.0) {
        r.alpha = lo;
        r.clamped = r.clamped || flo > 0.0;
        r.residual = flo;
        return r;
    }
    if (fhi <= 0.0) {
        r.alpha = hi;
        r.clamped = r.clamped || fhi < 0.0;
        r.residual = fhi;
        return r;
    }
    double x = (guess > lo && guess < hi) ? guess : std::sqrt(lo * hi);
    for (int it = 1; it <= 200; ++it) {
        double f = iirf100(x, p, H) - target;
        r.iterations = it;
        r.residual = f;
        if (std::abs(f) < 1e-10) break;
        if (f < 0.0)
            lo = x;
        else
            hi = x;
        double df = iirf_derivative(x, p, H);
        double xn = x - f / df;
        // Newton step must stay strictly inside the bracket, otherwise bisect
        // (geometrically, since the bracket spans six decades).
        if (!(df > 0.0) || !(xn > lo && xn < hi)) xn = std::sqrt(lo * hi);
        if (xn == x) break;
        x = xn;
    }
    r.alpha = x;
    return r;
}

double co2_forcing(double c_ppm, double c0_ppm, double f2x) {
    if (!(c_ppm > 0.0)) throw DomainError("CO2 concentration " + std::to_string(c_ppm) + " ppm is not positive");
    return f2x / std::log(2.0) * std::log(c_ppm / c0_ppm);
}

double myhre_overlap(double m, double n) {
    double mn = m * n;
    return 0.47 * std::log(1.0 + 2.01e-5 * std::pow(mn, 0.75) + 5.31e-15 * m * std::pow(mn, 1.52));
}

double ch4_forcing(double m, double m0, double n0) {
    if (!(m >= 0.0)) throw DomainError("negative CH4 concentration");
    return 0.036 * (std::sqrt(m) - std::sqrt(m0)) - (myhre_overlap(m, n0) - myhre_overlap(m0, n0));
}

double n2o_forcing(double n, double n0, double m0) {
    if (!(n >= 0.0)) throw DomainError("negative N2O concentration");
    return 0.12 * (std::sqrt(n) - std::sqrt(n0)) - (myhre_overlap(m0, n) - myhre_overlap(m0, n0));
}

double strat_o3_forcing(std::span<const double, 16> d) {
    // Equivalent effective stratospheric chlorine, bromine weighted by 45.
    double cl = 0.0, br = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
        double w = 1000.0 * d[k] * c::kFracRelease[k] / c::kFracRelease[0];
        cl += c::kClAtoms[k] * w;
        br += c::kBrAtoms[k] * w;
    }
    double eesc = std::max((cl + 45.0 * br) * c::kFracRelease[0], 0.0);
    return -1.46030698e-5 * std::pow(2.05401270e-3 * eesc, 1.03143308);
}

double aci_forcing(double sox, double bc_plus_oc) {
    double arg = 1.0 + 0.01107147 * sox + 0.01387492 * bc_plus_oc;
    if (!(arg > 0.0)) throw DomainError("aerosol emissions outside the cloud-interaction domain");
    return -1.95011431 * std::log(arg);
}

double ozone_temperature_feedback(double t) {
    if (t <= 0.0) return 0.0;
    return 0.03189267 * std::exp(-1.34966941 * t) - 0.03214807;
}

std::array<double, 2> thermal_step(const std::array<double, 2>& T, double f0, double f1, const ParameterVector& p) {
    double f = 0.5 * (f0 + f1);
    std::array<double, 2> out{};
    for (std::size_t j = 0; j < 2; ++j) {
        double keep = std::exp(-1.0 / p.d(j));
        out[j] = T[j] * keep + p.q(j) * f * (1.0 - keep);
    }
    return out;
}

namespace {

struct GasTables {
    std::array<double, c::kConcSpecies> keep{};  // exp(-1/lifetime)
    std::array<double, c::kConcSpecies> gain{};  // lifetime*(1-keep)/emis_to_conc
    GasTables() {
        for (std::size_t k = 1; k < c::kConcSpecies; ++k) {
            keep[k] = std::exp(-1.0 / c::kLifetime[k]);
            gain[k] = c::kLifetime[k] * -std::expm1(-1.0 / c::kLifetime[k]) / c::emis_to_conc(k);
        }
    }
};

const GasTables& gas_tables() {
    static const GasTables t;
    return t;
}

// Scenario column feeding concentration species k (k >= 1).
std::size_t column_of_species(std::size_t k) {
    if (k == 1) return gas::ch4;
    if (k == 2) return gas::n2o;
    return gas::first_minor + (k - 3);
}

constexpr std::array<double, 7> kAriBeta = {-6.2227e-3, 0.0, -3.8392e-4, -1.16551e-3, 1.601537e-2, -1.45339e-3, -1.55605e-3};
constexpr double kAciScale = -0.45 / (-1.5236182344467388 - -0.3002836449793625);

}  // namespace

GasForcing advance_gases(GasState& g, std::span<const double> row, std::span<const double> e_pi,
                         const ModelConfig& cfg) {
    GasForcing out;
    if (row.size() == 1) return out;
    if (row.size() != scenario::kMultiGas.size()) throw DomainError("emission row has " + std::to_string(row.size()) + " gases");
    auto ref = [&](std::size_t col) { return e_pi.empty() ? 0.0 : e_pi[col]; };
    auto d = [&](std::size_t col) { return row[col] - ref(col); };
    const auto& tab = gas_tables();
    for (std::size_t k = 1; k < c::kConcSpecies; ++k) {
        auto col = column_of_species(k);
        g.anomaly[k - 1] = g.anomaly[k - 1] * tab.keep[k] + d(col) * tab.gain[k];
    }
    const double m0 = c::kPreindustrial[1], n0 = c::kPreindustrial[2];
    const double m = m0 + g.anomaly[0], n = n0 + g.anomaly[1];
    out.ch4 = ch4_forcing(m, m0, n0);
    out.n2o = n2o_forcing(n, n0, m0);
    for (std::size_t k = 3; k < c::kConcSpecies; ++k) out.minor += c::kRadiativeEfficiency[k] * g.anomaly[k - 1] * 0.001;
    out.strat_h2o = cfg.strat_h2o_ratio * out.ch4;

    out.trop_o3 = 0.166 / 960.0 * g.anomaly[0] + 0.058 / 681.8 * d(gas::co) + 0.035 / 155.84 * d(gas::nmvoc) +
                  0.119 / 61.16 * d(gas::nox) * c::kMolwtNO / c::kMolwtN;

    std::array<double, 16> ods{};
    for (std::size_t k = 0; k < 16; ++k) ods[k] = g.anomaly[gas::first_ods - gas::first_minor + 2 + k];
    out.strat_o3 = strat_o3_forcing(ods);

    for (std::size_t k = 0; k < kAriBeta.size(); ++k) out.aerosol_ari += kAriBeta[k] * d(gas::sox + k);
    out.aerosol_aci = kAciScale * (aci_forcing(row[gas::sox], row[gas::bc] + row[gas::oc]) -
                                   aci_forcing(ref(gas::sox), ref(gas::bc) + ref(gas::oc)));
    out.bc_snow = d(gas::bc) * 0.04 / 8.09;
    g.cumulative_land += d(gas::co2_land);
    out.land_use = g.cumulative_land * -0.00113789;
    return out;
}

StepOutput core_step(const ClimateState& s, double e, const GasForcing& gf, double exo, const ParameterVector& p,
                     const ModelConfig& cfg) {
    StepOutput o;
    o.state = s;
    auto& n = o.state;
    if (cfg.fixed_alpha) {
        o.alpha.alpha = *cfg.fixed_alpha;
    } else {
        o.alpha = solve_alpha(s.cumulative_uptake, s.temperature(), p, cfg, s.alpha);
    }
    const double alpha = o.alpha.alpha;
    double sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double at = alpha * p.tau(i);
        double x = -1.0 / at;
        double keep = std::exp(x);
        sum0 += s.R[i];
        n.R[i] = s.R[i] * keep + p.a(i) * e * at * -std::expm1(x);
        sum1 += n.R[i];
    }
    n.cumulative_uptake = s.cumulative_uptake + e - (sum1 - sum0);
    n.cumulative_emissions = s.cumulative_emissions + e;
    n.alpha = alpha;

    o.co2_ppm = cfg.c0 + sum1 / cfg.ppm_to_gtc;
    auto& f = o.forcing;
    f.co2 = co2_forcing(o.co2_ppm, cfg.c0, p[ParameterVector::f2x]);
    const double s_ch4 = p.scale(ScaleCategory::ch4), s_n2o = p.scale(ScaleCategory::n2o);
    const double s_aer = p.scale(ScaleCategory::aerosol), s_o3 = p.scale(ScaleCategory::ozone);
    const double s_oth = p.scale(ScaleCategory::other);
    f.ch4 = s_ch4 * gf.ch4;
    f.n2o = s_n2o * gf.n2o;
    f.minor = s_oth * gf.minor;
    f.strat_h2o = s_oth * gf.strat_h2o;
    double tro3 = gf.trop_o3;
    if (cfg.ozone_temperature_feedback && gf.trop_o3 != 0.0) tro3 += ozone_temperature_feedback(s.temperature());
    f.trop_o3 = s_o3 * tro3;
    f.strat_o3 = s_o3 * gf.strat_o3;
    f.aerosol_ari = s_aer * gf.aerosol_ari;
    f.aerosol_aci = s_aer * gf.aerosol_aci;
    f.bc_snow = s_oth * gf.bc_snow;
    f.land_use = s_oth * gf.land_use;
    f.exogenous = exo;
    f.total = f.co2 + f.ch4 + f.n2o + f.minor + f.strat_h2o + f.trop_o3 + f.strat_o3 + f.aerosol_ari +
              f.aerosol_aci + f.bc_snow + f.land_use + f.exogenous;

    n.T = thermal_step(s.T, s.forcing, f.total, p);
    n.forcing = f.total;
    n.year = s.year + 1;
    o.temperature = n.temperature();
    return o;
}

StepOutput step(const ClimateState& s, std::span<const double> row, double exo, const ParameterVector& p,
                const ModelConfig& cfg, std::span<const double> e_pi) {
    ClimateState tmp = s;
    GasForcing gf = advance_gases(tmp.gas, row, e_pi, cfg);
    double e = row.size() == 1 ? row[0] : row[gas::co2_fossil] + row[gas::co2_land];
    auto o = core_step(tmp, e, gf, exo, p, cfg);
    return o;
}

PreparedPathway prepare(const scenario::EmissionPathway& p, std::span<const double> e_pi, const ModelConfig& cfg,
                        const GasState& initial, std::size_t first, std::size_t count) {
    PreparedPathway out;
    std::size_t end = count == static_cast<std::size_t>(-1) ? p.n_years() : std::min(p.n_years(), first + count);
    out.gas_after = initial;
    for (std::size_t i = first; i < end; ++i) {
        auto row = p.row(i);
        out.years.push_back(p.years[i]);
        out.co2.push_back(p.co2(i));
        out.gas.push_back(advance_gases(out.gas_after, row, e_pi, cfg));
    }
    return out;
}

TemperaturePathway run(const PreparedPathway& prep, std::span<const double> exo, const ParameterVector& p,
                       const ClimateState& initial, const ModelConfig& cfg, bool detail) {
    if (exo.size() != prep.years.size()) throw DomainError("exogenous forcing not aligned with the pathway");
    TemperaturePathway out;
    const std::size_t n = prep.years.size();
    out.years = prep.years;
    out.temperature.resize(n);
    out.co2_ppm.resize(n);
    out.forcing.resize(n);
    if (detail) out.detail.resize(n);
    ClimateState s = initial;
    for (std::size_t i = 0; i < n; ++i) {
        auto o = core_step(s, prep.co2[i], prep.gas[i], exo[i], p, cfg);
        s = o.state;
        s.year = prep.years[i];
        out.temperature[i] = o.temperature;
        out.co2_ppm[i] = o.co2_ppm;
        out.forcing[i] = o.forcing.total;
        if (detail) out.detail[i] = o.forcing;
        out.alpha_clamped += o.alpha.clamped ? 1 : 0;
    }
    s.gas = prep.gas_after;
    out.final_state = s;
    return out;
}

std::vector<double> reference_emissions(const scenario::EmissionPathway& p) {
    if (p.n_gases() == 1 || p.n_years() == 0) return {};
    auto r = p.row(0);
    return {r.begin(), r.end()};
}

TemperaturePathway run(const scenario::Scenario& s, const ParameterVector& p, const ModelConfig& cfg, bool detail) {
    auto e_pi = reference_emissions(s.emissions);
    auto prep = prepare(s.emissions, e_pi, cfg);
    std::vector<double> exo = s.exogenous;
    exo.resize(prep.years.size(), 0.0);
    return run(prep, exo, p, ClimateState{}, cfg, detail);
}

}  // namespace climalign::fair
