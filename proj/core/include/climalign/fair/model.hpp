#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "climalign/fair/constants.hpp"
#include "climalign/fair/params.hpp"
#include "climalign/scenario/scenario.hpp"

namespace climalign::fair {

struct ModelConfig {
    double c0 = constants::kPreindustrial[0];  // ppm
    double ppm_to_gtc = constants::kPpmToGtC;
    double iirf_horizon = 100.0;
    double iirf_max = 97.0;
    double alpha_min = 1e-3;
    double alpha_max = 1e3;
    std::optional<double> fixed_alpha;  // bypasses the carbon-cycle feedback
    bool ozone_temperature_feedback = true;
    double strat_h2o_ratio = 0.15;
};

struct AlphaResult {
    double alpha = 1.0;
    bool clamped = false;  // target outside [iIRF(alpha_min), iIRF(alpha_max)] or above iirf_max
    double residual = 0.0;
    int iterations = 0;
};

// 100-year integrated impulse response of the alpha-scaled reservoirs.
double iirf100(double alpha, const ParameterVector& p, double horizon = 100.0);

// Root of iirf100(alpha) = min(r0 + rC*uptake + rT*T, iirf_max). Bracketed
// Newton with bisection fallback; `guess` warm-starts the Newton iteration.
AlphaResult solve_alpha(double cumulative_uptake, double temperature, const ParameterVector& p,
                        const ModelConfig& cfg = {}, double guess = 0.0);

// Concentration anomalies over preindustrial for CH4, N2O and the 28 minor gases
// (ppb, ppb, ppt), plus cumulative land-use CO2 (GtC) above the reference level.
struct GasState {
    std::array<double, constants::kConcSpecies - 1> anomaly{};
    double cumulative_land = 0.0;
};

struct ClimateState {
    std::array<double, 4> R{};        // GtC above preindustrial
    double cumulative_uptake = 0.0;   // GtC absorbed by sinks
    double cumulative_emissions = 0.0;
    std::array<double, 2> T{};        // K
    double forcing = 0.0;             // total effective forcing at the end of the last step
    double alpha = 1.0;               // last solved alpha, used as warm start
    int year = 0;                     // last completed year (0 before the first step)
    GasState gas;

    double temperature() const { return T[0] + T[1]; }
};

// Non-CO2 forcing before parameter scaling. Independent of the parameter vector,
// so it can be computed once per emission pathway.
struct GasForcing {
    double ch4 = 0.0, n2o = 0.0, minor = 0.0, strat_h2o = 0.0;
    double trop_o3 = 0.0, strat_o3 = 0.0;
    double aerosol_ari = 0.0, aerosol_aci = 0.0;
    double bc_snow = 0.0, land_use = 0.0;
};

struct ForcingBreakdown {
    double co2 = 0.0, ch4 = 0.0, n2o = 0.0, minor = 0.0, strat_h2o = 0.0;
    double trop_o3 = 0.0, strat_o3 = 0.0, aerosol_ari = 0.0, aerosol_aci = 0.0;
    double bc_snow = 0.0, land_use = 0.0, exogenous = 0.0, total = 0.0;
};

struct StepOutput {
    ClimateState state;
    double temperature = 0.0;
    double co2_ppm = 0.0;
    ForcingBreakdown forcing;
    AlphaResult alpha;
};

// Forcing building blocks.
double co2_forcing(double c_ppm, double c0_ppm, double f2x);
double myhre_overlap(double m_ppb, double n_ppb);
double ch4_forcing(double m_ppb, double m0_ppb, double n0_ppb);
double n2o_forcing(double n_ppb, double n0_ppb, double m0_ppb);
double strat_o3_forcing(std::span<const double, 16> ods_anomaly_ppt);
double aci_forcing(double sox, double bc_plus_oc);
double ozone_temperature_feedback(double temperature);

// Exact one-year solution of dT_j/dt = (q_j F - T_j)/d_j with F frozen at the
// mean of the start- and end-of-year forcing.
std::array<double, 2> thermal_step(const std::array<double, 2>& T, double forcing_start, double forcing_end,
                                   const ParameterVector& p);

GasForcing advance_gases(GasState& g, std::span<const double> row, std::span<const double> e_pi,
                         const ModelConfig& cfg = {});

StepOutput core_step(const ClimateState& s, double e_co2_gtc, const GasForcing& gas, double exo,
                     const ParameterVector& p, const ModelConfig& cfg = {});

// One annual step. `row` is one emission row in native units (1 or 39 gases);
// `e_pi` holds the reference emissions of the short-lived species (empty = zero).
StepOutput step(const ClimateState& s, std::span<const double> row, double exo, const ParameterVector& p,
                const ModelConfig& cfg = {}, std::span<const double> e_pi = {});

struct PreparedPathway {
    std::vector<int> years;
    std::vector<double> co2;  // GtC/yr
    std::vector<GasForcing> gas;
    GasState gas_after;
};

PreparedPathway prepare(const scenario::EmissionPathway& p, std::span<const double> e_pi,
                        const ModelConfig& cfg = {}, const GasState& initial = {}, std::size_t first = 0,
                        std::size_t count = static_cast<std::size_t>(-1));

struct TemperaturePathway {
    std::vector<int> years;
    std::vector<double> temperature;
    std::vector<double> co2_ppm;
    std::vector<double> forcing;
    std::vector<ForcingBreakdown> detail;  // filled when requested
    ClimateState final_state;
    int alpha_clamped = 0;
};

// `exo` must have one entry per prepared year.
TemperaturePathway run(const PreparedPathway& prep, std::span<const double> exo, const ParameterVector& p,
                       const ClimateState& initial = {}, const ModelConfig& cfg = {}, bool detail = false);

// Reference emissions of the short-lived species: the first row of a multi-gas
// pathway, nothing for single-gas input.
std::vector<double> reference_emissions(const scenario::EmissionPathway& p);

// Convenience: full scenario from a zero state.
TemperaturePathway run(const scenario::Scenario& s, const ParameterVector& p, const ModelConfig& cfg = {},
                       bool detail = false);

}  // namespace climalign::fair
