#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climalign/scenario/scenario.hpp"
#include "climalign/scenario/sectors.hpp"
#include "climalign/socioecon/portfolio.hpp"
#include "climalign/uncertainty/propagate.hpp"

namespace climalign::socioecon {

// Sum of the selected scopes in tCO2e.
double company_emissions_t(const Constituent& c, ScopeMask scopes = kAllScopes);

// tCO2e per million USD of gross value added.
double company_eei(const Constituent& c, ScopeMask scopes = kAllScopes);

// Emission-weighted mean company EEI over the portfolio's constituents in the
// sector; nullopt when the sector is not represented or carries no emissions.
std::optional<double> portfolio_sector_eei(const Portfolio& p, std::string_view sector, ScopeMask scopes = kAllScopes);

// GVA-weighted mean company EEI over the ensemble's constituents in the sector.
// Throws NotFoundError when no constituent belongs to the sector.
double benchmark_sector_eei(const BenchmarkEnsemble& b, std::string_view sector, ScopeMask scopes = kAllScopes);

// Every gas scaled by eei_p / eei_bench.
std::vector<double> portfolio_sector_emissions(double eei_p, double eei_bench, std::span<const double> sector_emissions);
std::map<std::string, double> portfolio_sector_emissions(double eei_p, double eei_bench,
                                                         const std::map<std::string, double>& sector_emissions);

struct AlignmentOptions {
    ScopeMask scopes = kAllScopes;
    // Prefer a sector EEI listed under "reported_eei" over the computed value.
    bool use_reported_eei = true;
};

struct SectorAdjustment {
    std::string sector;
    double share = 0.0;            // share of global emissions
    double effective_share = 0.0;  // share net of represented subsectors
    double portfolio_eei = 0.0;
    double benchmark_eei = 0.0;
    bool portfolio_reported = false;
    bool benchmark_reported = false;
    double ratio() const { return portfolio_eei / benchmark_eei; }
};

struct GlobalAdjustment {
    std::vector<SectorAdjustment> sectors;
    // Global emissions with represented sectors at portfolio intensity, divided
    // by the scenario's global emissions. Exactly 1 when every ratio is 1.
    double factor = 1.0;
};

// Reported value when allowed and present, otherwise the computed weighting
// (emission-weighted for a portfolio, GVA-weighted for a benchmark).
enum class Role { portfolio, benchmark };
std::optional<double> effective_sector_eei(const Portfolio& p, std::string_view sector, Role role,
                                           const AlignmentOptions& opt = {}, bool* reported = nullptr);

GlobalAdjustment global_adjustment(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::SectorShares& shares,
                                   const AlignmentOptions& opt = {});

// Scenario whose emissions from the portfolio base year on are the adjusted
// base-year global emissions carried along each gas's own growth curve. Years
// before the base year are untouched.
scenario::Scenario portfolio_global_pathway(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::Scenario& s,
                                            const scenario::SectorShares& shares, const AlignmentOptions& opt = {});
scenario::Scenario apply_adjustment(const scenario::Scenario& s, int base_year, double factor);

struct TemperatureSummary {
    int year = 0;
    double mean = 0.0;
    double median = 0.0;
};

struct ImpliedTemperature {
    std::string scenario;
    GlobalAdjustment adjustment;
    uncertainty::CredibleBand band;
    TemperatureSummary mid_century;   // 2050
    TemperatureSummary end_century;   // last year of the scenario
};

TemperatureSummary summary_at(const uncertainty::CredibleBand& band, int year);

ImpliedTemperature implied_temperature(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::Scenario& s,
                                       const scenario::SectorShares& shares, const uncertainty::DrawCache& cache,
                                       const std::optional<uncertainty::EmissionUncertaintySpec>& spec,
                                       const uncertainty::PropagateOptions& popt, const AlignmentOptions& opt = {});

// Unadjusted scenario through the same draws.
ImpliedTemperature baseline_temperature(const scenario::Scenario& s, const uncertainty::DrawCache& cache,
                                        const std::optional<uncertainty::EmissionUncertaintySpec>& spec,
                                        const uncertainty::PropagateOptions& popt);

nlohmann::json to_json(const GlobalAdjustment& a);
nlohmann::json to_json(const ImpliedTemperature& t, bool include_band = true);

}  // namespace climalign::socioecon
