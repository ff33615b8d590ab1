#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "climalign/scenario/gas.hpp"

namespace climalign::scenario {

// Annual per-gas emissions in native units, row-major [year][gas].
struct EmissionPathway {
    std::vector<int> years;
    std::vector<std::string> gases;
    std::vector<double> values;

    std::size_t n_years() const { return years.size(); }
    std::size_t n_gases() const { return gases.size(); }
    double at(std::size_t year_index, std::size_t gas_index) const { return values[year_index * gases.size() + gas_index]; }
    double& at(std::size_t year_index, std::size_t gas_index) { return values[year_index * gases.size() + gas_index]; }
    std::span<const double> row(std::size_t year_index) const {
        return {values.data() + year_index * gases.size(), gases.size()};
    }
    int index_of(int year) const;  // -1 when absent
    int gas_index(std::string_view gas) const;
    GasMode mode() const { return mode_of(gases); }

    // Total CO2 (fossil + land, or the single CO2e column) in GtC/yr.
    double co2(std::size_t year_index) const;
};

struct Scenario {
    std::string id;
    EmissionPathway emissions;
    std::vector<double> exogenous;  // W/m2, one per year; zeros when not supplied
    int branch_year = 0;            // first year that differs from the shared history, 0 if unknown
    std::string source;
};

struct ExogenousForcing {
    std::vector<int> years;
    std::vector<double> values;  // sum of all forcing columns
};

struct LoadOptions {
    double co2_floor_gtc = -100.0;
};

// CSV `year,<gas>...`; units come from the `<stem>.units.json` sidecar when present,
// otherwise native units are assumed.
Scenario load_scenario(const std::filesystem::path& csv, const std::vector<std::string>& gas_schema,
                       const LoadOptions& opt = {});
Scenario parse_scenario(std::string_view csv_text, const std::vector<std::string>& gas_schema,
                        const std::vector<std::string>& units, std::string id, const LoadOptions& opt = {});

// Writes native units and the sidecar. Reloading reproduces the numeric payload exactly.
void save_scenario(const Scenario& s, const std::filesystem::path& csv);
std::string serialize_emissions(const EmissionPathway& p);

void validate(const EmissionPathway& p, const LoadOptions& opt = {});

ExogenousForcing load_exogenous(const std::filesystem::path& csv);
void attach_exogenous(Scenario& s, const ExogenousForcing& f);

}  // namespace climalign::scenario
