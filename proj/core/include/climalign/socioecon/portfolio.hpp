#pragma once

#include <bitset>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace climalign::socioecon {

struct Constituent {
    std::string name;
    std::string sector;
    double scope1_kt = 0.0;  // ktCO2e per year
    double scope2_kt = 0.0;
    double scope3_kt = 0.0;
    double gva_musd = 0.0;   // million USD per year
    int reporting_year = 0;

    std::string check() const;  // empty when valid
};

// A set of companies: either the portfolio under analysis or a benchmark ensemble.
struct Portfolio {
    std::string name;
    int base_year = 0;
    std::vector<Constituent> constituents;
    // Sector EEIs as reported by the issuer, used in place of the computed
    // value when present (t CO2e per million USD).
    std::map<std::string, double> reported_eei;

    void validate() const;
    std::vector<std::string> sectors() const;  // sector keys present, sorted
};
using BenchmarkEnsemble = Portfolio;

// Selected scopes; bit i-1 stands for scope i.
using ScopeMask = std::bitset<3>;
inline const ScopeMask kAllScopes{0b111};
ScopeMask scope_mask_from(const std::vector<int>& scopes);

// Exchange rates to USD.
struct CurrencyTable {
    std::map<std::string, double> to_usd = {{"USD", 1.0}, {"SEK", 0.0988}, {"EUR", 1.0516}};
    double rate(const std::string& code) const;
};

// Calendar-year value from fiscal-year records: each record covers the twelve
// months ending in (end_year, end_month); the calendar year receives each
// record's value weighted by its overlapping months / 12.
struct FiscalRecord {
    int end_year = 0;
    int end_month = 12;
    double value = 0.0;
};
double prorate_calendar_year(const std::vector<FiscalRecord>& records, int year);

// Portfolio JSON: {"name", "base_year", "currency"?, "constituents": [{"name",
// "sector", "scope1_kt", "scope2_kt", "scope3_kt", "gva_musd" | "gva" + "currency"
// | "fiscal_years": [{"end_year", "end_month", "scope1_kt", ..., "gva"}]}],
// "reported_eei"?: {sector: value}}. Field errors are collected and reported
// together as a DataError.
Portfolio portfolio_from_json(const nlohmann::json& j, const CurrencyTable& fx = {});
nlohmann::json to_json(const Portfolio& p);
Portfolio load_portfolio(const std::filesystem::path& path, const CurrencyTable& fx = {});

// Field-level validation messages for service responses; empty when valid.
std::vector<std::string> portfolio_errors(const nlohmann::json& j, const CurrencyTable& fx = {});

}  // namespace climalign::socioecon
