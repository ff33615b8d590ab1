#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

namespace climalign::uncertainty {

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double q);

// Standard error of the q-quantile from the order statistics at ranks
// n*q +- sqrt(n*q*(1-q)) (one binomial SD each side).
double quantile_standard_error(std::span<const double> sorted, double q);

enum class Provenance { deterministic, parameter, emission, combined };
const char* to_string(Provenance p);

// Temperature ensemble, row-major [draw][year].
struct Ensemble {
    std::vector<int> years;
    std::vector<double> values;
    std::size_t n_draws = 0;
    std::size_t failures = 0;

    double at(std::size_t draw, std::size_t year) const { return values[draw * years.size() + year]; }
    std::vector<double> year_column(std::size_t year_index) const;
};

struct CredibleBand {
    std::vector<int> years;
    std::vector<double> levels;  // central probabilities, e.g. 0.90, 0.99
    std::vector<double> median;
    std::vector<double> mean;
    std::vector<std::vector<double>> lower;  // [level][year]
    std::vector<std::vector<double>> upper;
    std::size_t n_samples = 0;
    std::size_t failures = 0;
    Provenance provenance = Provenance::deterministic;
    nlohmann::json metadata = nlohmann::json::object();

    int index_of(int year) const;
    std::size_t level_index(double level) const;  // throws when absent
    double width(double level, int year) const;
};

inline const std::vector<double> kDefaultLevels = {0.90, 0.99};

// Levels are sorted ascending so nesting holds by construction.
CredibleBand summarize(const Ensemble& e, std::vector<double> levels = kDefaultLevels,
                       Provenance provenance = Provenance::deterministic);

// `year, median, lo90, hi90, lo99, hi99` for the default levels; other levels
// use the same lo<pct>/hi<pct> naming.
std::string to_csv(const CredibleBand& b);
void write_csv(const CredibleBand& b, const std::filesystem::path& path);
nlohmann::json to_json(const CredibleBand& b);
CredibleBand band_from_json(const nlohmann::json& j);

// Empty when the band is consistent, otherwise the first violated invariant.
std::string check(const CredibleBand& b);

}  // namespace climalign::uncertainty
