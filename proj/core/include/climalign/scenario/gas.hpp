#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace climalign::scenario {

enum class GasMode { single, multi };

// Column order of the multi-gas schema. The fair-core forcing code indexes
// rows with the constants in namespace `gas`.
inline constexpr std::array<std::string_view, 39> kMultiGas = {
    "CO2_FOSSIL", "CO2_LAND", "CH4",      "N2O",      "SOX",       "CO",        "NMVOC",     "NOX",
    "BC",         "OC",       "NH3",      "CF4",      "C2F6",      "C6F14",     "HFC23",     "HFC32",
    "HFC43_10",   "HFC125",   "HFC134A",  "HFC143A",  "HFC227EA",  "HFC245FA",  "SF6",       "CFC11",
    "CFC12",      "CFC113",   "CFC114",   "CFC115",   "CCL4",      "CH3CCL3",   "HCFC22",    "HCFC141B",
    "HCFC142B",   "HALON1211", "HALON1202", "HALON1301", "HALON2402", "CH3BR", "CH3CL"};

inline constexpr std::string_view kSingleGas = "CO2";

namespace gas {
enum : std::size_t {
    co2_fossil = 0,
    co2_land,
    ch4,
    n2o,
    sox,
    co,
    nmvoc,
    nox,
    bc,
    oc,
    nh3,
    first_minor,
};
inline constexpr std::size_t minor_count = 28;
// CFC11 is the first ozone-depleting substance; the remaining 15 follow it.
inline constexpr std::size_t first_ods = 23;
inline constexpr std::size_t ods_count = 16;
}  // namespace gas

std::vector<std::string> gas_schema(GasMode mode);
GasMode mode_of(const std::vector<std::string>& gases);

// Unit carried internally for a gas (CO2 columns: GtC/yr).
std::string native_unit(std::string_view gas);

// Factor that converts a value in `unit` to the native unit of `gas`.
// Throws SchemaError for unknown combinations.
double unit_factor(std::string_view gas, std::string_view unit);

bool is_co2(std::string_view gas);

// 12/44: mass of carbon per mass of CO2.
inline constexpr double kCarbonPerCo2 = 12.0 / 44.0;

}  // namespace climalign::scenario
