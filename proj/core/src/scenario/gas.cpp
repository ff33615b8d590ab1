#include "climalign/scenario/gas.hpp"

#include <algorithm>

#include "climalign/errors.hpp"

namespace climalign::scenario {

std::vector<std::string> gas_schema(GasMode mode) {
    if (mode == GasMode::single) return {std::string(kSingleGas)};
    return {kMultiGas.begin(), kMultiGas.end()};
}

GasMode mode_of(const std::vector<std::string>& gases) {
    if (gases.size() == 1 && gases[0] == kSingleGas) return GasMode::single;
    if (gases.size() == kMultiGas.size() && std::equal(gases.begin(), gases.end(), kMultiGas.begin()))
        return GasMode::multi;
    throw SchemaError("gas list matches neither the single-gas nor the 39-gas schema");
}

bool is_co2(std::string_view gas) { return gas == "CO2" || gas == "CO2_FOSSIL" || gas == "CO2_LAND"; }

namespace {

bool is_minor(std::string_view gas) {
    auto it = std::find(kMultiGas.begin(), kMultiGas.end(), gas);
    return it != kMultiGas.end() && static_cast<std::size_t>(it - kMultiGas.begin()) >= gas::first_minor;
}

std::string_view strip_per_year(std::string_view unit) {
    if (unit.size() > 3 && unit.substr(unit.size() - 3) == "/yr") unit.remove_suffix(3);
    return unit;
}

}  // namespace

std::string native_unit(std::string_view gas) {
    if (is_co2(gas)) return "GtC/yr";
    if (gas == "N2O") return "MtN2/yr";
    if (gas == "SOX") return "MtS/yr";
    if (gas == "NOX") return "MtN/yr";
    if (is_minor(gas)) return "kt/yr";
    return "Mt" + std::string(gas) + "/yr";
}

double unit_factor(std::string_view gas, std::string_view unit_in) {
    auto unit = strip_per_year(unit_in);
    auto fail = [&]() -> double {
        throw SchemaError("unsupported unit '" + std::string(unit_in) + "' for gas " + std::string(gas));
    };
    if (is_co2(gas)) {
        if (unit == "GtC") return 1.0;
        if (unit == "MtC") return 1e-3;
        if (unit == "GtCO2") return kCarbonPerCo2;
        if (unit == "MtCO2") return kCarbonPerCo2 * 1e-3;
        return fail();
    }
    if (gas == "N2O") {
        if (unit == "MtN2") return 1.0;
        if (unit == "MtN2O") return 28.0 / 44.0;
        if (unit == "ktN2O") return 28.0 / 44.0 * 1e-3;
        return fail();
    }
    if (gas == "SOX") {
        if (unit == "MtS") return 1.0;
        if (unit == "MtSO2") return 32.0 / 64.0;
        return fail();
    }
    if (gas == "NOX") {
        if (unit == "MtN") return 1.0;
        if (unit == "MtNO2") return 14.0 / 46.0;
        return fail();
    }
    if (is_minor(gas)) {
        if (unit == "kt" || unit == "kt" + std::string(gas)) return 1.0;
        if (unit == "t") return 1e-3;
        return fail();
    }
    if (std::find(kMultiGas.begin(), kMultiGas.end(), gas) != kMultiGas.end()) {
        if (unit == "Mt" || unit == "Mt" + std::string(gas)) return 1.0;
        if (unit == "kt") return 1e-3;
        return fail();
    }
    throw SchemaError("unknown gas " + std::string(gas));
}

}  // namespace climalign::scenario
