#include "climalign/fair/params.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "climalign/errors.hpp"

namespace climalign::fair {

ParameterVector ParameterVector::defaults() {
    ParameterVector p;
    p.v = {0.2173, 0.2240, 0.2824,
           1.0e6, 394.4, 36.54, 4.304,
           35.0, 0.019, 4.165,
           3.71,
           0.33, 0.41,
           239.0, 4.1,
           1.0, 1.0, 1.0, 1.0, 1.0};
    return p;
}

const std::array<std::string_view, ParameterVector::kSize>& ParameterVector::names() {
    static const std::array<std::string_view, kSize> n = {
        "a1", "a2", "a3", "tau1", "tau2", "tau3", "tau4", "r0", "rc", "rt", "f2x",
        "q1", "q2", "d1", "d2", "scale_ch4", "scale_n2o", "scale_aerosol", "scale_ozone", "scale_other"};
    return n;
}

std::string ParameterVector::check() const {
    for (std::size_t i = 0; i < kSize; ++i)
        if (!std::isfinite(v[i])) return std::string(names()[i]) + " is not finite";
    for (std::size_t i = 0; i < 4; ++i)
        if (!(a(i) > 0.0)) return "reservoir fraction a" + std::to_string(i + 1) + " must be positive";
    for (std::size_t i = 0; i < 4; ++i)
        if (!(tau(i) > 0.0)) return "tau" + std::to_string(i + 1) + " must be positive";
    if (!(v[f2x] > 0.0)) return "f2x must be positive";
    if (!(v[q1] > 0.0) || !(v[q2] > 0.0)) return "q1, q2 must be positive";
    if (!(v[d1] > 0.0) || !(v[d2] > 0.0)) return "d1, d2 must be positive";
    if (v[d1] == v[d2]) return "d1 and d2 must differ";
    return {};
}

nlohmann::json to_json(const ParameterVector& p) {
    nlohmann::json j;
    j["values"] = p.v;
    for (std::size_t i = 0; i < ParameterVector::kSize; ++i) j["named"][std::string(ParameterVector::names()[i])] = p.v[i];
    j["named"]["a4"] = p.a(3);
    return j;
}

ParameterVector parameters_from_json(const nlohmann::json& j) {
    ParameterVector p = ParameterVector::defaults();
    if (j.is_array()) {
        if (j.size() != ParameterVector::kSize) throw FormatError("parameter array must have 20 entries");
        for (std::size_t i = 0; i < ParameterVector::kSize; ++i) p.v[i] = j[i].get<double>();
    } else if (j.contains("values")) {
        return parameters_from_json(j["values"]);
    } else {
        for (std::size_t i = 0; i < ParameterVector::kSize; ++i) {
            std::string key(ParameterVector::names()[i]);
            if (j.contains(key)) p.v[i] = j[key].get<double>();
        }
    }
    return p;
}

}  // namespace climalign::fair
