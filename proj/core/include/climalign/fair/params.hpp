#pragma once

#include <array>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

namespace climalign::fair {

enum class ScaleCategory : std::size_t { ch4 = 0, n2o, aerosol, ozone, other };

// The 20 calibratable entries. The fourth reservoir fraction is not free:
// a4 = 1 - a1 - a2 - a3.
struct ParameterVector {
    static constexpr std::size_t kSize = 20;
    enum Index : std::size_t {
        a1 = 0, a2, a3,
        tau1, tau2, tau3, tau4,
        r0, rc, rt,
        f2x,
        q1, q2,
        d1, d2,
        scale_ch4, scale_n2o, scale_aerosol, scale_ozone, scale_other,
    };

    std::array<double, kSize> v{};

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double a(std::size_t i) const { return i < 3 ? v[a1 + i] : 1.0 - v[a1] - v[a2] - v[a3]; }
    double tau(std::size_t i) const { return v[tau1 + i]; }
    double q(std::size_t j) const { return v[q1 + j]; }
    double d(std::size_t j) const { return v[d1 + j]; }
    double scale(ScaleCategory c) const { return v[scale_ch4 + static_cast<std::size_t>(c)]; }

    static ParameterVector defaults();
    static const std::array<std::string_view, kSize>& names();

    // Empty string when valid, otherwise the first violated invariant.
    std::string check() const;
    bool valid() const { return check().empty(); }

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

// {"values": [...20], "named": {"a1": ..}}
nlohmann::json to_json(const ParameterVector& p);
ParameterVector parameters_from_json(const nlohmann::json& j);

}  // namespace climalign::fair
