#include "climalign/socioecon/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "climalign/errors.hpp"
#include "climalign/scenario/sectors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::socioecon {

namespace {

constexpr const char* kScopeFields[3] = {"scope1_kt", "scope2_kt", "scope3_kt"};

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Reads an optional number; records a message when present but not numeric.
std::optional<double> number(const nlohmann::json& o, const char* key, const std::string& where,
                             std::vector<std::string>& errs) {
    if (!o.contains(key)) return std::nullopt;
    if (!o[key].is_number()) {
        errs.push_back(where + "." + key + ": expected a number");
        return std::nullopt;
    }
    return o[key].get<double>();
}

struct Parsed {
    Portfolio p;
    std::vector<std::string> errors;
};

void parse_fiscal(const nlohmann::json& c, Constituent& out, int year, const std::string& where,
                  const std::string& currency, const CurrencyTable& fx, std::vector<std::string>& errs) {
    const auto& fy = c["fiscal_years"];
    if (!fy.is_array() || fy.empty()) {
        errs.push_back(where + ".fiscal_years: expected a non-empty array");
        return;
    }
    std::vector<FiscalRecord> scopes[3], gva;
    for (std::size_t k = 0; k < fy.size(); ++k) {
        const auto& r = fy[k];
        const std::string w = where + ".fiscal_years[" + std::to_string(k) + "]";
        if (!r.is_object()) {
            errs.push_back(w + ": expected an object");
            continue;
        }
        FiscalRecord base;
        auto ey = number(r, "end_year", w, errs);
        if (!ey) {
            errs.push_back(w + ".end_year: required");
            continue;
        }
        base.end_year = static_cast<int>(*ey);
        base.end_month = static_cast<int>(number(r, "end_month", w, errs).value_or(12));
        if (base.end_month < 1 || base.end_month > 12) errs.push_back(w + ".end_month: must lie in 1..12");
        for (int s = 0; s < 3; ++s) {
            auto f = base;
            f.value = number(r, kScopeFields[s], w, errs).value_or(0.0);
            scopes[s].push_back(f);
        }
        const std::string cur = r.value("currency", currency);
        double rate = 1.0;
        try {
            rate = fx.rate(cur);
        } catch (const Error& e) {
            errs.push_back(w + ".currency: " + e.what());
        }
        auto g = number(r, "gva", w, errs);
        if (!g) g = number(r, "gva_musd", w, errs);
        if (!g) {
            errs.push_back(w + ".gva: required");
            continue;
        }
        auto f = base;
        f.value = *g * rate;
        gva.push_back(f);
    }
    if (!errs.empty()) return;
    try {
        out.scope1_kt = prorate_calendar_year(scopes[0], year);
        out.scope2_kt = prorate_calendar_year(scopes[1], year);
        out.scope3_kt = prorate_calendar_year(scopes[2], year);
        out.gva_musd = prorate_calendar_year(gva, year);
        out.reporting_year = year;
    } catch (const Error& e) {
        errs.push_back(where + ".fiscal_years: " + e.what());
    }
}

Parsed parse(const nlohmann::json& j, const CurrencyTable& fx) {
    Parsed r;
    auto& errs = r.errors;
    if (!j.is_object()) {
        errs.push_back("portfolio: expected a JSON object");
        return r;
    }
    r.p.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
    if (auto by = number(j, "base_year", "portfolio", errs))
        r.p.base_year = static_cast<int>(*by);
    else if (!j.contains("base_year"))
        errs.push_back("portfolio.base_year: required");
    const std::string currency = j.contains("currency") && j["currency"].is_string() ? j["currency"].get<std::string>() : "USD";

    if (!j.contains("constituents") || !j["constituents"].is_array()) {
        errs.push_back("portfolio.constituents: expected an array");
        return r;
    }
    const auto& cs = j["constituents"];
    if (cs.empty()) errs.push_back("portfolio.constituents: must not be empty");
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto& c = cs[i];
        const std::string where = "constituents[" + std::to_string(i) + "]";
        if (!c.is_object()) {
            errs.push_back(where + ": expected an object");
            continue;
        }
        Constituent out;
        if (c.contains("name") && c["name"].is_string()) out.name = c["name"].get<std::string>();
        if (c.contains("sector") && c["sector"].is_string())
            out.sector = c["sector"].get<std::string>();
        else
            errs.push_back(where + ".sector: required string");
        const std::size_t before = errs.size();
        if (c.contains("fiscal_years")) {
            parse_fiscal(c, out, r.p.base_year, where, c.value("currency", currency), fx, errs);
        } else {
            double* dst[3] = {&out.scope1_kt, &out.scope2_kt, &out.scope3_kt};
            for (int s = 0; s < 3; ++s) {
                *dst[s] = number(c, kScopeFields[s], where, errs).value_or(0.0);
                if (!finite_nonneg(*dst[s])) errs.push_back(where + "." + kScopeFields[s] + ": must be non-negative");
            }
            if (auto g = number(c, "gva_musd", where, errs)) {
                out.gva_musd = *g;
            } else if (auto g2 = number(c, "gva", where, errs)) {
                try {
                    out.gva_musd = *g2 * fx.rate(c.value("currency", currency));
                } catch (const Error& e) {
                    errs.push_back(where + ".currency: " + e.what());
                }
            } else if (!c.contains("gva_musd") && !c.contains("gva")) {
                errs.push_back(where + ".gva_musd: required");
            }
            out.reporting_year = static_cast<int>(number(c, "reporting_year", where, errs).value_or(r.p.base_year));
        }
        if (errs.size() == before) {
            if (auto msg = out.check(); !msg.empty()) errs.push_back(where + ": " + msg);
            if (out.reporting_year != r.p.base_year)
                errs.push_back(where + ".reporting_year: " + std::to_string(out.reporting_year) +
                               " differs from base year " + std::to_string(r.p.base_year));
        }
        r.p.constituents.push_back(std::move(out));
    }
    if (j.contains("reported_eei")) {
        const auto& re = j["reported_eei"];
        if (!re.is_object()) {
            errs.push_back("portfolio.reported_eei: expected an object");
        } else {
            for (const auto& [k, v] : re.items()) {
                if (!v.is_number() || !finite_nonneg(v.get<double>()))
                    errs.push_back("portfolio.reported_eei." + k + ": expected a non-negative number");
                else
                    r.p.reported_eei[k] = v.get<double>();
            }
        }
    }
    return r;
}

}  // namespace

std::string Constituent::check() const {
    if (!finite_nonneg(scope1_kt) || !finite_nonneg(scope2_kt) || !finite_nonneg(scope3_kt))
        return "scope emissions must be finite and non-negative";
    if (!(std::isfinite(gva_musd) && gva_musd > 0.0)) return "gva must be positive";
    if (sector.empty()) return "sector is empty";
    return {};
}

void Portfolio::validate() const {
    if (constituents.empty()) throw DataError("portfolio '" + name + "' has no constituents");
    for (std::size_t i = 0; i < constituents.size(); ++i) {
        const auto& c = constituents[i];
        if (auto msg = c.check(); !msg.empty())
            throw DataError("portfolio '" + name + "' constituent " + std::to_string(i) + " (" + c.name + "): " + msg);
        if (c.reporting_year != 0 && c.reporting_year != base_year)
            throw DataError("portfolio '" + name + "' constituent '" + c.name + "' reports " +
                            std::to_string(c.reporting_year) + ", base year is " + std::to_string(base_year));
    }
    for (const auto& [k, v] : reported_eei)
        if (!finite_nonneg(v)) throw DataError("portfolio '" + name + "' reported EEI for '" + k + "' is invalid");
}

std::vector<std::string> Portfolio::sectors() const {
    std::set<std::string> keys;
    for (const auto& c : constituents) keys.insert(scenario::sector_key(c.sector));
    return {keys.begin(), keys.end()};
}

ScopeMask scope_mask_from(const std::vector<int>& scopes) {
    ScopeMask m;
    for (int s : scopes) {
        if (s < 1 || s > 3) throw ConfigError("scope " + std::to_string(s) + " is not one of 1, 2, 3");
        m.set(static_cast<std::size_t>(s - 1));
    }
    if (m.none()) throw ConfigError("scope selection is empty");
    return m;
}

double CurrencyTable::rate(const std::string& code) const {
    auto it = to_usd.find(code);
    if (it == to_usd.end()) throw ConfigError("no exchange rate for currency '" + code + "'");
    return it->second;
}

double prorate_calendar_year(const std::vector<FiscalRecord>& records, int year) {
    const int y0 = year * 12;
    const int y1 = y0 + 11;
    double total = 0.0;
    int covered = 0;
    for (const auto& r : records) {
        const int e = r.end_year * 12 + r.end_month - 1;
        const int s = e - 11;
        const int months = std::max(0, std::min(e, y1) - std::max(s, y0) + 1);
        covered += months;
        total += r.value * months / 12.0;
    }
    if (covered != 12)
        throw DataError("fiscal records cover " + std::to_string(covered) + " of 12 months in " + std::to_string(year));
    return total;
}

Portfolio portfolio_from_json(const nlohmann::json& j, const CurrencyTable& fx) {
    auto r = parse(j, fx);
    if (!r.errors.empty()) {
        std::string msg = "invalid portfolio";
        for (const auto& e : r.errors) msg += "; " + e;
        throw DataError(msg);
    }
    return r.p;
}

std::vector<std::string> portfolio_errors(const nlohmann::json& j, const CurrencyTable& fx) { return parse(j, fx).errors; }

nlohmann::json to_json(const Portfolio& p) {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : p.constituents)
        cs.push_back({{"name", c.name},
                      {"sector", c.sector},
                      {"scope1_kt", c.scope1_kt},
                      {"scope2_kt", c.scope2_kt},
                      {"scope3_kt", c.scope3_kt},
                      {"gva_musd", c.gva_musd},
                      {"reporting_year", c.reporting_year}});
    nlohmann::json j = {{"name", p.name}, {"base_year", p.base_year}, {"constituents", cs}};
    if (!p.reported_eei.empty()) j["reported_eei"] = p.reported_eei;
    return j;
}

Portfolio load_portfolio(const std::filesystem::path& path, const CurrencyTable& fx) {
    if (!std::filesystem::exists(path)) throw NotFoundError("portfolio file not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return portfolio_from_json(j, fx);
}

}  // namespace climalign::socioecon
