#include "climalign/scenario/sectors.hpp"

#include <cctype>
#include <cmath>
#include <nlohmann/json.hpp>

#include "climalign/errors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::scenario {

std::string sector_key(std::string_view name) {
    std::string k;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!k.empty() && k.back() != '_')
            k += '_';
    }
    while (!k.empty() && k.back() == '_') k.pop_back();
    return k;
}

const Sector* SectorShares::find(std::string_view name) const {
    auto key = sector_key(name);
    for (const auto& s : sectors)
        if (sector_key(s.name) == key) return &s;
    return nullptr;
}

std::vector<const Sector*> SectorShares::top_level() const {
    std::vector<const Sector*> out;
    for (const auto& s : sectors)
        if (s.parent.empty()) out.push_back(&s);
    return out;
}

std::vector<const Sector*> SectorShares::children(std::string_view parent) const {
    std::vector<const Sector*> out;
    auto key = sector_key(parent);
    for (const auto& s : sectors)
        if (!s.parent.empty() && sector_key(s.parent) == key) out.push_back(&s);
    return out;
}

void validate(const SectorShares& s, double tol) {
    if (s.sectors.empty()) throw ConfigError("no sectors defined");
    double top = 0.0;
    for (const auto& sec : s.sectors) {
        if (!(sec.share >= 0.0 && sec.share <= 1.0))
            throw ConfigError("sector '" + sec.name + "' share outside [0, 1]");
        if (sec.parent.empty()) {
            top += sec.share;
            continue;
        }
        const Sector* p = s.find(sec.parent);
        if (!p) throw ConfigError("sector '" + sec.name + "' has unknown parent '" + sec.parent + "'");
        if (!p->parent.empty()) throw ConfigError("sector '" + sec.name + "' nested more than one level");
        if (sec.share > p->share) throw ConfigError("sector '" + sec.name + "' exceeds its parent share");
    }
    if (std::abs(top - 1.0) > tol)
        throw ConfigError("top-level sector shares sum to " + util::format_double(top) + ", expected 1");
}

SectorShares parse_sector_shares(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("sector shares: ") + e.what());
    }
    if (!j.contains("sectors") || !j["sectors"].is_array()) throw FormatError("sector shares: missing 'sectors' array");
    SectorShares s;
    for (const auto& e : j["sectors"]) {
        Sector sec;
        sec.name = e.at("name").get<std::string>();
        sec.share = e.at("share").get<double>();
        if (e.contains("parent") && !e["parent"].is_null()) sec.parent = e["parent"].get<std::string>();
        s.sectors.push_back(std::move(sec));
    }
    validate(s);
    return s;
}

SectorShares load_sector_shares(const std::filesystem::path& p) { return parse_sector_shares(util::read_file(p)); }

std::map<std::string, EmissionPathway> disaggregate_sectors(const EmissionPathway& global, const SectorShares& shares) {
    validate(shares);
    std::map<std::string, EmissionPathway> out;
    for (const auto& sec : shares.sectors) {
        EmissionPathway p;
        p.years = global.years;
        p.gases = global.gases;
        p.values.resize(global.values.size());
        for (std::size_t k = 0; k < global.values.size(); ++k) p.values[k] = sec.share * global.values[k];
        out.emplace(sec.name, std::move(p));
    }
    return out;
}

}  // namespace climalign::scenario
