#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "climalign/scenario/scenario.hpp"

namespace climalign::scenario {

struct Sector {
    std::string name;
    double share = 0.0;  // fraction of global emissions
    std::string parent;  // empty for top-level sectors
};

// Shares are held constant over time.
struct SectorShares {
    std::vector<Sector> sectors;

    const Sector* find(std::string_view name) const;
    std::vector<const Sector*> top_level() const;
    std::vector<const Sector*> children(std::string_view parent) const;
};

// Case- and punctuation-insensitive key ("Iron and steel" == "iron_and_steel").
std::string sector_key(std::string_view name);

void validate(const SectorShares& s, double tol = 1e-9);
SectorShares load_sector_shares(const std::filesystem::path& json_path);
SectorShares parse_sector_shares(std::string_view json_text);

// Every sector (top-level and subsector) gets share * global for every year and gas.
std::map<std::string, EmissionPathway> disaggregate_sectors(const EmissionPathway& global, const SectorShares& shares);

}  // namespace climalign::scenario
