#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "climalign/scenario/observations.hpp"
#include "climalign/scenario/scenario.hpp"
#include "climalign/scenario/sectors.hpp"

namespace climalign::scenario {

// Immutable after loading; share through shared_ptr<const DataBundle>.
struct DataBundle {
    std::filesystem::path root;
    std::vector<Scenario> scenarios;  // sorted by id, exogenous forcing attached
    std::optional<ObservationSeries> observations;
    std::optional<SectorShares> sectors;

    const Scenario* find(std::string_view id) const;
    const Scenario& get(std::string_view id) const;  // throws NotFoundError
};

// Layout: scenarios/*.csv, forcing/exogenous.csv, observations/historical.csv,
// sectors/*.json. Missing parts are left empty.
std::shared_ptr<const DataBundle> load_bundle(const std::filesystem::path& root, GasMode mode = GasMode::multi);

// $CLIMALIGN_DATA if set, otherwise the data directory of the source tree.
std::filesystem::path default_bundle_path();

}  // namespace climalign::scenario
