#include "climalign/scenario/store.hpp"

#include <algorithm>
#include <cstdlib>

#include "climalign/errors.hpp"

#ifndef CLIMALIGN_DEFAULT_DATA_DIR
#define CLIMALIGN_DEFAULT_DATA_DIR "data"
#endif

namespace climalign::scenario {

namespace fs = std::filesystem;

const Scenario* DataBundle::find(std::string_view id) const {
    for (const auto& s : scenarios)
        if (s.id == id) return &s;
    return nullptr;
}

const Scenario& DataBundle::get(std::string_view id) const {
    if (auto* s = find(id)) return *s;
    throw NotFoundError("unknown scenario '" + std::string(id) + "'");
}

std::shared_ptr<const DataBundle> load_bundle(const fs::path& root, GasMode mode) {
    auto b = std::make_shared<DataBundle>();
    b->root = root;
    std::optional<ExogenousForcing> exo;
    if (fs::exists(root / "forcing" / "exogenous.csv")) exo = load_exogenous(root / "forcing" / "exogenous.csv");
    if (fs::is_directory(root / "scenarios")) {
        auto schema = gas_schema(mode);
        for (const auto& e : fs::directory_iterator(root / "scenarios")) {
            if (e.path().extension() != ".csv") continue;
            auto s = load_scenario(e.path(), schema);
            if (exo) attach_exogenous(s, *exo);
            b->scenarios.push_back(std::move(s));
        }
        std::sort(b->scenarios.begin(), b->scenarios.end(), [](const Scenario& a, const Scenario& c) { return a.id < c.id; });
    }
    if (fs::exists(root / "observations" / "historical.csv"))
        b->observations = load_observations(root / "observations" / "historical.csv");
    if (fs::is_directory(root / "sectors")) {
        for (const auto& e : fs::directory_iterator(root / "sectors")) {
            if (e.path().extension() == ".json") {
                b->sectors = load_sector_shares(e.path());
                break;
            }
        }
    }
    return b;
}

fs::path default_bundle_path() {
    if (const char* env = std::getenv("CLIMALIGN_DATA"); env && *env) return fs::path(env);
    return fs::path(CLIMALIGN_DEFAULT_DATA_DIR);
}

}  // namespace climalign::scenario
