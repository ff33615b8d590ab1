#include "climalign/scenario/observations.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "climalign/errors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::scenario {

void validate(const ObservationSeries& o) {
    if (o.years.empty()) throw DataError("observation series is empty");
    if (o.temperature.size() != o.years.size() || o.co2_ppm.size() != o.years.size())
        throw DataError("observation columns differ in length");
    for (std::size_t i = 0; i < o.years.size(); ++i) {
        if (i > 0 && o.years[i] != o.years[i - 1] + 1) throw FormatError("observation years must be consecutive");
        if (!std::isfinite(o.temperature[i]) || !std::isfinite(o.co2_ppm[i]))
            throw DataError("observation gap in " + std::to_string(o.years[i]));
    }
    if (!(o.noise_sd_temperature > 0.0) || !(o.noise_sd_co2 > 0.0)) throw ConfigError("noise SD must be positive");
    if (o.reference_end < o.reference_start) throw ConfigError("empty reference period");
}

ObservationSeries load_observations(const std::filesystem::path& csv) {
    auto t = util::read_numeric_csv(csv);
    int cy = t.column("year"), ct = t.column("temperature"), cc = t.column("co2_ppm");
    if (cy < 0 || ct < 0 || cc < 0) throw SchemaError(csv.string() + ": expected columns year,temperature,co2_ppm");
    ObservationSeries o;
    for (const auto& r : t.rows) {
        o.years.push_back(static_cast<int>(r[static_cast<std::size_t>(cy)]));
        o.temperature.push_back(r[static_cast<std::size_t>(ct)]);
        o.co2_ppm.push_back(r[static_cast<std::size_t>(cc)]);
    }
    auto meta_path = csv;
    meta_path.replace_extension(".meta.json");
    if (std::filesystem::exists(meta_path)) {
        auto j = nlohmann::json::parse(util::read_file(meta_path));
        o.noise_sd_temperature = j.value("noise_sd_temperature", o.noise_sd_temperature);
        o.noise_sd_co2 = j.value("noise_sd_co2", o.noise_sd_co2);
        if (j.contains("reference_period")) {
            o.reference_start = j["reference_period"][0].get<int>();
            o.reference_end = j["reference_period"][1].get<int>();
        }
        o.source = j.value("temperature_source", "");
    }
    validate(o);
    return o;
}

}  // namespace climalign::scenario
