#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace climalign::scenario {

struct ObservationSeries {
    std::vector<int> years;
    std::vector<double> temperature;  // K anomaly relative to the reference period
    std::vector<double> co2_ppm;
    double noise_sd_temperature = 0.1;
    double noise_sd_co2 = 1.0;
    int reference_start = 1850;
    int reference_end = 1900;
    std::string source;
};

void validate(const ObservationSeries& o);

// CSV `year,temperature,co2_ppm`; optional `<stem>.meta.json` carries noise SDs,
// reference period and provenance.
ObservationSeries load_observations(const std::filesystem::path& csv);

}  // namespace climalign::scenario
