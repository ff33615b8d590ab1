#include "climalign/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "climalign/errors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::scenario {

using nlohmann::json;

int EmissionPathway::index_of(int year) const {
    if (years.empty()) return -1;
    int i = year - years.front();
    if (i < 0 || i >= static_cast<int>(years.size())) return -1;
    return i;
}

int EmissionPathway::gas_index(std::string_view gas) const {
    for (std::size_t g = 0; g < gases.size(); ++g)
        if (gases[g] == gas) return static_cast<int>(g);
    return -1;
}

double EmissionPathway::co2(std::size_t i) const {
    if (gases.size() == 1) return at(i, 0);
    return at(i, gas::co2_fossil) + at(i, gas::co2_land);
}

void validate(const EmissionPathway& p, const LoadOptions& opt) {
    if (p.years.empty()) throw FormatError("scenario has no rows");
    if (p.values.size() != p.years.size() * p.gases.size()) throw DataError("emission matrix shape mismatch");
    for (std::size_t i = 1; i < p.years.size(); ++i)
        if (p.years[i] != p.years[i - 1] + 1)
            throw FormatError("years must increase in steps of one (at " + std::to_string(p.years[i]) + ")");
    for (std::size_t i = 0; i < p.years.size(); ++i) {
        for (std::size_t g = 0; g < p.gases.size(); ++g) {
            if (!std::isfinite(p.at(i, g)))
                throw DataError("non-finite value for " + p.gases[g] + " in " + std::to_string(p.years[i]));
        }
        if (p.co2(i) < opt.co2_floor_gtc)
            throw DataError("CO2 below floor in " + std::to_string(p.years[i]));
    }
}

Scenario parse_scenario(std::string_view text, const std::vector<std::string>& schema,
                        const std::vector<std::string>& units, std::string id, const LoadOptions& opt) {
    auto table = util::parse_numeric_csv(text, id);
    if (table.header.empty() || table.header[0] != "year") throw FormatError(id + ": first column must be 'year'");
    std::vector<int> col(schema.size());
    for (std::size_t g = 0; g < schema.size(); ++g) {
        col[g] = table.column(schema[g]);
        if (col[g] < 0) throw SchemaError(id + ": missing gas column " + schema[g]);
    }
    if (table.header.size() != schema.size() + 1) throw SchemaError(id + ": unexpected extra columns");
    if (table.rows.empty()) throw FormatError(id + ": no data rows");

    Scenario s;
    s.id = std::move(id);
    auto& p = s.emissions;
    p.gases = schema;
    p.years.reserve(table.rows.size());
    p.values.reserve(table.rows.size() * schema.size());
    std::vector<double> factor(schema.size(), 1.0);
    for (std::size_t g = 0; g < schema.size(); ++g)
        if (g < units.size() && !units[g].empty()) factor[g] = unit_factor(schema[g], units[g]);
    for (const auto& row : table.rows) {
        double y = row[0];
        if (!std::isfinite(y) || y != std::floor(y)) throw FormatError(s.id + ": bad year cell");
        p.years.push_back(static_cast<int>(y));
        for (std::size_t g = 0; g < schema.size(); ++g) {
            double v = row[static_cast<std::size_t>(col[g])];
            if (std::isnan(v))
                throw DataError(s.id + ": missing value for " + schema[g] + " in " + std::to_string(p.years.back()));
            p.values.push_back(v * factor[g]);
        }
    }
    validate(p, opt);
    s.exogenous.assign(p.years.size(), 0.0);
    return s;
}

Scenario load_scenario(const std::filesystem::path& csv, const std::vector<std::string>& schema,
                       const LoadOptions& opt) {
    auto sidecar = csv;
    sidecar.replace_extension(".units.json");
    std::vector<std::string> units(schema.size());
    std::string id = csv.stem().string();
    int branch = 0;
    std::string source;
    if (std::filesystem::exists(sidecar)) {
        json meta;
        try {
            meta = json::parse(util::read_file(sidecar));
        } catch (const json::exception& e) {
            throw FormatError(sidecar.string() + ": " + e.what());
        }
        if (meta.contains("id")) id = meta["id"].get<std::string>();
        branch = meta.value("branch_year", 0);
        source = meta.value("source", "");
        if (meta.contains("units")) {
            for (std::size_t g = 0; g < schema.size(); ++g)
                if (meta["units"].contains(schema[g])) units[g] = meta["units"][schema[g]].get<std::string>();
        }
    }
    auto s = parse_scenario(util::read_file(csv), schema, units, id, opt);
    s.branch_year = branch;
    s.source = source;
    return s;
}

std::string serialize_emissions(const EmissionPathway& p) {
    std::string out = "year";
    for (const auto& g : p.gases) out += "," + g;
    out += "\n";
    for (std::size_t i = 0; i < p.years.size(); ++i) {
        out += std::to_string(p.years[i]);
        for (std::size_t g = 0; g < p.gases.size(); ++g) out += "," + util::format_double(p.at(i, g));
        out += "\n";
    }
    return out;
}

void save_scenario(const Scenario& s, const std::filesystem::path& csv) {
    util::write_file(csv, serialize_emissions(s.emissions));
    json meta;
    meta["id"] = s.id;
    if (s.branch_year) meta["branch_year"] = s.branch_year;
    if (!s.source.empty()) meta["source"] = s.source;
    for (const auto& g : s.emissions.gases) meta["units"][g] = native_unit(g);
    auto sidecar = csv;
    sidecar.replace_extension(".units.json");
    util::write_file(sidecar, meta.dump(2) + "\n");
}

ExogenousForcing load_exogenous(const std::filesystem::path& csv) {
    auto t = util::read_numeric_csv(csv);
    if (t.header.empty() || t.header[0] != "year") throw FormatError(csv.string() + ": first column must be 'year'");
    ExogenousForcing f;
    for (const auto& row : t.rows) {
        double sum = 0.0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) throw DataError(csv.string() + ": non-finite forcing");
            sum += row[c];
        }
        f.years.push_back(static_cast<int>(row[0]));
        f.values.push_back(sum);
    }
    return f;
}

void attach_exogenous(Scenario& s, const ExogenousForcing& f) {
    const auto& years = s.emissions.years;
    s.exogenous.assign(years.size(), 0.0);
    for (std::size_t k = 0; k < f.years.size(); ++k) {
        int i = s.emissions.index_of(f.years[k]);
        if (i >= 0) s.exogenous[static_cast<std::size_t>(i)] = f.values[k];
    }
}

}  // namespace climalign::scenario
