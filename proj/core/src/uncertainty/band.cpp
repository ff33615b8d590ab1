#include "climalign/uncertainty/band.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "climalign/errors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::uncertainty {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile_standard_error(std::span<const double> sorted, double q) {
    const double n = static_cast<double>(sorted.size());
    if (sorted.size() < 2) return std::numeric_limits<double>::infinity();
    const double s = std::sqrt(n * q * (1.0 - q));
    const double lo = std::clamp((n * q - s) / (n - 1.0), 0.0, 1.0);
    const double hi = std::clamp((n * q + s) / (n - 1.0), 0.0, 1.0);
    return 0.5 * (quantile_sorted(sorted, hi) - quantile_sorted(sorted, lo));
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::deterministic: return "deterministic";
        case Provenance::parameter: return "parameter-only";
        case Provenance::emission: return "emission-only";
        case Provenance::combined: return "combined";
    }
    return "?";
}

namespace {

Provenance provenance_from_string(const std::string& s) {
    for (auto p : {Provenance::deterministic, Provenance::parameter, Provenance::emission, Provenance::combined})
        if (s == to_string(p)) return p;
    throw FormatError("unknown band provenance '" + s + "'");
}

std::string level_tag(double level) {
    const double pct = std::round(level * 100.0 * 1e9) / 1e9;
    return util::format_double(pct);
}

}  // namespace

std::vector<double> Ensemble::year_column(std::size_t year_index) const {
    std::vector<double> c(n_draws);
    for (std::size_t d = 0; d < n_draws; ++d) c[d] = at(d, year_index);
    return c;
}

int CredibleBand::index_of(int year) const {
    auto it = std::find(years.begin(), years.end(), year);
    return it == years.end() ? -1 : static_cast<int>(it - years.begin());
}

std::size_t CredibleBand::level_index(double level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (std::abs(levels[i] - level) < 1e-12) return i;
    throw NotFoundError("band has no level " + util::format_double(level));
}

double CredibleBand::width(double level, int year) const {
    const int y = index_of(year);
    if (y < 0) throw NotFoundError("band has no year " + std::to_string(year));
    const auto l = level_index(level);
    return upper[l][static_cast<std::size_t>(y)] - lower[l][static_cast<std::size_t>(y)];
}

CredibleBand summarize(const Ensemble& e, std::vector<double> levels, Provenance provenance) {
    if (e.n_draws == 0) throw DataError("cannot summarize an empty ensemble");
    for (double l : levels)
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("credible level must lie in (0, 1)");
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    CredibleBand b;
    b.years = e.years;
    b.levels = levels;
    b.n_samples = e.n_draws;
    b.failures = e.failures;
    b.provenance = provenance;
    const std::size_t ny = e.years.size();
    b.median.resize(ny);
    b.mean.resize(ny);
    b.lower.assign(levels.size(), std::vector<double>(ny));
    b.upper.assign(levels.size(), std::vector<double>(ny));
    std::vector<double> col;
    for (std::size_t y = 0; y < ny; ++y) {
        col = e.year_column(y);
        double s = 0.0;
        for (double v : col) s += v;
        b.mean[y] = s / static_cast<double>(col.size());
        std::sort(col.begin(), col.end());
        b.median[y] = quantile_sorted(col, 0.5);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const double tail = 0.5 * (1.0 - levels[l]);
            b.lower[l][y] = quantile_sorted(col, tail);
            b.upper[l][y] = quantile_sorted(col, 1.0 - tail);
        }
    }
    return b;
}

std::string to_csv(const CredibleBand& b) {
    std::ostringstream o;
    o << "year,median";
    for (double l : b.levels) o << ",lo" << level_tag(l) << ",hi" << level_tag(l);
    o << '\n';
    for (std::size_t y = 0; y < b.years.size(); ++y) {
        o << b.years[y] << ',' << util::format_double(b.median[y]);
        for (std::size_t l = 0; l < b.levels.size(); ++l)
            o << ',' << util::format_double(b.lower[l][y]) << ',' << util::format_double(b.upper[l][y]);
        o << '\n';
    }
    return o.str();
}

void write_csv(const CredibleBand& b, const std::filesystem::path& path) { util::write_file(path, to_csv(b)); }

nlohmann::json to_json(const CredibleBand& b) {
    nlohmann::json bands = nlohmann::json::array();
    for (std::size_t l = 0; l < b.levels.size(); ++l)
        bands.push_back({{"level", b.levels[l]}, {"lower", b.lower[l]}, {"upper", b.upper[l]}});
    return {{"years", b.years},
            {"median", b.median},
            {"mean", b.mean},
            {"bands", bands},
            {"n_samples", b.n_samples},
            {"failures", b.failures},
            {"provenance", to_string(b.provenance)},
            {"metadata", b.metadata}};
}

CredibleBand band_from_json(const nlohmann::json& j) {
    CredibleBand b;
    try {
        b.years = j.at("years").get<std::vector<int>>();
        b.median = j.at("median").get<std::vector<double>>();
        b.mean = j.value("mean", std::vector<double>{});
        for (const auto& e : j.at("bands")) {
            b.levels.push_back(e.at("level").get<double>());
            b.lower.push_back(e.at("lower").get<std::vector<double>>());
            b.upper.push_back(e.at("upper").get<std::vector<double>>());
        }
        b.n_samples = j.value("n_samples", std::size_t{0});
        b.failures = j.value("failures", std::size_t{0});
        b.provenance = provenance_from_string(j.value("provenance", std::string("deterministic")));
        b.metadata = j.value("metadata", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("band: ") + e.what());
    }
    if (auto msg = check(b); !msg.empty()) throw DataError("band: " + msg);
    return b;
}

std::string check(const CredibleBand& b) {
    const std::size_t ny = b.years.size();
    if (b.median.size() != ny) return "median length differs from years";
    if (b.lower.size() != b.levels.size() || b.upper.size() != b.levels.size()) return "level count mismatch";
    for (std::size_t l = 0; l < b.levels.size(); ++l) {
        if (b.lower[l].size() != ny || b.upper[l].size() != ny) return "band length differs from years";
        if (l > 0 && !(b.levels[l] > b.levels[l - 1])) return "levels not ascending";
        for (std::size_t y = 0; y < ny; ++y) {
            if (!(b.lower[l][y] <= b.median[y] && b.median[y] <= b.upper[l][y]))
                return "quantiles out of order in year " + std::to_string(b.years[y]);
            if (l > 0 && (b.lower[l][y] > b.lower[l - 1][y] || b.upper[l][y] < b.upper[l - 1][y]))
                return "bands not nested in year " + std::to_string(b.years[y]);
        }
    }
    return {};
}

}  // namespace climalign::uncertainty
