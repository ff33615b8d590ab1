#include "climalign/socioecon/alignment.hpp"

#include <cmath>

#include "climalign/errors.hpp"

namespace climalign::socioecon {

namespace {

bool in_sector(const Constituent& c, const std::string& key) { return scenario::sector_key(c.sector) == key; }

const double* reported_value(const Portfolio& p, const std::string& key) {
    for (const auto& [name, v] : p.reported_eei)
        if (scenario::sector_key(name) == key) return &v;
    return nullptr;
}

}  // namespace

double company_emissions_t(const Constituent& c, ScopeMask scopes) {
    double kt = 0.0;
    if (scopes.test(0)) kt += c.scope1_kt;
    if (scopes.test(1)) kt += c.scope2_kt;
    if (scopes.test(2)) kt += c.scope3_kt;
    return kt * 1000.0;
}

double company_eei(const Constituent& c, ScopeMask scopes) {
    if (!(c.gva_musd > 0.0)) throw DomainError("company '" + c.name + "': GVA must be positive");
    return company_emissions_t(c, scopes) / c.gva_musd;
}

std::optional<double> portfolio_sector_eei(const Portfolio& p, std::string_view sector, ScopeMask scopes) {
    const auto key = scenario::sector_key(sector);
    double we = 0.0, w = 0.0;
    for (const auto& c : p.constituents) {
        if (!in_sector(c, key)) continue;
        const double e = company_emissions_t(c, scopes);
        we += e * company_eei(c, scopes);
        w += e;
    }
    if (!(w > 0.0)) return std::nullopt;
    return we / w;
}

double benchmark_sector_eei(const BenchmarkEnsemble& b, std::string_view sector, ScopeMask scopes) {
    const auto key = scenario::sector_key(sector);
    double wg = 0.0, g = 0.0;
    bool any = false;
    for (const auto& c : b.constituents) {
        if (!in_sector(c, key)) continue;
        any = true;
        wg += c.gva_musd * company_eei(c, scopes);
        g += c.gva_musd;
    }
    if (!any) throw NotFoundError("benchmark '" + b.name + "' has no constituents in sector '" + std::string(sector) + "'");
    if (!(g > 0.0)) throw DomainError("benchmark '" + b.name + "' sector '" + std::string(sector) + "' has zero GVA");
    return wg / g;
}

std::vector<double> portfolio_sector_emissions(double eei_p, double eei_bench, std::span<const double> sector_emissions) {
    if (!(eei_bench > 0.0)) throw DomainError("benchmark EEI must be positive");
    if (!(eei_p >= 0.0)) throw DomainError("portfolio EEI must be non-negative");
    const double r = eei_p / eei_bench;
    std::vector<double> out(sector_emissions.begin(), sector_emissions.end());
    for (double& v : out) v *= r;
    return out;
}

std::map<std::string, double> portfolio_sector_emissions(double eei_p, double eei_bench,
                                                         const std::map<std::string, double>& sector_emissions) {
    if (!(eei_bench > 0.0)) throw DomainError("benchmark EEI must be positive");
    if (!(eei_p >= 0.0)) throw DomainError("portfolio EEI must be non-negative");
    const double r = eei_p / eei_bench;
    auto out = sector_emissions;
    for (auto& [gas, v] : out) v *= r;
    return out;
}

std::optional<double> effective_sector_eei(const Portfolio& p, std::string_view sector, Role role,
                                           const AlignmentOptions& opt, bool* reported) {
    const auto key = scenario::sector_key(sector);
    if (reported) *reported = false;
    if (opt.use_reported_eei) {
        if (const double* v = reported_value(p, key)) {
            if (reported) *reported = true;
            return *v;
        }
    }
    if (role == Role::portfolio) return portfolio_sector_eei(p, sector, opt.scopes);
    try {
        return benchmark_sector_eei(p, sector, opt.scopes);
    } catch (const NotFoundError&) {
        return std::nullopt;
    }
}

GlobalAdjustment global_adjustment(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::SectorShares& shares,
                                   const AlignmentOptions& opt) {
    p.validate();
    b.validate();
    GlobalAdjustment adj;
    std::vector<const scenario::Sector*> represented;
    for (const auto& key : p.sectors()) {
        const scenario::Sector* s = shares.find(key);
        if (!s) throw NotFoundError("portfolio sector '" + key + "' has no emission share");
        SectorAdjustment a;
        a.sector = s->name;
        a.share = s->share;
        const auto pe = effective_sector_eei(p, key, Role::portfolio, opt, &a.portfolio_reported);
        if (!pe) continue;  // no emissions under the scope mask: the sector keeps scenario data
        const auto be = effective_sector_eei(b, key, Role::benchmark, opt, &a.benchmark_reported);
        if (!be) throw NotFoundError("benchmark '" + b.name + "' does not cover sector '" + s->name + "'");
        if (!(*be > 0.0)) throw DomainError("benchmark EEI for sector '" + s->name + "' must be positive");
        a.portfolio_eei = *pe;
        a.benchmark_eei = *be;
        adj.sectors.push_back(a);
        represented.push_back(s);
    }
    // A represented parent keeps only the share not already adjusted through its children.
    for (std::size_t i = 0; i < adj.sectors.size(); ++i) {
        double eff = adj.sectors[i].share;
        for (const auto* c : represented)
            if (!c->parent.empty() && scenario::sector_key(c->parent) == scenario::sector_key(adj.sectors[i].sector))
                eff -= c->share;
        adj.sectors[i].effective_share = eff;
    }
    double delta = 0.0;
    for (const auto& a : adj.sectors) delta += a.effective_share * (a.ratio() - 1.0);
    adj.factor = 1.0 + delta;
    return adj;
}

scenario::Scenario apply_adjustment(const scenario::Scenario& s, int base_year, double factor) {
    const auto& em = s.emissions;
    const int b = em.index_of(base_year);
    if (b < 0) throw DataError("scenario '" + s.id + "' has no year " + std::to_string(base_year));
    if (!(factor >= 0.0) || !std::isfinite(factor)) throw DomainError("global adjustment factor must be non-negative");
    scenario::Scenario out = s;
    if (factor == 1.0) return out;
    const std::size_t ng = em.n_gases();
    for (std::size_t y = static_cast<std::size_t>(b); y < em.n_years(); ++y)
        for (std::size_t g = 0; g < ng; ++g) out.emissions.at(y, g) *= factor;
    return out;
}

scenario::Scenario portfolio_global_pathway(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::Scenario& s,
                                            const scenario::SectorShares& shares, const AlignmentOptions& opt) {
    const auto adj = global_adjustment(p, b, shares, opt);
    auto out = apply_adjustment(s, p.base_year, adj.factor);
    out.id = s.id;
    return out;
}

TemperatureSummary summary_at(const uncertainty::CredibleBand& band, int year) {
    const int y = band.index_of(year);
    if (y < 0) throw NotFoundError("band has no year " + std::to_string(year));
    return {year, band.mean[static_cast<std::size_t>(y)], band.median[static_cast<std::size_t>(y)]};
}

namespace {

ImpliedTemperature finish(const scenario::Scenario& s, GlobalAdjustment adj, uncertainty::CredibleBand band) {
    ImpliedTemperature t;
    t.scenario = s.id;
    t.adjustment = std::move(adj);
    t.band = std::move(band);
    if (t.band.index_of(2050) >= 0) t.mid_century = summary_at(t.band, 2050);
    t.end_century = summary_at(t.band, t.band.years.back());
    return t;
}

}  // namespace

ImpliedTemperature implied_temperature(const Portfolio& p, const BenchmarkEnsemble& b, const scenario::Scenario& s,
                                       const scenario::SectorShares& shares, const uncertainty::DrawCache& cache,
                                       const std::optional<uncertainty::EmissionUncertaintySpec>& spec,
                                       const uncertainty::PropagateOptions& popt, const AlignmentOptions& opt) {
    if (p.base_year < cache.base_year)
        throw ConfigError("portfolio base year " + std::to_string(p.base_year) + " precedes the propagation base year " +
                          std::to_string(cache.base_year));
    auto adj = global_adjustment(p, b, shares, opt);
    const auto adjusted = apply_adjustment(s, p.base_year, adj.factor);
    auto res = uncertainty::propagate(cache, adjusted, spec, popt);
    res.band.metadata["portfolio"] = p.name;
    res.band.metadata["global_factor"] = adj.factor;
    return finish(s, std::move(adj), std::move(res.band));
}

ImpliedTemperature baseline_temperature(const scenario::Scenario& s, const uncertainty::DrawCache& cache,
                                        const std::optional<uncertainty::EmissionUncertaintySpec>& spec,
                                        const uncertainty::PropagateOptions& popt) {
    auto res = uncertainty::propagate(cache, s, spec, popt);
    return finish(s, {}, std::move(res.band));
}

nlohmann::json to_json(const GlobalAdjustment& a) {
    nlohmann::json sectors = nlohmann::json::array();
    for (const auto& s : a.sectors)
        sectors.push_back({{"sector", s.sector},
                           {"share", s.share},
                           {"effective_share", s.effective_share},
                           {"portfolio_eei", s.portfolio_eei},
                           {"benchmark_eei", s.benchmark_eei},
                           {"portfolio_eei_reported", s.portfolio_reported},
                           {"benchmark_eei_reported", s.benchmark_reported},
                           {"ratio", s.ratio()}});
    return {{"factor", a.factor}, {"sectors", sectors}};
}

nlohmann::json to_json(const ImpliedTemperature& t, bool include_band) {
    auto sum = [](const TemperatureSummary& s) { return nlohmann::json{{"year", s.year}, {"mean", s.mean}, {"median", s.median}}; };
    nlohmann::json j = {{"scenario", t.scenario},
                        {"adjustment", to_json(t.adjustment)},
                        {"end_century", sum(t.end_century)}};
    if (t.mid_century.year) j["mid_century"] = sum(t.mid_century);
    if (include_band) j["band"] = uncertainty::to_json(t.band);
    return j;
}

}  // namespace climalign::socioecon
