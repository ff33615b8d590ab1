#include <doctest.h>

#include <cmath>

#include "climalign/calibration/prior.hpp"
#include "climalign/errors.hpp"
#include "climalign/scenario/store.hpp"
#include "climalign/socioecon/alignment.hpp"

using namespace climalign;
using namespace climalign::socioecon;

namespace {

const scenario::DataBundle& bundle() {
    static auto b = scenario::load_bundle(CLIMALIGN_TEST_DATA);
    return *b;
}

std::filesystem::path data(const std::string& rel) { return std::filesystem::path(CLIMALIGN_TEST_DATA) / rel; }

bool rel_close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

Constituent company(std::string name, std::string sector, double s1, double s2, double s3, double gva) {
    Constituent c;
    c.name = std::move(name);
    c.sector = std::move(sector);
    c.scope1_kt = s1;
    c.scope2_kt = s2;
    c.scope3_kt = s3;
    c.gva_musd = gva;
    c.reporting_year = 2022;
    return c;
}

Portfolio holding(std::vector<Constituent> cs) {
    Portfolio p;
    p.name = "test";
    p.base_year = 2022;
    p.constituents = std::move(cs);
    return p;
}

// Constituent whose EEI is eei with emissions e (kt).
Constituent with_eei(const std::string& sector, double e_kt, double eei) {
    return company("c", sector, e_kt, 0, 0, e_kt * 1000.0 / eei);
}

struct Draws {
    uncertainty::DrawCache cache;
    uncertainty::PropagateOptions opt;
};

const Draws& draws() {
    static Draws d = [] {
        Draws out;
        out.opt.n = 200;
        out.opt.min_draws = 1;
        auto prior = std::make_shared<const calibration::PriorSpec>(calibration::PriorSpec::fair_defaults());
        out.cache = uncertainty::build_draw_cache(bundle().get("SSP2-RCP4.5"), uncertainty::ParameterSource::prior(prior),
                                                  out.opt.n, 5, 2020, {});
        return out;
    }();
    return d;
}

}  // namespace

TEST_CASE("company_eei: SSAB 2022 all scopes") {
    const auto p = load_portfolio(data("portfolios/ssab.json"));
    REQUIRE(p.constituents.size() == 1);
    CHECK(rel_close(company_eei(p.constituents[0]), 22113000.0 / 3283.0));
    CHECK(std::abs(company_eei(p.constituents[0]) - 6735.6) < 0.05);
}

TEST_CASE("company_eei: trivial cases and scope mask") {
    CHECK(company_eei(company("z", "x", 0, 0, 0, 5)) == 0.0);
    CHECK(company_eei(company("u", "x", 0.004, 0, 0, 4)) == doctest::Approx(1.0).epsilon(1e-12));
    const auto c = company("s", "x", 1, 2, 4, 1);
    CHECK(company_eei(c, scope_mask_from({1})) == 1000.0);
    CHECK(company_eei(c, scope_mask_from({1, 2})) == 3000.0);
    CHECK(company_eei(c, scope_mask_from({3})) == 4000.0);
    CHECK_THROWS_AS(scope_mask_from({4}), ConfigError);
    CHECK_THROWS_AS(scope_mask_from({}), ConfigError);
    CHECK_THROWS_AS(company_eei(company("g", "x", 1, 0, 0, 0)), DomainError);
}

TEST_CASE("portfolio_sector_eei: emission-weighted mean") {
    const auto p = holding({with_eei("Iron and steel", 10, 100), with_eei("Iron and steel", 30, 200)});
    CHECK(rel_close(*portfolio_sector_eei(p, "Iron and steel"), 175.0));
    CHECK(rel_close(*portfolio_sector_eei(holding({with_eei("Cement", 7, 321)}), "cement"), 321.0));
    const auto eq = holding({with_eei("A", 1, 50), with_eei("A", 9, 50), with_eei("A", 90, 50)});
    CHECK(rel_close(*portfolio_sector_eei(eq, "A"), 50.0));
    CHECK_FALSE(portfolio_sector_eei(p, "Cement").has_value());
}

TEST_CASE("benchmark_sector_eei: GVA-weighted mean") {
    auto a = company("a", "S", 0.004, 0, 0, 1);  // EEI 4
    auto b = company("b", "S", 0.024, 0, 0, 3);  // EEI 8
    CHECK(rel_close(benchmark_sector_eei(holding({a, b}), "S"), 7.0));
    CHECK(rel_close(benchmark_sector_eei(holding({a}), "S"), 4.0));
    CHECK_THROWS_AS(benchmark_sector_eei(holding({a}), "T"), NotFoundError);

    const auto stoxx = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    const double total_e = (112900 + 6100 + 6100 + 22525 + 950 + 3900 + 12710 + 480 + 11310 + 9582 + 1179 + 11352) * 1000.0;
    CHECK(rel_close(benchmark_sector_eei(stoxx, "Iron and steel"), total_e / (19354 + 8149.17 + 5459.34 + 3282)));
    // SSAB's published constituent GVA is 3283, which gives the 5492.7 figure.
    auto t2 = stoxx;
    t2.constituents[3].gva_musd = 3283;
    CHECK(std::abs(benchmark_sector_eei(t2, "Iron and steel") - 5492.7) < 0.1);
}

TEST_CASE("benchmark_sector_eei: scale invariance") {
    auto stoxx = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    const double e0 = benchmark_sector_eei(stoxx, "Iron and steel");
    for (double k : {1e-3, 0.5, 7.0, 1e4}) {
        auto s = stoxx;
        for (auto& c : s.constituents) {
            c.scope1_kt *= k;
            c.scope2_kt *= k;
            c.scope3_kt *= k;
            c.gva_musd *= k;
        }
        CHECK(rel_close(benchmark_sector_eei(s, "Iron and steel"), e0, 1e-12));
    }
}

TEST_CASE("portfolio_sector_emissions: ratio scaling") {
    const std::vector<double> one{1.0};
    CHECK(rel_close(portfolio_sector_emissions(2964.9, 5492.7, one)[0], 2964.9 / 5492.7));
    CHECK(std::abs(portfolio_sector_emissions(2964.9, 5492.7, one)[0] - 0.5398) < 5e-5);
    const std::vector<double> gases{10.0, 0.3, 7.5, 120.0};
    CHECK(portfolio_sector_emissions(42.0, 42.0, gases) == gases);
    for (double v : portfolio_sector_emissions(0.0, 42.0, gases)) CHECK(v == 0.0);
    CHECK_THROWS_AS(portfolio_sector_emissions(1.0, 0.0, gases), DomainError);
    CHECK_THROWS_AS(portfolio_sector_emissions(1.0, -2.0, gases), DomainError);

    const auto scaled = portfolio_sector_emissions(3.0, 11.0, gases);
    for (std::size_t i = 1; i < gases.size(); ++i) CHECK(rel_close(scaled[i] / scaled[0], gases[i] / gases[0], 1e-14));
    const std::map<std::string, double> m{{"CO2", 2.0}, {"CH4", 300.0}};
    const auto ms = portfolio_sector_emissions(1.0, 4.0, m);
    CHECK(rel_close(ms.at("CH4") / ms.at("CO2"), 150.0, 1e-14));
}

TEST_CASE("portfolio JSON: currency conversion and field errors") {
    const nlohmann::json j = {{"name", "fx"},
                              {"base_year", 2022},
                              {"currency", "SEK"},
                              {"constituents", {{{"name", "a"}, {"sector", "Iron and steel"}, {"scope1_kt", 1.0}, {"gva", 1000.0}},
                                                {{"name", "b"}, {"sector", "Cement"}, {"scope1_kt", 1.0}, {"gva", 100.0}, {"currency", "EUR"}}}}};
    const auto p = portfolio_from_json(j);
    CHECK(rel_close(p.constituents[0].gva_musd, 98.8));
    CHECK(rel_close(p.constituents[1].gva_musd, 105.16));
    CHECK(p.sectors() == std::vector<std::string>{"cement", "iron_and_steel"});

    nlohmann::json bad = j;
    bad["constituents"][0]["gva"] = -3;
    bad["constituents"][1].erase("sector");
    bad["constituents"][1]["scope2_kt"] = "x";
    const auto errs = portfolio_errors(bad);
    CHECK(errs.size() >= 3);
    CHECK_THROWS_AS(portfolio_from_json(bad), DataError);
    CHECK_THROWS_AS(portfolio_from_json({{"base_year", 2022}, {"constituents", nlohmann::json::array()}}), DataError);
    nlohmann::json fx = j;
    fx["currency"] = "XYZ";
    CHECK_THROWS_AS(portfolio_from_json(fx), DataError);

    const auto rt = portfolio_from_json(to_json(load_portfolio(data("portfolios/ssab.json"))));
    CHECK(rt.reported_eei.at("Iron and steel") == 4902.0);
    CHECK(rt.constituents[0].scope3_kt == 11352);
}

TEST_CASE("fiscal-year proration") {
    // Fiscal years ending June: half of each falls in the calendar year.
    const std::vector<FiscalRecord> r{{2022, 6, 100.0}, {2023, 6, 300.0}};
    CHECK(prorate_calendar_year(r, 2022) == doctest::Approx(200.0));
    CHECK(prorate_calendar_year({{2022, 12, 5.0}}, 2022) == 5.0);
    CHECK(prorate_calendar_year({{2022, 3, 120.0}, {2023, 3, 240.0}}, 2022) == doctest::Approx(30.0 + 180.0));
    CHECK_THROWS_AS(prorate_calendar_year({{2022, 6, 1.0}}, 2022), DataError);

    const nlohmann::json j = {{"base_year", 2022},
                              {"constituents",
                               {{{"name", "f"},
                                 {"sector", "Cement"},
                                 {"currency", "SEK"},
                                 {"fiscal_years",
                                  {{{"end_year", 2022}, {"end_month", 6}, {"scope1_kt", 10.0}, {"gva", 1000.0}},
                                   {{"end_year", 2023}, {"end_month", 6}, {"scope1_kt", 30.0}, {"gva", 3000.0}}}}}}}};
    const auto p = portfolio_from_json(j);
    CHECK(p.constituents[0].scope1_kt == doctest::Approx(20.0));
    CHECK(p.constituents[0].gva_musd == doctest::Approx(2000.0 * 0.0988));
}

TEST_CASE("global adjustment: shares and reported EEI override") {
    const auto& shares = *bundle().sectors;
    const auto ssab = load_portfolio(data("portfolios/ssab.json"));
    const auto bench = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    const double share = shares.find("Iron and steel")->share;

    const auto a = global_adjustment(ssab, bench, shares);
    REQUIRE(a.sectors.size() == 1);
    CHECK(a.sectors[0].portfolio_reported);
    CHECK(a.sectors[0].benchmark_reported);
    CHECK(rel_close(a.factor, 1.0 + share * (4902.0 / 5183.11 - 1.0)));

    AlignmentOptions computed;
    computed.use_reported_eei = false;
    const auto c = global_adjustment(ssab, bench, shares, computed);
    CHECK(rel_close(c.sectors[0].portfolio_eei, 22113000.0 / 3283.0));
    CHECK(c.factor > 1.0);

    // A parent and its child both held: the parent adjusts only its residual share.
    const auto both = holding({with_eei("Iron and steel", 1, 200), with_eei("Industry", 1, 50)});
    const auto bm = holding({with_eei("Iron and steel", 1, 100), with_eei("Industry", 1, 100)});
    const auto ab = global_adjustment(both, bm, shares);
    const double ind = shares.find("Industry")->share;
    CHECK(rel_close(ab.factor, 1.0 + share * 1.0 + (ind - share) * -0.5));

    CHECK_THROWS_AS(global_adjustment(holding({with_eei("Unknown sector", 1, 1)}), bm, shares), NotFoundError);
    CHECK_THROWS_AS(global_adjustment(holding({with_eei("Cement", 1, 1)}), bm, shares), NotFoundError);
}

TEST_CASE("portfolio_global_pathway: neutrality is exact") {
    const auto& s = bundle().get("SSP2-RCP4.5");
    const auto& shares = *bundle().sectors;
    const auto p = holding({with_eei("Iron and steel", 5, 1234.5), with_eei("Cement", 2, 800)});
    const auto out = portfolio_global_pathway(p, p, s, shares);
    CHECK(out.emissions.values == s.emissions.values);
    CHECK(out.exogenous == s.exogenous);

    // Reported values equal on both sides also give the identity.
    auto q = holding({with_eei("Iron and steel", 5, 900), with_eei("Iron and steel", 1, 3000)});
    q.reported_eei["Iron and steel"] = 5183.11;
    auto bq = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    CHECK(portfolio_global_pathway(q, bq, s, shares).emissions.values == s.emissions.values);
}

TEST_CASE("portfolio_global_pathway: growth curve and history") {
    const auto& s = bundle().get("SSP2-RCP4.5");
    const auto& shares = *bundle().sectors;
    const auto ssab = load_portfolio(data("portfolios/ssab.json"));
    const auto green = load_portfolio(data("portfolios/ssab_green_steel.json"));
    const auto bench = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    const auto cur = portfolio_global_pathway(ssab, bench, s, shares);
    const auto gr = portfolio_global_pathway(green, bench, s, shares);
    const auto& em = s.emissions;
    const int b = em.index_of(2022);
    REQUIRE(b > 0);
    for (int y = 0; y < b; ++y)
        for (std::size_t g = 0; g < em.n_gases(); ++g) CHECK(cur.emissions.at(y, g) == em.at(y, g));
    const std::size_t co2 = static_cast<std::size_t>(em.gas_index("CO2_FOSSIL"));
    for (std::size_t y = static_cast<std::size_t>(b); y < em.n_years(); ++y) {
        for (std::size_t g = 0; g < em.n_gases(); ++g) {
            // value_year / value_base preserved per gas
            const double base = em.at(b, g);
            if (base != 0.0)
                CHECK(rel_close(cur.emissions.at(y, g) / cur.emissions.at(b, g), em.at(y, g) / base, 1e-12));
        }
        CHECK(gr.emissions.at(y, co2) < cur.emissions.at(y, co2));
    }
    // Green steel keeps the 22 375 -> 11 570 kt reduction, applied to the constituent scopes.
    double total = 0.0;
    for (const auto& c : green.constituents) total += c.scope1_kt + c.scope2_kt + c.scope3_kt;
    CHECK(std::abs(total / 22113.0 - 11570.0 / 22375.0) < 1e-4);
    CHECK_THROWS_AS(apply_adjustment(s, 2200, 0.9), DataError);
}

TEST_CASE("implied_temperature: neutrality and monotonicity at fixed draws") {
    const auto& d = draws();
    const auto& s = bundle().get("SSP2-RCP4.5");
    const auto& shares = *bundle().sectors;
    const auto base = baseline_temperature(s, d.cache, std::nullopt, d.opt);

    const auto p = holding({with_eei("Iron and steel", 5, 1000), with_eei("Cement", 2, 800)});
    const auto neutral = implied_temperature(p, p, s, shares, d.cache, std::nullopt, d.opt);
    CHECK(neutral.band.median == base.band.median);
    CHECK(neutral.band.mean == base.band.mean);
    CHECK(neutral.end_century.mean == base.end_century.mean);

    // Lowering one constituent's emissions with GVA fixed never raises the summary.
    const auto bench = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    auto q = load_portfolio(data("portfolios/ssab.json"));
    q.reported_eei.clear();
    double prev_mean = std::numeric_limits<double>::infinity();
    double prev_median = prev_mean;
    for (double k : {1.5, 1.0, 0.6, 0.2, 0.0}) {
        auto qk = q;
        qk.constituents[0].scope1_kt *= k;
        qk.constituents[0].scope2_kt *= k;
        qk.constituents[0].scope3_kt *= k;
        if (k == 0.0) qk.constituents[0].scope1_kt = 1e-9;
        const auto t = implied_temperature(qk, bench, s, shares, d.cache, std::nullopt, d.opt);
        CHECK(t.end_century.mean <= prev_mean);
        CHECK(t.end_century.median <= prev_median);
        prev_mean = t.end_century.mean;
        prev_median = t.end_century.median;
    }
}

TEST_CASE("implied_temperature: SSAB ordering per scenario") {
    const auto& d = draws();
    const auto& shares = *bundle().sectors;
    const auto ssab = load_portfolio(data("portfolios/ssab.json"));
    const auto green = load_portfolio(data("portfolios/ssab_green_steel.json"));
    const auto bench = load_portfolio(data("benchmarks/stoxx600_iron_steel_2022.json"));
    for (const char* id : {"SSP1-RCP2.6", "SSP2-RCP4.5", "SSP5-RCP8.5"}) {
        CAPTURE(id);
        const auto& s = bundle().get(id);
        const auto base = baseline_temperature(s, d.cache, std::nullopt, d.opt);
        const auto cur = implied_temperature(ssab, bench, s, shares, d.cache, std::nullopt, d.opt);
        const auto gr = implied_temperature(green, bench, s, shares, d.cache, std::nullopt, d.opt);
        CHECK(gr.end_century.mean < cur.end_century.mean);
        CHECK(cur.end_century.mean < base.end_century.mean);
        CHECK(cur.mid_century.year == 2050);
        CHECK(gr.band.metadata.at("portfolio") == green.name);
        const auto j = to_json(cur, false);
        CHECK(j.at("end_century").at("year") == 2100);
        CHECK_FALSE(j.contains("band"));
    }
}

TEST_CASE("implied_temperature: base year before the cached history is rejected") {
    const auto& d = draws();
    auto p = holding({with_eei("Cement", 2, 800)});
    p.base_year = 2015;
    for (auto& c : p.constituents) c.reporting_year = 2015;
    CHECK_THROWS_AS(implied_temperature(p, p, bundle().get("SSP2-RCP4.5"), *bundle().sectors, d.cache, std::nullopt, d.opt),
                    ConfigError);
}
