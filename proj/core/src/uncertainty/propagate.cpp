#include "climalign/uncertainty/propagate.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <atomic>
#include <cstring>

#include "climalign/errors.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::uncertainty {

namespace {

constexpr std::uint64_t kThetaChannel = 1;
constexpr std::uint64_t kEmissionChannel = 2;

std::size_t base_index(const scenario::EmissionPathway& p, int base_year) {
    if (p.years.empty()) throw DataError("empty emission pathway");
    if (base_year > p.years.back()) throw DataError("base year " + std::to_string(base_year) + " after pathway end");
    return static_cast<std::size_t>(std::max(0, base_year - p.years.front()));
}

template <typename F>
void for_each_draw(std::size_t n, F&& f) {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) f(i);
    });
}

}  // namespace

ParameterSource ParameterSource::fixed(const fair::ParameterVector& p) {
    if (auto msg = p.check(); !msg.empty()) throw ConfigError("fixed parameters invalid: " + msg);
    ParameterSource s;
    s.kind_ = Kind::fixed;
    s.fixed_ = p;
    return s;
}

ParameterSource ParameterSource::chain(std::shared_ptr<const calibration::PosteriorChain> c) {
    if (!c || c->retained() == 0) throw ConfigError("parameter chain has no retained samples");
    if (c->dim != fair::ParameterVector::kSize) throw ConfigError("chain dimension is not 20");
    ParameterSource s;
    s.kind_ = Kind::chain;
    s.chain_ = std::move(c);
    return s;
}

ParameterSource ParameterSource::prior(std::shared_ptr<const calibration::PriorSpec> p) {
    if (!p || p->size() != fair::ParameterVector::kSize) throw ConfigError("prior is not a FaIR prior");
    if (auto msg = p->check(); !msg.empty()) throw ConfigError("prior: " + msg);
    ParameterSource s;
    s.kind_ = Kind::prior;
    s.prior_ = std::move(p);
    return s;
}

fair::ParameterVector ParameterSource::draw(std::mt19937_64& g) const {
    switch (kind_) {
        case Kind::fixed: return fixed_;
        case Kind::chain: {
            const std::size_t n = chain_->retained();
            return chain_->parameters(static_cast<std::size_t>(util::uniform01(g) * static_cast<double>(n)) % n);
        }
        case Kind::prior: return calibration::sample_parameters(*prior_, g);
    }
    return fixed_;
}

std::string ParameterSource::id() const {
    switch (kind_) {
        case Kind::fixed: {
            std::string bytes(sizeof fixed_.v, '\0');
            std::memcpy(bytes.data(), fixed_.v.data(), sizeof fixed_.v);
            return "fixed:" + util::hex_id(util::fnv1a(bytes));
        }
        case Kind::chain: return "chain:" + chain_->id;
        case Kind::prior: return "prior:" + util::hex_id(util::fnv1a(calibration::to_json(*prior_).dump()));
    }
    return "?";
}

std::uint64_t history_hash(const scenario::Scenario& s, int base_year) {
    const auto& p = s.emissions;
    const std::size_t b = base_index(p, base_year);
    std::string bytes;
    for (const auto& g : p.gases) bytes += g + ",";
    bytes += std::to_string(p.years.front()) + ";";
    const auto n_vals = b * p.n_gases();
    bytes.append(reinterpret_cast<const char*>(p.values.data()), n_vals * sizeof(double));
    const std::size_t n_exo = std::min(b, s.exogenous.size());
    bytes.append(reinterpret_cast<const char*>(s.exogenous.data()), n_exo * sizeof(double));
    return util::fnv1a(bytes);
}

DrawCache build_draw_cache(const scenario::Scenario& history, const ParameterSource& source, std::size_t n,
                           std::uint64_t seed, int base_year, const fair::ModelConfig& model) {
    const auto& em = history.emissions;
    if (history.exogenous.size() != em.n_years()) throw DataError("exogenous forcing not aligned with emissions");
    const std::size_t b = base_index(em, base_year);

    DrawCache c;
    c.base_year = std::max(base_year, em.years.front());
    c.prefix_years.assign(em.years.begin(), em.years.begin() + static_cast<std::ptrdiff_t>(b));
    c.e_pi = fair::reference_emissions(em);
    c.history_hash = history_hash(history, base_year);
    c.seed = seed;
    c.source_id = source.id();
    c.model = model;

    const auto prefix = fair::prepare(em, c.e_pi, model, {}, 0, b);
    c.gas = prefix.gas_after;
    const std::span<const double> exo(history.exogenous.data(), b);

    c.theta.resize(n);
    c.state.resize(n);
    c.failed.assign(n, 0);
    c.prefix_temperature.assign(n * b, 0.0);
    for_each_draw(n, [&](std::size_t i) {
        auto g = util::stream(seed, i, kThetaChannel);
        try {
            c.theta[i] = source.draw(g);
            if (b == 0) return;
            const auto r = fair::run(prefix, exo, c.theta[i], {}, model);
            c.state[i] = r.final_state;
            std::copy(r.temperature.begin(), r.temperature.end(),
                      c.prefix_temperature.begin() + static_cast<std::ptrdiff_t>(i * b));
        } catch (const Error&) {
            c.failed[i] = 1;
        }
    });
    return c;
}

PropagateResult propagate(const DrawCache& cache, const scenario::Scenario& s,
                          const std::optional<EmissionUncertaintySpec>& spec, const PropagateOptions& opt) {
    const auto& em = s.emissions;
    if (s.exogenous.size() != em.n_years()) throw DataError("exogenous forcing not aligned with emissions");
    if (cache.size() < opt.min_draws)
        throw ConfigError("propagate needs at least " + std::to_string(opt.min_draws) + " draws");
    if (spec) spec->validate();
    const std::size_t b = base_index(em, cache.base_year);
    if (b != cache.prefix_years.size() || history_hash(s, cache.base_year) != cache.history_hash)
        throw DataError("scenario '" + s.id + "' does not share the cached history before " +
                        std::to_string(cache.base_year));

    const std::size_t ny = em.n_years();
    const int first_out = opt.first_output_year ? opt.first_output_year : em.years.front();
    if (first_out < em.years.front() || first_out > em.years.back())
        throw ConfigError("first output year outside the scenario");
    const auto out0 = static_cast<std::size_t>(first_out - em.years.front());
    const std::size_t n_out = ny - out0;
    const std::size_t n = cache.size();

    const auto suffix = fair::prepare(em, cache.e_pi, cache.model, cache.gas, b, ny - b);
    const std::span<const double> exo(s.exogenous.data() + b, ny - b);
    const double co2_base = em.co2(b);

    std::vector<double> rows(n * n_out, 0.0);
    std::vector<char> failed(cache.failed);
    std::atomic<std::size_t> clamped{0};
    for_each_draw(n, [&](std::size_t i) {
        if (failed[i]) return;
        try {
            const fair::PreparedPathway* prep = &suffix;
            fair::PreparedPathway perturbed;
            if (spec) {
                auto g = util::stream(cache.seed, i, kEmissionChannel);
                const double offset = sample_offset(*spec, co2_base, g);
                if (offset != 0.0) {
                    auto pr = perturb_pathway(em, offset, cache.base_year);
                    if (pr.clamped()) clamped.fetch_add(1);
                    perturbed = fair::prepare(pr.pathway, cache.e_pi, cache.model, cache.gas, b, ny - b);
                    prep = &perturbed;
                }
            }
            const auto r = fair::run(*prep, exo, cache.theta[i], cache.state[i], cache.model);
            double* out = rows.data() + i * n_out;
            for (std::size_t y = out0; y < ny; ++y)
                *out++ = y < b ? cache.prefix_temperature[i * b + y] : r.temperature[y - b];
        } catch (const Error&) {
            failed[i] = 1;
        }
    });

    std::size_t n_failed = 0;
    for (char f : failed) n_failed += f ? 1 : 0;
    if (static_cast<double>(n_failed) > opt.max_failure_fraction * static_cast<double>(n))
        throw RuntimeError("propagate: " + std::to_string(n_failed) + " of " + std::to_string(n) +
                           " forward runs failed for scenario '" + s.id + "'");

    Ensemble e;
    e.years.assign(em.years.begin() + static_cast<std::ptrdiff_t>(out0), em.years.end());
    e.n_draws = n - n_failed;
    e.failures = n_failed;
    e.values.reserve(e.n_draws * n_out);
    for (std::size_t i = 0; i < n; ++i)
        if (!failed[i])
            e.values.insert(e.values.end(), rows.begin() + static_cast<std::ptrdiff_t>(i * n_out),
                            rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_out));

    const bool param = cache.source_id.rfind("fixed:", 0) != 0;
    const Provenance prov = param ? (spec ? Provenance::combined : Provenance::parameter)
                                  : (spec ? Provenance::emission : Provenance::deterministic);
    PropagateResult res;
    res.band = summarize(e, opt.levels, prov);
    res.band.metadata = {{"scenario", s.id},
                         {"source", cache.source_id},
                         {"seed", cache.seed},
                         {"n_draws", n},
                         {"base_year", cache.base_year},
                         {"clamped_draws", clamped.load()}};
    if (spec) res.band.metadata["emission_uncertainty"] = to_json(*spec);
    if (opt.keep_ensemble) res.ensemble = std::move(e);
    return res;
}

PropagateResult propagate(const scenario::Scenario& s, const ParameterSource& source,
                          const std::optional<EmissionUncertaintySpec>& spec, const PropagateOptions& opt) {
    if (opt.n < opt.min_draws) throw ConfigError("propagate needs at least " + std::to_string(opt.min_draws) + " draws");
    const auto cache = build_draw_cache(s, source, opt.n, opt.seed, opt.base_year, opt.model);
    return propagate(cache, s, spec, opt);
}

}  // namespace climalign::uncertainty
