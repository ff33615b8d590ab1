#include "climalign/calibration/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "climalign/errors.hpp"
#include "climalign/uncertainty/band.hpp"

namespace climalign::calibration {

double integrated_autocorrelation_time(std::span<const double> x, double window_c) {
    const std::size_t n = x.size();
    if (n < 4) return std::numeric_limits<double>::quiet_NaN();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> c(x.begin(), x.end());
    for (double& v : c) v -= mean;
    double c0 = 0.0;
    for (double v : c) c0 += v * v;
    if (c0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
    double tau = 1.0;
    const std::size_t max_lag = n / 2;
    for (std::size_t k = 1; k < max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) ck += c[i] * c[i + k];
        tau += 2.0 * ck / c0;
        if (static_cast<double>(k) >= window_c * tau) break;
    }
    return std::max(tau, 1e-12);
}

double split_rhat(std::span<const double> x, std::size_t splits) {
    if (splits < 2) throw ConfigError("split_rhat needs at least two segments");
    const std::size_t len = x.size() / splits;
    if (len < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(splits), vars(splits);
    for (std::size_t s = 0; s < splits; ++s) {
        auto seg = x.subspan(s * len, len);
        const double m = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(len);
        double v = 0.0;
        for (double e : seg) v += (e - m) * (e - m);
        means[s] = m;
        vars[s] = v / static_cast<double>(len - 1);
    }
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(splits);
    if (w == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double gm = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(splits);
    double b = 0.0;
    for (double m : means) b += (m - gm) * (m - gm);
    b *= static_cast<double>(len) / static_cast<double>(splits - 1);
    const double n = static_cast<double>(len);
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

DiagnosticsReport diagnostics(const PosteriorChain& chain, double rhat_threshold) {
    DiagnosticsReport r;
    r.acceptance_rate = chain.acceptance_rate;
    r.n = chain.size();
    r.burn_in = chain.burn_in;
    if (chain.retained() == 0) {
        r.degenerate = true;
        r.stationary = false;
        r.warnings.push_back("chain has no retained samples");
        return r;
    }
    for (std::size_t j = 0; j < chain.dim; ++j) {
        const auto col = chain.column(j);
        ParameterSummary s;
        s.name = j < chain.names.size() ? chain.names[j] : "x" + std::to_string(j);
        const double n = static_cast<double>(col.size());
        s.mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double v = 0.0;
        for (double e : col) v += (e - s.mean) * (e - s.mean);
        s.sd = col.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
        auto sorted = col;
        std::sort(sorted.begin(), sorted.end());
        s.q05 = uncertainty::quantile_sorted(sorted, 0.05);
        s.q50 = uncertainty::quantile_sorted(sorted, 0.50);
        s.q95 = uncertainty::quantile_sorted(sorted, 0.95);
        s.degenerate = sorted.front() == sorted.back();
        if (s.degenerate) {
            s.iat = std::numeric_limits<double>::quiet_NaN();
            s.ess = 0.0;
            s.rhat = std::numeric_limits<double>::quiet_NaN();
            r.degenerate = true;
            r.warnings.push_back("parameter '" + s.name + "' never moved");
        } else {
            s.iat = integrated_autocorrelation_time(col);
            s.ess = n / s.iat;
            s.rhat = split_rhat(col);
            if (!(s.rhat < rhat_threshold))
                r.warnings.push_back("parameter '" + s.name + "' split-Rhat " + std::to_string(s.rhat));
        }
        r.stationary = r.stationary && !s.degenerate && s.rhat < rhat_threshold;
        r.parameters.push_back(std::move(s));
    }
    if (r.acceptance_rate <= 0.0) r.warnings.push_back("no proposal was accepted");
    return r;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : r.parameters)
        params.push_back({{"name", p.name},
                          {"mean", num(p.mean)},
                          {"sd", num(p.sd)},
                          {"q05", num(p.q05)},
                          {"q50", num(p.q50)},
                          {"q95", num(p.q95)},
                          {"iat", num(p.iat)},
                          {"ess", num(p.ess)},
                          {"rhat", num(p.rhat)},
                          {"degenerate", p.degenerate}});
    return {{"acceptance_rate", r.acceptance_rate},
            {"n", r.n},
            {"burn_in", r.burn_in},
            {"degenerate", r.degenerate},
            {"stationary", r.stationary},
            {"warnings", r.warnings},
            {"parameters", params}};
}

}  // namespace climalign::calibration
