#include "climalign/calibration/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "climalign/errors.hpp"

namespace climalign::calibration {

double gaussian_log_likelihood(std::span<const double> residuals, double sd) {
    if (!(sd > 0.0)) throw ConfigError("observation SD must be positive");
    double ss = 0.0;
    for (double r : residuals) ss += r * r;
    const double n = static_cast<double>(residuals.size());
    return -0.5 * ss / (sd * sd) - 0.5 * n * std::log(2.0 * std::numbers::pi * sd * sd);
}

Likelihood::Likelihood(const scenario::Scenario& history, const scenario::ObservationSeries& obs,
                       const LikelihoodConfig& cfg)
    : cfg_(cfg), failures_(std::make_shared<std::atomic<std::size_t>>(0)) {
    scenario::validate(obs);
    if (!cfg.use_temperature && !cfg.use_co2) throw ConfigError("likelihood uses neither temperature nor CO2");
    sd_t_ = cfg.sd_temperature.value_or(obs.noise_sd_temperature);
    sd_c_ = cfg.sd_co2.value_or(obs.noise_sd_co2);
    if (!(sd_t_ > 0.0) || !(sd_c_ > 0.0)) throw ConfigError("observation SD must be positive");

    const auto& em = history.emissions;
    const int first = cfg.first_year ? cfg.first_year : obs.years.front();
    const int last = cfg.last_year ? cfg.last_year : obs.years.back();
    if (first > last) throw ConfigError("likelihood window is empty");
    const int start = em.years.front();
    const int last_index = em.index_of(last);
    if (last_index < 0 || first < start) throw DataError("emission history does not cover the observation window");
    if (obs.reference_start < start || obs.reference_end > last || obs.reference_start > obs.reference_end)
        throw DataError("reference period outside the simulated window");

    const auto count = static_cast<std::size_t>(last_index + 1);
    prep_ = fair::prepare(em, fair::reference_emissions(em), cfg.model, {}, 0, count);
    exo_.assign(history.exogenous.begin(), history.exogenous.begin() + static_cast<std::ptrdiff_t>(count));
    ref_first_ = static_cast<std::size_t>(obs.reference_start - start);
    ref_count_ = static_cast<std::size_t>(obs.reference_end - obs.reference_start + 1);

    for (std::size_t i = 0; i < obs.years.size(); ++i) {
        const int y = obs.years[i];
        if (y < first || y > last) continue;
        const double t = obs.temperature[i];
        const double c = obs.co2_ppm[i];
        if ((cfg.use_temperature && !std::isfinite(t)) || (cfg.use_co2 && !std::isfinite(c))) continue;
        years_.push_back(y);
        model_index_.push_back(static_cast<std::size_t>(y - start));
        obs_t_.push_back(t);
        obs_c_.push_back(c);
    }
    if (years_.empty()) throw DataError("no observations inside the likelihood window");
}

Likelihood::Simulated Likelihood::simulate(const fair::ParameterVector& theta) const {
    const auto run = fair::run(prep_, exo_, theta, {}, cfg_.model);
    double ref = 0.0;
    for (std::size_t k = 0; k < ref_count_; ++k) ref += run.temperature[ref_first_ + k];
    ref /= static_cast<double>(ref_count_);
    Simulated s;
    s.temperature.reserve(years_.size());
    s.co2_ppm.reserve(years_.size());
    for (std::size_t idx : model_index_) {
        s.temperature.push_back(run.temperature[idx] - ref);
        s.co2_ppm.push_back(run.co2_ppm[idx]);
    }
    return s;
}

double Likelihood::operator()(const fair::ParameterVector& theta) const {
    Simulated s;
    try {
        s = simulate(theta);
    } catch (const DomainError&) {
        failures_->fetch_add(1);
        return -std::numeric_limits<double>::infinity();
    }
    double ll = 0.0;
    std::vector<double> r(years_.size());
    if (cfg_.use_temperature) {
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.temperature[i] - obs_t_[i];
        ll += gaussian_log_likelihood(r, sd_t_);
    }
    if (cfg_.use_co2) {
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = s.co2_ppm[i] - obs_c_[i];
        ll += gaussian_log_likelihood(r, sd_c_);
    }
    if (!std::isfinite(ll)) {
        failures_->fetch_add(1);
        return -std::numeric_limits<double>::infinity();
    }
    return ll;
}

}  // namespace climalign::calibration
