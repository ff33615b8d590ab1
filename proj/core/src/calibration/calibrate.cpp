#include "climalign/calibration/calibrate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "climalign/errors.hpp"
#include "climalign/uncertainty/propagate.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::calibration {

namespace {

double logsumexp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double prior_scale(const PriorComponent& c) {
    switch (c.family) {
        case Family::normal: return c.scale;
        case Family::lognormal: return c.location * c.scale;
        case Family::uniform: return (c.upper - c.lower) / std::sqrt(12.0);
    }
    return 1.0;
}

}  // namespace

nlohmann::json to_json(const CalibrationConfig& c) {
    nlohmann::json j = {{"n_iter", c.dram.n_iter},
                        {"seed", c.dram.seed},
                        {"warmup", c.dram.warmup},
                        {"adapt_interval", c.dram.adapt_interval},
                        {"delayed_rejection", c.dram.delayed_rejection},
                        {"dr_gamma", c.dram.dr_gamma},
                        {"epsilon", c.dram.epsilon},
                        {"burn_in_fraction", c.dram.burn_in_fraction},
                        {"initial_sd_fraction", c.initial_sd_fraction},
                        {"prior", to_json(c.prior)},
                        {"likelihood",
                         {{"use_temperature", c.likelihood.use_temperature},
                          {"use_co2", c.likelihood.use_co2},
                          {"first_year", c.likelihood.first_year},
                          {"last_year", c.likelihood.last_year}}}};
    if (c.dram.sd_scale > 0.0) j["sd_scale"] = c.dram.sd_scale;
    if (c.likelihood.sd_temperature) j["likelihood"]["sd_temperature"] = *c.likelihood.sd_temperature;
    if (c.likelihood.sd_co2) j["likelihood"]["sd_co2"] = *c.likelihood.sd_co2;
    if (c.init) j["init"] = fair::to_json(*c.init)["values"];
    return j;
}

CalibrationConfig calibration_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("calibration config must be a JSON object");
    CalibrationConfig c;
    try {
        c.dram.n_iter = j.value("n_iter", c.dram.n_iter);
        c.dram.seed = j.value("seed", c.dram.seed);
        c.dram.warmup = j.value("warmup", c.dram.warmup);
        c.dram.adapt_interval = j.value("adapt_interval", c.dram.adapt_interval);
        c.dram.delayed_rejection = j.value("delayed_rejection", c.dram.delayed_rejection);
        c.dram.dr_gamma = j.value("dr_gamma", c.dram.dr_gamma);
        c.dram.epsilon = j.value("epsilon", c.dram.epsilon);
        c.dram.sd_scale = j.value("sd_scale", c.dram.sd_scale);
        c.dram.burn_in_fraction = j.value("burn_in_fraction", c.dram.burn_in_fraction);
        c.initial_sd_fraction = j.value("initial_sd_fraction", c.initial_sd_fraction);
        if (j.contains("prior")) c.prior = prior_from_json(j.at("prior"));
        if (j.contains("likelihood")) {
            const auto& l = j.at("likelihood");
            c.likelihood.use_temperature = l.value("use_temperature", true);
            c.likelihood.use_co2 = l.value("use_co2", false);
            if (l.contains("sd_temperature")) c.likelihood.sd_temperature = l.at("sd_temperature").get<double>();
            if (l.contains("sd_co2")) c.likelihood.sd_co2 = l.at("sd_co2").get<double>();
            c.likelihood.first_year = l.value("first_year", 0);
            c.likelihood.last_year = l.value("last_year", 0);
        }
        if (j.contains("init")) c.init = fair::parameters_from_json(j.at("init"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("calibration config: ") + e.what());
    }
    if (c.dram.n_iter == 0) throw ConfigError("calibration config: n_iter must be positive");
    if (!(c.dram.dr_gamma > 0.0 && c.dram.dr_gamma < 1.0)) throw ConfigError("calibration config: dr_gamma in (0, 1)");
    if (!(c.dram.burn_in_fraction >= 0.0 && c.dram.burn_in_fraction < 1.0))
        throw ConfigError("calibration config: burn_in_fraction in [0, 1)");
    if (!(c.initial_sd_fraction > 0.0)) throw ConfigError("calibration config: initial_sd_fraction must be positive");
    if ((c.likelihood.sd_temperature && !(*c.likelihood.sd_temperature > 0.0)) ||
        (c.likelihood.sd_co2 && !(*c.likelihood.sd_co2 > 0.0)))
        throw ConfigError("calibration config: observation SD must be positive");
    if (!c.likelihood.use_temperature && !c.likelihood.use_co2)
        throw ConfigError("calibration config: likelihood uses no observations");
    return c;
}

PosteriorChain calibrate(const Likelihood& lik, const CalibrationConfig& cfg) {
    using P = fair::ParameterVector;
    if (cfg.prior.size() != P::kSize) throw ConfigError("calibration prior must cover the 20 FaIR parameters");
    P init;
    if (cfg.init) {
        init = *cfg.init;
    } else {
        const auto m = cfg.prior.mode();
        std::copy(m.begin(), m.end(), init.v.begin());
    }
    if (auto msg = init.check(); !msg.empty()) throw ConfigError("initial parameters invalid: " + msg);

    auto log_post = [&](std::span<const double> x) {
        P p;
        std::copy(x.begin(), x.end(), p.v.begin());
        const double lp = log_prior(p, cfg.prior);
        if (lp == -std::numeric_limits<double>::infinity()) return lp;
        return lp + lik(p);
    };

    DramConfig d = cfg.dram;
    if (d.initial_sd.empty())
        for (const auto& c : cfg.prior.components) d.initial_sd.push_back(cfg.initial_sd_fraction * prior_scale(c));

    std::vector<std::string> names;
    for (auto n : P::names()) names.emplace_back(n);
    auto chain = dram(log_post, init.v, d, std::move(names));
    chain.config["calibration"] = to_json(cfg);
    chain.config["observations"] = {{"years", {lik.years().front(), lik.years().back()}},
                                    {"count", lik.years().size()},
                                    {"sd_temperature", lik.sd_temperature()},
                                    {"sd_co2", lik.sd_co2()}};
    chain.config["forward_failures"] = lik.failures();
    chain.id = util::hex_id(util::fnv1a(chain.config["calibration"].dump() + chain.config["observations"].dump()));
    return chain;
}

uncertainty::CredibleBand posterior_predictive(const PosteriorChain& chain, const scenario::Scenario& s,
                                               std::size_t n_draws, const std::vector<double>& levels,
                                               std::uint64_t seed, const fair::ModelConfig& model) {
    auto shared = std::make_shared<const PosteriorChain>(chain);
    uncertainty::PropagateOptions opt;
    opt.n = n_draws;
    opt.levels = levels;
    opt.seed = seed;
    opt.model = model;
    opt.min_draws = 1;
    return uncertainty::propagate(s, uncertainty::ParameterSource::chain(shared), std::nullopt, opt).band;
}

double log_evidence(const ModelEvidenceInput& m, const EvidenceOptions& opt) {
    if (!m.chain || m.chain->retained() < 2) throw ConfigError("model '" + m.name + "': chain has too few samples");
    const auto& c = *m.chain;
    const auto d = static_cast<Eigen::Index>(c.dim);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (std::size_t i = c.burn_in; i < c.size(); ++i) mu += Eigen::Map<const Eigen::VectorXd>(c.row(i).data(), d);
    const double n = static_cast<double>(c.retained());
    mu /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = c.burn_in; i < c.size(); ++i) {
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(c.row(i).data(), d) - mu;
        cov.noalias() += r * r.transpose();
    }
    cov /= (n - 1.0);
    cov *= opt.covariance_inflation;
    cov.diagonal().array() += 1e-12 * (1.0 + cov.diagonal().array().abs());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw RuntimeError("model '" + m.name + "': chain covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det_half = L.diagonal().array().log().sum();
    const double log_norm = -log_det_half - 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);

    std::vector<double> logw(opt.n_samples);
    auto g = util::stream(opt.seed, 0, util::fnv1a(m.name));
    Eigen::VectorXd z(d);
    for (std::size_t k = 0; k < opt.n_samples; ++k) {
        for (Eigen::Index i = 0; i < d; ++i) z[i] = util::standard_normal(g);
        const Eigen::VectorXd x = mu + L * z;
        const std::span<const double> xs(x.data(), c.dim);
        const double lp = m.log_prior(xs);
        if (lp == -std::numeric_limits<double>::infinity()) {
            logw[k] = lp;
            continue;
        }
        logw[k] = m.log_likelihood(xs) + lp - (log_norm - 0.5 * z.squaredNorm());
    }
    const double z_hat = logsumexp(logw) - std::log(static_cast<double>(opt.n_samples));
    if (!std::isfinite(z_hat)) throw RuntimeError("model '" + m.name + "': evidence estimate is not finite");
    return z_hat;
}

std::vector<double> model_posterior(const std::vector<ModelEvidenceInput>& models, std::span<const double> model_priors,
                                    const EvidenceOptions& opt) {
    if (models.size() < 2) throw ConfigError("model comparison needs at least two models");
    if (model_priors.size() != models.size()) throw ConfigError("one prior probability per model required");
    double total = 0.0;
    for (double p : model_priors) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("model prior probabilities must be non-negative");
        total += p;
    }
    if (!(total > 0.0)) throw ConfigError("model prior probabilities sum to zero");

    std::vector<double> logp(models.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (model_priors[i] == 0.0) continue;
        logp[i] = std::log(model_priors[i] / total) + log_evidence(models[i], opt);
    }
    const double norm = logsumexp(logp);
    std::vector<double> post(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) post[i] = std::exp(logp[i] - norm);
    return post;
}

}  // namespace climalign::calibration
