#include "climalign/calibration/dram.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "climalign/errors.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::calibration {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 - exp(a)) for a <= 0.
double log1m_exp(double a) {
    if (a == kNegInf) return 0.0;
    if (a >= 0.0) return kNegInf;
    return a > -0.6931471805599453 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

nlohmann::json config_json(const DramConfig& c, std::size_t dim, double sd_scale, std::size_t burn_in) {
    return {{"algorithm", "dram"},
            {"n_iter", c.n_iter},
            {"dim", dim},
            {"sd_scale", sd_scale},
            {"epsilon", c.epsilon},
            {"warmup", c.warmup},
            {"adapt_interval", c.adapt_interval},
            {"delayed_rejection", c.delayed_rejection},
            {"dr_gamma", c.dr_gamma},
            {"burn_in", burn_in},
            {"initial_sd", c.initial_sd}};
}

}  // namespace

PosteriorChain dram(const LogDensity& log_post, std::span<const double> init, const DramConfig& cfg,
                    std::vector<std::string> names) {
    const std::size_t d = init.size();
    if (d == 0) throw ConfigError("dram: empty initial state");
    if (cfg.n_iter == 0) throw ConfigError("dram: n_iter must be positive");
    if (!(cfg.dr_gamma > 0.0 && cfg.dr_gamma < 1.0)) throw ConfigError("dram: dr_gamma must lie in (0, 1)");
    if (cfg.adapt_interval == 0) throw ConfigError("dram: adapt_interval must be positive");
    if (!cfg.initial_sd.empty() && cfg.initial_sd.size() != d) throw ConfigError("dram: initial_sd size mismatch");
    if (names.empty())
        for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    if (names.size() != d) throw ConfigError("dram: names size mismatch");

    const double sd_scale = cfg.sd_scale > 0.0 ? cfg.sd_scale : 2.4 * 2.4 / static_cast<double>(d);
    const std::size_t burn_in =
        cfg.burn_in ? *cfg.burn_in : static_cast<std::size_t>(cfg.burn_in_fraction * static_cast<double>(cfg.n_iter));
    if (burn_in >= cfg.n_iter) throw ConfigError("dram: burn-in leaves no samples");

    using Vec = Eigen::VectorXd;
    using Mat = Eigen::MatrixXd;
    Vec x = Eigen::Map<const Vec>(init.data(), static_cast<Eigen::Index>(d));
    double lp = log_post(init);
    if (!std::isfinite(lp)) throw DomainError("dram: initial state has non-finite log-posterior");

    Mat cov0 = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        double s = cfg.initial_sd.empty() ? 0.1 * std::max(std::abs(x[static_cast<Eigen::Index>(i)]), 1e-3)
                                          : cfg.initial_sd[i];
        if (!(s > 0.0)) throw ConfigError("dram: initial_sd entries must be positive");
        cov0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = s * s;
    }
    Mat L = cov0.llt().matrixL();
    const double sqrt_gamma = std::sqrt(cfg.dr_gamma);

    // Running moments of the chain history.
    Vec mean = x;
    Mat m2 = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    double count = 1.0;

    PosteriorChain chain;
    chain.names = std::move(names);
    chain.dim = d;
    chain.seed = cfg.seed;
    chain.burn_in = burn_in;
    chain.samples.reserve(cfg.n_iter * d);
    chain.log_posterior.reserve(cfg.n_iter);

    auto g = util::stream(cfg.seed, 0, 0x64726d);
    Vec z1(static_cast<Eigen::Index>(d)), z2(static_cast<Eigen::Index>(d));
    Vec y1, y2;
    std::size_t acc1 = 0, acc2 = 0;

    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
        for (Eigen::Index k = 0; k < z1.size(); ++k) z1[k] = util::standard_normal(g);
        y1 = x + L * z1;
        const double lp1 = log_post({y1.data(), d});
        const double log_a1 = std::min(0.0, lp1 - lp);  // -inf when lp1 is -inf
        if (std::log(util::uniform01(g)) < log_a1) {
            x = y1;
            lp = lp1;
            ++acc1;
        } else if (cfg.delayed_rejection) {
            for (Eigen::Index k = 0; k < z2.size(); ++k) z2[k] = util::standard_normal(g);
            y2 = x + sqrt_gamma * (L * z2);
            const double lp2 = log_post({y2.data(), d});
            if (std::isfinite(lp2)) {
                // q1(y2 -> y1) / q1(x -> y1) with whitened displacements.
                const Vec w = z1 - sqrt_gamma * z2;
                const double log_q_ratio = -0.5 * (w.squaredNorm() - z1.squaredNorm());
                const double log_a1_rev = std::min(0.0, lp1 - lp2);
                const double num = lp2 + log_q_ratio + log1m_exp(log_a1_rev);
                const double den = lp + log1m_exp(log_a1);
                const double log_a2 = num == kNegInf ? kNegInf : std::min(0.0, num - den);
                if (std::log(util::uniform01(g)) < log_a2) {
                    x = y2;
                    lp = lp2;
                    ++acc2;
                }
            }
        }

        chain.samples.insert(chain.samples.end(), x.data(), x.data() + d);
        chain.log_posterior.push_back(lp);

        count += 1.0;
        const Vec delta = x - mean;
        mean += delta / count;
        m2.noalias() += delta * (x - mean).transpose();

        const std::size_t done = it + 1;
        if (done == cfg.warmup && acc1 + acc2 == 0)
            throw RuntimeError("dram: no proposal accepted during the " + std::to_string(cfg.warmup) +
                               "-iteration warm-up; reduce initial_sd");
        if (done >= cfg.warmup && (done - cfg.warmup) % cfg.adapt_interval == 0) {
            Mat c = sd_scale * (m2 / (count - 1.0) + cfg.epsilon * Mat::Identity(m2.rows(), m2.cols()));
            Eigen::LLT<Mat> llt(c);
            if (llt.info() == Eigen::Success) L = llt.matrixL();
        }
        if (cfg.progress && (done % cfg.progress_every == 0 || done == cfg.n_iter)) cfg.progress(done, cfg.n_iter);
    }

    chain.accepted_first_stage = acc1;
    chain.accepted_second_stage = acc2;
    chain.acceptance_rate = static_cast<double>(acc1 + acc2) / static_cast<double>(cfg.n_iter);
    const Mat final_cov = L * L.transpose();
    chain.proposal_covariance.assign(final_cov.data(), final_cov.data() + final_cov.size());
    chain.config = {{"sampler", config_json(cfg, d, sd_scale, burn_in)}};
    chain.id = util::hex_id(util::fnv1a(chain.config.dump() + std::to_string(cfg.seed)));
    return chain;
}

}  // namespace climalign::calibration
