#include "climalign/emulator/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "climalign/errors.hpp"
#include "climalign/scenario/gas.hpp"
#include "climalign/util/csv.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::emulator {

namespace {

constexpr std::size_t kMajorGases = scenario::gas::first_minor;
constexpr std::uint64_t kGridChannel = 3;
constexpr char kModelMagic[8] = {'C', 'L', 'M', 'E', 'M', 'U', '0', '1'};
constexpr char kSetMagic[8] = {'C', 'L', 'M', 'T', 'R', 'N', '0', '1'};

static_assert(std::endian::native == std::endian::little, "binary formats are little-endian");

void write_u64(std::ostream& o, std::uint64_t v) { o.write(reinterpret_cast<const char*>(&v), sizeof v); }
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
void write_doubles(std::ostream& o, const double* p, std::size_t n) {
    o.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
void read_doubles(std::istream& in, double* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

std::ifstream open_binary(const std::filesystem::path& path, const char (&magic)[8]) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    char m[8];
    in.read(m, 8);
    if (!in || std::memcmp(m, magic, 8) != 0) throw FormatError(path.string() + ": bad magic");
    return in;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw NotFoundError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
    auto p = stem;
    p += ext;
    return p;
}

std::pair<std::vector<double>, std::vector<double>> column_stats(const std::vector<double>& rows, std::size_t width,
                                                                 const std::vector<std::size_t>& samples) {
    std::vector<double> mean(width, 0.0), sd(width, 0.0);
    const double n = static_cast<double>(samples.size());
    for (auto i : samples)
        for (std::size_t j = 0; j < width; ++j) mean[j] += rows[i * width + j];
    for (auto& m : mean) m /= n;
    for (auto i : samples)
        for (std::size_t j = 0; j < width; ++j) {
            const double d = rows[i * width + j] - mean[j];
            sd[j] += d * d;
        }
    for (auto& s : sd) {
        s = std::sqrt(s / std::max(1.0, n - 1.0));
        if (!(s > 1e-12 * 1.0)) s = 1.0;
    }
    return {mean, sd};
}

Eigen::MatrixXd normalized(const std::vector<double>& rows, std::size_t width, const std::vector<std::size_t>& samples,
                           const std::vector<double>& mean, const std::vector<double>& sd) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t c = 0; c < samples.size(); ++c)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = (rows[samples[c] * width + j] - mean[j]) / sd[j];
    return m;
}

}  // namespace

const char* to_string(InputMode m) { return m == InputMode::co2e ? "co2e" : "multigas"; }

InputMode input_mode_from_string(const std::string& s) {
    if (s == "co2e") return InputMode::co2e;
    if (s == "multigas") return InputMode::multigas;
    throw ConfigError("unknown emulator input mode '" + s + "'");
}

double co2e(const scenario::EmissionPathway& p, std::size_t y) {
    double v = p.co2(y) / scenario::kCarbonPerCo2;
    if (const int ch4 = p.gas_index("CH4"); ch4 >= 0) v += p.at(y, static_cast<std::size_t>(ch4)) * kGwpCh4 * 1e-3;
    if (const int n2o = p.gas_index("N2O"); n2o >= 0) v += p.at(y, static_cast<std::size_t>(n2o)) * (44.0 / 28.0) * kGwpN2o * 1e-3;
    return v;
}

std::vector<std::string> input_names(InputMode m, const scenario::EmissionPathway& p) {
    if (m == InputMode::co2e) return {"CO2e"};
    if (p.mode() != scenario::GasMode::multi) throw ConfigError("multigas emulator inputs need a multi-gas pathway");
    return {p.gases.begin(), p.gases.begin() + kMajorGases};
}

std::vector<double> base_inputs(InputMode m, const scenario::EmissionPathway& p, int base_year) {
    const int b = p.index_of(base_year);
    if (b < 0) throw DataError("pathway has no base year " + std::to_string(base_year));
    if (m == InputMode::co2e) return {co2e(p, static_cast<std::size_t>(b))};
    input_names(m, p);
    const auto row = p.row(static_cast<std::size_t>(b));
    return {row.begin(), row.begin() + kMajorGases};
}

scenario::Scenario scale_to_inputs(const scenario::Scenario& s, InputMode m, int base_year, std::span<const double> x,
                                   std::span<const double> reference) {
    if (x.size() != reference.size()) throw ConfigError("emulator input has the wrong length");
    const auto& em = s.emissions;
    const int b = em.index_of(base_year);
    if (b < 0) throw DataError("scenario '" + s.id + "' has no year " + std::to_string(base_year));
    std::vector<double> factor(em.n_gases(), 1.0);
    auto ratio = [](double xi, double ri) {
        if (ri == 0.0) {
            if (xi != 0.0) throw DomainError("cannot scale a gas whose reference emission is zero");
            return 1.0;
        }
        return xi / ri;
    };
    if (m == InputMode::co2e) {
        if (x.size() != 1) throw ConfigError("co2e emulator takes one input");
        std::fill(factor.begin(), factor.end(), ratio(x[0], reference[0]));
    } else {
        if (x.size() != kMajorGases || em.mode() != scenario::GasMode::multi)
            throw ConfigError("multigas emulator takes one input per major gas");
        for (std::size_t g = 0; g < kMajorGases; ++g) factor[g] = ratio(x[g], reference[g]);
    }
    scenario::Scenario out = s;
    for (std::size_t y = static_cast<std::size_t>(b); y < em.n_years(); ++y)
        for (std::size_t g = 0; g < em.n_gases(); ++g)
            if (factor[g] != 1.0) out.emissions.at(y, g) *= factor[g];
    return out;
}

std::string TrainingSet::check() const {
    if (input_names.empty() || scenarios.empty() || years.empty()) return "training set has an empty schema";
    if (reference.size() != n_inputs()) return "reference inputs have the wrong length";
    if (inputs.size() % n_inputs() != 0 || labels.size() != size() * n_outputs()) return "inputs and labels disagree in size";
    if (size() == 0) return "training set is empty";
    for (double v : inputs)
        if (!std::isfinite(v)) return "non-finite input";
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t k = 0; k < scenarios.size(); ++k)
            for (std::size_t y = 0; y < years.size(); ++y) {
                const double lo = label(i, output_index(k, y, stat_q05));
                const double md = label(i, output_index(k, y, stat_median));
                const double hi = label(i, output_index(k, y, stat_q95));
                if (!std::isfinite(lo) || !std::isfinite(md) || !std::isfinite(hi) ||
                    !std::isfinite(label(i, output_index(k, y, stat_mean))))
                    return "non-finite label";
                if (!(lo <= md && md <= hi)) return "label quantiles out of order";
            }
    return {};
}

TrainingSet generate_training_set(const uncertainty::DrawCache& cache, const std::vector<const scenario::Scenario*>& scenarios,
                                  const TrainingSetConfig& cfg, const std::function<void(std::size_t)>& progress) {
    if (scenarios.empty()) throw ConfigError("training set needs at least one scenario");
    if (cfg.grid_points == 0) throw ConfigError("training grid is empty");
    if (!(cfg.scale_lo > 0.0 && cfg.scale_hi >= cfg.scale_lo)) throw ConfigError("training grid scales must satisfy 0 < lo <= hi");
    if (cfg.grid_points > 1 && cfg.scale_hi == cfg.scale_lo) throw ConfigError("training grid is degenerate");
    if (cfg.base_year < cache.base_year) throw ConfigError("emulator base year precedes the cached history");
    if (cfg.last_year < cfg.base_year) throw ConfigError("emulator last year precedes its base year");

    const scenario::Scenario* ref = nullptr;
    for (const auto* s : scenarios)
        if (s->id == cfg.reference_scenario) ref = s;
    if (!ref) throw NotFoundError("reference scenario '" + cfg.reference_scenario + "' not among the training scenarios");

    TrainingSet ts;
    ts.mode = cfg.mode;
    ts.input_names = input_names(cfg.mode, ref->emissions);
    ts.reference = base_inputs(cfg.mode, ref->emissions, cfg.base_year);
    for (const auto* s : scenarios) {
        ts.scenarios.push_back(s->id);
        if (s->emissions.index_of(cfg.last_year) < 0) throw DataError("scenario '" + s->id + "' ends before " + std::to_string(cfg.last_year));
    }
    for (int y = cfg.base_year; y <= cfg.last_year; ++y) ts.years.push_back(y);

    uncertainty::PropagateOptions popt;
    popt.levels = {0.90};
    popt.first_output_year = cfg.base_year;
    popt.min_draws = 1;
    popt.model = cache.model;

    const std::size_t n_in = ts.n_inputs();
    std::vector<std::string> warnings;
    std::vector<double> x(n_in), row(ts.n_outputs());
    for (std::size_t i = 0; i < cfg.grid_points; ++i) {
        if (cfg.mode == InputMode::co2e) {
            const double t = cfg.grid_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
            x[0] = (cfg.scale_lo + t * (cfg.scale_hi - cfg.scale_lo)) * ts.reference[0];
        } else {
            auto g = util::stream(cfg.seed, i, kGridChannel);
            for (std::size_t j = 0; j < n_in; ++j)
                x[j] = (cfg.scale_lo + util::uniform01(g) * (cfg.scale_hi - cfg.scale_lo)) * ts.reference[j];
        }
        try {
            for (std::size_t k = 0; k < scenarios.size(); ++k) {
                const auto scaled = scale_to_inputs(*scenarios[k], cfg.mode, cfg.base_year, x, ts.reference);
                const auto band = uncertainty::propagate(cache, scaled, cfg.emission, popt).band;
                for (std::size_t y = 0; y < ts.years.size(); ++y) {
                    row[ts.output_index(k, y, stat_mean)] = band.mean[y];
                    row[ts.output_index(k, y, stat_median)] = band.median[y];
                    row[ts.output_index(k, y, stat_q05)] = band.lower[0][y];
                    row[ts.output_index(k, y, stat_q95)] = band.upper[0][y];
                }
            }
            ts.inputs.insert(ts.inputs.end(), x.begin(), x.end());
            ts.labels.insert(ts.labels.end(), row.begin(), row.end());
        } catch (const Error& e) {
            ++ts.skipped;
            warnings.push_back("grid point " + std::to_string(i) + " skipped: " + e.what());
        }
        if (progress) progress(i);
    }
    if (ts.size() == 0) throw RuntimeError("every training grid point failed");
    ts.metadata = {{"source", cache.source_id},
                   {"n_draws", cache.size()},
                   {"seed", cache.seed},
                   {"grid_seed", cfg.seed},
                   {"base_year", cfg.base_year},
                   {"scale_lo", cfg.scale_lo},
                   {"scale_hi", cfg.scale_hi},
                   {"grid_points", cfg.grid_points},
                   {"reference_scenario", cfg.reference_scenario},
                   {"skipped", ts.skipped},
                   {"warnings", warnings}};
    if (cfg.emission) ts.metadata["emission_uncertainty"] = uncertainty::to_json(*cfg.emission);
    return ts;
}

void save_training_set(const TrainingSet& ts, const std::filesystem::path& stem) {
    if (auto msg = ts.check(); !msg.empty()) throw DataError("training set: " + msg);
    std::ofstream o(with_ext(stem, ".tset"), std::ios::binary);
    if (!o) throw RuntimeError("cannot write " + with_ext(stem, ".tset").string());
    o.write(kSetMagic, 8);
    write_u64(o, ts.size());
    write_u64(o, ts.n_inputs());
    write_u64(o, ts.n_outputs());
    write_doubles(o, ts.inputs.data(), ts.inputs.size());
    write_doubles(o, ts.labels.data(), ts.labels.size());
    nlohmann::json j = {{"mode", to_string(ts.mode)},
                        {"input_names", ts.input_names},
                        {"scenarios", ts.scenarios},
                        {"years", ts.years},
                        {"stats", kStats},
                        {"reference", ts.reference},
                        {"skipped", ts.skipped},
                        {"metadata", ts.metadata}};
    util::write_file(with_ext(stem, ".tset.json"), j.dump(2));
}

TrainingSet load_training_set(const std::filesystem::path& stem) {
    const auto j = read_json(with_ext(stem, ".tset.json"));
    TrainingSet ts;
    try {
        ts.mode = input_mode_from_string(j.at("mode").get<std::string>());
        ts.input_names = j.at("input_names").get<std::vector<std::string>>();
        ts.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        ts.years = j.at("years").get<std::vector<int>>();
        ts.reference = j.at("reference").get<std::vector<double>>();
        ts.skipped = j.value("skipped", std::size_t{0});
        ts.metadata = j.value("metadata", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("training set metadata: ") + e.what());
    }
    auto in = open_binary(with_ext(stem, ".tset"), kSetMagic);
    const auto n = read_u64(in), n_in = read_u64(in), n_out = read_u64(in);
    if (n_in != ts.n_inputs() || n_out != ts.n_outputs()) throw FormatError("training set binary does not match its metadata");
    ts.inputs.resize(n * n_in);
    ts.labels.resize(n * n_out);
    read_doubles(in, ts.inputs.data(), ts.inputs.size());
    read_doubles(in, ts.labels.data(), ts.labels.size());
    if (!in) throw FormatError("training set binary is truncated");
    if (auto msg = ts.check(); !msg.empty()) throw DataError("training set: " + msg);
    return ts;
}

EmulatorModel train(const TrainingSet& ts, const TrainConfig& cfg, const std::function<void(std::size_t, double)>& progress) {
    if (auto msg = ts.check(); !msg.empty()) throw DataError("training set: " + msg);
    if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) throw ConfigError("validation fraction in [0, 1)");
    const std::size_t n = ts.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    auto g = util::stream(cfg.split_seed, 0, 0x73706c);
    for (std::size_t i = n; i-- > 1;)
        std::swap(perm[i], perm[static_cast<std::size_t>(util::uniform01(g) * static_cast<double>(i + 1)) % (i + 1)]);
    const auto n_val = static_cast<std::size_t>(std::round(cfg.validation_fraction * static_cast<double>(n)));
    if (n_val >= n) throw ConfigError("validation split leaves no training samples");
    std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> tr(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());

    EmulatorModel m;
    m.mode = ts.mode;
    m.input_names = ts.input_names;
    m.scenarios = ts.scenarios;
    m.years = ts.years;
    m.reference = ts.reference;
    m.extrapolation_margin = cfg.extrapolation_margin;
    m.validation_indices = val;
    const std::size_t n_in = ts.n_inputs(), n_out = ts.n_outputs();
    std::tie(m.in_mean, m.in_sd) = column_stats(ts.inputs, n_in, tr);
    std::tie(m.out_mean, m.out_sd) = column_stats(ts.labels, n_out, tr);
    m.envelope_lo.assign(n_in, std::numeric_limits<double>::infinity());
    m.envelope_hi.assign(n_in, -std::numeric_limits<double>::infinity());
    for (auto i : tr)
        for (std::size_t j = 0; j < n_in; ++j) {
            m.envelope_lo[j] = std::min(m.envelope_lo[j], ts.inputs[i * n_in + j]);
            m.envelope_hi[j] = std::max(m.envelope_hi[j], ts.inputs[i * n_in + j]);
        }

    const Eigen::MatrixXd x = normalized(ts.inputs, n_in, tr, m.in_mean, m.in_sd);
    const Eigen::MatrixXd y = normalized(ts.labels, n_out, tr, m.out_mean, m.out_sd);
    const Eigen::MatrixXd xv = normalized(ts.inputs, n_in, val, m.in_mean, m.in_sd);
    const Eigen::MatrixXd yv = normalized(ts.labels, n_out, val, m.out_mean, m.out_sd);
    m.net = make_mlp(n_in, cfg.hidden, n_out, cfg.adam.seed);
    const auto fr = val.empty() ? fit(m.net, x, y, nullptr, nullptr, cfg.adam, progress)
                                : fit(m.net, x, y, &xv, &yv, cfg.adam, progress);

    const auto train_rep = evaluate(m, ts, tr);
    const auto val_rep = val.empty() ? train_rep : evaluate(m, ts, val);
    m.converged = val_rep.rmse_median <= cfg.median_rmse_ceiling;
    m.metadata = {{"training_set", ts.metadata},
                  {"architecture", {{"hidden", cfg.hidden}, {"activation", "tanh"}, {"output", "linear"}}},
                  {"normalization", {{"inputs", "z-score"}, {"outputs", "z-score per output"}}},
                  {"optimizer",
                   {{"name", "adam"},
                    {"epochs", cfg.adam.epochs},
                    {"learning_rate", cfg.adam.learning_rate},
                    {"final_lr_fraction", cfg.adam.final_lr_fraction},
                    {"batch", cfg.adam.batch},
                    {"beta1", cfg.adam.beta1},
                    {"beta2", cfg.adam.beta2},
                    {"seed", cfg.adam.seed}}},
                  {"validation_fraction", cfg.validation_fraction},
                  {"split_seed", cfg.split_seed},
                  {"median_rmse_ceiling", cfg.median_rmse_ceiling},
                  {"train_loss", fr.train_loss},
                  {"validation_loss", fr.validation_loss},
                  {"best_epoch", fr.best_epoch},
                  {"train", to_json(train_rep)},
                  {"validation", to_json(val_rep)}};
    std::string bytes = m.metadata.dump();
    for (const auto& l : m.net.layers) {
        bytes.append(reinterpret_cast<const char*>(l.w.data()), static_cast<std::size_t>(l.w.size()) * sizeof(double));
        bytes.append(reinterpret_cast<const char*>(l.b.data()), static_cast<std::size_t>(l.b.size()) * sizeof(double));
    }
    m.id = util::hex_id(util::fnv1a(bytes));
    return m;
}

std::size_t Prediction::scenario_index(std::string_view id) const {
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        if (scenarios[i] == id) return i;
    throw NotFoundError("emulator has no scenario '" + std::string(id) + "'");
}

std::size_t Prediction::year_index(int year) const {
    for (std::size_t i = 0; i < years.size(); ++i)
        if (years[i] == year) return i;
    throw NotFoundError("emulator has no year " + std::to_string(year));
}

std::vector<double> predict_raw(const EmulatorModel& m, std::span<const double> input) {
    if (input.size() != m.input_names.size())
        throw ConfigError("emulator expects " + std::to_string(m.input_names.size()) + " inputs");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(input.size()), 1);
    for (std::size_t j = 0; j < input.size(); ++j) {
        if (!std::isfinite(input[j])) throw ConfigError("emulator input is not finite");
        x(static_cast<Eigen::Index>(j), 0) = (input[j] - m.in_mean[j]) / m.in_sd[j];
    }
    const Eigen::MatrixXd y = m.net.forward(x);
    std::vector<double> out(m.n_outputs());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.out_mean[i] + m.out_sd[i] * y(static_cast<Eigen::Index>(i), 0);
    return out;
}

Prediction predict(const EmulatorModel& m, std::span<const double> input) {
    const auto raw = predict_raw(m, input);
    Prediction p;
    p.scenarios = m.scenarios;
    p.years = m.years;
    p.input.assign(input.begin(), input.end());
    for (std::size_t j = 0; j < input.size(); ++j) {
        const double range = m.envelope_hi[j] - m.envelope_lo[j];
        const double pad = m.extrapolation_margin * (range > 0.0 ? range : std::abs(m.envelope_hi[j]));
        if (input[j] < m.envelope_lo[j] - pad || input[j] > m.envelope_hi[j] + pad) {
            p.extrapolated = true;
            p.warnings.push_back("input " + m.input_names[j] + " = " + util::format_double(input[j]) +
                                 " lies outside the training envelope [" + util::format_double(m.envelope_lo[j]) + ", " +
                                 util::format_double(m.envelope_hi[j]) + "]");
        }
    }
    const std::size_t ns = m.scenarios.size(), ny = m.years.size();
    auto grid = [&] { return std::vector<std::vector<double>>(ns, std::vector<double>(ny)); };
    p.mean = grid();
    p.median = grid();
    p.q05 = grid();
    p.q95 = grid();
    for (std::size_t k = 0; k < ns; ++k)
        for (std::size_t y = 0; y < ny; ++y) {
            const std::size_t o = (k * ny + y) * stat_count;
            std::array<double, 3> q{raw[o + stat_q05], raw[o + stat_median], raw[o + stat_q95]};
            std::sort(q.begin(), q.end());
            p.q05[k][y] = q[0];
            p.median[k][y] = q[1];
            p.q95[k][y] = q[2];
            p.mean[k][y] = raw[o + stat_mean];
        }
    return p;
}

Prediction predict_scaled(const EmulatorModel& m, double factor) {
    std::vector<double> x(m.reference);
    for (double& v : x) v *= factor;
    return predict(m, x);
}

HoldoutReport evaluate(const EmulatorModel& m, const TrainingSet& ts, const std::vector<std::size_t>& samples,
                       double median_tol, double quantile_tol) {
    if (ts.scenarios != m.scenarios || ts.years != m.years || ts.input_names != m.input_names)
        throw ConfigError("training set schema differs from the emulator");
    HoldoutReport r;
    r.samples = samples.size();
    if (samples.empty()) return r;
    double se_med = 0.0, se_q = 0.0, se_mean = 0.0;
    std::size_t cells = 0, within = 0;
    const std::size_t n_in = ts.n_inputs();
    for (auto i : samples) {
        if (i >= ts.size()) throw ConfigError("holdout sample index out of range");
        const auto p = predict(m, std::span<const double>(ts.inputs.data() + i * n_in, n_in));
        for (std::size_t k = 0; k < ts.scenarios.size(); ++k)
            for (std::size_t y = 0; y < ts.years.size(); ++y) {
                const double dm = p.median[k][y] - ts.label(i, ts.output_index(k, y, stat_median));
                const double dl = p.q05[k][y] - ts.label(i, ts.output_index(k, y, stat_q05));
                const double dh = p.q95[k][y] - ts.label(i, ts.output_index(k, y, stat_q95));
                const double da = p.mean[k][y] - ts.label(i, ts.output_index(k, y, stat_mean));
                se_med += dm * dm;
                se_q += dl * dl + dh * dh;
                se_mean += da * da;
                r.max_abs_median = std::max(r.max_abs_median, std::abs(dm));
                ++cells;
                if (std::abs(dm) <= median_tol && std::abs(dl) <= quantile_tol && std::abs(dh) <= quantile_tol) ++within;
            }
    }
    const double c = static_cast<double>(cells);
    r.rmse_median = std::sqrt(se_med / c);
    r.rmse_quantiles = std::sqrt(se_q / (2.0 * c));
    r.rmse_mean = std::sqrt(se_mean / c);
    r.fraction_within = static_cast<double>(within) / c;
    return r;
}

void save_model(const EmulatorModel& m, const std::filesystem::path& stem) {
    std::ofstream o(with_ext(stem, ".emu"), std::ios::binary);
    if (!o) throw RuntimeError("cannot write " + with_ext(stem, ".emu").string());
    o.write(kModelMagic, 8);
    write_u64(o, EmulatorModel::kSchemaVersion);
    write_u64(o, m.net.layers.size());
    for (const auto& l : m.net.layers) {
        write_u64(o, static_cast<std::uint64_t>(l.w.rows()));
        write_u64(o, static_cast<std::uint64_t>(l.w.cols()));
        write_doubles(o, l.w.data(), static_cast<std::size_t>(l.w.size()));
        write_doubles(o, l.b.data(), static_cast<std::size_t>(l.b.size()));
    }
    nlohmann::json j = {{"schema_version", EmulatorModel::kSchemaVersion},
                        {"id", m.id},
                        {"mode", to_string(m.mode)},
                        {"input_names", m.input_names},
                        {"scenarios", m.scenarios},
                        {"years", m.years},
                        {"stats", kStats},
                        {"reference", m.reference},
                        {"in_mean", m.in_mean},
                        {"in_sd", m.in_sd},
                        {"out_mean", m.out_mean},
                        {"out_sd", m.out_sd},
                        {"envelope_lo", m.envelope_lo},
                        {"envelope_hi", m.envelope_hi},
                        {"extrapolation_margin", m.extrapolation_margin},
                        {"validation_indices", m.validation_indices},
                        {"converged", m.converged},
                        {"metadata", m.metadata}};
    util::write_file(with_ext(stem, ".json"), j.dump(1));
}

EmulatorModel load_model(const std::filesystem::path& stem) {
    const auto j = read_json(with_ext(stem, ".json"));
    EmulatorModel m;
    try {
        if (j.at("schema_version").get<int>() != EmulatorModel::kSchemaVersion)
            throw FormatError("unsupported emulator schema version");
        m.id = j.at("id").get<std::string>();
        m.mode = input_mode_from_string(j.at("mode").get<std::string>());
        m.input_names = j.at("input_names").get<std::vector<std::string>>();
        m.scenarios = j.at("scenarios").get<std::vector<std::string>>();
        m.years = j.at("years").get<std::vector<int>>();
        m.reference = j.at("reference").get<std::vector<double>>();
        m.in_mean = j.at("in_mean").get<std::vector<double>>();
        m.in_sd = j.at("in_sd").get<std::vector<double>>();
        m.out_mean = j.at("out_mean").get<std::vector<double>>();
        m.out_sd = j.at("out_sd").get<std::vector<double>>();
        m.envelope_lo = j.at("envelope_lo").get<std::vector<double>>();
        m.envelope_hi = j.at("envelope_hi").get<std::vector<double>>();
        m.extrapolation_margin = j.at("extrapolation_margin").get<double>();
        m.validation_indices = j.value("validation_indices", std::vector<std::size_t>{});
        m.converged = j.value("converged", false);
        m.metadata = j.value("metadata", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("emulator metadata: ") + e.what());
    }
    auto in = open_binary(with_ext(stem, ".emu"), kModelMagic);
    if (read_u64(in) != static_cast<std::uint64_t>(EmulatorModel::kSchemaVersion))
        throw FormatError("emulator binary schema version mismatch");
    const auto nl = read_u64(in);
    if (nl == 0 || nl > 64) throw FormatError("emulator binary: bad layer count");
    for (std::uint64_t i = 0; i < nl; ++i) {
        const auto r = read_u64(in), c = read_u64(in);
        if (!in || r == 0 || c == 0 || r > (1u << 20) || c > (1u << 20)) throw FormatError("emulator binary: bad layer shape");
        Layer l;
        l.w.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        l.b.resize(static_cast<Eigen::Index>(r));
        read_doubles(in, l.w.data(), r * c);
        read_doubles(in, l.b.data(), r);
        m.net.layers.push_back(std::move(l));
    }
    if (!in) throw FormatError("emulator binary is truncated");
    const std::size_t n_in = m.input_names.size();
    if (m.net.n_inputs() != n_in || m.net.n_outputs() != m.n_outputs() || m.in_mean.size() != n_in ||
        m.in_sd.size() != n_in || m.out_mean.size() != m.n_outputs() || m.out_sd.size() != m.n_outputs() ||
        m.envelope_lo.size() != n_in || m.envelope_hi.size() != n_in || m.reference.size() != n_in)
        throw FormatError("emulator binary does not match its metadata");
    return m;
}

nlohmann::json to_json(const Prediction& p) {
    nlohmann::json sc = nlohmann::json::array();
    for (std::size_t k = 0; k < p.scenarios.size(); ++k)
        sc.push_back({{"scenario", p.scenarios[k]},
                      {"mean", p.mean[k]},
                      {"median", p.median[k]},
                      {"q05", p.q05[k]},
                      {"q95", p.q95[k]}});
    return {{"years", p.years}, {"input", p.input}, {"scenarios", sc}, {"extrapolated", p.extrapolated}, {"warnings", p.warnings}};
}

nlohmann::json to_json(const HoldoutReport& r) {
    return {{"samples", r.samples},
            {"rmse_median", r.rmse_median},
            {"rmse_quantiles", r.rmse_quantiles},
            {"rmse_mean", r.rmse_mean},
            {"max_abs_median", r.max_abs_median},
            {"fraction_within", r.fraction_within}};
}

}  // namespace climalign::emulator
