#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "climalign/calibration/chain.hpp"
#include "climalign/calibration/prior.hpp"
#include "climalign/fair/model.hpp"
#include "climalign/scenario/scenario.hpp"
#include "climalign/uncertainty/band.hpp"
#include "climalign/uncertainty/emission.hpp"

namespace climalign::uncertainty {

// Where parameter draws come from: one fixed vector, the retained part of a
// chain (uniform with replacement), or the prior.
class ParameterSource {
public:
    enum class Kind { fixed, chain, prior };

    static ParameterSource fixed(const fair::ParameterVector& p);
    static ParameterSource chain(std::shared_ptr<const calibration::PosteriorChain> c);
    static ParameterSource prior(std::shared_ptr<const calibration::PriorSpec> p);

    Kind kind() const { return kind_; }
    fair::ParameterVector draw(std::mt19937_64& g) const;
    std::string id() const;

private:
    Kind kind_ = Kind::fixed;
    fair::ParameterVector fixed_ = fair::ParameterVector::defaults();
    std::shared_ptr<const calibration::PosteriorChain> chain_;
    std::shared_ptr<const calibration::PriorSpec> prior_;
};

// Per-draw parameters and climate state at the start of the base year. Every
// scenario that shares the history before the base year can reuse it, which
// also gives common random numbers across scenarios.
struct DrawCache {
    int base_year = 0;
    std::vector<int> prefix_years;
    std::vector<fair::ParameterVector> theta;
    std::vector<fair::ClimateState> state;
    std::vector<double> prefix_temperature;  // [draw][prefix year]
    std::vector<char> failed;
    fair::GasState gas;
    std::vector<double> e_pi;
    std::uint64_t history_hash = 0;
    std::uint64_t seed = 0;
    std::string source_id;
    fair::ModelConfig model;

    std::size_t size() const { return theta.size(); }
};

DrawCache build_draw_cache(const scenario::Scenario& history, const ParameterSource& source, std::size_t n,
                           std::uint64_t seed, int base_year, const fair::ModelConfig& model = {});

// Hash of the emissions and exogenous forcing before `base_year`.
std::uint64_t history_hash(const scenario::Scenario& s, int base_year);

struct PropagateOptions {
    std::size_t n = 1000;
    std::vector<double> levels = kDefaultLevels;
    std::uint64_t seed = 42;
    int base_year = 2020;     // emission offsets start here; draws share the state before it
    int first_output_year = 0;  // 0 = first scenario year
    fair::ModelConfig model;
    bool keep_ensemble = false;
    double max_failure_fraction = 0.01;
    std::size_t min_draws = 100;
};

struct PropagateResult {
    CredibleBand band;
    Ensemble ensemble;  // filled when keep_ensemble is set
};

// Monte Carlo over parameters (when the source is not fixed) and emission
// offsets (when `spec` is given). Draw i uses RNG streams derived from
// (seed, i), so results do not depend on the number of worker threads.
PropagateResult propagate(const scenario::Scenario& s, const ParameterSource& source,
                          const std::optional<EmissionUncertaintySpec>& spec, const PropagateOptions& opt);

// Same, reusing a cache built from a scenario with identical history.
PropagateResult propagate(const DrawCache& cache, const scenario::Scenario& s,
                          const std::optional<EmissionUncertaintySpec>& spec, const PropagateOptions& opt);

}  // namespace climalign::uncertainty
