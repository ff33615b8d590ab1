#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "climalign/fair/params.hpp"

namespace climalign::calibration {

struct PosteriorChain {
    std::vector<std::string> names;
    std::size_t dim = 0;
    std::vector<double> samples;        // row-major [iteration][dim]
    std::vector<double> log_posterior;  // per iteration
    double acceptance_rate = 0.0;
    std::size_t burn_in = 0;
    std::uint64_t seed = 0;
    std::size_t accepted_first_stage = 0;
    std::size_t accepted_second_stage = 0;
    std::vector<double> proposal_covariance;  // final, row-major dim x dim
    nlohmann::json config;                    // sampler and likelihood configuration
    std::string id;

    std::size_t size() const { return log_posterior.size(); }
    std::size_t retained() const { return size() - burn_in; }
    std::span<const double> row(std::size_t i) const { return {samples.data() + i * dim, dim}; }
    std::vector<double> column(std::size_t j, bool after_burn_in = true) const;
    // Row `i` counted from the first retained sample.
    fair::ParameterVector parameters(std::size_t i) const;
};

// Two files: `<stem>.chain` holds a little-endian columnar payload (magic,
// n, dim, then each parameter column and the log-posterior column), and
// `<stem>.json` the metadata. Returns the binary path.
std::filesystem::path save_chain(const PosteriorChain& c, const std::filesystem::path& stem);
PosteriorChain load_chain(const std::filesystem::path& stem);

nlohmann::json chain_metadata(const PosteriorChain& c);

// A chain holding `n` copies of one parameter vector, no burn-in.
PosteriorChain constant_chain(const fair::ParameterVector& p, std::size_t n = 1);

}  // namespace climalign::calibration
