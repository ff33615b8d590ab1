#include "climalign/calibration/chain.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "climalign/errors.hpp"
#include "climalign/util/csv.hpp"

namespace climalign::calibration {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'M', 'C', 'H', 'N', '0', '1'};

static_assert(std::endian::native == std::endian::little, "chain files are written little-endian");

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
    auto p = stem;
    if (p.extension() == ".chain" || p.extension() == ".json") p.replace_extension();
    p += ext;
    return p;
}

void put_u64(std::ofstream& o, std::uint64_t v) { o.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

std::vector<double> PosteriorChain::column(std::size_t j, bool after_burn_in) const {
    if (j >= dim) throw ConfigError("chain column out of range");
    std::vector<double> c;
    const std::size_t first = after_burn_in ? burn_in : 0;
    c.reserve(size() - first);
    for (std::size_t i = first; i < size(); ++i) c.push_back(samples[i * dim + j]);
    return c;
}

fair::ParameterVector PosteriorChain::parameters(std::size_t i) const {
    if (dim != fair::ParameterVector::kSize) throw ConfigError("chain is not a FaIR parameter chain");
    fair::ParameterVector p;
    const auto r = row(burn_in + i);
    std::copy(r.begin(), r.end(), p.v.begin());
    return p;
}

nlohmann::json chain_metadata(const PosteriorChain& c) {
    return {{"format", "climalign-chain"},
            {"version", 1},
            {"id", c.id},
            {"names", c.names},
            {"dim", c.dim},
            {"n", c.size()},
            {"burn_in", c.burn_in},
            {"seed", c.seed},
            {"acceptance_rate", c.acceptance_rate},
            {"accepted_first_stage", c.accepted_first_stage},
            {"accepted_second_stage", c.accepted_second_stage},
            {"proposal_covariance", c.proposal_covariance},
            {"config", c.config}};
}

std::filesystem::path save_chain(const PosteriorChain& c, const std::filesystem::path& stem) {
    const auto bin = with_ext(stem, ".chain");
    if (bin.has_parent_path()) std::filesystem::create_directories(bin.parent_path());
    std::ofstream o(bin, std::ios::binary | std::ios::trunc);
    if (!o) throw NotFoundError("cannot write " + bin.string());
    o.write(kMagic, sizeof kMagic);
    put_u64(o, c.size());
    put_u64(o, c.dim);
    std::vector<double> col;
    for (std::size_t j = 0; j < c.dim; ++j) {
        col = c.column(j, false);
        o.write(reinterpret_cast<const char*>(col.data()), static_cast<std::streamsize>(col.size() * sizeof(double)));
    }
    o.write(reinterpret_cast<const char*>(c.log_posterior.data()),
            static_cast<std::streamsize>(c.log_posterior.size() * sizeof(double)));
    if (!o) throw RuntimeError("short write to " + bin.string());
    util::write_file(with_ext(stem, ".json"), chain_metadata(c).dump(2) + "\n");
    return bin;
}

PosteriorChain load_chain(const std::filesystem::path& stem) {
    const auto bin = with_ext(stem, ".chain");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(util::read_file(with_ext(stem, ".json")));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("chain metadata: " + std::string(e.what()));
    }
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw NotFoundError("chain file not found: " + bin.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw FormatError(bin.string() + ": not a chain file");
    const std::uint64_t n = get_u64(in);
    const std::uint64_t dim = get_u64(in);
    if (!in || dim == 0 || dim > 4096 || n > (1ULL << 34)) throw FormatError(bin.string() + ": corrupt header");

    PosteriorChain c;
    c.dim = dim;
    c.samples.resize(n * dim);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < dim; ++j) {
        in.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(n * sizeof(double)));
        for (std::size_t i = 0; i < n; ++i) c.samples[i * dim + j] = col[i];
    }
    c.log_posterior.resize(n);
    in.read(reinterpret_cast<char*>(c.log_posterior.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw FormatError(bin.string() + ": truncated payload");

    try {
        c.id = meta.value("id", "");
        c.names = meta.at("names").get<std::vector<std::string>>();
        c.burn_in = meta.at("burn_in").get<std::size_t>();
        c.seed = meta.value("seed", std::uint64_t{0});
        c.acceptance_rate = meta.at("acceptance_rate").get<double>();
        c.accepted_first_stage = meta.value("accepted_first_stage", std::size_t{0});
        c.accepted_second_stage = meta.value("accepted_second_stage", std::size_t{0});
        c.proposal_covariance = meta.value("proposal_covariance", std::vector<double>{});
        c.config = meta.value("config", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("chain metadata: " + std::string(e.what()));
    }
    if (c.names.size() != dim || meta.value("n", n) != n || c.burn_in > n)
        throw FormatError("chain metadata does not match " + bin.string());
    return c;
}

PosteriorChain constant_chain(const fair::ParameterVector& p, std::size_t n) {
    PosteriorChain c;
    for (auto name : fair::ParameterVector::names()) c.names.emplace_back(name);
    c.dim = fair::ParameterVector::kSize;
    for (std::size_t i = 0; i < n; ++i) c.samples.insert(c.samples.end(), p.v.begin(), p.v.end());
    c.log_posterior.assign(n, 0.0);
    c.acceptance_rate = 0.0;
    c.id = "constant";
    c.config = {{"sampler", "constant"}};
    return c;
}

}  // namespace climalign::calibration
