#include "ifl/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ifl {

namespace pt = boost::property_tree;

const char* to_string(ExperimentKind kind) noexcept
{
    switch (kind) {
    case ExperimentKind::gaussian_scaling: return "gaussian-scaling";
    case ExperimentKind::testfn_scaling: return "testfn-scaling";
    case ExperimentKind::tail_check: return "tail-check";
    case ExperimentKind::oracle_validate: return "oracle-validate";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& text)
{
    for (auto k : {ExperimentKind::gaussian_scaling, ExperimentKind::testfn_scaling,
                   ExperimentKind::tail_check, ExperimentKind::oracle_validate})
        if (text == to_string(k))
            return k;
    return std::nullopt;
}

std::string DisorderDistribution::label() const
{
    char buf[64];
    switch (type) {
    case Type::zero: return "zero";
    case Type::gaussian: std::snprintf(buf, sizeof buf, "gaussian(%g)", scale); return buf;
    case Type::rademacher: std::snprintf(buf, sizeof buf, "rademacher(%g)", scale); return buf;
    }
    return "unknown";
}

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& why)
{
    throw Error(Errc::config_error, "config key '" + key + "': " + why);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            config_fail(key, "trailing characters in '" + v + "'");
        return d;
    } catch (const std::logic_error&) {
        config_fail(key, "not a number: '" + v + "'");
    }
}

long long to_integer(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const long long d = std::stoll(v, &used);
        if (used != v.size())
            config_fail(key, "trailing characters in '" + v + "'");
        return d;
    } catch (const std::logic_error&) {
        config_fail(key, "not an integer: '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const unsigned long long d = std::stoull(v, &used, 0);
        if (used != v.size() || v.front() == '-')
            config_fail(key, "not an unsigned integer: '" + v + "'");
        return d;
    } catch (const std::logic_error&) {
        config_fail(key, "not an unsigned integer: '" + v + "'");
    }
}

DisorderDistribution parse_distribution(const std::string& text)
{
    DisorderDistribution d;
    if (text == "zero")
        return d;
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close != text.size() - 1)
        config_fail("disorder.distributions", "expected zero, gaussian(s) or rademacher(e), got '" + text + "'");
    const std::string name = trim(text.substr(0, open));
    d.scale = to_double("disorder.distributions", trim(text.substr(open + 1, close - open - 1)));
    if (!(d.scale >= 0.0))
        config_fail("disorder.distributions", "scale must be >= 0");
    if (name == "gaussian")
        d.type = DisorderDistribution::Type::gaussian;
    else if (name == "rademacher")
        d.type = DisorderDistribution::Type::rademacher;
    else
        config_fail("disorder.distributions", "unknown distribution '" + name + "'");
    return d;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string canonical(const ExperimentConfig& c)
{
    std::ostringstream os;
    os << "experiment.kind=" << (c.kind ? to_string(*c.kind) : "") << '\n';
    os << "experiment.sizes=";
    for (int n : c.sizes)
        os << n << ',';
    os << "\nexperiment.T=";
    for (double t : c.levels)
        os << fmt(t) << ',';
    os << "\nkernel=" << c.kernel_label << ':';
    for (const auto& o : c.kernel_offsets)
        os << o.dx << ' ' << o.dy << ' ' << fmt(o.weight) << ';';
    os << "\npotential=" << c.potential << ",beta=" << fmt(c.beta)
       << ",c=" << (c.declared_curvature ? fmt(*c.declared_curvature) : "default") << '\n';
    os << "disorder=";
    for (const auto& d : c.distributions)
        os << d.label() << ',';
    os << "draws=" << c.draws << ",seed=" << c.seed << '\n';
    os << "chain=" << c.chain.sweeps << ',' << c.chain.burn_in << ',' << fmt(c.chain.proposal_width)
       << ',' << c.chain.thinning << '\n';
    os << "oracle=" << fmt(c.quadrature.cutoff) << ',' << c.quadrature.points_per_axis << ','
       << c.bins << ',' << fmt(c.bin_range) << '\n';
    os << "radii=";
    for (int r : c.radii)
        os << r << ',';
    os << '\n';
    return os.str();
}

} // namespace

WalkKernel ExperimentConfig::make_kernel() const
{
    if (kernel_offsets.empty())
        return WalkKernel::nearest_neighbor();
    return WalkKernel::validate(kernel_offsets);
}

Potential ExperimentConfig::make_potential() const
{
    Potential v = potential == "quadratic" ? Potential::quadratic() : Potential::anharmonic(beta);
    if (declared_curvature) {
        v = v.with_curvature_ceiling(*declared_curvature);
        if (!check_potential(v).ok())
            config_fail("potential.c", "declared ceiling " + fmt(*declared_curvature) +
                                           " is below the finite-difference curvature of " +
                                           potential);
    }
    return v;
}

ExperimentConfig parse_config_text(const std::string& text)
{
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::config_error, std::string("malformed config: ") + e.what());
    }

    static const std::vector<std::string> known = {
        "experiment.kind", "experiment.sizes", "experiment.T", "experiment.output",
        "kernel.type", "kernel.offsets",
        "potential.name", "potential.beta", "potential.c",
        "disorder.distributions", "disorder.draws", "disorder.seed",
        "chain.sweeps", "chain.burn_in", "chain.proposal_width", "chain.thinning",
        "oracle.cutoff", "oracle.points", "oracle.bins", "oracle.range",
        "testfn.radii"};
    for (const auto& [section, body] : tree) {
        if (body.empty())
            config_fail(section, "keys must live inside a [section]");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (std::find(known.begin(), known.end(), full) == known.end())
                config_fail(full, "unknown key");
        }
    }

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.')))
            return trim(*v);
        return std::nullopt;
    };

    ExperimentConfig c;
    if (auto v = get("experiment.kind")) {
        c.kind = parse_kind(*v);
        if (!c.kind)
            config_fail("experiment.kind", "unknown experiment '" + *v + "'");
    }
    if (auto v = get("experiment.sizes"))
        for (const auto& s : split(*v, ',')) {
            const long long n = to_integer("experiment.sizes", s);
            if (n < 0 || n > 512)
                config_fail("experiment.sizes", "N must lie in [0, 512]");
            c.sizes.push_back(static_cast<int>(n));
        }
    if (auto v = get("experiment.T"))
        for (const auto& s : split(*v, ',')) {
            const double t = to_double("experiment.T", s);
            if (!(t >= 0.0))
                config_fail("experiment.T", "T must be >= 0");
            c.levels.push_back(t);
        }
    if (auto v = get("experiment.output"))
        c.output = *v;

    if (auto v = get("kernel.type")) {
        if (*v == "custom") {
            const auto offsets = get("kernel.offsets");
            if (!offsets)
                config_fail("kernel.offsets", "required for a custom kernel");
            for (const auto& entry : split(*offsets, ';')) {
                std::istringstream es(entry);
                Offset o{};
                if (!(es >> o.dx >> o.dy >> o.weight))
                    config_fail("kernel.offsets", "expected 'dx dy weight', got '" + entry + "'");
                c.kernel_offsets.push_back(o);
            }
            c.kernel_label = "custom";
        } else if (*v != "nearest-neighbor") {
            config_fail("kernel.type", "expected nearest-neighbor or custom");
        }
    }

    if (auto v = get("potential.name")) {
        if (*v != "quadratic" && *v != "anharmonic")
            config_fail("potential.name", "expected quadratic or anharmonic");
        c.potential = *v;
    }
    if (auto v = get("potential.beta"))
        c.beta = to_double("potential.beta", *v);
    if (auto v = get("potential.c"))
        c.declared_curvature = to_double("potential.c", *v);

    if (auto v = get("disorder.distributions")) {
        c.distributions.clear();
        for (const auto& s : split(*v, ','))
            c.distributions.push_back(parse_distribution(s));
        if (c.distributions.empty())
            config_fail("disorder.distributions", "at least one distribution required");
    }
    if (auto v = get("disorder.draws")) {
        const long long d = to_integer("disorder.draws", *v);
        if (d < 1)
            config_fail("disorder.draws", "at least one draw required");
        c.draws = static_cast<int>(d);
    }
    if (auto v = get("disorder.seed"))
        c.seed = to_u64("disorder.seed", *v);

    if (auto v = get("chain.sweeps"))
        c.chain.sweeps = to_u64("chain.sweeps", *v);
    if (auto v = get("chain.burn_in"))
        c.chain.burn_in = to_u64("chain.burn_in", *v);
    if (auto v = get("chain.proposal_width"))
        c.chain.proposal_width = to_double("chain.proposal_width", *v);
    if (auto v = get("chain.thinning"))
        c.chain.thinning = to_u64("chain.thinning", *v);
    try {
        c.chain.validate();
    } catch (const Error& e) {
        config_fail("chain", e.what());
    }

    if (auto v = get("oracle.cutoff"))
        c.quadrature.cutoff = to_double("oracle.cutoff", *v);
    if (auto v = get("oracle.points"))
        c.quadrature.points_per_axis = static_cast<int>(to_integer("oracle.points", *v));
    if (auto v = get("oracle.bins"))
        c.bins = static_cast<int>(to_integer("oracle.bins", *v));
    if (auto v = get("oracle.range"))
        c.bin_range = to_double("oracle.range", *v);
    try {
        c.quadrature.validate();
    } catch (const Error& e) {
        config_fail("oracle", e.what());
    }
    if (c.bins < 1 || !(c.bin_range > 0.0))
        config_fail("oracle.bins", "bins must be >= 1 and range > 0");

    if (auto v = get("testfn.radii")) {
        c.radii.clear();
        for (const auto& s : split(*v, ','))
            c.radii.push_back(static_cast<int>(to_integer("testfn.radii", s)));
    }

    // Fail on an impossible kernel or ceiling now rather than mid-run.
    try {
        (void)c.make_kernel();
    } catch (const Error& e) {
        config_fail("kernel", e.what());
    }
    (void)c.make_potential();

    c.canonical_text = canonical(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::config_error, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_hash(const ExperimentConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.canonical_text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Field draw_disorder(const BoxGeometry& geom, const ExperimentConfig& config, int k)
{
    const auto& dist = config.distributions[static_cast<std::size_t>(k) % config.distributions.size()];
    Rng rng(split_seed(config.seed, stream_disorder, static_cast<std::uint64_t>(k)));
    Field eta(geom);
    for (std::size_t i : geom.interior_sites()) {
        switch (dist.type) {
        case DisorderDistribution::Type::zero:
            break;
        case DisorderDistribution::Type::gaussian:
            eta[i] = dist.scale * rng.normal();
            break;
        case DisorderDistribution::Type::rademacher:
            eta[i] = (rng.next() >> 63) ? dist.scale : -dist.scale;
            break;
        }
    }
    return eta;
}

} // namespace ifl
