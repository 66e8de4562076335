#include "ifl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ifl {

void ChainConfig::validate() const
{
    if (sweeps == 0)
        throw Error(Errc::invalid_argument, "chain needs at least one sweep");
    if (burn_in == 0 || burn_in >= sweeps)
        throw Error(Errc::invalid_argument, "burn_in must satisfy 0 < burn_in < sweeps");
    if (!(proposal_width > 0.0) || !std::isfinite(proposal_width))
        throw Error(Errc::invalid_argument, "proposal width must be positive");
    if (thinning == 0)
        throw Error(Errc::invalid_argument, "thinning must be positive");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
        throw Error(Errc::invalid_argument, "target acceptance must lie in (0, 1)");
}

LocalEnergy::LocalEnergy(const GibbsModel& model)
    : model_(&model), potential_(&model.potential), eta_(&model.eta),
      strides_(model.kernel.strides(model.geometry))
{
    for (const auto& o : model.kernel.offsets())
        weights_.push_back(o.weight);
}

double acceptance_probability(double delta_energy)
{
    if (delta_energy <= 0.0)
        return 1.0;
    if (delta_energy > 700.0)
        return 0.0;
    return std::exp(-delta_energy);
}

bool metropolis_step(std::vector<double>& state, std::size_t site, double width,
                     const LocalEnergy& energy, Rng& rng)
{
    const double proposal = state[site] + rng.uniform(-width, width);
    const double dh = energy.delta(state, site, proposal);
    bool accept;
    if (dh <= 0.0)
        accept = true;
    else if (dh > 700.0)
        accept = false;
    else
        accept = rng.uniform() < std::exp(-dh);
    if (accept)
        state[site] = proposal;
    return accept;
}

ChainResult run_chain(const GibbsModel& model, const ChainConfig& config)
{
    config.validate();
    const BoxGeometry& geom = model.geometry;
    const LocalEnergy energy(model);
    Rng rng(config.seed);

    std::vector<double> state(model.bc.values().begin(), model.bc.values().end());
    std::vector<std::size_t> order = geom.interior_sites();
    for (std::size_t i : order)
        state[i] = 0.0;
    const std::size_t origin = geom.origin();

    ChainResult out;
    out.seed = config.seed;
    out.phi0.reserve((config.sweeps - config.burn_in) / config.thinning + 1);

    double width = config.proposal_width;
    const std::uint64_t tune_window = 20;
    std::uint64_t window_accepts = 0;
    std::uint64_t window_tries = 0;
    std::uint64_t accepts = 0;
    std::uint64_t tries = 0;
    std::uint64_t stored = 0;

    for (std::uint64_t sweep = 0; sweep < config.sweeps; ++sweep) {
        // Fisher-Yates with our own draws keeps the order reproducible across standard libraries.
        for (std::size_t k = order.size(); k > 1; --k)
            std::swap(order[k - 1], order[rng.below(k)]);

        std::uint64_t sweep_accepts = 0;
        for (std::size_t site : order)
            sweep_accepts += metropolis_step(state, site, width, energy, rng) ? 1 : 0;

        if (sweep < config.burn_in) {
            if (config.tune_width) {
                window_accepts += sweep_accepts;
                window_tries += order.size();
                if (window_tries >= tune_window * order.size()) {
                    const double rate = static_cast<double>(window_accepts) / static_cast<double>(window_tries);
                    width *= std::exp(std::clamp(rate - config.target_acceptance, -0.5, 0.5));
                    window_accepts = 0;
                    window_tries = 0;
                }
            }
            continue;
        }

        accepts += sweep_accepts;
        tries += order.size();
        if ((sweep - config.burn_in) % config.thinning == 0) {
            out.phi0.push_back(state[origin]);
            if (config.snapshot_every != 0 && stored % config.snapshot_every == 0) {
                Field snap(geom);
                std::copy(state.begin(), state.end(), snap.values().begin());
                out.snapshots.push_back(std::move(snap));
            }
            ++stored;
        }
    }

    out.acceptance_rate = tries ? static_cast<double>(accepts) / static_cast<double>(tries) : 0.0;
    out.proposal_width = width;
    return out;
}

AutocorrelationTime autocorrelation_time(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 100)
        throw Error(Errc::series_too_short, "autocorrelation time needs at least 100 samples");

    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t t = 0; t < n; ++t)
        centered[t] = series[t] - mean;

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t)
            s += centered[t] * centered[t + lag];
        return s / static_cast<double>(n);
    };

    AutocorrelationTime out;
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) {
        out.tau = static_cast<double>(n) / 2.0;
        out.window = 0;
        out.flagged = true;
        return out;
    }

    const std::size_t cap = n / 2;
    double tau = 0.5;
    std::size_t w = 1;
    for (; w <= cap; ++w) {
        tau += autocov(w) / c0;
        if (static_cast<double>(w) >= 5.0 * tau)
            break;
    }
    if (w > cap) {
        out.flagged = true;
        w = cap;
    }
    out.tau = std::max(0.5, tau);
    out.window = w;
    return out;
}

Interval wilson_interval(double p_hat, double n, double z)
{
    if (!(n > 0.0))
        return {0.0, 1.0};
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p_hat + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n));
    return {std::clamp(std::min(center - half, p_hat), 0.0, 1.0),
            std::clamp(std::max(center + half, p_hat), 0.0, 1.0)};
}

namespace {

TailEstimate estimate_from_indicator(std::span<const double> series, const std::vector<double>& hit)
{
    TailEstimate out;
    const std::size_t n = hit.size();
    out.n_samples = n;
    out.p_hat = std::accumulate(hit.begin(), hit.end(), 0.0) / static_cast<double>(n);

    if (n < 100) {
        out.tau_int = 0.5;
        out.tau_flagged = true;
    } else {
        AutocorrelationTime tau = autocorrelation_time(hit);
        // A constant indicator carries no correlation information; fall back to φ₀ itself.
        if (tau.flagged && tau.window == 0) {
            tau = autocorrelation_time(series);
            tau.flagged = true;
        }
        out.tau_int = tau.tau;
        out.tau_flagged = tau.flagged;
    }
    out.n_effective = std::clamp(static_cast<double>(n) / (2.0 * out.tau_int), 1.0, static_cast<double>(n));
    const Interval ci = wilson_interval(out.p_hat, out.n_effective);
    out.ci_low = ci.low;
    out.ci_high = ci.high;
    return out;
}

} // namespace

TailEstimate tail_estimate(std::span<const double> series, double radius)
{
    if (series.empty())
        throw Error(Errc::empty_series, "tail estimate of an empty series");
    std::vector<double> hit(series.size());
    for (std::size_t t = 0; t < series.size(); ++t)
        hit[t] = std::abs(series[t]) >= radius ? 1.0 : 0.0;
    return estimate_from_indicator(series, hit);
}

TailEstimate upper_tail_estimate(std::span<const double> series, double radius)
{
    if (series.empty())
        throw Error(Errc::empty_series, "tail estimate of an empty series");
    std::vector<double> hit(series.size());
    for (std::size_t t = 0; t < series.size(); ++t)
        hit[t] = series[t] >= radius ? 1.0 : 0.0;
    return estimate_from_indicator(series, hit);
}

std::vector<double> histogram(std::span<const double> series, std::span<const double> edges)
{
    if (edges.size() < 2)
        throw Error(Errc::invalid_argument, "histogram needs at least two edges");
    if (!std::is_sorted(edges.begin(), edges.end()))
        throw Error(Errc::invalid_argument, "histogram edges must be sorted");
    std::vector<double> counts(edges.size() - 1, 0.0);
    for (double v : series) {
        if (v < edges.front() || v >= edges.back())
            continue;
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
    }
    if (!series.empty())
        for (double& c : counts)
            c /= static_cast<double>(series.size());
    return counts;
}

double total_variation(std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size())
        throw Error(Errc::dimension_mismatch, "distributions over different bins");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        s += std::abs(p[k] - q[k]);
    return 0.5 * s;
}

} // namespace ifl
