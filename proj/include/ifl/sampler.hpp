#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ifl/lattice.hpp"
#include "ifl/rng.hpp"

namespace ifl {

struct ChainConfig {
    std::uint64_t sweeps = 10000;  // total, burn-in included
    std::uint64_t burn_in = 1000;
    double proposal_width = 1.0;   // half-width of the uniform proposal
    std::uint64_t seed = 0;
    std::uint64_t thinning = 1;
    bool tune_width = true;        // adapt during burn-in towards target_acceptance, then freeze
    double target_acceptance = 0.4;
    std::uint64_t snapshot_every = 0; // record a full field every k-th stored sample; 0 = never

    void validate() const;
};

/// Single-site energy differences on a padded state whose collar holds the boundary condition.
class LocalEnergy {
public:
    explicit LocalEnergy(const GibbsModel& model);

    double delta(std::span<const double> state, std::size_t site, double new_value) const
    {
        const double old_value = state[site];
        const Potential& v = *potential_;
        double d = 0.0;
        for (std::size_t k = 0; k < strides_.size(); ++k) {
            const double other = state[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(site) + strides_[k])];
            d += weights_[k] * (v.value(new_value - other) - v.value(old_value - other));
        }
        return d - (*eta_)[site] * (new_value - old_value);
    }

    const GibbsModel& model() const noexcept { return *model_; }

private:
    const GibbsModel* model_;
    const Potential* potential_;
    const Field* eta_;
    std::vector<std::ptrdiff_t> strides_;
    std::vector<double> weights_;
};

/// min(1, e^{-ΔH}); ΔH > 700 is an exact reject and ΔH < -700 an exact accept.
double acceptance_probability(double delta_energy);

/**
 * One Metropolis update at an interior site of a padded state. Proposes
 * φ + U(-width, width) and accepts with probability min(1, e^{-ΔH}).
 */
bool metropolis_step(std::vector<double>& state, std::size_t site, double width,
                     const LocalEnergy& energy, Rng& rng);

struct ChainResult {
    std::vector<double> phi0;          // φ₀ after every `thinning`-th post-burn-in sweep
    std::vector<Field> snapshots;
    double acceptance_rate = 0.0;      // post-burn-in
    double proposal_width = 0.0;       // frozen width actually used after burn-in
    std::uint64_t seed = 0;
};

/// Random-permutation sweeps of single-site Metropolis updates, deterministic in `config.seed`.
ChainResult run_chain(const GibbsModel& model, const ChainConfig& config);

struct AutocorrelationTime {
    double tau = 0.5;
    std::size_t window = 0;
    bool flagged = false; // constant series or window hit its cap
};

/// Integrated autocorrelation time with the self-consistent window W ≥ 5·τ(W).
AutocorrelationTime autocorrelation_time(std::span<const double> series);

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for a proportion observed over `n` effective trials.
Interval wilson_interval(double p_hat, double n, double z = 1.959963984540054);

struct TailEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    double n_effective = 0.0;
    double tau_int = 0.5;
    std::size_t n_samples = 0;
    bool tau_flagged = false;
};

/// P(|φ₀| ≥ R) from a φ₀ series, with a 95% Wilson interval on n/(2τ) effective samples.
TailEstimate tail_estimate(std::span<const double> series, double radius);

/// P(φ₀ ≥ R), same machinery.
TailEstimate upper_tail_estimate(std::span<const double> series, double radius);

/// Normalized bin frequencies; edges may be ±infinity. Samples outside all bins are dropped.
std::vector<double> histogram(std::span<const double> series, std::span<const double> edges);

double total_variation(std::span<const double> p, std::span<const double> q);

} // namespace ifl
