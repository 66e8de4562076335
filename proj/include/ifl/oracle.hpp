#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ifl/lattice.hpp"

namespace ifl {

struct QuadratureSpec {
    double cutoff = 12.0;        // each φᵢ integrated over [-cutoff, cutoff]
    int points_per_axis = 64;    // Gauss-Legendre nodes per site

    void validate() const;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Gauss-Legendre on consecutive panels of [a, b], each no wider than `max_panel`.
QuadratureRule composite_gauss_legendre(double a, double b, double max_panel, int per_panel);

/**
 * Deterministic tensor-product quadrature of a quenched Gibbs measure on a box
 * with at most nine interior sites.
 *
 * The integrand factorizes over single sites and kernel pairs, so the tensor
 * sum is evaluated by summing sites out one at a time (smallest resulting
 * table first) instead of enumerating the full grid. The result is the same
 * tensor Gauss-Legendre sum, at a cost set by the largest intermediate table.
 */
class QuadratureOracle {
public:
    static constexpr std::size_t max_sites = 9;

    /// With `validate`, compares Z against doubled resolution and doubled cutoff
    /// and throws CutoffInsufficient when either moves it by ≥ 1e-8 relative.
    QuadratureOracle(GibbsModel model, QuadratureSpec spec = {}, bool validate = true);

    const GibbsModel& model() const noexcept { return model_; }
    const QuadratureSpec& spec() const noexcept { return spec_; }

    /// Z = ∫ e^{-H} dφ_Λ.
    double partition() const;
    double log_partition() const;

    /// Probability of φ₀ in each [edges[k], edges[k+1]); infinite edges are clipped to the cutoff.
    std::vector<double> marginal_phi0(std::span<const double> edges) const;

    /// P(|φ₀| ≥ R).
    double tail(double radius) const;

    /// ∫ μ(dφ) [H(φ + φ̄) - H(φ)], the relative entropy of the φ̄-shifted measure.
    double relative_entropy(const Field& phibar) const;

private:
    std::vector<double> interval_masses(const std::vector<std::pair<double, double>>& intervals) const;

    GibbsModel model_;
    QuadratureSpec spec_;
    double log_z_ = 0.0;
};

} // namespace ifl
