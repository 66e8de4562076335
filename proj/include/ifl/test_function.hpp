#pragma once

#include "ifl/gaussian.hpp"
#include "ifl/lattice.hpp"

namespace ifl {

/**
 * Entropy budget of a shift profile φ̄ vanishing off Λ.
 *
 * interior and boundary are the raw Dirichlet sums
 *   interior = ½ Σ_{i,j∈Λ} p(i-j)(φ̄ᵢ-φ̄ⱼ)²,   boundary = Σ_{i∈Λ,j∉Λ} p(i-j)φ̄ᵢ²,
 * bound = c·(interior + boundary) caps the relative entropy of the shifted
 * Gibbs measure uniformly in the disorder, and
 * tail_floor = ½·exp(-2(bound + 1/e)) is the resulting lower bound on P(|φ₀| ≥ φ̄₀).
 */
struct EntropyBudget {
    double interior = 0.0;
    double boundary = 0.0;
    double bound = 0.0;
    double tail_floor = 0.0;
    double curvature = 0.0;
    double amplitude = 0.0; // φ̄₀
};

/// Pᵢ[walk hits 0 before leaving Λ]: harmonic on Λ∖{0}, 1 at 0, 0 on the collar.
Field hitting_probability(const BoxGeometry& geom, const WalkKernel& kernel,
                          SolveStats* stats = nullptr);

/// Largest |h(i) - Σⱼ p(i-j)h(j)| over Λ∖{0}.
double harmonicity_residual(const Field& h, const WalkKernel& kernel);

Field test_profile(const Field& h, double amplitude);

struct DirichletSums {
    double interior = 0.0;
    double boundary = 0.0;
};

DirichletSums dirichlet_form(const Field& phibar, const WalkKernel& kernel);

/// Monotone map from the entropy bound to the probability floor.
double tail_floor_from_bound(double bound);

EntropyBudget entropy_bound(const Field& phibar, const WalkKernel& kernel, double curvature);

/// Budget of the profile R·h with R = T√(ln N). Requires N ≥ 2 and T > 0.
EntropyBudget theorem_floor(const BoxGeometry& geom, const WalkKernel& kernel, double curvature,
                            double T);

/// Same, reusing a precomputed hitting probability.
EntropyBudget theorem_floor(const Field& h, const WalkKernel& kernel, double curvature, double T);

/// R = T√(ln N), natural logarithm.
double theorem_radius(int half_side, double T);

} // namespace ifl
