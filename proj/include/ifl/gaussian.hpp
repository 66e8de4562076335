#pragma once

#include <cstddef>
#include <vector>

#include "ifl/lattice.hpp"

namespace ifl {

/**
 * Dirichlet precision operator of the quadratic model,
 * (Qφ)ᵢ = φᵢ - Σⱼ p(i-j)φⱼ for i ∈ Λ with φ ≡ 0 off Λ.
 *
 * For V(t) = t²/2 the Hamiltonian is ½⟨φ,Qφ⟩ - ⟨η,φ⟩ (zero boundary), so Q⁻¹
 * is the covariance and Q⁻¹η the mean of the quenched Gaussian measure.
 */
class PrecisionOperator {
public:
    PrecisionOperator(const BoxGeometry& geom, const WalkKernel& kernel);

    const BoxGeometry& geometry() const noexcept { return geom_; }
    const WalkKernel& kernel() const noexcept { return kernel_; }
    const std::vector<std::size_t>& interior() const noexcept { return interior_; }

    /// Qφ on the interior, zero on the collar. Collar values of φ are ignored.
    Field apply(const Field& phi) const;
    /// ⟨φ, Qφ⟩ over the interior.
    double quadratic_form(const Field& phi) const;

    /// y = Q_FF x restricted to the sites with mask[i] != 0; x must vanish elsewhere.
    void apply_masked(const std::vector<double>& x, const std::vector<char>& mask,
                      const std::vector<std::size_t>& sites, std::vector<double>& y) const;

private:
    BoxGeometry geom_;
    WalkKernel kernel_;
    std::vector<std::ptrdiff_t> strides_;
    std::vector<std::size_t> interior_;
};

struct SolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/**
 * Jacobi-preconditioned conjugate gradient for Q_FF x = b_F, where F is the
 * set of interior sites with free[i] != 0. Entries of x outside F are zero.
 * Throws NoConvergence after 10·|Λ| iterations.
 */
Field solve_precision(const PrecisionOperator& op, const Field& rhs, const std::vector<char>& free,
                      double tolerance = 1e-10, SolveStats* stats = nullptr);

/// G_{·,site} = Q⁻¹ e_site.
Field solve_green_column(const PrecisionOperator& op, std::size_t site, SolveStats* stats = nullptr);

/// Q⁻¹(η + influx) with influxᵢ = Σ_{j∉Λ} p(i-j) bcⱼ.
Field quenched_mean(const PrecisionOperator& op, const Field& eta, const Field& bc);

/// σ₀² = Σ_y G²_{0,y}: the variance of the quenched mean at 0 under i.i.d. unit disorder.
double groundstate_variance(const PrecisionOperator& op);

/// Φ̄(x) = P(Z ≥ x) for a standard normal Z.
double gaussian_upper_tail(double x);

/// P(|φ₀| ≥ R) for the quadratic model: φ₀ ~ Normal(m₀, G₀₀).
double exact_tail(const PrecisionOperator& op, const Field& eta, const Field& bc, double radius);

/// Relative entropy of the measure shifted by φ̄ w.r.t. the unshifted one: ½⟨φ̄,Qφ̄⟩.
double exact_shift_kl(const PrecisionOperator& op, const Field& phibar);

} // namespace ifl
