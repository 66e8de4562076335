#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {

/**
 * Square box Λ_N = {-N..N}² padded by a collar of width `range`.
 *
 * Sites are indexed row-major over the padded square of side 2(N+range)+1.
 * Every kernel step from an interior site lands either in the interior or
 * in the collar, so a single padded array holds a configuration together
 * with its boundary condition.
 */
class BoxGeometry {
public:
    BoxGeometry(int half_side, int range);

    int half_side() const noexcept { return n_; }
    int range() const noexcept { return range_; }
    int padded_side() const noexcept { return side_; }
    std::size_t padded_size() const noexcept { return static_cast<std::size_t>(side_) * side_; }
    std::size_t interior_count() const noexcept
    {
        return static_cast<std::size_t>(2 * n_ + 1) * (2 * n_ + 1);
    }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y + n_ + range_) * side_ + (x + n_ + range_);
    }
    int x_of(std::size_t idx) const noexcept { return static_cast<int>(idx % side_) - n_ - range_; }
    int y_of(std::size_t idx) const noexcept { return static_cast<int>(idx / side_) - n_ - range_; }

    bool in_padded(int x, int y) const noexcept;
    bool is_interior(int x, int y) const noexcept { return std::abs(x) <= n_ && std::abs(y) <= n_; }
    bool is_interior(std::size_t idx) const noexcept { return is_interior(x_of(idx), y_of(idx)); }

    std::size_t origin() const noexcept { return index(0, 0); }

    /// Interior indices in row-major order.
    std::vector<std::size_t> interior_sites() const;
    /// Collar indices in row-major order.
    std::vector<std::size_t> collar_sites() const;

    friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;

private:
    int n_;
    int range_;
    int side_;
};

struct Offset {
    int dx;
    int dy;
    double weight;
};

/// Symmetric, normalized, finite-range, irreducible step distribution p(·) on Z².
class WalkKernel {
public:
    /// Checks every invariant; throws Error with the violated one.
    static WalkKernel validate(std::vector<Offset> offsets);
    static WalkKernel nearest_neighbor();

    const std::vector<Offset>& offsets() const noexcept { return offsets_; }
    int range() const noexcept { return range_; }
    /// p(dx, dy); zero when the offset is not in the support.
    double weight(int dx, int dy) const noexcept;

    /// Index offsets of the support inside the padded array of `geom`.
    std::vector<std::ptrdiff_t> strides(const BoxGeometry& geom) const;

private:
    explicit WalkKernel(std::vector<Offset> offsets, int range)
        : offsets_(std::move(offsets)), range_(range)
    {
    }

    std::vector<Offset> offsets_;
    int range_;
};

/// Index of the lattice generated by the offsets (1 means all of Z²; 0 means rank < 2).
long long generated_lattice_index(std::span<const Offset> offsets);

/**
 * Even pair potential V with a declared curvature ceiling c ≥ sup V''.
 *
 * Built-ins are dispatched without indirection because the sampler evaluates
 * V in its innermost loop.
 */
class Potential {
public:
    enum class Kind { quadratic, anharmonic, custom };
    using Fn = std::function<double(double)>;

    /// V(t) = t²/2, c = 1.
    static Potential quadratic();
    /// V(t) = t²/2 + β(1 - cos t), c = 1 + |β| (non-convex once β > 1).
    static Potential anharmonic(double beta);
    static Potential custom(std::string name, Fn value, Fn derivative, double curvature_ceiling,
                            double growth_exponent);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    double beta() const noexcept { return beta_; }
    double curvature_ceiling() const noexcept { return ceiling_; }
    double growth_exponent() const noexcept { return growth_; }

    /// Same potential with a different declared ceiling (must be positive).
    Potential with_curvature_ceiling(double c) const;

    double value(double t) const
    {
        switch (kind_) {
        case Kind::quadratic:
            return 0.5 * t * t;
        case Kind::anharmonic:
            return 0.5 * t * t + beta_ * (1.0 - std::cos(t));
        case Kind::custom:
            break;
        }
        return value_(t);
    }

    double derivative(double t) const
    {
        switch (kind_) {
        case Kind::quadratic:
            return t;
        case Kind::anharmonic:
            return t + beta_ * std::sin(t);
        case Kind::custom:
            break;
        }
        return derivative_(t);
    }

private:
    Potential() = default;

    Kind kind_ = Kind::quadratic;
    std::string name_;
    double beta_ = 0.0;
    double ceiling_ = 1.0;
    double growth_ = 2.0;
    Fn value_;
    Fn derivative_;
};

struct PotentialCheck {
    bool even = true;
    bool curvature_ok = true;
    bool zero_slope = true;
    double max_asymmetry = 0.0;
    double max_curvature = 0.0; // largest finite-difference V'' seen
    double slope_at_zero = 0.0;

    bool ok() const noexcept { return even && curvature_ok && zero_slope; }
};

/// Spot-checks evenness, V'' ≤ c, and V'(0) = 0 on a grid over [-50, 50].
PotentialCheck check_potential(const Potential& potential);

/// One real value per padded site of a geometry.
class Field {
public:
    explicit Field(const BoxGeometry& geom, double fill = 0.0)
        : geom_(geom), values_(geom.padded_size(), fill)
    {
    }

    const BoxGeometry& geometry() const noexcept { return geom_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(int x, int y) { return values_[geom_.index(x, y)]; }
    double at(int x, int y) const { return values_[geom_.index(x, y)]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const Field&, const Field&) = default;

private:
    BoxGeometry geom_;
    std::vector<double> values_;
};

/// Throws DimensionMismatch unless every field lives on `geom`.
void require_geometry(const BoxGeometry& geom, std::initializer_list<const Field*> fields);

/**
 * H(φ) = ½Σ_{i,j∈Λ} p(i-j)V(φᵢ-φⱼ) + Σ_{i∈Λ,j∉Λ} p(i-j)V(φᵢ-bcⱼ) - Σ_{i∈Λ} ηᵢφᵢ,
 * so that the Gibbs weight is exp(-H). Only interior values of φ and η and
 * collar values of bc are read.
 */
double total_energy(const Field& phi, const Field& eta, const Field& bc, const WalkKernel& kernel,
                    const Potential& potential);

/// H(φ with φ_site = new_value) - H(φ), touching only the kernel neighborhood of `site`.
double local_energy_delta(const Field& phi, std::size_t site, double new_value, const Field& eta,
                          const Field& bc, const WalkKernel& kernel, const Potential& potential);

Field flip_disorder(const Field& eta);

/// Interior from `phi`, collar from `bc`; the layout the sampler updates in place.
Field merge_with_boundary(const Field& phi, const Field& bc);

/// Geometry, kernel, potential and the frozen fields of one quenched Gibbs measure.
struct GibbsModel {
    BoxGeometry geometry;
    WalkKernel kernel;
    Potential potential;
    Field eta;
    Field bc;

    GibbsModel(BoxGeometry geom, WalkKernel k, Potential v);
    GibbsModel(BoxGeometry geom, WalkKernel k, Potential v, Field eta_, Field bc_);

    /// Same model with η replaced by -η.
    GibbsModel flipped() const;
};

} // namespace ifl
