#include "ifl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace ifl {

const char* to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::ok: return "ok";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::asymmetric_kernel: return "asymmetric kernel";
    case Errc::not_normalized: return "kernel not normalized";
    case Errc::self_jump_present: return "self jump present";
    case Errc::reducible: return "reducible kernel";
    case Errc::site_outside_interior: return "site outside interior";
    case Errc::no_convergence: return "no convergence";
    case Errc::nonpositive_curvature: return "nonpositive curvature ceiling";
    case Errc::lattice_too_large: return "lattice too large";
    case Errc::cutoff_insufficient: return "quadrature cutoff insufficient";
    case Errc::empty_series: return "empty series";
    case Errc::series_too_short: return "series too short";
    case Errc::config_error: return "config error";
    case Errc::io_error: return "i/o error";
    case Errc::internal: return "internal error";
    }
    return "unknown";
}

BoxGeometry::BoxGeometry(int half_side, int range)
    : n_(half_side), range_(range), side_(2 * (half_side + range) + 1)
{
    if (half_side < 0)
        throw Error(Errc::invalid_argument, "box half-side must be >= 0");
    if (range < 1)
        throw Error(Errc::invalid_argument, "kernel range must be >= 1");
}

bool BoxGeometry::in_padded(int x, int y) const noexcept
{
    const int m = n_ + range_;
    return std::abs(x) <= m && std::abs(y) <= m;
}

std::vector<std::size_t> BoxGeometry::interior_sites() const
{
    std::vector<std::size_t> out;
    out.reserve(interior_count());
    for (int y = -n_; y <= n_; ++y)
        for (int x = -n_; x <= n_; ++x)
            out.push_back(index(x, y));
    return out;
}

std::vector<std::size_t> BoxGeometry::collar_sites() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < padded_size(); ++i)
        if (!is_interior(i))
            out.push_back(i);
    return out;
}

long long generated_lattice_index(std::span<const Offset> offsets)
{
    // For a rank-2 integer lattice the index in Z² is the gcd of all 2x2 minors.
    long long g = 0;
    for (std::size_t a = 0; a < offsets.size(); ++a)
        for (std::size_t b = a + 1; b < offsets.size(); ++b) {
            const long long det = static_cast<long long>(offsets[a].dx) * offsets[b].dy -
                                  static_cast<long long>(offsets[a].dy) * offsets[b].dx;
            g = std::gcd(g, std::llabs(det));
        }
    return g;
}

WalkKernel WalkKernel::validate(std::vector<Offset> offsets)
{
    if (offsets.empty())
        throw Error(Errc::invalid_argument, "kernel has no offsets");

    std::map<std::pair<int, int>, double> merged;
    for (const auto& o : offsets) {
        if (o.dx == 0 && o.dy == 0)
            throw Error(Errc::self_jump_present, "kernel contains the zero offset");
        if (!(o.weight > 0.0) || !std::isfinite(o.weight))
            throw Error(Errc::invalid_argument, "kernel weights must be positive and finite");
        merged[{o.dx, o.dy}] += o.weight;
    }

    double total = 0.0;
    int range = 0;
    for (const auto& [v, w] : merged) {
        auto mirror = merged.find({-v.first, -v.second});
        if (mirror == merged.end() || std::abs(mirror->second - w) > 1e-12)
            throw Error(Errc::asymmetric_kernel, "kernel weight differs from its mirror at (" +
                                                     std::to_string(v.first) + "," +
                                                     std::to_string(v.second) + ")");
        total += w;
        range = std::max({range, std::abs(v.first), std::abs(v.second)});
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw Error(Errc::not_normalized, "kernel weights sum to " + std::to_string(total));

    std::vector<Offset> canonical;
    canonical.reserve(merged.size());
    for (const auto& [v, w] : merged)
        canonical.push_back({v.first, v.second, w});

    if (generated_lattice_index(canonical) != 1)
        throw Error(Errc::reducible, "kernel offsets do not generate Z^2");

    return WalkKernel(std::move(canonical), range);
}

WalkKernel WalkKernel::nearest_neighbor()
{
    return validate({{1, 0, 0.25}, {-1, 0, 0.25}, {0, 1, 0.25}, {0, -1, 0.25}});
}

double WalkKernel::weight(int dx, int dy) const noexcept
{
    for (const auto& o : offsets_)
        if (o.dx == dx && o.dy == dy)
            return o.weight;
    return 0.0;
}

std::vector<std::ptrdiff_t> WalkKernel::strides(const BoxGeometry& geom) const
{
    std::vector<std::ptrdiff_t> out;
    out.reserve(offsets_.size());
    for (const auto& o : offsets_)
        out.push_back(static_cast<std::ptrdiff_t>(o.dy) * geom.padded_side() + o.dx);
    return out;
}

Potential Potential::quadratic()
{
    Potential p;
    p.kind_ = Kind::quadratic;
    p.name_ = "quadratic";
    p.ceiling_ = 1.0;
    p.growth_ = 2.0;
    return p;
}

Potential Potential::anharmonic(double beta)
{
    if (!std::isfinite(beta))
        throw Error(Errc::invalid_argument, "anharmonic beta must be finite");
    Potential p;
    p.kind_ = Kind::anharmonic;
    p.name_ = "anharmonic";
    p.beta_ = beta;
    // V'' = 1 + β cos t
    p.ceiling_ = 1.0 + std::abs(beta);
    p.growth_ = 2.0;
    return p;
}

Potential Potential::custom(std::string name, Fn value, Fn derivative, double curvature_ceiling,
                            double growth_exponent)
{
    if (!value || !derivative)
        throw Error(Errc::invalid_argument, "custom potential needs V and V'");
    if (!(curvature_ceiling > 0.0))
        throw Error(Errc::nonpositive_curvature, "curvature ceiling must be positive");
    if (!(growth_exponent > 1.0))
        throw Error(Errc::invalid_argument, "growth exponent must exceed 1");
    Potential p;
    p.kind_ = Kind::custom;
    p.name_ = std::move(name);
    p.ceiling_ = curvature_ceiling;
    p.growth_ = growth_exponent;
    p.value_ = std::move(value);
    p.derivative_ = std::move(derivative);
    return p;
}

Potential Potential::with_curvature_ceiling(double c) const
{
    if (!(c > 0.0))
        throw Error(Errc::nonpositive_curvature, "curvature ceiling must be positive");
    Potential p = *this;
    p.ceiling_ = c;
    return p;
}

PotentialCheck check_potential(const Potential& v)
{
    PotentialCheck out;
    const double h = 1e-3;
    const double c = v.curvature_ceiling();
    for (int k = -5000; k <= 5000; ++k) {
        const double t = 0.01 * k;
        const double asym = std::abs(v.value(t) - v.value(-t));
        out.max_asymmetry = std::max(out.max_asymmetry, asym);
        const double fd = (v.value(t + h) - 2.0 * v.value(t) + v.value(t - h)) / (h * h);
        out.max_curvature = std::max(out.max_curvature, fd);
    }
    out.even = out.max_asymmetry <= 1e-10;
    out.curvature_ok = out.max_curvature <= c + 1e-6;
    out.slope_at_zero = v.derivative(0.0);
    out.zero_slope = std::abs(out.slope_at_zero) <= 1e-12;
    return out;
}

void require_geometry(const BoxGeometry& geom, std::initializer_list<const Field*> fields)
{
    for (const Field* f : fields)
        if (!(f->geometry() == geom))
            throw Error(Errc::dimension_mismatch, "field built for a different geometry");
}

double total_energy(const Field& phi, const Field& eta, const Field& bc, const WalkKernel& kernel,
                    const Potential& potential)
{
    const BoxGeometry& geom = phi.geometry();
    require_geometry(geom, {&eta, &bc});
    if (kernel.range() > geom.range())
        throw Error(Errc::dimension_mismatch, "kernel range exceeds the geometry collar");

    const auto steps = kernel.strides(geom);
    const auto& offsets = kernel.offsets();
    double pair_sum = 0.0;
    double collar_sum = 0.0;
    double field_sum = 0.0;
    for (std::size_t i : geom.interior_sites()) {
        const double phi_i = phi[i];
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + steps[k]);
            if (geom.is_interior(j))
                pair_sum += offsets[k].weight * potential.value(phi_i - phi[j]);
            else
                collar_sum += offsets[k].weight * potential.value(phi_i - bc[j]);
        }
        field_sum += eta[i] * phi_i;
    }
    return 0.5 * pair_sum + collar_sum - field_sum;
}

double local_energy_delta(const Field& phi, std::size_t site, double new_value, const Field& eta,
                          const Field& bc, const WalkKernel& kernel, const Potential& potential)
{
    const BoxGeometry& geom = phi.geometry();
    require_geometry(geom, {&eta, &bc});
    if (site >= geom.padded_size() || !geom.is_interior(site))
        throw Error(Errc::site_outside_interior, "site " + std::to_string(site) + " is not interior");

    const double old_value = phi[site];
    if (new_value == old_value)
        return 0.0;
    const int x = geom.x_of(site);
    const int y = geom.y_of(site);
    double delta = 0.0;
    for (const auto& o : kernel.offsets()) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        const double other = geom.is_interior(nx, ny) ? phi.at(nx, ny) : bc.at(nx, ny);
        delta += o.weight * (potential.value(new_value - other) - potential.value(old_value - other));
    }
    return delta - eta[site] * (new_value - old_value);
}

Field flip_disorder(const Field& eta)
{
    Field out(eta.geometry());
    for (std::size_t i = 0; i < eta.size(); ++i)
        out[i] = -eta[i];
    return out;
}

Field merge_with_boundary(const Field& phi, const Field& bc)
{
    require_geometry(phi.geometry(), {&bc});
    Field out = bc;
    for (std::size_t i : phi.geometry().interior_sites())
        out[i] = phi[i];
    return out;
}

GibbsModel::GibbsModel(BoxGeometry geom, WalkKernel k, Potential v)
    : GibbsModel(geom, std::move(k), std::move(v), Field(geom), Field(geom))
{
}

GibbsModel::GibbsModel(BoxGeometry geom, WalkKernel k, Potential v, Field eta_, Field bc_)
    : geometry(geom), kernel(std::move(k)), potential(std::move(v)), eta(std::move(eta_)),
      bc(std::move(bc_))
{
    if (kernel.range() > geometry.range())
        throw Error(Errc::dimension_mismatch, "kernel range exceeds the geometry collar");
    require_geometry(geometry, {&eta, &bc});
}

GibbsModel GibbsModel::flipped() const
{
    return GibbsModel(geometry, kernel, potential, flip_disorder(eta), bc);
}

} // namespace ifl
