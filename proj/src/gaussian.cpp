#include "ifl/gaussian.hpp"

#include <cmath>
#include <numeric>

namespace ifl {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b,
           const std::vector<std::size_t>& sites)
{
    double s = 0.0;
    for (std::size_t i : sites)
        s += a[i] * b[i];
    return s;
}

void require_collar_zero(const Field& f, const char* what)
{
    const BoxGeometry& g = f.geometry();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!g.is_interior(i) && f[i] != 0.0)
            throw Error(Errc::invalid_argument, std::string(what) + " must vanish on the collar");
}

} // namespace

PrecisionOperator::PrecisionOperator(const BoxGeometry& geom, const WalkKernel& kernel)
    : geom_(geom), kernel_(kernel), strides_(kernel.strides(geom)), interior_(geom.interior_sites())
{
    if (kernel.range() > geom.range())
        throw Error(Errc::dimension_mismatch, "kernel range exceeds the geometry collar");
}

void PrecisionOperator::apply_masked(const std::vector<double>& x, const std::vector<char>& mask,
                                     const std::vector<std::size_t>& sites,
                                     std::vector<double>& y) const
{
    const auto& offsets = kernel_.offsets();
    for (std::size_t i : sites) {
        double s = x[i];
        for (std::size_t k = 0; k < strides_.size(); ++k) {
            const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + strides_[k]);
            if (mask[j])
                s -= offsets[k].weight * x[j];
        }
        y[i] = s;
    }
}

Field PrecisionOperator::apply(const Field& phi) const
{
    require_geometry(geom_, {&phi});
    std::vector<char> mask(geom_.padded_size(), 0);
    for (std::size_t i : interior_)
        mask[i] = 1;
    std::vector<double> x(phi.values().begin(), phi.values().end());
    std::vector<double> y(x.size(), 0.0);
    apply_masked(x, mask, interior_, y);
    Field out(geom_);
    for (std::size_t i : interior_)
        out[i] = y[i];
    return out;
}

double PrecisionOperator::quadratic_form(const Field& phi) const
{
    const Field q = apply(phi);
    double s = 0.0;
    for (std::size_t i : interior_)
        s += phi[i] * q[i];
    return s;
}

Field solve_precision(const PrecisionOperator& op, const Field& rhs, const std::vector<char>& free,
                      double tolerance, SolveStats* stats)
{
    const BoxGeometry& geom = op.geometry();
    require_geometry(geom, {&rhs});
    if (free.size() != geom.padded_size())
        throw Error(Errc::dimension_mismatch, "free-site mask has the wrong size");

    std::vector<std::size_t> sites;
    for (std::size_t i : op.interior())
        if (free[i])
            sites.push_back(i);
    std::vector<char> mask(geom.padded_size(), 0);
    for (std::size_t i : sites)
        mask[i] = 1;

    // Jacobi preconditioner; the diagonal is 1 - p(0) = 1 for a kernel without self-jumps,
    // kept explicit so a lazy kernel would still be handled.
    const double diag = 1.0 - op.kernel().weight(0, 0);

    const std::size_t n = geom.padded_size();
    std::vector<double> x(n, 0.0), r(n, 0.0), z(n, 0.0), p(n, 0.0), q(n, 0.0);
    for (std::size_t i : sites)
        r[i] = rhs[i];
    const double b_norm = std::sqrt(dot(r, r, sites));

    Field out(geom);
    if (b_norm == 0.0) {
        if (stats)
            *stats = {0, 0.0};
        return out;
    }

    const std::size_t cap = 10 * geom.interior_count();
    std::size_t it = 0;
    double rel = 1.0;
    // Recurrence residuals drift from the true residual, so each pass restarts
    // from r = b - Qx and the pass only ends once the true residual is small.
    for (int pass = 0; pass < 4 && it < cap; ++pass) {
        if (pass > 0) {
            op.apply_masked(x, mask, sites, q);
            for (std::size_t i : sites)
                r[i] = rhs[i] - q[i];
        }
        rel = std::sqrt(dot(r, r, sites)) / b_norm;
        if (rel <= tolerance)
            break;
        for (std::size_t i : sites)
            z[i] = r[i] / diag;
        for (std::size_t i : sites)
            p[i] = z[i];
        double rz = dot(r, z, sites);
        while (it < cap) {
            op.apply_masked(p, mask, sites, q);
            const double alpha = rz / dot(p, q, sites);
            for (std::size_t i : sites) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            if (std::sqrt(dot(r, r, sites)) / b_norm <= 0.5 * tolerance)
                break;
            for (std::size_t i : sites)
                z[i] = r[i] / diag;
            const double rz_next = dot(r, z, sites);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i : sites)
                p[i] = z[i] + beta * p[i];
        }
    }

    op.apply_masked(x, mask, sites, q);
    double true_sq = 0.0;
    for (std::size_t i : sites)
        true_sq += (rhs[i] - q[i]) * (rhs[i] - q[i]);
    rel = std::sqrt(true_sq) / b_norm;
    if (stats)
        *stats = {it, rel};
    if (rel > tolerance)
        throw Error(Errc::no_convergence, "conjugate gradient stalled at relative residual " +
                                              std::to_string(rel) + " after " +
                                              std::to_string(it) + " iterations");

    for (std::size_t i : sites)
        out[i] = x[i];
    return out;
}

namespace {

std::vector<char> interior_mask(const BoxGeometry& geom)
{
    std::vector<char> mask(geom.padded_size(), 0);
    for (std::size_t i : geom.interior_sites())
        mask[i] = 1;
    return mask;
}

} // namespace

Field solve_green_column(const PrecisionOperator& op, std::size_t site, SolveStats* stats)
{
    const BoxGeometry& geom = op.geometry();
    if (site >= geom.padded_size() || !geom.is_interior(site))
        throw Error(Errc::site_outside_interior, "Green column requested at a non-interior site");
    Field e(geom);
    e[site] = 1.0;
    return solve_precision(op, e, interior_mask(geom), 1e-10, stats);
}

Field quenched_mean(const PrecisionOperator& op, const Field& eta, const Field& bc)
{
    const BoxGeometry& geom = op.geometry();
    require_geometry(geom, {&eta, &bc});
    Field rhs(geom);
    for (std::size_t i : op.interior()) {
        double influx = 0.0;
        const int x = geom.x_of(i);
        const int y = geom.y_of(i);
        for (const auto& o : op.kernel().offsets())
            if (!geom.is_interior(x + o.dx, y + o.dy))
                influx += o.weight * bc.at(x + o.dx, y + o.dy);
        rhs[i] = eta[i] + influx;
    }
    return solve_precision(op, rhs, interior_mask(geom));
}

double groundstate_variance(const PrecisionOperator& op)
{
    const Field g = solve_green_column(op, op.geometry().origin());
    double s = 0.0;
    for (std::size_t i : op.interior())
        s += g[i] * g[i];
    return s;
}

double gaussian_upper_tail(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double exact_tail(const PrecisionOperator& op, const Field& eta, const Field& bc, double radius)
{
    if (!(radius >= 0.0))
        throw Error(Errc::invalid_argument, "tail radius must be >= 0");
    if (radius == 0.0)
        return 1.0;
    const std::size_t o = op.geometry().origin();
    const double g00 = solve_green_column(op, o)[o];
    const double m0 = quenched_mean(op, eta, bc)[o];
    const double sd = std::sqrt(g00);
    return gaussian_upper_tail((radius - m0) / sd) + gaussian_upper_tail((radius + m0) / sd);
}

double exact_shift_kl(const PrecisionOperator& op, const Field& phibar)
{
    require_geometry(op.geometry(), {&phibar});
    require_collar_zero(phibar, "shift profile");
    return 0.5 * op.quadratic_form(phibar);
}

} // namespace ifl
