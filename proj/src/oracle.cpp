#include "ifl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace ifl {

void QuadratureSpec::validate() const
{
    if (!(cutoff > 0.0) || !std::isfinite(cutoff))
        throw Error(Errc::invalid_argument, "quadrature cutoff must be positive");
    if (points_per_axis < 8)
        throw Error(Errc::invalid_argument, "quadrature needs at least 8 points per axis");
}

QuadratureRule gauss_legendre(int n, double a, double b)
{
    if (n < 1)
        throw Error(Errc::invalid_argument, "Gauss-Legendre rule needs n >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, double max_panel, int per_panel)
{
    QuadratureRule out;
    if (!(b > a))
        return out;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
    const double width = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const QuadratureRule r = gauss_legendre(per_panel, a + k * width, a + (k + 1) * width);
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

namespace {

// (∫f, ∫f·g): products follow the Leibniz rule, so summing out sites of a
// product of (fₖ, fₖgₖ) factors yields (Z, Z·E[Σgₖ]).
struct Moment {
    double a = 0.0;
    double b = 0.0;
};

inline double unit(double) { return 1.0; }
inline Moment unit(Moment) { return {1.0, 0.0}; }
inline double mul(double x, double y) { return x * y; }
inline Moment mul(Moment x, Moment y) { return {x.a * y.a, x.a * y.b + x.b * y.a}; }
inline double scaled(double x, double w) { return x * w; }
inline Moment scaled(Moment x, double w) { return {x.a * w, x.b * w}; }
inline double magnitude(double x) { return std::abs(x); }
inline Moment divide(Moment x, double s) { return {x.a / s, x.b / s}; }
inline double divide(double x, double s) { return x / s; }
inline double magnitude(Moment x) { return std::max(std::abs(x.a), std::abs(x.b)); }

// Neumaier summation.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

struct Accumulator {
    CompensatedSum s;
    void add(double v) { s.add(v); }
    double value() const { return s.value(); }
};

struct MomentAccumulator {
    CompensatedSum a;
    CompensatedSum b;
    void add(Moment v)
    {
        a.add(v.a);
        b.add(v.b);
    }
    Moment value() const { return {a.value(), b.value()}; }
};

template <class T> struct AccumulatorFor;
template <> struct AccumulatorFor<double> { using type = Accumulator; };
template <> struct AccumulatorFor<Moment> { using type = MomentAccumulator; };

template <class T> struct Factor {
    std::vector<int> vars; // ascending; last varies fastest in `table`
    std::vector<T> table;
};

template <class T> struct Eliminated {
    std::vector<T> values; // over the kept variable's grid, or a single scalar
    double log_scale = 0.0;
};

constexpr double max_work = 4e9;
constexpr double max_table = 16777216.0; // 2^24 entries

template <class T>
Eliminated<T> eliminate(std::vector<Factor<T>> factors, const std::vector<QuadratureRule>& grids,
                        int keep)
{
    const int n = static_cast<int>(grids.size());
    std::vector<char> alive(n, 1);
    double log_scale = 0.0;
    using Acc = typename AccumulatorFor<T>::type;

    auto dim = [&](int v) { return grids[v].nodes.size(); };

    for (int remaining = n - (keep >= 0 ? 1 : 0); remaining > 0; --remaining) {
        int best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        std::vector<int> best_scope;
        for (int v = 0; v < n; ++v) {
            if (!alive[v] || v == keep)
                continue;
            std::vector<int> scope;
            for (const auto& f : factors)
                if (std::binary_search(f.vars.begin(), f.vars.end(), v))
                    scope.insert(scope.end(), f.vars.begin(), f.vars.end());
            scope.push_back(v);
            std::sort(scope.begin(), scope.end());
            scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
            double cost = 1.0;
            for (int u : scope)
                cost *= static_cast<double>(dim(u));
            if (cost < best_cost) {
                best_cost = cost;
                best = v;
                best_scope = std::move(scope);
            }
        }
        const double reduced_size = best_cost / static_cast<double>(dim(best));
        if (best_cost > max_work || reduced_size > max_table)
            throw Error(Errc::lattice_too_large,
                        "quadrature elimination would need a table of " +
                            std::to_string(reduced_size) + " entries");

        std::vector<Factor<T>> bucket;
        std::vector<Factor<T>> rest;
        for (auto& f : factors) {
            if (std::binary_search(f.vars.begin(), f.vars.end(), best))
                bucket.push_back(std::move(f));
            else
                rest.push_back(std::move(f));
        }

        std::vector<int> reduced;
        for (int u : best_scope)
            if (u != best)
                reduced.push_back(u);

        // Stride of every scope variable inside every bucket factor's table.
        const std::size_t nf = bucket.size();
        std::vector<std::vector<std::size_t>> red_stride(nf, std::vector<std::size_t>(reduced.size(), 0));
        std::vector<std::size_t> elim_stride(nf, 0);
        for (std::size_t fi = 0; fi < nf; ++fi) {
            const auto& vars = bucket[fi].vars;
            std::size_t s = 1;
            for (int p = static_cast<int>(vars.size()) - 1; p >= 0; --p) {
                const int u = vars[p];
                if (u == best) {
                    elim_stride[fi] = s;
                } else {
                    const auto pos = std::lower_bound(reduced.begin(), reduced.end(), u) - reduced.begin();
                    red_stride[fi][pos] = s;
                }
                s *= dim(u);
            }
        }

        const std::size_t out_size = static_cast<std::size_t>(reduced_size);
        Factor<T> out;
        out.vars = reduced;
        out.table.resize(out_size);
        const auto& w = grids[best].weights;
        const std::size_t pts = w.size();

        std::vector<std::size_t> idx(reduced.size(), 0);
        std::vector<std::size_t> base(nf, 0);
        std::vector<T> scratch(pts);
        for (std::size_t e = 0; e < out_size; ++e) {
            for (std::size_t fi = 0; fi < nf; ++fi) {
                std::size_t b = 0;
                for (std::size_t p = 0; p < reduced.size(); ++p)
                    b += red_stride[fi][p] * idx[p];
                base[fi] = b;
            }
            for (std::size_t t = 0; t < pts; ++t)
                scratch[t] = scaled(unit(T{}), w[t]);
            for (std::size_t fi = 0; fi < nf; ++fi) {
                const T* col = bucket[fi].table.data() + base[fi];
                const std::size_t stride = elim_stride[fi];
                for (std::size_t t = 0; t < pts; ++t)
                    scratch[t] = mul(scratch[t], col[stride * t]);
            }
            Acc acc;
            for (std::size_t t = 0; t < pts; ++t)
                acc.add(scratch[t]);
            out.table[e] = acc.value();

            for (int p = static_cast<int>(reduced.size()) - 1; p >= 0; --p) {
                if (++idx[p] < dim(reduced[p]))
                    break;
                idx[p] = 0;
            }
        }

        double peak = 0.0;
        for (const T& v : out.table)
            peak = std::max(peak, magnitude(v));
        if (peak > 0.0 && std::isfinite(peak)) {
            for (T& v : out.table)
                v = divide(v, peak);
            log_scale += std::log(peak);
        }

        rest.push_back(std::move(out));
        factors = std::move(rest);
        alive[best] = 0;
    }

    Eliminated<T> result;
    result.log_scale = log_scale;
    result.values.assign(keep >= 0 ? dim(keep) : 1, unit(T{}));
    for (const auto& f : factors) {
        if (f.vars.empty()) {
            for (T& v : result.values)
                v = mul(v, f.table[0]);
        } else {
            for (std::size_t t = 0; t < result.values.size(); ++t)
                result.values[t] = mul(result.values[t], f.table[t]);
        }
    }
    return result;
}

// Sites of the box mapped to elimination variables, with the origin first.
struct SiteMap {
    std::vector<std::size_t> sites;
    std::vector<int> var_of; // padded index -> var, -1 if not interior
};

SiteMap map_sites(const BoxGeometry& geom)
{
    SiteMap m;
    m.var_of.assign(geom.padded_size(), -1);
    m.sites.push_back(geom.origin());
    for (std::size_t i : geom.interior_sites())
        if (i != geom.origin())
            m.sites.push_back(i);
    for (std::size_t v = 0; v < m.sites.size(); ++v)
        m.var_of[m.sites[v]] = static_cast<int>(v);
    return m;
}

template <class T>
std::vector<Factor<T>> build_factors(const GibbsModel& model, const SiteMap& map,
                                     const std::vector<QuadratureRule>& grids, const Field* shift)
{
    constexpr bool with_moment = std::is_same_v<T, Moment>;
    const BoxGeometry& geom = model.geometry;
    const Potential& v = model.potential;
    std::vector<Factor<T>> factors;

    for (std::size_t var = 0; var < map.sites.size(); ++var) {
        const std::size_t i = map.sites[var];
        const int x = geom.x_of(i);
        const int y = geom.y_of(i);
        const double s_i = shift ? (*shift)[i] : 0.0;

        Factor<T> unary;
        unary.vars = {static_cast<int>(var)};
        for (double xi : grids[var].nodes) {
            double energy = -model.eta[i] * xi;
            double g = 0.0;
            for (const auto& o : model.kernel.offsets()) {
                if (geom.is_interior(x + o.dx, y + o.dy))
                    continue;
                const double b = model.bc.at(x + o.dx, y + o.dy);
                const double base = v.value(xi - b);
                energy += o.weight * base;
                if (with_moment)
                    g += o.weight * (v.value(xi + s_i - b) - base);
            }
            const double f = std::exp(-energy);
            if constexpr (with_moment)
                unary.table.push_back(Moment{f, f * g});
            else
                unary.table.push_back(f);
        }
        factors.push_back(std::move(unary));

        for (const auto& o : model.kernel.offsets()) {
            if (!geom.is_interior(x + o.dx, y + o.dy))
                continue;
            const std::size_t j = geom.index(x + o.dx, y + o.dy);
            const int wv = map.var_of[j];
            if (wv <= static_cast<int>(var))
                continue; // each unordered pair once
            const double s_j = shift ? (*shift)[j] : 0.0;
            Factor<T> pair;
            pair.vars = {static_cast<int>(var), wv};
            pair.table.reserve(grids[var].nodes.size() * grids[wv].nodes.size());
            for (double xi : grids[var].nodes)
                for (double xj : grids[wv].nodes) {
                    const double base = v.value(xi - xj);
                    const double f = std::exp(-o.weight * base);
                    if constexpr (with_moment)
                        pair.table.push_back(Moment{f, f * o.weight * (v.value(xi - xj + s_i - s_j) - base)});
                    else
                        pair.table.push_back(f);
                }
            factors.push_back(std::move(pair));
        }
    }
    return factors;
}

std::string format_sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double log_partition_with(const GibbsModel& model, double cutoff, int points)
{
    const SiteMap map = map_sites(model.geometry);
    const std::vector<QuadratureRule> grids(map.sites.size(), gauss_legendre(points, -cutoff, cutoff));
    const auto r = eliminate(build_factors<double>(model, map, grids, nullptr), grids, -1);
    return std::log(r.values[0]) + r.log_scale;
}

} // namespace

QuadratureOracle::QuadratureOracle(GibbsModel model, QuadratureSpec spec, bool validate)
    : model_(std::move(model)), spec_(spec)
{
    spec_.validate();
    if (model_.geometry.interior_count() > max_sites)
        throw Error(Errc::lattice_too_large, "quadrature oracle supports at most 9 interior sites");

    log_z_ = log_partition_with(model_, spec_.cutoff, spec_.points_per_axis);
    if (!std::isfinite(log_z_))
        throw Error(Errc::cutoff_insufficient, "partition function is not finite on the grid");
    if (validate) {
        const double finer = log_partition_with(model_, spec_.cutoff, 2 * spec_.points_per_axis);
        if (std::abs(std::expm1(finer - log_z_)) >= 1e-8)
            throw Error(Errc::cutoff_insufficient,
                        "doubling points per axis moves Z by " + format_sci(std::expm1(finer - log_z_)));
        const double wider = log_partition_with(model_, 2 * spec_.cutoff, 2 * spec_.points_per_axis);
        if (std::abs(std::expm1(wider - finer)) >= 1e-8)
            throw Error(Errc::cutoff_insufficient,
                        "doubling the cutoff moves Z by " + format_sci(std::expm1(wider - finer)));
    }
}

double QuadratureOracle::partition() const { return std::exp(log_z_); }
double QuadratureOracle::log_partition() const { return log_z_; }

std::vector<double> QuadratureOracle::interval_masses(
    const std::vector<std::pair<double, double>>& intervals) const
{
    // One elimination with φ₀ discretized on the union of all interval rules.
    const SiteMap map = map_sites(model_.geometry);
    std::vector<QuadratureRule> grids(map.sites.size(),
                                      gauss_legendre(spec_.points_per_axis, -spec_.cutoff, spec_.cutoff));
    QuadratureRule origin_rule;
    std::vector<std::size_t> first{0};
    for (const auto& [a, b] : intervals) {
        const QuadratureRule r = composite_gauss_legendre(a, b, 0.5, 12);
        origin_rule.nodes.insert(origin_rule.nodes.end(), r.nodes.begin(), r.nodes.end());
        origin_rule.weights.insert(origin_rule.weights.end(), r.weights.begin(), r.weights.end());
        first.push_back(origin_rule.nodes.size());
    }
    std::vector<double> out(intervals.size(), 0.0);
    if (origin_rule.nodes.empty())
        return out;
    grids[0] = origin_rule;
    const auto r = eliminate(build_factors<double>(model_, map, grids, nullptr), grids, 0);
    const double scale = std::exp(r.log_scale - log_z_);
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        CompensatedSum s;
        for (std::size_t t = first[k]; t < first[k + 1]; ++t)
            s.add(origin_rule.weights[t] * r.values[t]);
        out[k] = s.value() * scale;
    }
    return out;
}

std::vector<double> QuadratureOracle::marginal_phi0(std::span<const double> edges) const
{
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        throw Error(Errc::invalid_argument, "marginal needs at least two sorted edges");
    const double l = spec_.cutoff;
    std::vector<std::pair<double, double>> bins;
    bins.reserve(edges.size() - 1);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        bins.emplace_back(std::clamp(edges[k], -l, l), std::clamp(edges[k + 1], -l, l));
    return interval_masses(bins);
}

double QuadratureOracle::tail(double radius) const
{
    if (!(radius >= 0.0))
        throw Error(Errc::invalid_argument, "tail radius must be >= 0");
    if (radius == 0.0)
        return 1.0;
    const double l = spec_.cutoff;
    if (radius >= l)
        return 0.0;
    const auto m = interval_masses({{-l, -radius}, {radius, l}});
    return m[0] + m[1];
}

double QuadratureOracle::relative_entropy(const Field& phibar) const
{
    const BoxGeometry& geom = model_.geometry;
    require_geometry(geom, {&phibar});
    for (std::size_t i : geom.collar_sites())
        if (phibar[i] != 0.0)
            throw Error(Errc::invalid_argument, "shift profile must vanish on the collar");

    const SiteMap map = map_sites(geom);
    const std::vector<QuadratureRule> grids(map.sites.size(),
                                            gauss_legendre(spec_.points_per_axis, -spec_.cutoff, spec_.cutoff));
    const auto r = eliminate(build_factors<Moment>(model_, map, grids, &phibar), grids, -1);
    double linear = 0.0;
    for (std::size_t i : map.sites)
        linear += model_.eta[i] * phibar[i];
    return r.values[0].b / r.values[0].a - linear;
}

} // namespace ifl
