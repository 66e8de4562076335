#pragma once

#include <Eigen/Dense>

#include "ifl/lattice.hpp"
#include "ifl/rng.hpp"

namespace testing {

/// Dense Dirichlet precision matrix over the interior sites, in interior_sites() order.
inline Eigen::MatrixXd dense_precision(const ifl::BoxGeometry& geom, const ifl::WalkKernel& kernel)
{
    const auto sites = geom.interior_sites();
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const int dx = geom.x_of(sites[b]) - geom.x_of(sites[a]);
            const int dy = geom.y_of(sites[b]) - geom.y_of(sites[a]);
            q(a, b) -= kernel.weight(dx, dy);
        }
    return q;
}

inline ifl::Field random_interior(const ifl::BoxGeometry& geom, ifl::Rng& rng, double scale = 1.0)
{
    ifl::Field f(geom);
    for (std::size_t i : geom.interior_sites())
        f[i] = scale * rng.normal();
    return f;
}

inline ifl::Field random_collar(const ifl::BoxGeometry& geom, ifl::Rng& rng, double scale = 1.0)
{
    ifl::Field f(geom);
    for (std::size_t i : geom.collar_sites())
        f[i] = scale * rng.normal();
    return f;
}

/// Range-2 kernel used to exercise wider collars.
inline ifl::WalkKernel wide_kernel()
{
    return ifl::WalkKernel::validate({{1, 0, 0.15}, {-1, 0, 0.15}, {0, 1, 0.15}, {0, -1, 0.15},
                                      {2, 1, 0.1}, {-2, -1, 0.1}, {1, -2, 0.1}, {-1, 2, 0.1}});
}

} // namespace testing
