#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <limits>

#include "ifl/gaussian.hpp"
#include "ifl/oracle.hpp"
#include "ifl/test_function.hpp"

using namespace ifl;

namespace {

const WalkKernel nn = WalkKernel::nearest_neighbor();
const double sqrt_2pi = std::sqrt(2.0 * M_PI);

std::vector<double> normal_bins(double mean, double sd, const std::vector<double>& edges)
{
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        out.push_back(gaussian_upper_tail((edges[k] - mean) / sd) - gaussian_upper_tail((edges[k + 1] - mean) / sd));
    return out;
}

GibbsModel single_site(double eta0, Potential v = Potential::quadratic())
{
    const BoxGeometry g(0, 1);
    Field eta(g);
    eta[g.origin()] = eta0;
    return GibbsModel(g, nn, std::move(v), eta, Field(g));
}

} // namespace

TEST_CASE("gauss-legendre rules")
{
    const auto r = gauss_legendre(5, -1.0, 1.0);
    double w = 0.0;
    double x4 = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        w += r.weights[k];
        x4 += r.weights[k] * std::pow(r.nodes[k], 8);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x4 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));

    const auto c = composite_gauss_legendre(-3.0, 2.0, 0.5, 6);
    CHECK(c.nodes.size() == 60);
    double integral = 0.0;
    for (std::size_t k = 0; k < c.nodes.size(); ++k)
        integral += c.weights[k] * std::exp(c.nodes[k]);
    CHECK(integral == doctest::Approx(std::exp(2.0) - std::exp(-3.0)).epsilon(1e-13));

    CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), Error);
}

TEST_CASE("quadrature spec validation")
{
    QuadratureSpec s;
    CHECK_NOTHROW(s.validate());
    s.points_per_axis = 4;
    CHECK_THROWS_AS(s.validate(), Error);
    s = {};
    s.cutoff = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("single-site partition function")
{
    const QuadratureOracle zero(single_site(0.0));
    CHECK(zero.partition() == doctest::Approx(sqrt_2pi).epsilon(1e-12));
    for (double mu : {0.5, -1.25, 2.0}) {
        const QuadratureOracle o(single_site(mu));
        CHECK(o.partition() == doctest::Approx(sqrt_2pi * std::exp(0.5 * mu * mu)).epsilon(1e-10));
        CHECK(o.log_partition() == doctest::Approx(std::log(sqrt_2pi) + 0.5 * mu * mu).epsilon(1e-12));
    }
}

TEST_CASE("single-site marginal and tail")
{
    const QuadratureOracle o(single_site(0.0));
    const std::vector<double> edges{-std::numeric_limits<double>::infinity(), -2.0, -0.5, 0.0, 1.0, 3.0,
                                    std::numeric_limits<double>::infinity()};
    const auto m = o.marginal_phi0(edges);
    const auto exact = normal_bins(0.0, 1.0, edges);
    double sum = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        CHECK(std::abs(m[k] - exact[k]) < 1e-8);
        sum += m[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-8);

    CHECK(o.tail(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(o.tail(1.0) == doctest::Approx(0.31731050786291415).epsilon(1e-9));
    CHECK_THROWS_AS(o.tail(-1.0), Error);
    CHECK_THROWS_AS(o.marginal_phi0(std::vector<double>{1.0}), Error);
}

TEST_CASE("oracle rejects large lattices and short cutoffs")
{
    const BoxGeometry g(2, 1);
    CHECK_THROWS_AS(QuadratureOracle(GibbsModel(g, nn, Potential::quadratic())), Error);
    try {
        QuadratureOracle(GibbsModel(g, nn, Potential::quadratic()));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::lattice_too_large);
    }

    QuadratureSpec tight;
    tight.cutoff = 2.0;
    try {
        QuadratureOracle(single_site(0.0), tight);
        FAIL("expected a cutoff failure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::cutoff_insufficient);
    }
}

TEST_CASE("nine-site quadratic oracle against exact gaussian quantities")
{
    Rng rng(5);
    const BoxGeometry g(1, 1);
    const Field eta = testing::random_interior(g, rng, 0.5);
    const GibbsModel model(g, nn, Potential::quadratic(), eta, Field(g));
    const QuadratureOracle o(model);
    const PrecisionOperator op(g, nn);

    // log Z = (n/2) log 2π - ½ log det Q + ½ ηᵀQ⁻¹η.
    const Eigen::MatrixXd q = testing::dense_precision(g, nn);
    Eigen::VectorXd e(9);
    const auto sites = g.interior_sites();
    for (std::size_t a = 0; a < sites.size(); ++a)
        e(static_cast<Eigen::Index>(a)) = eta[sites[a]];
    const double log_z = 4.5 * std::log(2.0 * M_PI) - 0.5 * std::log(q.determinant()) + 0.5 * e.dot(q.ldlt().solve(e));
    CHECK(o.log_partition() == doctest::Approx(log_z).epsilon(1e-12));

    for (double r : {0.5, 1.0, 2.5})
        CHECK(std::abs(o.tail(r) - exact_tail(op, eta, Field(g), r)) < 1e-6);

    const Field h = hitting_probability(g, nn);
    for (double amp : {0.0, 1.0, 2.0}) {
        const Field profile = test_profile(h, amp);
        const double re = o.relative_entropy(profile);
        CHECK(std::abs(re - exact_shift_kl(op, profile)) < 1e-6);
        CHECK(re <= entropy_bound(profile, nn, 1.0).bound + 1e-6);
    }
    const Field random_profile = testing::random_interior(g, rng);
    CHECK(std::abs(o.relative_entropy(random_profile) - exact_shift_kl(op, random_profile)) < 1e-6);
}

TEST_CASE("oracle symmetry under disorder flip")
{
    Rng rng(6);
    const BoxGeometry g(1, 1);
    const GibbsModel model(g, nn, Potential::anharmonic(0.5), testing::random_interior(g, rng, 0.5), Field(g));
    const QuadratureOracle plus(model, {}, false);
    const QuadratureOracle minus(model.flipped(), {}, false);
    CHECK(plus.log_partition() == doctest::Approx(minus.log_partition()).epsilon(1e-13));

    std::vector<double> edges;
    for (int k = -6; k <= 6; ++k)
        edges.push_back(0.5 * k);
    const auto a = plus.marginal_phi0(edges);
    const auto b = minus.marginal_phi0(edges);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a[k] == doctest::Approx(b[b.size() - 1 - k]).epsilon(1e-10));
}

TEST_CASE("anharmonic relative entropy obeys the entropy bound")
{
    Rng rng(10);
    const BoxGeometry g(1, 1);
    const auto v = Potential::anharmonic(0.5);
    const Field h = hitting_probability(g, nn);
    for (int t = 0; t < 2; ++t) {
        const GibbsModel model(g, nn, v, testing::random_interior(g, rng, 0.5), Field(g));
        const QuadratureOracle plus(model, {}, false);
        const QuadratureOracle minus(model.flipped(), {}, false);
        for (double amp : {1.0, 2.0}) {
            const Field profile = test_profile(h, amp);
            const double bound = entropy_bound(profile, nn, v.curvature_ceiling()).bound;
            const double rp = plus.relative_entropy(profile);
            const double rm = minus.relative_entropy(profile);
            CHECK(rp >= 0.0);
            CHECK(rm >= 0.0);
            CHECK(rp <= bound);
            CHECK(rp + rm <= bound);
        }
        CHECK(plus.relative_entropy(Field(g)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("relative entropy rejects a profile on the collar")
{
    const QuadratureOracle o(single_site(0.0));
    Field bad(BoxGeometry(0, 1));
    bad[bad.geometry().collar_sites().front()] = 1.0;
    CHECK_THROWS_AS(o.relative_entropy(bad), Error);
}
