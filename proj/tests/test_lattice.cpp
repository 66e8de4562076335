#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

#include "ifl/lattice.hpp"
#include "ifl/rng.hpp"

using namespace ifl;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::ok;
}

} // namespace

TEST_CASE("box geometry counts and collar")
{
    for (int n : {0, 1, 3, 7}) {
        const BoxGeometry g(n, 1);
        CHECK(g.interior_count() == static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)));
        CHECK(g.interior_sites().size() == g.interior_count());
        CHECK(g.interior_count() + g.collar_sites().size() == g.padded_size());
        CHECK(g.x_of(g.origin()) == 0);
        CHECK(g.y_of(g.origin()) == 0);
    }

    const auto k = testing::wide_kernel();
    const BoxGeometry g(3, k.range());
    for (std::size_t i : g.interior_sites())
        for (const auto& o : k.offsets())
            CHECK(g.in_padded(g.x_of(i) + o.dx, g.y_of(i) + o.dy));

    CHECK(code_of([] { BoxGeometry(-1, 1); }) == Errc::invalid_argument);
    CHECK(code_of([] { BoxGeometry(2, 0); }) == Errc::invalid_argument);
}

TEST_CASE("kernel validation")
{
    const auto nn = WalkKernel::nearest_neighbor();
    CHECK(nn.offsets().size() == 4);
    CHECK(nn.range() == 1);
    CHECK(nn.weight(1, 0) == 0.25);
    CHECK(nn.weight(1, 1) == 0.0);

    CHECK(code_of([] { WalkKernel::validate({{1, 0, 0.5}, {0, 1, 0.5}}); }) == Errc::asymmetric_kernel);
    CHECK(code_of([] { WalkKernel::validate({{2, 0, 0.25}, {-2, 0, 0.25}, {0, 2, 0.25}, {0, -2, 0.25}}); }) ==
          Errc::reducible);
    CHECK(code_of([] { WalkKernel::validate({{1, 0, 0.3}, {-1, 0, 0.3}, {0, 1, 0.3}, {0, -1, 0.3}}); }) ==
          Errc::not_normalized);
    CHECK(code_of([] { WalkKernel::validate({{0, 0, 0.2}, {1, 0, 0.2}, {-1, 0, 0.2}, {0, 1, 0.2}, {0, -1, 0.2}}); }) ==
          Errc::self_jump_present);
    CHECK(code_of([] { WalkKernel::validate({}); }) == Errc::invalid_argument);
    // Diagonal steps alone reach only the even sublattice.
    CHECK(code_of([] { WalkKernel::validate({{1, 1, 0.25}, {-1, -1, 0.25}, {1, -1, 0.25}, {-1, 1, 0.25}}); }) ==
          Errc::reducible);
    // A single axis never leaves a line.
    CHECK(code_of([] { WalkKernel::validate({{1, 0, 0.5}, {-1, 0, 0.5}}); }) == Errc::reducible);

    // Duplicate entries merge.
    const auto merged = WalkKernel::validate({{1, 0, 0.125}, {1, 0, 0.125}, {-1, 0, 0.25}, {0, 1, 0.25}, {0, -1, 0.25}});
    CHECK(merged.offsets().size() == 4);
    CHECK(merged.weight(1, 0) == doctest::Approx(0.25));

    CHECK(testing::wide_kernel().range() == 2);
}

TEST_CASE("generated lattice index")
{
    const std::vector<Offset> a{{2, 1, 1}, {1, -2, 1}};
    CHECK(generated_lattice_index(a) == 5);
    const std::vector<Offset> b{{2, 1, 1}, {1, -2, 1}, {1, 0, 1}};
    CHECK(generated_lattice_index(b) == 1);
    const std::vector<Offset> c{{1, 1, 1}, {2, 2, 1}};
    CHECK(generated_lattice_index(c) == 0);
}

TEST_CASE("potential checks")
{
    const auto q = Potential::quadratic();
    CHECK(q.value(2.0) == 2.0);
    CHECK(q.curvature_ceiling() == 1.0);
    CHECK(check_potential(q).ok());

    const auto a = Potential::anharmonic(0.5);
    CHECK(a.curvature_ceiling() == 1.5);
    CHECK(a.value(1.0) == doctest::Approx(0.5 + 0.5 * (1.0 - std::cos(1.0))).epsilon(1e-15));
    const auto report = check_potential(a);
    CHECK(report.ok());
    CHECK(report.max_curvature == doctest::Approx(1.5).epsilon(1e-5));

    // A ceiling below sup V'' is rejected.
    CHECK_FALSE(check_potential(a.with_curvature_ceiling(1.2)).ok());
    // A non-even potential is rejected.
    const auto skew = Potential::custom("skew", [](double t) { return 0.5 * t * t + 0.1 * t; },
                                        [](double t) { return t + 0.1; }, 1.0, 2.0);
    const auto skew_report = check_potential(skew);
    CHECK_FALSE(skew_report.even);
    CHECK_FALSE(skew_report.zero_slope);

    CHECK(code_of([] { Potential::quadratic().with_curvature_ceiling(0.0); }) == Errc::nonpositive_curvature);
}

TEST_CASE("total energy examples")
{
    const auto k = WalkKernel::nearest_neighbor();
    const auto v = Potential::quadratic();
    const BoxGeometry g(0, 1);
    Field phi(g), eta(g), bc(g);
    CHECK(total_energy(phi, eta, bc, k, v) == 0.0);

    phi[g.origin()] = 2.0;
    CHECK(total_energy(phi, eta, bc, k, v) == doctest::Approx(2.0).epsilon(1e-15));
    eta[g.origin()] = 1.0;
    CHECK(total_energy(phi, eta, bc, k, v) == doctest::Approx(0.0).epsilon(1e-15));

    const Field other(BoxGeometry(1, 1));
    CHECK(code_of([&] { total_energy(other, eta, bc, k, v); }) == Errc::dimension_mismatch);
}

TEST_CASE("local energy delta examples")
{
    const auto k = WalkKernel::nearest_neighbor();
    const auto v = Potential::quadratic();
    const BoxGeometry g(0, 1);
    Field phi(g), eta(g), bc(g);
    CHECK(local_energy_delta(phi, g.origin(), 0.0, eta, bc, k, v) == 0.0);
    CHECK(local_energy_delta(phi, g.origin(), 2.0, eta, bc, k, v) == doctest::Approx(2.0));

    const std::size_t collar = g.collar_sites().front();
    CHECK(code_of([&] { local_energy_delta(phi, collar, 1.0, eta, bc, k, v); }) == Errc::site_outside_interior);
    CHECK(code_of([&] { local_energy_delta(phi, g.padded_size() + 3, 1.0, eta, bc, k, v); }) ==
          Errc::site_outside_interior);
}

TEST_CASE("local delta equals full energy difference")
{
    Rng rng(42);
    const std::vector<std::pair<WalkKernel, Potential>> cases{
        {WalkKernel::nearest_neighbor(), Potential::quadratic()},
        {WalkKernel::nearest_neighbor(), Potential::anharmonic(2.0)},
        {testing::wide_kernel(), Potential::anharmonic(0.5)},
    };
    for (const auto& [k, v] : cases) {
        const BoxGeometry g(3, k.range());
        const auto sites = g.interior_sites();
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Field eta = testing::random_interior(g, rng);
            const Field bc = testing::random_collar(g, rng);
            Field phi = testing::random_interior(g, rng, 2.0);
            const std::size_t site = sites[rng.below(sites.size())];
            const double proposal = 4.0 * rng.normal();
            const double before = total_energy(phi, eta, bc, k, v);
            const double delta = local_energy_delta(phi, site, proposal, eta, bc, k, v);
            phi[site] = proposal;
            const double after = total_energy(phi, eta, bc, k, v);
            worst = std::max(worst, std::abs((after - before) - delta));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("gibbs symmetry under (phi, eta) -> (-phi, -eta) with zero boundary")
{
    Rng rng(7);
    const auto k = testing::wide_kernel();
    const auto v = Potential::anharmonic(1.3);
    const BoxGeometry g(2, k.range());
    const Field bc(g);
    for (int trial = 0; trial < 50; ++trial) {
        const Field phi = testing::random_interior(g, rng);
        const Field eta = testing::random_interior(g, rng);
        const double h = total_energy(phi, eta, bc, k, v);
        const double flipped = total_energy(flip_disorder(phi), flip_disorder(eta), bc, k, v);
        CHECK(flipped == doctest::Approx(h).epsilon(1e-13));
    }
}

TEST_CASE("energy invariant under lattice symmetries of the nearest-neighbour kernel")
{
    Rng rng(11);
    const auto k = WalkKernel::nearest_neighbor();
    const auto v = Potential::anharmonic(0.8);
    const BoxGeometry g(3, 1);
    const Field phi = testing::random_interior(g, rng);
    const Field eta = testing::random_interior(g, rng);
    const Field bc = testing::random_collar(g, rng);
    const double h = total_energy(phi, eta, bc, k, v);

    auto transform = [&](const Field& f, auto map) {
        Field out(g);
        for (std::size_t i = 0; i < g.padded_size(); ++i) {
            const auto [x, y] = map(g.x_of(i), g.y_of(i));
            out.at(x, y) = f[i];
        }
        return out;
    };
    auto rot = [](int x, int y) { return std::pair{-y, x}; };
    auto mirror = [](int x, int y) { return std::pair{-x, y}; };
    auto swap = [](int x, int y) { return std::pair{y, x}; };
    CHECK(total_energy(transform(phi, rot), transform(eta, rot), transform(bc, rot), k, v) ==
          doctest::Approx(h).epsilon(1e-13));
    CHECK(total_energy(transform(phi, mirror), transform(eta, mirror), transform(bc, mirror), k, v) ==
          doctest::Approx(h).epsilon(1e-13));
    CHECK(total_energy(transform(phi, swap), transform(eta, swap), transform(bc, swap), k, v) ==
          doctest::Approx(h).epsilon(1e-13));
}

TEST_CASE("constant shift with matching boundary leaves the pair energy unchanged")
{
    const auto k = WalkKernel::nearest_neighbor();
    const auto v = Potential::anharmonic(0.5);
    const BoxGeometry g(2, 1);
    const Field eta(g);
    const Field phi(g, 3.25);
    CHECK(total_energy(phi, eta, phi, k, v) == 0.0);
}

TEST_CASE("flip disorder")
{
    const BoxGeometry g(1, 1);
    Field eta(g);
    CHECK(flip_disorder(eta) == eta);
    eta[g.origin()] = 1.5;
    CHECK(flip_disorder(eta)[g.origin()] == -1.5);
    Rng rng(3);
    const Field r = testing::random_interior(g, rng);
    CHECK(flip_disorder(flip_disorder(r)) == r);
}

TEST_CASE("merge with boundary")
{
    const BoxGeometry g(1, 1);
    Rng rng(5);
    const Field phi = testing::random_interior(g, rng);
    const Field bc = testing::random_collar(g, rng);
    const Field m = merge_with_boundary(phi, bc);
    for (std::size_t i = 0; i < g.padded_size(); ++i)
        CHECK(m[i] == (g.is_interior(i) ? phi[i] : bc[i]));
}

TEST_CASE("gibbs model rejects a kernel wider than its collar")
{
    const BoxGeometry g(2, 1);
    CHECK(code_of([&] { GibbsModel(g, testing::wide_kernel(), Potential::quadratic()); }) ==
          Errc::dimension_mismatch);
}

TEST_CASE("error strings")
{
    CHECK(std::string(to_string(Errc::reducible)) == "reducible kernel");
    CHECK(std::string(to_string(Errc::ok)) == "ok");
}
