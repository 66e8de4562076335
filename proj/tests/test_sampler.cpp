#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ifl/gaussian.hpp"
#include "ifl/sampler.hpp"

using namespace ifl;

namespace {

const WalkKernel nn = WalkKernel::nearest_neighbor();

std::vector<double> ar1(double rho, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> x(n);
    double v = rng.normal() / std::sqrt(1.0 - rho * rho);
    for (auto& e : x) {
        v = rho * v + rng.normal();
        e = v;
    }
    return x;
}

double variance(const std::vector<double>& x)
{
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

} // namespace

TEST_CASE("rng streams")
{
    CHECK(split_seed(1, stream_disorder, 0) != split_seed(1, stream_disorder, 1));
    CHECK(split_seed(1, stream_disorder, 0) != split_seed(1, stream_chain, 0));
    CHECK(split_seed(1, stream_disorder, 5) == split_seed(1, stream_disorder, 5));

    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());

    Rng r(3);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.below(7) < 7u);
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
}

TEST_CASE("chain config validation")
{
    ChainConfig c;
    CHECK_NOTHROW(c.validate());
    c.burn_in = c.sweeps;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.burn_in = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.proposal_width = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.thinning = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("acceptance probability")
{
    CHECK(acceptance_probability(0.0) == 1.0);
    CHECK(acceptance_probability(-5.0) == 1.0);
    CHECK(acceptance_probability(1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(acceptance_probability(1e6) == 0.0);
    CHECK(acceptance_probability(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(acceptance_probability(-std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("fast local energy matches the reference delta")
{
    Rng rng(17);
    const auto k = testing::wide_kernel();
    const BoxGeometry g(3, k.range());
    const GibbsModel model(g, k, Potential::anharmonic(0.7), testing::random_interior(g, rng),
                           testing::random_collar(g, rng));
    const LocalEnergy energy(model);
    const Field phi = merge_with_boundary(testing::random_interior(g, rng), model.bc);
    for (std::size_t site : g.interior_sites()) {
        const double proposal = rng.normal();
        CHECK(energy.delta(phi.values(), site, proposal) ==
              doctest::Approx(local_energy_delta(phi, site, proposal, model.eta, model.bc, k, model.potential))
                  .epsilon(1e-12));
    }
}

TEST_CASE("detailed balance on a discretized single-site chain")
{
    // A symmetric proposal with min(1, e^{-dH}) acceptance satisfies pi(a) P(a,b) = pi(b) P(b,a).
    const auto v = Potential::anharmonic(2.0);
    const BoxGeometry g(0, 1);
    Field eta(g);
    eta[g.origin()] = 0.4;
    const GibbsModel model(g, nn, v, eta, Field(g));
    const LocalEnergy energy(model);
    const std::vector<double> points{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> state(g.padded_size(), 0.0);
    for (double a : points)
        for (double b : points) {
            state[g.origin()] = a;
            const double pab = acceptance_probability(energy.delta(state, g.origin(), b));
            state[g.origin()] = b;
            const double pba = acceptance_probability(energy.delta(state, g.origin(), a));
            Field fa(g), fb(g);
            fa[g.origin()] = a;
            fb[g.origin()] = b;
            const double wa = std::exp(-total_energy(fa, eta, model.bc, nn, v));
            const double wb = std::exp(-total_energy(fb, eta, model.bc, nn, v));
            CHECK(wa * pab == doctest::Approx(wb * pba).epsilon(1e-12));
        }
}

TEST_CASE("single-site gaussian stationary variance")
{
    const BoxGeometry g(0, 1);
    const GibbsModel model(g, nn, Potential::quadratic());
    ChainConfig c;
    c.sweeps = 1'010'000;
    c.burn_in = 10'000;
    c.seed = 2024;
    const ChainResult r = run_chain(model, c);
    CHECK(r.phi0.size() == 1'000'000);
    CHECK(variance(r.phi0) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("chain determinism and tuning")
{
    const BoxGeometry g(3, 1);
    const GibbsModel model(g, nn, Potential::quadratic());
    ChainConfig c;
    c.sweeps = 3000;
    c.burn_in = 500;
    c.seed = 77;
    c.proposal_width = 10.0;
    const ChainResult a = run_chain(model, c);
    const ChainResult b = run_chain(model, c);
    CHECK(a.phi0 == b.phi0);
    CHECK(a.proposal_width == b.proposal_width);
    CHECK(a.acceptance_rate > 0.2);
    CHECK(a.acceptance_rate < 0.8);

    c.seed = 78;
    CHECK(run_chain(model, c).phi0 != a.phi0);

    c.thinning = 5;
    c.snapshot_every = 100;
    const ChainResult t = run_chain(model, c);
    CHECK(t.phi0.size() == 500);
    CHECK(t.snapshots.size() == 5);
    for (const auto& s : t.snapshots)
        CHECK(s.values()[g.origin()] == s[g.origin()]);

    ChainConfig fixed = c;
    fixed.tune_width = false;
    fixed.proposal_width = 0.7;
    CHECK(run_chain(model, fixed).proposal_width == 0.7);
}

TEST_CASE("chain keeps the collar at the boundary condition")
{
    const BoxGeometry g(2, 1);
    Rng rng(4);
    const Field bc = testing::random_collar(g, rng);
    const GibbsModel model(g, nn, Potential::quadratic(), Field(g), bc);
    ChainConfig c;
    c.sweeps = 300;
    c.burn_in = 100;
    c.snapshot_every = 50;
    const ChainResult r = run_chain(model, c);
    REQUIRE_FALSE(r.snapshots.empty());
    for (const auto& s : r.snapshots)
        for (std::size_t i : g.collar_sites())
            CHECK(s[i] == bc[i]);
}

TEST_CASE("autocorrelation time")
{
    CHECK_THROWS_AS(autocorrelation_time(std::vector<double>(50, 1.0)), Error);

    const auto constant = autocorrelation_time(std::vector<double>(1000, 2.0));
    CHECK(constant.flagged);
    CHECK(constant.tau == 500.0);

    const auto iid = autocorrelation_time(ar1(0.0, 200000, 1));
    CHECK(iid.tau == doctest::Approx(0.5).epsilon(0.2));
    CHECK_FALSE(iid.flagged);

    for (std::uint64_t seed : {2u, 3u, 4u}) {
        const auto a = autocorrelation_time(ar1(0.9, 200000, seed));
        CHECK(std::abs(a.tau - 9.5) < 1.5);
        CHECK(static_cast<double>(a.window) >= 5.0 * a.tau);
    }
}

TEST_CASE("wilson interval")
{
    const Interval zero = wilson_interval(0.0, 100.0);
    CHECK(zero.low == 0.0);
    CHECK(zero.high > 0.0);
    const Interval one = wilson_interval(1.0, 100.0);
    CHECK(one.high == 1.0);
    CHECK(one.low < 1.0);
    const Interval mid = wilson_interval(0.5, 1e4);
    CHECK(mid.low == doctest::Approx(0.5 - 1.959963984540054 * 0.005).epsilon(1e-3));
    CHECK(wilson_interval(0.3, 10.0).high - wilson_interval(0.3, 10.0).low >
          wilson_interval(0.3, 1000.0).high - wilson_interval(0.3, 1000.0).low);
}

TEST_CASE("tail estimate")
{
    CHECK_THROWS_AS(tail_estimate(std::vector<double>{}, 1.0), Error);
    CHECK_THROWS_AS(upper_tail_estimate(std::vector<double>{}, 1.0), Error);

    const auto series = ar1(0.5, 5000, 8);
    const auto all = tail_estimate(series, 0.0);
    CHECK(all.p_hat == 1.0);

    const auto none = tail_estimate(series, 1e6);
    CHECK(none.p_hat == 0.0);
    CHECK(none.ci_high > 0.0);
    CHECK(none.tau_flagged);

    const auto e = tail_estimate(series, 1.0);
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK(e.n_samples == series.size());
    CHECK(e.n_effective <= static_cast<double>(series.size()));

    const auto up = upper_tail_estimate(series, 1.0);
    CHECK(up.p_hat <= e.p_hat);

    const auto short_series = tail_estimate(std::vector<double>{0.5, 2.0, -3.0}, 1.0);
    CHECK(short_series.p_hat == doctest::Approx(2.0 / 3.0));
    CHECK(short_series.tau_flagged);
}

TEST_CASE("tail estimate against the exact gaussian tail at N = 3")
{
    const BoxGeometry g(3, 1);
    const GibbsModel model(g, nn, Potential::quadratic());
    ChainConfig c;
    c.sweeps = 200'000;
    c.burn_in = 5'000;
    c.seed = 31;
    const ChainResult r = run_chain(model, c);
    const auto e = tail_estimate(r.phi0, 1.0);
    const double exact = exact_tail(PrecisionOperator(g, nn), Field(g), Field(g), 1.0);
    CHECK(e.ci_low <= exact);
    CHECK(exact <= e.ci_high);
}

TEST_CASE("histogram and total variation")
{
    const std::vector<double> edges{-std::numeric_limits<double>::infinity(), -1.0, 0.0, 1.0,
                                    std::numeric_limits<double>::infinity()};
    const std::vector<double> x{-5.0, -0.5, 0.0, 0.2, 0.9, 3.0};
    const auto h = histogram(x, edges);
    REQUIRE(h.size() == 4);
    CHECK(h[0] == doctest::Approx(1.0 / 6));
    CHECK(h[1] == doctest::Approx(1.0 / 6));
    CHECK(h[2] == doctest::Approx(3.0 / 6));
    CHECK(h[3] == doctest::Approx(1.0 / 6));

    CHECK(total_variation(h, h) == 0.0);
    const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
    CHECK(total_variation(p, q) == 1.0);
    CHECK_THROWS_AS(total_variation(p, h), Error);
    CHECK_THROWS_AS(histogram(x, std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(histogram(x, std::vector<double>{1.0, 0.0}), Error);
}
