#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nspect/inequalities.hpp"

using namespace nspect;

namespace {

BoxDomain box1d() {
    Box b;
    b.dim = 1;
    b.lo = {0, 0, 0};
    b.hi = {1, 0, 0};
    return BoxDomain(b);
}

BoxDomain square() {
    Box b;
    b.dim = 2;
    b.lo = {0, 0, 0};
    b.hi = {1, 1, 0};
    return BoxDomain(b);
}

Eigen::VectorXd raster_distances(const RasterDomain& r) {
    Eigen::VectorXd d(r.cell_count());
    for (int32_t c = 0; c < r.cell_count(); ++c) d[c] = r.cell_distance(c);
    return d;
}

}  // namespace

TEST_CASE("exponent maps reproduce the stated cases") {
    auto e1 = hardy_to_sobolev_exponent(1.0, 3, 2.0);
    CHECK_FALSE(e1.is_interval);
    CHECK(e1.q == doctest::Approx(3.0));  // M = 6, q = 12/4

    auto e2 = hardy_to_sobolev_exponent(0.5, 2, 2.0);
    CHECK(e2.is_interval);
    CHECK(e2.q_lo == doctest::Approx(2.0));
    CHECK(e2.q_hi == doctest::Approx(3.0));

    // continuity at alpha -> 0 for N=3: q -> 2N/(N-2) = 6
    auto e3 = hardy_to_sobolev_exponent(1e-9, 3, 2.0);
    CHECK(e3.q == doctest::Approx(6.0).epsilon(1e-6));

    CHECK(sobolev_to_hardy_exponent(1.0, 2.0, 6.0) == doctest::Approx(1.0 / 3));
    CHECK(sobolev_to_hardy_exponent(0.5, 2.0, 4.0) == doctest::Approx(0.125));
    CHECK(sobolev_to_hardy_exponent(1.0, 2.0, 2.0 + 1e-9) <= 1e-9);
    CHECK_THROWS_AS(sobolev_to_hardy_exponent(1.0, 2.0, 2.0), Error);
}

TEST_CASE("interpolation split identity holds to machine precision") {
    for (double alpha : {0.2, 0.5, 1.0})
        for (double r : {6.0, 10.0, 30.0}) {
            auto s = holder_interpolation_split(alpha, 3, 2.0, r);
            double lhs = 1.0 / s.q;
            double rhs = (1.0 - s.lambda) / 2.0 + s.lambda / r;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
            CHECK(s.lambda > 0);
            CHECK(s.lambda < 1);
        }
}

TEST_CASE("cusp membership thresholds") {
    auto m = example6_membership(0.5, 2, 0.45, 6.0);
    CHECK(m.w12_threshold == doctest::Approx(0.5));
    CHECK(m.lq_threshold == doctest::Approx(0.5));
    CHECK(m.in_w12);
    CHECK(m.in_lq);  // 0.45 < 3/6
    auto m7 = example6_membership(0.5, 2, 0.45, 7.0);
    CHECK_FALSE(m7.in_lq);  // 0.45 > 3/7
    CHECK(m7.in_w12);
    auto m0 = example6_membership(0.5, 2, 0.0, 9.0);
    CHECK(m0.in_w12);
    CHECK(m0.in_lq);
    // numeric companion: the L^q norm of x^-delta diverges under refinement
    // exactly when the membership is false (1D quadrature over the width)
    auto lq_norm_q7 = [&](double hh) {
        CuspDomain cusp(2, 0.5);
        auto raster = rasterize(cusp, hh);
        auto op = assemble(raster);
        return op.lq_norm(power_profile_start(*raster, 0.45), 7.0);
    };
    double v1 = lq_norm_q7(1.0 / 64), v2 = lq_norm_q7(1.0 / 128), v3 = lq_norm_q7(1.0 / 256);
    CHECK(v2 > v1);
    CHECK(v3 > v2);  // steady growth, no plateau
}

TEST_CASE("hardy estimate on the interval with the quadrature oracle") {
    auto raster = rasterize(box1d(), 1.0 / 1000);
    auto op = assemble(raster);
    auto est = estimate_hardy_constant(op, raster_distances(*raster), 0.25);
    // f == 1 probe: weight integral is integral of d^{-1/2} = 2 sqrt(2)
    CHECK(est.weight_integral == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.02));
    CHECK(est.unit_probe == doctest::Approx(std::sqrt(2.0 * std::sqrt(2.0))).epsilon(0.02));
    CHECK(est.constant >= est.unit_probe - 1e-12);
    CHECK(est.restart_spread <= 0.01);

    // estimate is refinement-stable for this integrable exponent
    std::vector<double> hs = {1.0 / 250, 1.0 / 500, 1.0 / 1000};
    std::vector<double> vals;
    for (double hh : hs) {
        auto r = rasterize(box1d(), hh);
        auto o = assemble(r);
        vals.push_back(estimate_hardy_constant(o, raster_distances(*r), 0.25).constant);
    }
    auto st = classify_refinement(hs, vals);
    CHECK(st.verdict == RefinementVerdict::Stable);
}

TEST_CASE("hardy estimate degenerates to the L2 bound as alpha -> 0") {
    auto raster = rasterize(box1d(), 1.0 / 200);
    auto op = assemble(raster);
    auto est = estimate_hardy_constant(op, raster_distances(*raster), 1e-6);
    CHECK(est.constant <= 1.0 + 1e-4);  // weight d^{-2 alpha} is 1 + O(alpha |log d|)
    CHECK(est.constant >= 0.9);         // the constant function already achieves ~1
    auto coarse = estimate_hardy_constant(op, raster_distances(*raster), 1e-3);
    CHECK(std::abs(est.constant - 1.0) < std::abs(coarse.constant - 1.0));
}

TEST_CASE("sobolev estimate on the square: constant start value and stability") {
    auto op = assemble(rasterize(square(), 1.0 / 32));
    AscentOptions opts;
    opts.restarts = 3;
    opts.max_iters = 250;
    auto est = estimate_sobolev_constant(op, 4.0, opts);
    // the constant trial function gives |Omega|^{1/q - 1/2} = 1; ascent only improves it
    CHECK(est.constant >= 1.0 - 1e-12);
    CHECK(est.restart_spread <= 0.01);

    auto op2 = assemble(rasterize(square(), 1.0 / 64));
    auto est2 = estimate_sobolev_constant(op2, 4.0, opts);
    CHECK(std::abs(est2.constant / est.constant - 1.0) <= 0.05);

    CHECK_THROWS_AS(estimate_sobolev_constant(op, 2.0, opts), SolverError);
    CHECK_THROWS_AS(estimate_sobolev_constant(op, 11.0, opts), SolverError);
}

TEST_CASE("refinement classifier") {
    CHECK(classify_refinement({0.1, 0.05, 0.025}, {1.0, 1.01, 0.99}).verdict ==
          RefinementVerdict::Stable);
    CHECK(classify_refinement({0.1, 0.05, 0.025}, {1.0, 1.7, 3.1}).verdict ==
          RefinementVerdict::Divergent);
    CHECK(classify_refinement({0.1, 0.05, 0.025}, {1.0, 1.2, 1.25}).verdict ==
          RefinementVerdict::Inconclusive);
    CHECK_THROWS_AS(classify_refinement({0.1}, {1.0}), FitError);
}

TEST_CASE("equivalence triangle on the unit square") {
    AscentOptions opts;
    opts.restarts = 2;
    opts.max_iters = 150;
    auto rep = verify_corollary2(square(), 4.0, 0.1, {1.0 / 32, 1.0 / 64}, opts);
    CHECK(rep.a.verdict == RefinementVerdict::Stable);
    CHECK(rep.b.verdict == RefinementVerdict::Stable);
    CHECK(rep.c.verdict == RefinementVerdict::Stable);
    CHECK(rep.consistent);
}
