#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nspect/heat.hpp"
#include "nspect/perturbation.hpp"

using namespace nspect;

namespace {

GraphDomain unit_square_graph() {
    Box base;
    base.dim = 1;
    base.lo = {0, 0, 0};
    base.hi = {1, 0, 0};
    return GraphDomain(base, Profile::from_expr(Expr::parse("1", {"x"})), 1.0, 1.0, 1.0, 1.0);
}

BoxDomain square() {
    Box b;
    b.dim = 2;
    b.lo = {0, 0, 0};
    b.hi = {1, 1, 0};
    return BoxDomain(b);
}

}  // namespace

TEST_CASE("graph shrink produces the rectangle with the analytic spectrum") {
    auto g = unit_square_graph();
    auto g2 = graph_shrink(g, 0.1);
    CHECK(g2.k_lo() == doctest::Approx(0.9));
    // containment on a shared raster is exact
    auto r1 = rasterize(g, 1.0 / 50);
    auto r2 = rasterize(g2, 1.0 / 50);
    for (int32_t c = 0; c < r2->cell_count(); ++c) CHECK(r1->contains(r2->cell_center(c)));
    CHECK(r2->measure() == doctest::Approx(0.9));
    CHECK_THROWS_AS(graph_shrink(g, 0.7), DomainError);
}

TEST_CASE("collar removal on square, disc and cusp") {
    auto rs = rasterize(square(), 1.0 / 160);
    auto inner = collar_removal(*rs, 0.05);
    CHECK(inner->measure() == doctest::Approx(0.81).epsilon(0.03));
    for (int32_t c = 0; c < inner->cell_count(); ++c)
        CHECK(rs->contains(inner->cell_center(c)));

    BallDomain disc(2, make_point(0, 0), 1.0);
    auto rd = rasterize(disc, 2.0 / 128);
    auto din = collar_removal(*rd, 0.1);
    CHECK(din->measure() == doctest::Approx(M_PI * 0.81).epsilon(0.03));

    CuspDomain cusp(2, 0.5);
    auto rc = rasterize(cusp, 1.0 / 128);
    auto cin = collar_removal(*rc, 0.02);
    CHECK(cin->cell_count() > 0);
    CHECK(rs->measure() - inner->measure() == doctest::Approx(rs->collar_measure(0.05)));
}

TEST_CASE("restriction chain: identical domains give mu equal to lambda") {
    auto r = rasterize(square(), 1.0 / 40);
    auto op = assemble(r);
    auto spec = lowest_eigenpairs(op, 6, 1e-10);
    auto map = shared_grid_cell_map(*r, *r);
    auto rep = verify_theorem13(spec, op, spec, map, 1.2, 5);
    CHECK(rep.chain_pass);
    CHECK(rep.measure_diff == doctest::Approx(0.0));
    for (const auto& row : rep.rows) {
        CHECK(row.mu2 == doctest::Approx(row.lambda1).epsilon(1e-8));
        CHECK(row.smallness_ok);
    }
}

TEST_CASE("restriction chain on square minus collar") {
    auto r1 = rasterize(square(), 1.0 / 100);
    auto op1 = assemble(r1);
    auto spec1 = lowest_eigenpairs(op1, 7, 1e-9);
    auto r2 = collar_removal(*r1, 0.03);
    auto op2 = assemble(r2);
    auto spec2 = lowest_eigenpairs(op2, 7, 1e-9);
    double c5 = smoothing_bound_envelope(spec1, 2.5);
    auto rep = verify_theorem13(spec1, op2, spec2, shared_grid_cell_map(*r1, *r2), c5, 6);
    CHECK(rep.chain_pass);       // lambda2 <= mu2 <= measure bound, every n
    CHECK_FALSE(rep.all_conclusive);  // smallness threshold is astronomically small
    for (const auto& row : rep.rows) {
        CHECK(row.lambda2 <= row.mu2 + 1e-7 * (1 + row.lambda1));
        CHECK(row.mu2 >= row.lambda1 - 1e-7);  // inner domain raises eigenvalues here
    }
}

TEST_CASE("square atlas validates and builds a deformation") {
    auto atlas = square_atlas(0.05);
    auto sq = square();
    auto val = atlas.validate(sq, 96);
    CHECK(val.cover_ok);
    CHECK(val.subgraph_ok);
    CHECK(val.margin_ok);

    auto map = build_deformation(atlas, 0.0125, sq);
    // partition of unity residual on a fresh sample set
    double worst = 0;
    for (int i = 0; i < 37; ++i)
        for (int j = 0; j < 37; ++j) {
            Point p{(i + 0.5) / 37, (j + 0.5) / 37, 0};
            worst = std::max(worst, map.partition_residual(p));
        }
    CHECK(worst <= 1e-12);

    // Jacobian deviation is O(eps)
    auto rep = verify_deformation_inclusions(map, sq);
    CHECK(rep.jacobian_deviation <= 1.0 * map.eps() * 40);  // loose sanity
    CHECK(rep.missed_deep_cells == 0);
    CHECK(rep.image_outside_cells == 0);
    CHECK(rep.injective_ok);
    CHECK(rep.a_depth > 0);
    CHECK(rep.measure_lost > 0);
}

TEST_CASE("deformation at eps -> 0 approaches the identity") {
    auto atlas = square_atlas(0.05);
    DeformationMap map(atlas, 0.0);
    for (double x : {0.1, 0.5, 0.9})
        for (double y : {0.05, 0.4, 0.95}) {
            Point p{x, y, 0};
            Point q = map.apply(p);
            CHECK(dist2(p, q) == 0.0);
        }
}

TEST_CASE("single-chart strip: pure translation, measure loss eps * |G|") {
    Box base;
    base.dim = 1;
    base.lo = {0, 0, 0};
    base.hi = {1, 0, 0};
    GraphDomain strip(base, Profile::from_expr(Expr::parse("0.5", {"x"})), 1.0, 1.0, 0.5, 0.5);
    auto atlas = strip_atlas(base, 0.5, 0.2);
    double eps = 0.05;
    DeformationMap map(atlas, eps);
    // psi == 1 on the strip: displacement is the constant inward translation
    for (double x : {0.1, 0.6, 0.95})
        for (double y : {0.05, 0.3, 0.45}) {
            Point p{x, y, 0};
            Point q = map.apply(p);
            CHECK(q[0] == doctest::Approx(x));
            CHECK(q[1] == doctest::Approx(y - eps).epsilon(1e-12));
        }
    auto raster = rasterize(strip, 1.0 / 200);
    auto image = deformation_image(map, *raster);
    CHECK(raster->measure() - image->measure() == doctest::Approx(eps * 1.0).epsilon(1e-9));
}

TEST_CASE("stability sweep for the rectangle shrink family") {
    auto g = unit_square_graph();
    StabilityOptions opts;
    opts.n_max = 6;
    opts.h = 1.0 / 200;
    opts.tol = 1e-9;
    std::vector<double> eps = {0.02, 0.04, 0.08};
    auto rep = stability_sweep(g, PerturbationFamily::GraphShrink, eps, opts);
    CHECK(rep.inclusions_ok);
    CHECK(rep.class_ok);
    CHECK(rep.monotonicity_ok);

    // analytic targets pi^2 (j^2 + k^2/(1-eps)^2), sorted
    for (size_t ie = 0; ie < eps.size(); ++ie) {
        std::vector<double> targets;
        for (int j = 0; j <= 4; ++j)
            for (int k = 0; k <= 4; ++k)
                targets.push_back(M_PI * M_PI *
                                  (j * j + k * k / ((1 - eps[ie]) * (1 - eps[ie]))));
        std::sort(targets.begin(), targets.end());
        for (int n = 0; n <= opts.n_max; ++n)
            CHECK(rep.lambda2[ie][n] == doctest::Approx(targets[n]).epsilon(0.01));
    }

    // modes that move have deviation ~ eps: fitted exponent near 1
    for (int n = 1; n <= opts.n_max; ++n) {
        if (std::isnan(rep.exponent_n[n])) continue;
        CHECK(rep.exponent_n[n] >= 0.8);
        CHECK(rep.exponent_n[n] <= 1.25);
    }
}

TEST_CASE("corollary 16 chain on the square") {
    StabilityOptions opts;
    opts.n_max = 4;
    opts.h = 1.0 / 160;
    opts.tol = 1e-9;
    auto rep = verify_corollary16(square(), {0.025, 0.05, 0.1}, 1.0, 4, opts);
    CHECK(rep.two_sided);
    CHECK(rep.pass);
    CHECK(rep.limit_deviation <= 0.15);
    for (const auto& row : rep.rows) CHECK(row.ok);
}

TEST_CASE("shared grid map rejects non-subsets") {
    auto r1 = rasterize(square(), 1.0 / 20);
    BallDomain disc(2, make_point(0.5, 0.5), 0.6);
    auto r2 = rasterize(disc, 1.2 / 24);
    CHECK_THROWS_AS(shared_grid_cell_map(*r1, *r2), DomainError);
}
