#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nspect/domain.hpp"

using namespace nspect;

namespace {

Box unit_square() {
    Box b;
    b.dim = 2;
    b.lo = {0, 0, 0};
    b.hi = {1, 1, 0};
    return b;
}

Box unit_interval() {
    Box b;
    b.dim = 1;
    b.lo = {0, 0, 0};
    b.hi = {1, 0, 0};
    return b;
}

}  // namespace

TEST_CASE("exact distances on box domains") {
    BoxDomain sq(unit_square());
    CHECK(distance_to_boundary(sq, make_point(0.5, 0.5)) == doctest::Approx(0.5));
    CHECK(distance_to_boundary(sq, make_point(0.1, 0.7)) == doctest::Approx(0.1));
    BoxDomain iv(unit_interval());
    CHECK(distance_to_boundary(iv, make_point(0.25)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(distance_to_boundary(sq, make_point(1.5, 0.5)), DomainError);
}

TEST_CASE("cusp distance matches dense polyline minimization") {
    CuspDomain cusp(2, 0.5);
    // oracle: brute-force nearest point on a 1e5-point boundary polyline
    const int n = 100000;
    auto oracle = [&](double x, double y) {
        double best = 1e300;
        for (int i = 0; i <= n; ++i) {
            double t = static_cast<double>(i) / n;
            double cy = t * t;  // curve (t, +-t^2) for gamma = 1/2
            best = std::min(best, std::min(std::hypot(x - t, y - cy), std::hypot(x - t, y + cy)));
        }
        for (int i = 0; i <= 1000; ++i) {  // right face
            double y2 = -1 + 2.0 * i / 1000;
            best = std::min(best, std::hypot(x - 1, y - y2));
        }
        return best;
    };
    for (auto [x, y] : {std::pair{0.5, 0.0}, {0.9, 0.1}, {0.3, -0.05}, {0.2, 0.0}}) {
        double d = distance_to_boundary(cusp, make_point(x, y));
        CHECK(d == doctest::Approx(oracle(x, y)).epsilon(1e-4));
    }
    // membership follows the defining inequalities exactly
    CHECK(cusp.contains(make_point(0.5, 0.2)));       // 0.2 < 0.25
    CHECK_FALSE(cusp.contains(make_point(0.5, 0.3)));  // 0.3 > 0.25
}

TEST_CASE("rasterize unit square and interval") {
    BoxDomain sq(unit_square());
    auto r = rasterize(sq, 1.0 / 64);
    CHECK(r->cell_count() == 64 * 64);
    CHECK(r->measure() == doctest::Approx(1.0));

    BoxDomain iv(unit_interval());
    auto r1 = rasterize(iv, 1.0 / 100);
    CHECK(r1->cell_count() == 100);
    CHECK(r1->measure() == doctest::Approx(1.0));
}

TEST_CASE("cusp raster measure matches quadrature of the profile") {
    CuspDomain cusp(2, 0.5);
    // |Omega| = integral over y in (-1,1) of (1 - |y|^(1/2)) dy, by quadrature
    const int n = 200000;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        double y = -1 + 2.0 * (i + 0.5) / n;
        acc += (1 - std::sqrt(std::abs(y))) * (2.0 / n);
    }
    auto r = rasterize(cusp, 1.0 / 256);
    CHECK(r->measure() == doctest::Approx(acc).epsilon(0.01));
}

TEST_CASE("collar measures") {
    BoxDomain sq(unit_square());
    CHECK(collar_measure(sq, 0.1, 0.1 / 8) == doctest::Approx(0.36).epsilon(0.02));
    BoxDomain iv(unit_interval());
    CHECK(collar_measure(iv, 0.1, 0.1 / 8) == doctest::Approx(0.2).epsilon(0.02));

    // refusal when the raster is too coarse for the requested eps
    auto r = rasterize(sq, 1.0 / 32);
    CHECK_THROWS_AS(r->collar_measure(0.1), DomainError);
}

TEST_CASE("cusp collar vs fine-raster oracle") {
    CuspDomain cusp(2, 0.5);
    double coarse = collar_measure(cusp, 0.05, 1.0 / 200);
    double fine = collar_measure(cusp, 0.05, 1.0 / 1024);  // oracle resolution
    CHECK(coarse == doctest::Approx(fine).epsilon(0.02));
}

TEST_CASE("distance transform agrees with exact distance within h*sqrt(N)") {
    BallDomain disc(2, make_point(0, 0), 1.0);
    auto r = rasterize(disc, 2.0 / 128);
    const double h = r->h();
    double worst = 0;
    for (int32_t c = 0; c < r->cell_count(); ++c) {
        Point p = r->cell_center(c);
        double exact = *disc.boundary_distance(p);
        worst = std::max(worst, std::abs(exact - r->cell_distance(c)));
    }
    CHECK(worst <= h * std::sqrt(2.0));

    BoxDomain sq(unit_square());
    auto rs = rasterize(sq, 1.0 / 64);
    for (int32_t c = 0; c < rs->cell_count(); ++c) {
        Point p = rs->cell_center(c);
        CHECK(std::abs(*sq.boundary_distance(p) - rs->cell_distance(c)) <=
              rs->h() * std::sqrt(2.0));
    }
}

TEST_CASE("collar measure is nondecreasing in eps") {
    CuspDomain cusp(2, 0.5);
    auto r = rasterize(cusp, 1.0 / 256);
    double prev = 0;
    for (double eps : {0.04, 0.06, 0.1, 0.15, 0.25}) {
        double m = r->collar_measure(eps);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("minkowski estimate on the unit square") {
    BoxDomain sq(unit_square());
    auto est = minkowski_dimension(sq, geometric_grid(0.002, 0.2, 8));
    CHECK(est.dimension == doctest::Approx(1.0).epsilon(0.1));
    CHECK(est.table.fitted_exponent > 0);
    CHECK(est.table.fitted_exponent <= 2.0);
}

TEST_CASE("minkowski validation errors") {
    BoxDomain sq(unit_square());
    CHECK_THROWS_AS(minkowski_dimension(sq, {0.1, 0.2, 0.3}), FitError);
    CHECK_THROWS_AS(minkowski_dimension(sq, geometric_grid(0.01, 0.05, 6)), FitError);
}

TEST_CASE("graph domain: membership, anchor, Hoelder quotient") {
    Box base = unit_interval();
    auto phi = Profile::from_expr(Expr::parse("max(1 - abs(x - 0.25), 1 - abs(x - 0.75), 0.75)",
                                              {"x"}));
    GraphDomain g(base, phi, 1.0, 1.0, 0.75, 1.0);
    CHECK(g.dim() == 2);
    CHECK(g.contains(make_point(0.25, 0.99)));
    CHECK_FALSE(g.contains(make_point(0.5, 0.8)));
    CHECK(g.contains(g.anchor()));
    // sampled Hoelder quotient must respect the declared constant
    CHECK(g.sampled_holder_quotient(257) <= 1.0 + 1e-9);
}

TEST_CASE("cusp rotated profile is gamma-Hoelder with constant 1") {
    // subgraph form of the cusp: z = 1 - x below phi(y) = 1 - |y|^gamma
    const double gamma = 0.5;
    auto phi = Profile::from_expr(Expr::parse("1 - abs(x)^0.5", {"x"}));
    Box base;
    base.dim = 1;
    base.lo = {-1, 0, 0};
    base.hi = {1, 0, 0};
    std::vector<double> xs;
    for (int i = 0; i <= 200; ++i) xs.push_back(-1 + 2.0 * i / 200);
    double sup = 0;
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = i + 1; j < xs.size(); ++j) {
            double num = std::abs(phi(&xs[i]) - phi(&xs[j]));
            sup = std::max(sup, num / std::pow(std::abs(xs[i] - xs[j]), gamma));
        }
    CHECK(sup <= 1.0 + 1e-9);
}

TEST_CASE("raster subset and pgm export") {
    BoxDomain sq(unit_square());
    auto r = rasterize(sq, 1.0 / 32);
    std::vector<uint8_t> keep(r->cell_count(), 0);
    for (int32_t c = 0; c < r->cell_count(); ++c)
        if (r->cell_distance(c) > 0.25) keep[c] = 1;
    auto inner = r->subset(keep, "inner");
    CHECK(inner->measure() == doctest::Approx(0.25).epsilon(0.05));
    inner->export_pgm("/tmp/nspect_test_inner.pgm");
    // implicit disc through the expression grammar
    Box bb;
    bb.dim = 2;
    bb.lo = {-1, -1, 0};
    bb.hi = {1, 1, 0};
    ImplicitDomain disc(2, bb, Expr::parse("1 - x*x - y*y", {"x", "y"}), make_point(0, 0));
    auto rd = rasterize(disc, 2.0 / 64);
    CHECK(rd->measure() == doctest::Approx(3.14159265).epsilon(0.01));
}
