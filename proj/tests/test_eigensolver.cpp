#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nspect/eigensolver.hpp"

using namespace nspect;

namespace {

BoxDomain box1d() {
    Box b;
    b.dim = 1;
    b.lo = {0, 0, 0};
    b.hi = {1, 0, 0};
    return BoxDomain(b);
}

BoxDomain square(double side = 1.0) {
    Box b;
    b.dim = 2;
    b.lo = {0, 0, 0};
    b.hi = {side, side, 0};
    return BoxDomain(b);
}

}  // namespace

TEST_CASE("interval spectrum n^2 pi^2") {
    auto op = assemble(rasterize(box1d(), 1.0 / 1000));
    auto spec = lowest_eigenpairs(op, 5, 1e-8);
    CHECK(spec.eigenvalues[0] <= 1e-10);
    for (int n = 1; n < 5; ++n) {
        CHECK(spec.eigenvalues[n] ==
              doctest::Approx(n * n * M_PI * M_PI).epsilon(0.005));
        // tight agreement with the exact discrete cosine eigenvalue
        double exact_discrete =
            2.0 * 1000.0 * 1000.0 * (1 - std::cos(M_PI * n / 1000.0));
        CHECK(spec.eigenvalues[n] == doctest::Approx(exact_discrete).epsilon(1e-7));
        CHECK(spec.residuals[n] <= 1e-8);
    }
    // sup norms approach sqrt(2) for the cosine modes
    for (int n = 1; n < 5; ++n) CHECK(spec.sup_norms[n] == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("unit square lowest ten eigenvalues") {
    auto op = assemble(rasterize(square(), 1.0 / 64));
    auto spec = lowest_eigenpairs(op, 10, 1e-8);
    const double p2 = M_PI * M_PI;
    const double expect[10] = {0, p2, p2, 2 * p2, 4 * p2, 4 * p2, 5 * p2, 5 * p2, 8 * p2, 9 * p2};
    CHECK(spec.eigenvalues[0] <= 1e-10);
    for (int n = 1; n < 10; ++n)
        CHECK(spec.eigenvalues[n] == doctest::Approx(expect[n]).epsilon(0.01));
    // mass-orthonormality of the eigenvector block
    Eigen::MatrixXd G = spec.mass * (spec.vectors.transpose() * spec.vectors);
    CHECK((G - Eigen::MatrixXd::Identity(10, 10)).lpNorm<Eigen::Infinity>() <= 1e-8);
    // kernel vector is the constant
    double c0 = spec.vectors(0, 0);
    CHECK((spec.vectors.col(0).array() - c0).abs().maxCoeff() == 0.0);
    // clusters group the degenerate pairs
    auto cl = spec.clusters();
    bool found_pair = false;
    for (auto [a, b] : cl)
        if (a == 1 && b == 2) found_pair = true;
    CHECK(found_pair);
}

TEST_CASE("determinism for a fixed seed") {
    auto op = assemble(rasterize(square(), 1.0 / 32));
    auto s1 = lowest_eigenpairs(op, 6, 1e-8, 99);
    auto s2 = lowest_eigenpairs(op, 6, 1e-8, 99);
    for (int n = 0; n < 6; ++n) CHECK(s1.eigenvalues[n] == s2.eigenvalues[n]);
}

TEST_CASE("L-shaped 12-cell raster matches an independent dense oracle") {
    std::vector<std::array<int, 3>> cells;
    for (int iy = 0; iy < 2; ++iy)
        for (int ix = 0; ix < 4; ++ix) cells.push_back({ix, iy, 0});
    for (int iy = 2; iy < 4; ++iy)
        for (int ix = 0; ix < 2; ++ix) cells.push_back({ix, iy, 0});
    Box bb;
    bb.dim = 2;
    bb.lo = {0, 0, 0};
    bb.hi = {1, 1, 0};
    auto raster = RasterDomain::from_cells(bb, 0.25, cells, "lshape");
    auto op = assemble(raster);

    // oracle: assemble the 12x12 matrix by explicit face loops and solve densely
    const double h = 0.25;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(12, 12);
    for (int32_t c = 0; c < raster->cell_count(); ++c) {
        int xyz[3];
        raster->cell_coords(c, xyz);
        for (int a = 0; a < 2; ++a) {
            int nb[3] = {xyz[0], xyz[1], 0};
            nb[a] += 1;
            if (nb[a] >= raster->n(a)) continue;
            int32_t cn = raster->cell_at(nb[0], nb[1], 0);
            if (cn < 0) continue;
            K(c, c) += 1;
            K(cn, cn) += 1;
            K(c, cn) -= 1;
            K(cn, c) -= 1;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K / (h * h));
    auto spec = lowest_eigenpairs(op, 12, 1e-12);
    for (int n = 0; n < 12; ++n)
        CHECK(spec.eigenvalues[n] == doctest::Approx(es.eigenvalues()[n]).epsilon(1e-10));
}

TEST_CASE("rayleigh-ritz bounds and the exact-subspace case") {
    auto op = assemble(rasterize(square(), 1.0 / 48));
    auto spec = lowest_eigenpairs(op, 8, 1e-9);
    // exact eigenvectors reproduce the eigenvalues
    auto rr = rayleigh_ritz(op, spec.vectors.leftCols(5));
    for (int n = 0; n < 5; ++n)
        CHECK(rr.mu[n] == doctest::Approx(spec.eigenvalues[n]).epsilon(1e-7));
    // random subspaces give upper bounds
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0, 1);
    Eigen::MatrixXd basis(op.size(), 3);
    for (int j = 0; j < 3; ++j)
        for (int64_t i = 0; i < op.size(); ++i) basis(i, j) = g(rng);
    auto rr2 = rayleigh_ritz(op, basis);
    for (int n = 0; n < 3; ++n) CHECK(rr2.mu[n] >= spec.eigenvalues[n] - 1e-9);
    // rank deficiency detected
    Eigen::MatrixXd degenerate(op.size(), 2);
    degenerate.col(0) = basis.col(0);
    degenerate.col(1) = 2.0 * basis.col(0);
    auto rr3 = rayleigh_ritz(op, degenerate);
    CHECK(rr3.rank_deficient());
    CHECK(rr3.effective_dim == 1);
}

TEST_CASE("inradius upper bound and its scaling") {
    auto r1 = rasterize(square(1.0), 1.0 / 64);
    auto spec = lowest_eigenpairs(assemble(r1), 4, 1e-8);
    double bound1 = inradius_upper_bound(*r1, 1);
    // r = 1/2 for the unit square, so the bound is ~4 * 14.682 = 58.7 >= pi^2
    CHECK(bound1 >= spec.eigenvalues[1]);
    CHECK(bound1 == doctest::Approx(4 * 14.681970642).epsilon(0.05));
    // doubling the side scales the bound by exactly 1/4 (identical raster)
    auto r2 = rasterize(square(2.0), 2.0 / 64);
    double bound2 = inradius_upper_bound(*r2, 1);
    CHECK(bound2 == doctest::Approx(bound1 / 4).epsilon(1e-12));
    CHECK_THROWS_AS(dirichlet_ball_eigenvalue(2, 21), Error);
    // table values are increasing in n
    for (int dim : {1, 2, 3})
        for (int n = 0; n < 20; ++n)
            CHECK(dirichlet_ball_eigenvalue(dim, n) <= dirichlet_ball_eigenvalue(dim, n + 1));
}

TEST_CASE("domain scaling law: eigenvalues scale by c^-2 exactly") {
    auto s1 = lowest_eigenpairs(assemble(rasterize(square(1.0), 1.0 / 32)), 6, 1e-10);
    auto s2 = lowest_eigenpairs(assemble(rasterize(square(3.0), 3.0 / 32)), 6, 1e-10);
    for (int n = 1; n < 6; ++n)
        CHECK(s2.eigenvalues[n] * 9.0 == doctest::Approx(s1.eigenvalues[n]).epsilon(1e-6));
}

TEST_CASE("weyl trend on the square") {
    auto op = assemble(rasterize(square(), 1.0 / 64));
    auto spec = lowest_eigenpairs(op, 41, 1e-6);
    // least-squares proportionality lambda_n ~ s n over n = 10..40 against 4 pi n
    double num = 0, den = 0;
    for (int n = 10; n <= 40; ++n) {
        num += spec.eigenvalues[n] * n;
        den += static_cast<double>(n) * n;
    }
    double s = num / den;
    CHECK(std::abs(s / (4 * M_PI) - 1.0) <= 0.25);
}

TEST_CASE("solver validation errors") {
    auto op = assemble(rasterize(square(), 0.5));
    CHECK_THROWS_AS(lowest_eigenpairs(op, 5, 1e-8), SolverError);   // m > cells
    CHECK_THROWS_AS(lowest_eigenpairs(op, 2, -1.0), SolverError);   // bad tol
}
