#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <fstream>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "nspect/discrete_operator.hpp"

using namespace nspect;

namespace {

BoxDomain box1d(double len = 1.0) {
    Box b;
    b.dim = 1;
    b.lo = {0, 0, 0};
    b.hi = {len, 0, 0};
    return BoxDomain(b);
}

BoxDomain square() {
    Box b;
    b.dim = 2;
    b.lo = {0, 0, 0};
    b.hi = {1, 1, 0};
    return BoxDomain(b);
}

}  // namespace

TEST_CASE("1D operator is the Neumann tridiagonal with the cosine spectrum") {
    const int n = 64;
    auto op = assemble(rasterize(box1d(), 1.0 / n));
    REQUIRE(op.size() == n);
    const double h = op.h;
    Eigen::MatrixXd dense = Eigen::MatrixXd(op.stiffness);
    for (int i = 0; i < n; ++i) {
        int deg = (i == 0 || i == n - 1) ? 1 : 2;
        CHECK(dense(i, i) == doctest::Approx(deg / h));  // h^{N-2} = 1/h in 1D
        if (i + 1 < n) CHECK(dense(i, i + 1) == doctest::Approx(-1 / h));
    }
    // generalized eigenvalues (2/h^2)(1 - cos(pi m / n))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense / op.mass);
    for (int m = 0; m < 6; ++m) {
        double expect = 2.0 / (h * h) * (1 - std::cos(M_PI * m / n));
        CHECK(es.eigenvalues()[m] == doctest::Approx(expect).epsilon(1e-10));
    }
    // and they approach m^2 pi^2 as the grid refines
    auto fine = assemble(rasterize(box1d(), 1.0 / 512));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(Eigen::MatrixXd(fine.stiffness) / fine.mass);
    for (int m = 1; m < 4; ++m)
        CHECK(ef.eigenvalues()[m] == doctest::Approx(m * m * M_PI * M_PI).epsilon(2e-5 * m * m));
}

TEST_CASE("2x2 square block matches the dense face-sum oracle") {
    auto op = assemble(rasterize(square(), 0.5));
    REQUIRE(op.size() == 4);
    // oracle: enumerate the 4 faces by hand, h^{N-2} = 1
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(4, 4);
    auto add_face = [&](int i, int j) {
        K(i, i) += 1;
        K(j, j) += 1;
        K(i, j) -= 1;
        K(j, i) -= 1;
    };
    // cells: (0,0)=0, (1,0)=1, (0,1)=2, (1,1)=3 row-major
    add_face(0, 1);
    add_face(2, 3);
    add_face(0, 2);
    add_face(1, 3);
    CHECK((Eigen::MatrixXd(op.stiffness) - K).norm() == doctest::Approx(0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K / op.mass);
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-14);
    CHECK(es.eigenvalues()[1] == doctest::Approx(2.0 / (0.5 * 0.5)).epsilon(1e-12));
    CHECK(es.eigenvalues()[3] == doctest::Approx(4.0 / (0.5 * 0.5)).epsilon(1e-12));
}

TEST_CASE("constants are in the kernel exactly") {
    CuspDomain cusp(2, 0.5);
    auto op = assemble(rasterize(cusp, 1.0 / 64));
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
    CHECK((op.stiffness * ones).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(op.quadratic_form(ones) == 0.0);
    // symmetry is exact by assembly
    Eigen::MatrixXd diff =
        Eigen::MatrixXd(op.stiffness.transpose()) - Eigen::MatrixXd(op.stiffness);
    CHECK(diff.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("quadratic form values") {
    auto op = assemble(rasterize(square(), 1.0 / 128));
    // f = x coordinate: integral of |grad|^2 = 1 up to O(h)
    Eigen::VectorXd fx(op.size());
    for (int32_t c = 0; c < op.size(); ++c) fx[c] = op.raster->cell_center(c)[0];
    CHECK(op.quadratic_form(fx) == doctest::Approx(1.0).epsilon(2.0 / 128));
    // sobolev norm of f = x: sqrt(1 + 1/3) within 2%
    CHECK(op.sobolev_norm(fx) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(0.02));
    // f == 1 and f == 0
    CHECK(op.sobolev_norm(Eigen::VectorXd::Ones(op.size())) == doctest::Approx(1.0));
    CHECK(op.sobolev_norm(Eigen::VectorXd::Zero(op.size())) == doctest::Approx(0.0));
    CHECK_THROWS_AS(op.quadratic_form(Eigen::VectorXd::Zero(3)), SolverError);
}

TEST_CASE("random vector on 3x3 raster matches direct face enumeration") {
    auto op = assemble(rasterize(square(), 1.0 / 3));
    REQUIRE(op.size() == 9);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-1, 1);
    Eigen::VectorXd f(9);
    for (int i = 0; i < 9; ++i) f[i] = uni(rng);
    double oracle = 0;
    auto at = [&](int ix, int iy) { return f[op.raster->cell_at(ix, iy, 0)]; };
    for (int iy = 0; iy < 3; ++iy)
        for (int ix = 0; ix < 3; ++ix) {
            if (ix + 1 < 3) oracle += std::pow(at(ix, iy) - at(ix + 1, iy), 2);
            if (iy + 1 < 3) oracle += std::pow(at(ix, iy) - at(ix, iy + 1), 2);
        }
    CHECK(op.quadratic_form(f) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("Galerkin consistency at rate O(h) or better") {
    auto energy = [&](double h) {
        auto op = assemble(rasterize(square(), h));
        Eigen::VectorXd f(op.size());
        for (int32_t c = 0; c < op.size(); ++c) {
            Point p = op.raster->cell_center(c);
            f[c] = std::cos(M_PI * p[0]) * std::cos(M_PI * p[1]);
        }
        return op.quadratic_form(f);
    };
    const double exact = M_PI * M_PI / 2;  // integral of |grad cos(pi x) cos(pi y)|^2
    double e1 = std::abs(energy(1.0 / 32) - exact);
    double e2 = std::abs(energy(1.0 / 64) - exact);
    CHECK(e2 <= 0.6 * e1);
    CHECK(e2 <= 0.05 * exact);
}

TEST_CASE("kernel of K is exactly the constants on a connected raster") {
    // 12-cell L-shape
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
    REQUIRE(raster->cell_count() == 12);
    auto op = assemble(raster);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.stiffness));
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-13);
    CHECK(es.eigenvalues()[1] > 1e-6);
}

TEST_CASE("semigroup of the generator preserves positivity (dense exponential)") {
    auto op = assemble(rasterize(square(), 0.2));  // 25 cells
    Eigen::MatrixXd G = Eigen::MatrixXd(op.stiffness) / op.mass;
    for (double t : {0.001, 0.01, 0.1, 1.0}) {
        Eigen::MatrixXd E = (-t * G).exp();
        CHECK(E.minCoeff() >= -1e-12);
        // mass conservation: row sums stay 1
        CHECK((E.rowwise().sum() - Eigen::VectorXd::Ones(25)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("coordinate export round trip") {
    auto op = assemble(rasterize(square(), 0.5));
    op.export_coordinate_text("/tmp/nspect_k.txt");
    std::ifstream in("/tmp/nspect_k.txt");
    int r, c;
    double v;
    double sum = 0;
    int count = 0;
    while (in >> r >> c >> v) {
        sum += v;
        ++count;
    }
    CHECK(count == 12);                      // 4 diagonal + 8 off-diagonal stored entries
    CHECK(sum == doctest::Approx(0.0));      // row sums vanish
}
