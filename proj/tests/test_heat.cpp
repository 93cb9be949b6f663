#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "nspect/heat.hpp"

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

}  // namespace

TEST_CASE("eigenvector and constant propagation are exact") {
    auto op = assemble(rasterize(square(), 1.0 / 24));
    auto spec = lowest_eigenpairs(op, 6, 1e-10);
    double t = 0.37;
    Eigen::VectorXd f3 = spec.vectors.col(3);
    auto out = semigroup_apply(spec, f3, t);
    Eigen::VectorXd expect = std::exp(-spec.eigenvalues[3] * t) * f3;
    CHECK((out.value - expect).lpNorm<Eigen::Infinity>() <= 1e-12);

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
    for (double tt : {0.01, 1.0, 50.0})
        CHECK((semigroup_apply(spec, ones, tt).value - ones).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK_THROWS_AS(semigroup_apply(spec, ones, 0.0), SolverError);
}

TEST_CASE("semigroup matches the dense matrix exponential") {
    // 10-cell interval with the full spectrum
    auto op = assemble(rasterize(box1d(), 0.1));
    auto spec = lowest_eigenpairs(op, 10, 1e-12);
    Eigen::MatrixXd G = Eigen::MatrixXd(op.stiffness) / op.mass;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0, 1);
    Eigen::VectorXd f(10);
    for (int i = 0; i < 10; ++i) f[i] = gauss(rng);
    for (double t : {0.3, 0.05}) {
        Eigen::VectorXd dense = ((-t * G).exp() * f).eval();
        auto spectral = semigroup_apply(spec, f, t);
        CHECK((dense - spectral.value).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
    // 200-cell 2D raster, truncated comparison not applicable: use full m
    auto op2 = assemble(rasterize(square(), 1.0 / 14));  // 196 cells
    auto spec2 = lowest_eigenpairs(op2, 196, 1e-11);
    Eigen::MatrixXd G2 = Eigen::MatrixXd(op2.stiffness) / op2.mass;
    Eigen::VectorXd f2 = Eigen::VectorXd::LinSpaced(196, -1.0, 2.0);
    Eigen::VectorXd dense2 = ((-0.2 * G2).exp() * f2).eval();
    CHECK((dense2 - semigroup_apply(spec2, f2, 0.2).value).lpNorm<Eigen::Infinity>() <= 1e-8);
    // positivity of the untruncated kernel on the small raster
    Eigen::MatrixXd E = (-0.05 * G2).exp();
    CHECK(E.minCoeff() > 0.0);
}

TEST_CASE("trace limits and monotone convex decay") {
    auto op = assemble(rasterize(box1d(), 1.0 / 200));
    auto spec = lowest_eigenpairs(op, 8, 1e-10);
    CHECK(kernel_diag_trace(spec, 500.0) == doctest::Approx(1.0).epsilon(1e-9));
    double prev = kernel_diag_trace(spec, 0.01);
    double prev_diff = 0;
    bool first = true;
    for (double t = 0.02; t <= 0.3; t += 0.01) {
        double z = kernel_diag_trace(spec, t);
        CHECK(z < prev);
        if (!first) CHECK(z - prev >= prev_diff - 1e-12);  // convexity: differences increase
        prev_diff = z - prev;
        prev = z;
        first = false;
    }
}

TEST_CASE("square trace slope matches the theta-series oracle") {
    auto op = assemble(rasterize(square(), 1.0 / 64));
    auto spec = lowest_eigenpairs(op, 60, 1e-8);
    auto fit = heat_trace_slope(spec, 0.01, 0.1, 9);

    // oracle: Z(t) = (sum_j e^{-pi^2 j^2 t})^2, deflated by the zero mode
    auto theta = [](double t) {
        double s = 0;
        for (int j = 0; j <= 60; ++j) s += std::exp(-M_PI * M_PI * j * j * t);
        return s;
    };
    std::vector<double> lx, ly;
    for (int i = 0; i < 9; ++i) {
        double t = 0.01 * std::pow(10.0, static_cast<double>(i) / 8);
        lx.push_back(std::log(t));
        ly.push_back(std::log(theta(t) * theta(t) - 1.0));
    }
    auto oracle = fit_line(lx, ly);
    CHECK(fit.slope == doctest::Approx(oracle.slope).epsilon(0.02));
    CHECK(fit.slope >= -1.15);
    CHECK(fit.slope <= -0.85);
}

TEST_CASE("semigroup property and mass conservation") {
    auto op = assemble(rasterize(square(), 1.0 / 20));
    auto spec = lowest_eigenpairs(op, 12, 1e-10);
    Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(op.size(), 0.0, 1.0);
    auto once = semigroup_apply(spec, f, 0.25);
    auto twice = semigroup_apply(spec, semigroup_apply(spec, f, 0.1).value, 0.15);
    CHECK((once.value - twice.value).lpNorm<Eigen::Infinity>() <= 1e-9);
    // (e^{-Ht} f, 1) = (f, 1) exactly in the spectral representation
    double before = spec.mass * f.sum();
    double after = spec.mass * once.value.sum();
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("interval sup-norm chain with M = 1") {
    auto op = assemble(rasterize(box1d(), 1.0 / 1000));
    auto spec = lowest_eigenpairs(op, 12, 1e-9);
    double c5 = smoothing_bound_envelope(spec, 1.0);
    auto rep10 = verify_lemma10(spec, c5, 1.0);
    CHECK(rep10.pass);
    CHECK(rep10.violations == 0);
    // sup norms are sqrt(2), lambda_n = n^2 pi^2: the bound has ample margin
    CHECK(rep10.worst_margin > 0);

    double c6 = kernel_bound_envelope(spec, 1.0);
    auto rep11 = verify_lemma11(spec, c6, spec.measure, 1.0);
    CHECK((rep11.status == EigenvalueGrowthReport::Status::Pass ||
           rep11.status == EigenvalueGrowthReport::Status::Inconclusive));
    if (rep11.status == EigenvalueGrowthReport::Status::Pass) CHECK(rep11.violations == 0);

    int n0 = std::max(1, rep11.n0);
    auto rep12 = verify_lemma12(spec, rep10.c9, 1.0, n0);
    CHECK(rep12.pass);
}

TEST_CASE("square chain with the fitted exponent") {
    auto op = assemble(rasterize(square(), 1.0 / 64));
    auto spec = lowest_eigenpairs(op, 40, 1e-8);
    auto fit = fit_ultracontractivity(spec);
    CHECK(fit.exponent_M >= 1.8);
    CHECK(fit.exponent_M <= 3.0);
    auto rep10 = verify_lemma10(spec, fit.c5, fit.exponent_M);
    CHECK(rep10.pass);
    double c6 = kernel_bound_envelope(spec, 2.5);
    auto rep11 = verify_lemma11(spec, c6, 1.0, 2.5);
    CHECK(rep11.pass());
    auto rep12 = verify_lemma12(spec, std::exp(1.0) * smoothing_bound_envelope(spec, 2.5), 2.5,
                                rep11.n0);
    CHECK(rep12.pass);
}

TEST_CASE("degenerate single-cell spectrum satisfies the reconstruction bound") {
    Box bb;
    bb.dim = 2;
    bb.lo = {0, 0, 0};
    bb.hi = {1, 1, 0};
    auto raster = RasterDomain::from_cells(bb, 1.0, {{0, 0, 0}}, "cell");
    auto op = assemble(raster);
    auto spec = lowest_eigenpairs(op, 1, 1e-10);
    CHECK(spec.eigenvalues[0] == 0.0);
    auto rep = verify_lemma12(spec, 2.0, 1.0, 1);
    CHECK(rep.pass);
}

TEST_CASE("gaussian tail integral agrees with the closed form") {
    // integral_0^inf exp(-s^{2/M}/2) ds = 2^{M/2} Gamma(M/2 + 1)
    for (double M : {1.0, 2.0, 2.5, 3.0}) {
        double expect = std::pow(2.0, M / 2) * std::tgamma(M / 2 + 1);
        CHECK(gaussian_tail_integral(M) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("kernel slice symmetry and trace identity") {
    auto op = assemble(rasterize(square(), 0.1));
    auto spec = lowest_eigenpairs(op, 20, 1e-10);
    std::vector<std::pair<int32_t, int32_t>> pairs = {{0, 5}, {5, 0}, {3, 3}, {7, 2}, {2, 7}};
    auto slice = kernel_slice(spec, 0.05, pairs);
    CHECK(slice.values[0] == slice.values[1]);
    CHECK(slice.values[3] == slice.values[4]);
    // sum over the diagonal recovers the truncated trace
    Eigen::VectorXd diag = kernel_diagonal(spec, 0.05);
    CHECK(spec.mass * diag.sum() == doctest::Approx(kernel_diag_trace(spec, 0.05)).epsilon(1e-12));
}
