#include "nspect/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <sstream>

namespace nspect {

namespace {

// B-orthonormalize columns (B = mass*I) via the Gram eigendecomposition,
// dropping directions below a relative rank threshold.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& S, double mass, int* rank_out = nullptr) {
    if (S.cols() == 0) {
        if (rank_out) *rank_out = 0;
        return S;
    }
    Eigen::MatrixXd G = mass * (S.transpose() * S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const auto& ev = es.eigenvalues();
    double gmax = std::max(ev.maxCoeff(), 0.0);
    double thresh = std::max(gmax * 1e-12, 1e-300);
    int rank = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > thresh) ++rank;
    Eigen::MatrixXd T(S.cols(), rank);
    int k = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] > thresh) T.col(k++) = es.eigenvectors().col(i) / std::sqrt(ev[i]);
    if (rank_out) *rank_out = rank;
    return S * T;
}

}  // namespace

std::vector<std::pair<int, int>> SpectrumResult::clusters(double rel_tol) const {
    std::vector<std::pair<int, int>> out;
    int i = 0;
    const int m = count();
    while (i < m) {
        int j = i;
        while (j + 1 < m &&
               eigenvalues[j + 1] - eigenvalues[j] <= rel_tol * std::max(1.0, eigenvalues[j + 1]))
            ++j;
        out.emplace_back(i, j);
        i = j + 1;
    }
    return out;
}

SpectrumResult lowest_eigenpairs(const DiscreteOperator& op, int m, double tol, uint64_t seed) {
    const int64_t n = op.size();
    if (m < 1 || m > n) throw SolverError("lowest_eigenpairs: need 1 <= m <= cell count");
    if (!(tol > 0)) throw SolverError("lowest_eigenpairs: tol must be positive");

    SpectrumResult res;
    res.mass = op.mass;
    res.h = op.h;
    res.dim = op.dim;
    res.measure = op.raster ? op.raster->measure() : op.mass * n;
    res.domain_id = op.domain_id;
    res.tol = tol;
    res.seed = seed;

    const double inv_sqrt_meas = 1.0 / std::sqrt(op.mass * n);

    auto finalize = [&](const Eigen::MatrixXd& V, const std::vector<double>& lam, int iters) {
        const int mi = static_cast<int>(lam.size());
        res.vectors.resize(n, mi + 1);
        res.vectors.col(0).setConstant(inv_sqrt_meas);
        res.eigenvalues.assign(1, 0.0);
        res.residuals.assign(1, 0.0);
        res.sup_norms.assign(1, inv_sqrt_meas);
        for (int i = 0; i < mi; ++i) {
            res.vectors.col(i + 1) = V.col(i);
            double lambda = std::max(lam[i], 0.0);
            res.eigenvalues.push_back(lambda);
            Eigen::VectorXd r = op.stiffness * V.col(i) - (lambda * op.mass) * V.col(i);
            res.residuals.push_back(r.norm() / (lambda + 1));
            res.sup_norms.push_back(V.col(i).cwiseAbs().maxCoeff());
        }
        res.iterations = iters;
    };

    if (m == 1) {
        finalize(Eigen::MatrixXd(n, 0), {}, 0);
        return res;
    }

    const int mi = m - 1;  // interior modes (constant deflated)

    if (n <= 600) {
        Eigen::MatrixXd dense = Eigen::MatrixXd(op.stiffness) / op.mass;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        Eigen::MatrixXd V(n, mi);
        std::vector<double> lam(mi);
        // skip the kernel mode; it is re-attached analytically
        for (int i = 0; i < mi; ++i) {
            lam[i] = es.eigenvalues()[i + 1];
            V.col(i) = es.eigenvectors().col(i + 1) / std::sqrt(op.mass);
        }
        finalize(V, lam, 0);
        return res;
    }

    // ---- factorized shift-invert block iteration with Rayleigh-Ritz ----
    // One step maps X to (K + B)^{-1} B X; the per-mode contraction is
    // (lambda_j + 1)/(lambda_{nb} + 1), so the block carries a buffer beyond
    // the requested count.
    const int extra = std::max(4, mi / 3);
    const int nb = static_cast<int>(std::min<int64_t>(mi + extra, n - 1));
    const int maxit = 50 * m;

    Eigen::SparseMatrix<double> shifted = op.stiffness;
    {
        Eigen::SparseMatrix<double> I(n, n);
        I.setIdentity();
        shifted += op.mass * I;
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("lowest_eigenpairs: factorization of K + B failed");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(n, nb);
    for (int j = 0; j < nb; ++j)
        for (int64_t i = 0; i < n; ++i) X(i, j) = gauss(rng);

    auto deflate = [&](Eigen::MatrixXd& M) {
        // remove the constant component (B-orthogonality to the kernel)
        Eigen::RowVectorXd means = M.colwise().mean();
        M.rowwise() -= means;
    };
    deflate(X);
    X = orthonormalize(X, op.mass);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(nb);
    int iters = 0;
    double best_worst_res = std::numeric_limits<double>::infinity();
    bool converged_all = false;

    while (iters < maxit) {
        ++iters;
        Eigen::MatrixXd Y = ldlt.solve(op.mass * X);
        deflate(Y);
        int rank = 0;
        Y = orthonormalize(Y, op.mass, &rank);
        if (rank < mi) throw SolverError("lowest_eigenpairs: iteration subspace collapsed");
        Eigen::MatrixXd G = Y.transpose() * (op.stiffness * Y).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
        X = Y * es.eigenvectors();
        theta = es.eigenvalues();

        Eigen::MatrixXd R =
            op.stiffness * X.leftCols(mi) - op.mass * X.leftCols(mi) * theta.head(mi).asDiagonal();
        double worst = 0;
        for (int j = 0; j < mi; ++j)
            worst = std::max(worst, R.col(j).norm() / (theta[j] + 1));
        best_worst_res = std::min(best_worst_res, worst);
        if (worst <= tol) {
            converged_all = true;
            break;
        }
    }

    if (!converged_all) {
        std::ostringstream msg;
        msg << "lowest_eigenpairs: no convergence within " << maxit
            << " iterations; best residual " << best_worst_res << " (tol " << tol << ")";
        throw SolverError(msg.str());
    }

    Eigen::MatrixXd V = X.leftCols(mi);
    std::vector<double> lam(theta.data(), theta.data() + mi);
    finalize(V, lam, iters);
    return res;
}

RayleighRitzEstimate rayleigh_ritz(const DiscreteOperator& op, const Eigen::MatrixXd& basis) {
    if (basis.rows() != op.size()) throw SolverError("rayleigh_ritz: basis dimension mismatch");
    if (basis.cols() < 1) throw SolverError("rayleigh_ritz: empty basis");
    RayleighRitzEstimate est;
    est.requested_dim = static_cast<int>(basis.cols());
    int rank = 0;
    Eigen::MatrixXd U = orthonormalize(basis, op.mass, &rank);
    est.effective_dim = rank;
    if (rank == 0) throw SolverError("rayleigh_ritz: basis is numerically zero");
    Eigen::MatrixXd G = U.transpose() * (op.stiffness * U).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
    est.mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + rank);
    for (double& v : est.mu) v = std::max(v, 0.0);
    return est;
}

double dirichlet_ball_eigenvalue(int dim, int n) {
    if (n < 0 || n > 20) throw Error("dirichlet_ball_eigenvalue: table covers n in [0, 20]");
    if (dim == 1) {
        // interval (-1, 1): (k pi / 2)^2
        double k = n + 1;
        return k * k * 2.4674011002723395;  // (pi/2)^2
    }
    if (dim == 2) {
        // squares of Bessel zeros j_{m,k}, increasing, with multiplicities
        static const double tab[21] = {
            5.783185962946785,  14.681970642123893, 14.681970642123893, 26.374616427163247,
            26.374616427163247, 30.471262343662087, 40.706465818200314, 40.706465818200314,
            49.218456321694864, 49.218456321694864, 57.582940903291540, 57.582940903291540,
            70.849998919095370, 70.849998919095370, 74.887006790695183, 76.938928333647060,
            76.938928333647060, 95.277572544037341, 95.277572544037341, 98.726272477242088,
            98.726272477242088};
        return tab[n];
    }
    if (dim == 3) {
        // squares of spherical Bessel zeros, multiplicity 2l+1
        static const double tab[21] = {
            9.869604401089358,  20.190728556426629, 20.190728556426629, 20.190728556426629,
            33.217461914268368, 33.217461914268368, 33.217461914268368, 33.217461914268368,
            33.217461914268368, 39.478417604357434, 48.831193643619198, 48.831193643619198,
            48.831193643619198, 48.831193643619198, 48.831193643619198, 48.831193643619198,
            48.831193643619198, 59.679516707916986, 59.679516707916986, 59.679516707916986,
            66.954311975149983};
        return tab[n];
    }
    throw Error("dirichlet_ball_eigenvalue: dim must be 1..3");
}

double inradius_upper_bound(const RasterDomain& raster, int n) {
    double r = raster.inradius();
    if (!(r > 0)) throw DomainError("inradius_upper_bound: degenerate raster");
    return dirichlet_ball_eigenvalue(raster.dim(), n) / (r * r);
}

}  // namespace nspect
