#pragma once

#include <Eigen/Dense>

#include "nspect/discrete_operator.hpp"

namespace nspect {

/// Lowest part of the spectrum of K u = lambda B u. Eigenvectors are
/// B-orthonormal, i.e. normalized to unit discrete L^2 norm, so sup_norms
/// are directly comparable with continuum sup norms of L^2-normalized
/// eigenfunctions.
struct SpectrumResult {
    std::vector<double> eigenvalues;  // ascending, repeated by multiplicity
    std::vector<double> residuals;    // ||K u - lambda B u|| / (lambda + 1)
    std::vector<double> sup_norms;    // max |u_n|
    Eigen::MatrixXd vectors;          // n x m

    double mass = 0;   // B = mass * I
    double h = 0;
    int dim = 0;
    double measure = 0;  // |Omega| of the raster
    uint64_t domain_id = 0;
    int iterations = 0;
    double tol = 0;
    uint64_t seed = 0;

    int count() const { return static_cast<int>(eigenvalues.size()); }

    /// Index ranges [first, last] with relative gaps below the cluster
    /// tolerance; ordering inside a cluster is not specified.
    std::vector<std::pair<int, int>> clusters(double rel_tol = 1e-6) const;
};

/// Block iteration (LOBPCG with a factorized shift preconditioner) for the
/// m lowest eigenpairs. The constant kernel vector is deflated analytically
/// and re-attached as the exact pair (0, const). Deterministic for a fixed
/// seed. Small problems take a dense path.
SpectrumResult lowest_eigenpairs(const DiscreteOperator& op, int m, double tol = 1e-8,
                                 uint64_t seed = 2024);

struct RayleighRitzEstimate {
    std::vector<double> mu;  // ascending; upper bounds for the true eigenvalues
    int requested_dim = 0;
    int effective_dim = 0;  // after B-orthogonalization rank filtering
    bool rank_deficient() const { return effective_dim < requested_dim; }
};

/// mu_n of the form restricted to span(basis columns); each mu_n bounds the
/// corresponding operator eigenvalue from above (min-max).
RayleighRitzEstimate rayleigh_ritz(const DiscreteOperator& op, const Eigen::MatrixXd& basis);

/// n-th Dirichlet eigenvalue of the unit ball (n = 0..20, increasing,
/// repeated by multiplicity), dims 1..3.
double dirichlet_ball_eigenvalue(int dim, int n);

/// Upper bound lambda_n <= gamma_{n,0,1} / r^2 from the discrete inradius r.
double inradius_upper_bound(const RasterDomain& raster, int n);

}  // namespace nspect
