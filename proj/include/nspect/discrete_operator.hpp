#pragma once

#include <Eigen/Sparse>
#include <memory>

#include "nspect/domain.hpp"

namespace nspect {

/// Sparse realization of the Neumann quadratic form on a raster: the 2N+1
/// point finite-volume stencil over inside cells. Faces to outside cells
/// carry no term, which is the natural (do-nothing) boundary condition.
///
/// K is symmetric positive semidefinite with K*1 = 0; the lumped mass matrix
/// is B = h^N * I on the uniform raster.
struct DiscreteOperator {
    std::shared_ptr<const RasterDomain> raster;
    Eigen::SparseMatrix<double> stiffness;  // K
    double mass = 0;                        // B = mass * I, mass = h^N
    double h = 0;
    int dim = 0;
    uint64_t domain_id = 0;

    int64_t size() const { return stiffness.rows(); }

    /// f^T K f  (= sum over interior faces of h^{N-2} (f_i - f_j)^2).
    double quadratic_form(const Eigen::VectorXd& f) const;

    /// Discrete W^{1,2} norm sqrt(f^T K f + f^T B f).
    double sobolev_norm(const Eigen::VectorXd& f) const;

    double l2_norm(const Eigen::VectorXd& f) const {
        return std::sqrt(mass) * f.norm();
    }
    double lq_norm(const Eigen::VectorXd& f, double q) const;

    /// Writes (row, col, value) triplets, one per line.
    void export_coordinate_text(const std::string& path) const;
};

/// Assembles stiffness and mass matrices for a connected raster.
/// A single-cell raster yields the trivial operator (warning case, not error).
DiscreteOperator assemble(std::shared_ptr<const RasterDomain> raster);

}  // namespace nspect
