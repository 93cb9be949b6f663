#include "nspect/discrete_operator.hpp"

#include <fstream>
#include <vector>

namespace nspect {

DiscreteOperator assemble(std::shared_ptr<const RasterDomain> raster) {
    if (!raster || raster->cell_count() < 1) throw DomainError("assemble: empty raster");
    DiscreteOperator op;
    op.raster = raster;
    op.h = raster->h();
    op.dim = raster->dim();
    op.domain_id = raster->id();
    op.mass = raster->cell_volume();

    const int64_t n = raster->cell_count();
    const double w = std::pow(op.h, op.dim - 2);  // face weight h^{N-2}
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) * (2 * op.dim + 1));
    std::vector<double> diag(n, 0.0);

    for (int32_t c = 0; c < n; ++c) {
        int xyz[3];
        raster->cell_coords(c, xyz);
        for (int a = 0; a < op.dim; ++a) {
            // upper neighbour along axis a; each interior face counted once
            int nb[3] = {xyz[0], xyz[1], xyz[2]};
            nb[a] += 1;
            if (nb[a] >= raster->n(a)) continue;
            int32_t cn = raster->cell_at(nb[0], nb[1], nb[2]);
            if (cn < 0) continue;
            trips.emplace_back(c, cn, -w);
            trips.emplace_back(cn, c, -w);
            diag[c] += w;
            diag[cn] += w;
        }
    }
    for (int32_t c = 0; c < n; ++c) trips.emplace_back(c, c, diag[c]);
    op.stiffness.resize(n, n);
    op.stiffness.setFromTriplets(trips.begin(), trips.end());
    op.stiffness.makeCompressed();
    return op;
}

double DiscreteOperator::quadratic_form(const Eigen::VectorXd& f) const {
    if (f.size() != size()) throw SolverError("quadratic_form: dimension mismatch");
    return f.dot(stiffness * f);
}

double DiscreteOperator::sobolev_norm(const Eigen::VectorXd& f) const {
    if (f.size() != size()) throw SolverError("sobolev_norm: dimension mismatch");
    return std::sqrt(quadratic_form(f) + mass * f.squaredNorm());
}

double DiscreteOperator::lq_norm(const Eigen::VectorXd& f, double q) const {
    if (f.size() != size()) throw SolverError("lq_norm: dimension mismatch");
    double s = 0;
    for (int64_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), q);
    return std::pow(mass * s, 1.0 / q);
}

void DiscreteOperator::export_coordinate_text(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out.precision(17);
    for (int k = 0; k < stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, k); it; ++it)
            out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace nspect
