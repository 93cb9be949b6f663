#include "nspect/perturbation.hpp"

#include <cmath>
#include <future>
#include <thread>

#include "nspect/heat.hpp"

namespace nspect {

GraphDomain graph_shrink(const GraphDomain& g, double eps) {
    if (!(eps > 0 && eps < 0.5)) throw DomainError("graph_shrink: eps must lie in (0, 1/2)");
    // realize (1-eps) phi as a finely sampled profile
    const Box& base = g.base();
    const double f = 1.0 - eps;
    if (base.dim == 1) {
        const int n = 8193;
        std::vector<double> vals(n);
        for (int i = 0; i < n; ++i) {
            double x = base.lo[0] + base.extent(0) * i / (n - 1);
            vals[i] = f * g.profile()(&x);
        }
        return GraphDomain(base, Profile::from_samples(std::move(vals), base, n), g.gamma(),
                           f * g.holder_const(), f * g.k_lo(), g.k_hi());
    }
    const int n = 513;
    std::vector<double> vals(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double xb[2] = {base.lo[0] + base.extent(0) * i / (n - 1),
                            base.lo[1] + base.extent(1) * j / (n - 1)};
            vals[static_cast<size_t>(j) * n + i] = f * g.profile()(xb);
        }
    return GraphDomain(base, Profile::from_samples(std::move(vals), base, n, n), g.gamma(),
                       f * g.holder_const(), f * g.k_lo(), g.k_hi());
}

std::shared_ptr<RasterDomain> collar_removal(const RasterDomain& raster, double eps) {
    if (!(eps > 0)) throw DomainError("collar_removal: eps must be positive");
    std::vector<uint8_t> keep(raster.cell_count(), 0);
    int64_t kept = 0;
    for (int32_t c = 0; c < raster.cell_count(); ++c)
        if (raster.cell_distance(c) > eps) {
            keep[c] = 1;
            ++kept;
        }
    if (kept == 0)
        throw DomainError("collar_removal: nothing remains at eps=" + std::to_string(eps));
    auto inner = raster.subset(keep, "collar-removed");
    if (inner->cell_count() != kept)
        throw DomainError("collar_removal: domain disconnects at eps=" + std::to_string(eps));
    return inner;
}

std::vector<int32_t> shared_grid_cell_map(const RasterDomain& outer, const RasterDomain& inner) {
    if (outer.dim() != inner.dim() || outer.h() != inner.h())
        throw DomainError("shared_grid_cell_map: rasters not on a shared grid");
    std::vector<int32_t> map(inner.cell_count(), -1);
    for (int32_t c = 0; c < inner.cell_count(); ++c) {
        int xyz[3];
        inner.cell_coords(c, xyz);
        int32_t oc = outer.cell_at(xyz[0], outer.dim() >= 2 ? xyz[1] : 0,
                                   outer.dim() == 3 ? xyz[2] : 0);
        if (oc < 0) throw DomainError("shared_grid_cell_map: inner raster is not a subset");
        map[c] = oc;
    }
    return map;
}

Theorem13Report verify_theorem13(const SpectrumResult& outer, const DiscreteOperator& inner_op,
                                 const SpectrumResult& inner, const std::vector<int32_t>& cell_map,
                                 double c5, int n_max) {
    if (n_max + 1 > outer.count() || n_max + 1 > inner.count())
        throw SolverError("verify_theorem13: spectra too short for n_max");
    Theorem13Report rep;
    rep.c5 = c5;
    rep.measure_diff = outer.measure - inner_op.raster->measure();
    if (rep.measure_diff < -1e-12) throw SolverError("verify_theorem13: inner domain larger");

    // restriction of the outer eigenvectors to the inner cells
    Eigen::MatrixXd restricted(inner_op.size(), n_max + 1);
    for (int k = 0; k <= n_max; ++k)
        for (int32_t c = 0; c < inner_op.size(); ++c)
            restricted(c, k) = outer.vectors(cell_map[c], k);

    rep.chain_pass = true;
    rep.all_conclusive = true;
    for (int n = 1; n <= n_max; ++n) {
        Theorem13Row row;
        row.n = n;
        row.lambda1 = outer.eigenvalues[n];
        row.lambda2 = inner.eigenvalues[n];
        auto rr = rayleigh_ritz(inner_op, restricted.leftCols(n + 1));
        row.mu2 = rr.mu.back();  // sup over the restricted (n+1)-dim subspace
        row.b_n1 = 2.0 * c5 * c5 * std::exp(2.0 * row.lambda1);
        row.eps_n1 = 1.0 / row.b_n1;
        row.smallness_ok = rep.measure_diff <= row.eps_n1;
        row.bound = (1.0 + row.b_n1 * rep.measure_diff) * row.lambda1;
        double tol = 1e-8 * (1.0 + row.lambda1);
        row.chain_ok = (row.lambda2 <= row.mu2 + tol) &&
                       (std::isinf(row.bound) || row.mu2 <= row.bound + tol);
        rep.chain_pass = rep.chain_pass && row.chain_ok;
        rep.all_conclusive = rep.all_conclusive && row.smallness_ok;
        rep.rows.push_back(row);
    }
    return rep;
}

namespace {

struct PairedSolve {
    std::shared_ptr<RasterDomain> raster;
    SpectrumResult spec;
};

SpectrumResult solve_raster(std::shared_ptr<const RasterDomain> raster, int m, double tol,
                            uint64_t seed) {
    auto op = assemble(std::move(raster));
    return lowest_eigenpairs(op, m, tol, seed);
}

}  // namespace

StabilityReport stability_sweep(const Domain& dom1, PerturbationFamily family,
                                const std::vector<double>& eps_grid,
                                const StabilityOptions& opts) {
    if (eps_grid.empty()) throw SolverError("stability_sweep: empty eps grid");
    std::vector<double> eps = eps_grid;
    std::sort(eps.begin(), eps.end());
    if (family == PerturbationFamily::Deformation && !opts.atlas)
        throw SolverError("stability_sweep: deformation family needs an atlas");

    StabilityReport rep;
    rep.family = family;
    rep.eps = eps;
    rep.gamma = opts.gamma;
    double h = opts.h > 0 ? opts.h : snap_resolution(dom1, eps.front() / 8);
    rep.h = h;

    const int m = opts.n_max + 1;
    auto raster1 = rasterize(dom1, h);
    auto spec1 = solve_raster(raster1, m, opts.tol, opts.seed);
    rep.lambda1 = spec1.eigenvalues;

    // discretization-noise floor per mode, by comparing against a 2h solve
    {
        auto coarse = rasterize(dom1, 2 * h);
        auto spec_c = solve_raster(coarse, m, opts.tol, opts.seed);
        for (int n = 0; n < m; ++n) {
            double lam = spec1.eigenvalues[n];
            rep.noise_floor.push_back(
                lam > 1e-12 ? 2.0 * std::abs(spec_c.eigenvalues[n] - lam) / lam : 0.0);
        }
    }

    const auto* graph1 = dynamic_cast<const GraphDomain*>(&dom1);
    if (family == PerturbationFamily::GraphShrink && !graph1)
        throw SolverError("stability_sweep: shrink family needs a graph domain");

    // build the perturbed rasters (shared grid enforced by construction)
    std::vector<std::shared_ptr<RasterDomain>> rasters2(eps.size());
    rep.class_ok = true;
    for (size_t ie = 0; ie < eps.size(); ++ie) {
        double e = eps[ie];
        switch (family) {
            case PerturbationFamily::GraphShrink: {
                GraphDomain g2 = graph_shrink(*graph1, e);
                if (g2.sampled_holder_quotient(257) > g2.holder_const() * (1 + 1e-6))
                    rep.class_ok = false;
                auto r2full = RasterDomain::from_domain(g2, h);
                // realize on the shared grid as a subset of raster1's cells
                std::vector<uint8_t> keep(raster1->cell_count(), 0);
                for (int32_t c = 0; c < raster1->cell_count(); ++c)
                    if (r2full->contains(raster1->cell_center(c))) keep[c] = 1;
                rasters2[ie] = raster1->subset(keep, "shrink");
                break;
            }
            case PerturbationFamily::CollarRemoval:
                rasters2[ie] = collar_removal(*raster1, e);
                break;
            case PerturbationFamily::Deformation: {
                DeformationMap map(*opts.atlas, e);
                rasters2[ie] = deformation_image(map, *raster1);
                break;
            }
        }
    }

    // cell-exact inclusion checks on the shared grid
    rep.inclusions_ok = true;
    for (size_t ie = 0; ie < eps.size(); ++ie) {
        const auto& r2 = *rasters2[ie];
        for (int32_t c = 0; c < r2.cell_count(); ++c) {
            int xyz[3];
            r2.cell_coords(c, xyz);
            if (raster1->cell_at(xyz[0], raster1->dim() >= 2 ? xyz[1] : 0,
                                 raster1->dim() == 3 ? xyz[2] : 0) < 0)
                rep.inclusions_ok = false;
        }
        for (int32_t c = 0; c < raster1->cell_count(); ++c)
            if (raster1->cell_distance(c) > eps[ie] &&
                !r2.contains(raster1->cell_center(c)))
                rep.inclusions_ok = false;
        rep.measure_diff.push_back(raster1->measure() - r2.measure());
    }

    // paired solves, parallel over eps
    rep.lambda2.resize(eps.size());
    {
        int jobs = std::max(1, opts.jobs);
        std::vector<std::future<SpectrumResult>> futs(eps.size());
        size_t next = 0;
        while (next < eps.size()) {
            size_t batch = std::min<size_t>(jobs, eps.size() - next);
            for (size_t k = 0; k < batch; ++k)
                futs[next + k] = std::async(std::launch::async, solve_raster, rasters2[next + k],
                                            m, opts.tol, opts.seed);
            for (size_t k = 0; k < batch; ++k) rep.lambda2[next + k] = futs[next + k].get().eigenvalues;
            next += batch;
        }
    }

    // fitted constants and deviation exponents per mode
    rep.b_n.assign(m, 0.0);
    rep.exponent_n.assign(m, std::numeric_limits<double>::quiet_NaN());
    for (int n = 1; n < m; ++n) {
        double b = 0;
        std::vector<double> lx, ly;
        for (size_t ie = 0; ie < eps.size(); ++ie) {
            double dev = rep.deviation(ie, n);
            b = std::max(b, dev / std::pow(eps[ie], opts.gamma));
            if (dev > rep.noise_floor[n]) {
                lx.push_back(std::log(eps[ie]));
                ly.push_back(std::log(dev));
            }
        }
        double max_dev = 0;
        for (size_t ie = 0; ie < eps.size(); ++ie) max_dev = std::max(max_dev, rep.deviation(ie, n));
        rep.b_n[n] = max_dev > rep.noise_floor[n] ? b : 0.0;
        if (lx.size() >= 3) rep.exponent_n[n] = fit_line(lx, ly).slope;
    }

    // shrink-family monotonicity lambda_{n,1} <= lambda_{n,3}
    if (family == PerturbationFamily::GraphShrink) {
        rep.monotonicity_ok = true;
        for (size_t ie = 0; ie < eps.size(); ++ie)
            for (int n = 0; n < m; ++n)
                if (rep.lambda2[ie][n] < rep.lambda1[n] - 1e-7 * (1 + rep.lambda1[n]))
                    rep.monotonicity_ok = false;
    }
    return rep;
}

Corollary16Report verify_corollary16(const Domain& dom1, const std::vector<double>& eps_grid,
                                     double sigma, int n_max, const StabilityOptions& opts) {
    StabilityOptions o = opts;
    o.n_max = n_max;
    o.gamma = sigma;
    auto sweep = stability_sweep(dom1, PerturbationFamily::CollarRemoval, eps_grid, o);

    Corollary16Report rep;
    rep.sigma = sigma;
    rep.two_sided = true;  // the collar family realizes the inner-domain hypothesis
    rep.b_n4.assign(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        double b = 0;
        for (size_t ie = 0; ie < sweep.eps.size(); ++ie)
            b = std::max(b, sweep.deviation(ie, n) / std::pow(sweep.eps[ie], sigma));
        rep.b_n4[n] = b;
    }
    rep.pass = sweep.inclusions_ok;
    for (int n = 1; n <= n_max; ++n)
        for (size_t ie = 0; ie < sweep.eps.size(); ++ie) {
            Corollary16Row row;
            row.n = n;
            row.eps = sweep.eps[ie];
            row.lambda1 = sweep.lambda1[n];
            row.lambda2 = sweep.lambda2[ie][n];
            double band = rep.b_n4[n] * std::pow(row.eps, sigma);
            row.lower = (1.0 - band) * row.lambda1;
            row.upper = (1.0 + band) * row.lambda1;
            row.ok = row.lambda2 >= row.lower - 1e-9 * (1 + row.lambda1) &&
                     row.lambda2 <= row.upper + 1e-9 * (1 + row.lambda1);
            rep.pass = rep.pass && row.ok;
            rep.rows.push_back(row);
        }
    for (int n = 1; n <= n_max; ++n)
        rep.limit_deviation = std::max(rep.limit_deviation, sweep.deviation(0, n));
    return rep;
}

}  // namespace nspect
