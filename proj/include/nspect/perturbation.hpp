#pragma once

#include "nspect/atlas.hpp"
#include "nspect/eigensolver.hpp"

namespace nspect {

/// Vertical shrink of a graph domain: profile (1-eps) phi, Hoelder constant
/// rescaled accordingly. The bounding box is kept so shrunk and original
/// domains rasterize on a shared grid.
GraphDomain graph_shrink(const GraphDomain& g, double eps);

/// Inner domain { x : d(x) > eps } on the raster's own grid; a literal cell
/// subset. Errors (naming the eps) when removal disconnects the domain.
std::shared_ptr<RasterDomain> collar_removal(const RasterDomain& raster, double eps);

// ---- quasi-monotonicity chain ----------------------------------------------

struct Theorem13Row {
    int n = 0;
    double lambda1 = 0;
    double mu2 = 0;       // restriction Rayleigh-Ritz value
    double lambda2 = 0;   // direct eigenvalue of the inner domain
    double b_n1 = 0;      // 2 c5^2 e^{2 lambda1}
    double eps_n1 = 0;    // smallness threshold 1/b_n1
    double bound = 0;     // (1 + b_n1 |O1 \ O2|) lambda1
    bool smallness_ok = false;
    bool chain_ok = false;  // lambda2 <= mu2 <= bound
};

struct Theorem13Report {
    double measure_diff = 0;  // |Omega1 \ Omega2|
    double c5 = 0;
    std::vector<Theorem13Row> rows;
    bool chain_pass = false;      // inequality chain for every n
    bool all_conclusive = false;  // smallness condition met for every n
};

/// Restriction mechanism: mu_{n,2} from restricted eigenvectors of the outer
/// domain, compared against the direct inner spectrum and the measure bound.
/// cell_map sends inner raster cells to outer raster cells.
Theorem13Report verify_theorem13(const SpectrumResult& outer, const DiscreteOperator& inner_op,
                                 const SpectrumResult& inner, const std::vector<int32_t>& cell_map,
                                 double c5, int n_max);

/// Map from the cells of an inner shared-grid raster to the outer raster's
/// compact indices. Errors unless the inner cells are a subset.
std::vector<int32_t> shared_grid_cell_map(const RasterDomain& outer, const RasterDomain& inner);

// ---- eps sweeps --------------------------------------------------------------

enum class PerturbationFamily { GraphShrink, CollarRemoval, Deformation };

struct StabilityOptions {
    int n_max = 8;
    double h = 0;          // 0: snap(min eps / 8)
    double tol = 1e-8;
    uint64_t seed = 2024;
    int jobs = 1;
    double gamma = 1.0;    // Hoelder exponent of the declared class
    const LipBoundaryAtlas* atlas = nullptr;  // required for Deformation
};

struct StabilityReport {
    PerturbationFamily family{};
    std::vector<double> eps;
    double gamma = 1.0;
    double h = 0;
    std::vector<double> lambda1;               // n_max+1 values
    std::vector<std::vector<double>> lambda2;  // per eps
    std::vector<double> measure_diff;          // |Omega1 \ Omega2| per eps
    std::vector<double> noise_floor;           // per n, relative
    std::vector<double> b_n;                   // max_e dev / eps^gamma (0 if below floor)
    std::vector<double> exponent_n;            // per-n log-log slope (NaN if underdetermined)
    bool inclusions_ok = false;                // O1 \ collar_eps subset O2 subset O1, cell-exact
    bool class_ok = false;                     // declared-class membership of each O2
    bool monotonicity_ok = false;              // lambda_{n,1} <= lambda_{n,3} (shrink family)

    double deviation(size_t ie, int n) const {
        return std::abs(lambda2[ie][n] / lambda1[n] - 1.0);
    }
};

/// Paired spectra across an eps sweep on one shared grid, with fitted
/// stability constants b_n and per-n deviation exponents.
StabilityReport stability_sweep(const Domain& dom1, PerturbationFamily family,
                                const std::vector<double>& eps_grid,
                                const StabilityOptions& opts = {});

// ---- two-sided chain ---------------------------------------------------------

struct Corollary16Row {
    int n = 0;
    double eps = 0;
    double lambda1 = 0, lambda2 = 0;
    double lower = 0, upper = 0;  // (1 -+ b_n4 eps^sigma) lambda1
    bool ok = false;
};

struct Corollary16Report {
    double sigma = 0;
    std::vector<double> b_n4;       // fitted per n
    std::vector<Corollary16Row> rows;
    bool two_sided = false;  // inner-family hypothesis realized (else one-sided)
    bool pass = false;
    double limit_deviation = 0;  // max_n deviation at the smallest eps
};

/// Chains the quasi-monotonicity bound with the inner-family lower bound
/// realized by collar removal; reports the two-sided verdict per (n, eps).
Corollary16Report verify_corollary16(const Domain& dom1, const std::vector<double>& eps_grid,
                                     double sigma, int n_max, const StabilityOptions& opts = {});

}  // namespace nspect
