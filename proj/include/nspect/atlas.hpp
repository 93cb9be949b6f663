#pragma once

#include <Eigen/Dense>
#include <optional>

#include "nspect/domain.hpp"

namespace nspect {

/// One chart of a boundary atlas: an orthogonal map lambda (world -> chart
/// coordinates) and a cuboid in chart coordinates. Where the chart meets the
/// boundary, the rotated domain slice is the subgraph of `profile` over the
/// first N-1 chart coordinates. Charts without a profile lie entirely inside
/// the domain (profile == box top).
struct Chart {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> chart
    Box box;                                                  // chart coords
    std::optional<Expr> profile;

    Point to_chart(const Point& x) const;
    Point from_chart(const Point& z) const;
};

/// Uniform Hoelder boundary atlas (gamma, M, delta, s, {V_j}, {lambda_j}).
struct LipBoundaryAtlas {
    int dim = 2;
    double gamma = 1.0;
    double holder_const = 1.0;
    double delta = 0.05;
    std::vector<Chart> charts;

    /// Inward graph direction xi_j = lambda_j^{-1} e_N.
    Point xi(int j) const;
    double profile_at(int j, const Point& z) const;  // phi_j(zbar), box top if interior

    struct ValidationReport {
        bool cover_ok = false;      // Omega subset of union (V_j)_delta, sampled
        bool subgraph_ok = false;   // chart slices match the subgraph form, sampled
        bool margin_ok = false;     // profile inside [a_N + delta, b_N - delta]
        int64_t cover_failures = 0;
        int64_t subgraph_failures = 0;
        int64_t margin_failures = 0;
        bool pass() const { return cover_ok && subgraph_ok && margin_ok; }
    };
    ValidationReport validate(const Domain& dom, int samples_per_axis = 96) const;
};

/// Nine-chart Lip-1 atlas of the unit square: four edge charts, four
/// diagonal corner charts, one interior chart.
LipBoundaryAtlas square_atlas(double delta = 0.05);

/// Single-chart atlas covering a graph strip; the partition of unity is
/// identically one there, so the displacement is a pure translation. The
/// chart window is deliberately wider than the strip (subgraph sampling does
/// not apply); used for translation sanity checks.
LipBoundaryAtlas strip_atlas(const Box& base, double height, double delta = 0.2);

/// Inward displacement field T_eps(x) = x - eps * sum_j xi_j psi_j(x) built
/// from a partition of unity subordinate to the atlas charts. The bumps are
/// C^2 tensor ramps supported in (V_j)_{3 delta/4}, normalized on the domain.
class DeformationMap {
public:
    DeformationMap(LipBoundaryAtlas atlas, double eps);

    double eps() const { return eps_; }
    const LipBoundaryAtlas& atlas() const { return atlas_; }

    /// Unnormalized bump of chart j and their sum.
    double bump(int j, const Point& x) const;
    double bump_sum(const Point& x) const;
    /// Normalized psi_j; zero when the bump sum vanishes.
    double psi(int j, const Point& x) const;
    /// |sum psi - 1| with the vanishing-sum guard, the partition residual.
    double partition_residual(const Point& x) const;

    Point displacement(const Point& x) const;  // eps * sum xi_j psi_j
    Point apply(const Point& x) const;         // T_eps
    /// Inverse by fixed-point iteration (the displacement is a contraction).
    Point inverse(const Point& y, int max_iters = 80) const;

    /// Centered finite-difference Jacobian.
    Eigen::Matrix3d jacobian_fd(const Point& x, double step = 1e-6) const;

private:
    LipBoundaryAtlas atlas_;
    double eps_;
    std::vector<Point> xi_;
};

/// Builds the map and verifies the partition of unity on sampled domain
/// points (residual must stay below 1e-9) and sampled injectivity.
DeformationMap build_deformation(const LipBoundaryAtlas& atlas, double eps, const Domain& dom,
                                 int samples_per_axis = 64);

struct DeformationCheckReport {
    double eps = 0;
    double h = 0;
    // Jacobian calibration
    double jacobian_deviation = 0;  // max |dT_i/dx_j - delta_ij| over samples
    double a1 = 0;                  // jacobian_deviation / eps
    double det_deviation = 0;       // max |det - 1|
    double a2 = 0;
    // inclusion  Omega \ collar_eps subset T(Omega) subset Omega \ collar_{A eps^{1/gamma}}
    int64_t missed_deep_cells = 0;  // cells with d > eps not hit by T(Omega)
    double image_depth_min = 0;     // min d(T(x)) over inside cells
    double a_depth = 0;             // image_depth_min / eps^{1/gamma}
    int64_t image_outside_cells = 0;
    // measure loss
    double measure_lost = 0;  // |Omega \ T(Omega)|
    double a5 = 0;            // measure_lost / eps
    bool injective_ok = false;
    bool pass() const {
        return missed_deep_cells == 0 && image_outside_cells == 0 && a_depth > 0 && injective_ok;
    }
};

/// Cell-exact inclusion, Jacobian, and measure checks on a raster of the
/// domain at resolution h <= eps/8.
DeformationCheckReport verify_deformation_inclusions(const DeformationMap& map, const Domain& dom,
                                                     double h = 0);

/// Image raster { y : T^{-1}(y) in Omega } on the domain's grid; a literal
/// cell subset of the domain raster.
std::shared_ptr<RasterDomain> deformation_image(const DeformationMap& map,
                                                const RasterDomain& raster);

}  // namespace nspect
