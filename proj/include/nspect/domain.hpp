#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nspect/common.hpp"
#include "nspect/expr.hpp"

namespace nspect {

class RasterDomain;

/// Open, connected region of finite measure in R^N (N <= 3) with a
/// deterministic membership test and boundary-distance evaluation.
///
/// Domains are immutable after construction; derived rasters and distance
/// fields are cached downstream keyed by (domain id, parameter).
class Domain {
public:
    virtual ~Domain() = default;

    virtual int dim() const = 0;
    virtual Box bounding_box() const = 0;
    virtual bool contains(const Point& p) const = 0;
    /// A point guaranteed to lie inside; seeds flood fill on rasters.
    virtual Point anchor() const = 0;
    /// Canonical description; hashing it yields the cache identity.
    virtual std::string describe() const = 0;

    /// Unsigned distance from p (inside or outside) to the boundary.
    /// Closed-form domains return an exact value; raster-backed domains
    /// return nullopt and callers fall back to the distance transform.
    virtual std::optional<double> boundary_distance(const Point& p) const { return std::nullopt; }

    uint64_t id() const { return fnv1a(describe()); }
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Axis-aligned product of intervals (interval, rectangle, cuboid).
class BoxDomain : public Domain {
public:
    explicit BoxDomain(const Box& b) : box_(b) {}

    int dim() const override { return box_.dim; }
    Box bounding_box() const override { return box_; }
    bool contains(const Point& p) const override { return box_.contains(p); }
    Point anchor() const override;
    std::string describe() const override;
    std::optional<double> boundary_distance(const Point& p) const override {
        return box_.boundary_distance(p);
    }

private:
    Box box_;
};

/// Open ball (disc for N=2).
class BallDomain : public Domain {
public:
    BallDomain(int dim, const Point& center, double radius);

    int dim() const override { return dim_; }
    Box bounding_box() const override;
    bool contains(const Point& p) const override;
    Point anchor() const override { return center_; }
    std::string describe() const override;
    std::optional<double> boundary_distance(const Point& p) const override;

    double radius() const { return radius_; }

private:
    int dim_;
    Point center_;
    double radius_;
};

/// Profile function over the base region: closed-form expression or a
/// uniformly sampled grid with multilinear interpolation.
class Profile {
public:
    static Profile from_expr(const Expr& e) {
        Profile p;
        p.expr_ = e;
        return p;
    }
    static Profile from_samples(std::vector<double> values, const Box& base, int nx, int ny = 1);

    double operator()(const double* xbar) const;
    bool is_sampled() const { return !samples_.empty(); }
    std::string describe() const;

private:
    std::optional<Expr> expr_;
    std::vector<double> samples_;
    Box base_;
    int nx_ = 0, ny_ = 1;
};

/// Subgraph domain { xbar in G, 0 < x_N < phi(xbar) } with a gamma-Hoelder
/// profile. G is an axis-aligned box in R^{N-1}.
class GraphDomain : public Domain {
public:
    GraphDomain(const Box& base, Profile profile, double gamma, double holder_const,
                double k_lo, double k_hi);

    int dim() const override { return base_.dim + 1; }
    Box bounding_box() const override;
    bool contains(const Point& p) const override;
    Point anchor() const override;
    std::string describe() const override;
    std::optional<double> boundary_distance(const Point& p) const override;

    const Box& base() const { return base_; }
    const Profile& profile() const { return profile_; }
    double gamma() const { return gamma_; }
    double holder_const() const { return holder_const_; }
    double k_lo() const { return k_lo_; }
    double k_hi() const { return k_hi_; }

    /// sup over sampled pairs of |phi(x)-phi(y)| / |x-y|^gamma.
    double sampled_holder_quotient(int samples_per_axis = 128) const;

private:
    void build_boundary_cloud() const;

    Box base_;
    Profile profile_;
    double gamma_, holder_const_, k_lo_, k_hi_;

    // lazily built point cloud of the graph surface for distance queries
    mutable std::once_flag cloud_once_;
    mutable std::vector<Point> cloud_;
    mutable std::vector<std::vector<int>> cloud_buckets_;
    mutable double bucket_w_ = 0;
    mutable int nbuckets_ = 0;
};

/// Model cusp { |y| < 1, |y|^gamma < x < 1 }. Boundary is Lip gamma.
class CuspDomain : public Domain {
public:
    CuspDomain(int dim, double gamma);

    int dim() const override { return dim_; }
    Box bounding_box() const override;
    bool contains(const Point& p) const override;
    Point anchor() const override { return make_point(0.9, 0.0, 0.0); }
    std::string describe() const override;
    std::optional<double> boundary_distance(const Point& p) const override;

    double gamma() const { return gamma_; }
    /// Converts to the rotated-graph representation used by the Hoelder test.
    std::shared_ptr<GraphDomain> as_graph(int samples = 4097) const;

private:
    double curve_distance(double x, double r) const;  // distance to { (t, t^{1/gamma}) }
    int dim_;
    double gamma_;
};

/// Cell-centred raster of a domain: the cells whose centres lie inside,
/// restricted to the flood-fill component of the anchor.
class RasterDomain : public Domain, public std::enable_shared_from_this<RasterDomain> {
public:
    int dim() const override { return dim_; }
    Box bounding_box() const override { return box_; }
    bool contains(const Point& p) const override;
    Point anchor() const override { return anchor_; }
    std::string describe() const override;

    double h() const { return h_; }
    int n(int axis) const { return n_[axis]; }
    int64_t cell_count() const { return static_cast<int64_t>(cells_.size()); }
    double measure() const { return static_cast<double>(cells_.size()) * cell_volume(); }
    double cell_volume() const;

    /// Linear (dense) index of the grid cell containing p, or -1.
    int64_t dense_index_of(const Point& p) const;
    int64_t dense_index(int ix, int iy, int iz) const {
        return (static_cast<int64_t>(iz) * n_[1] + iy) * n_[0] + ix;
    }
    /// Compact cell id for a dense index, or -1 when outside.
    int32_t cell_at(int64_t dense) const { return cell_of_dense_[dense]; }
    int32_t cell_at(int ix, int iy, int iz) const { return cell_at(dense_index(ix, iy, iz)); }
    const std::vector<int64_t>& cells() const { return cells_; }
    void cell_coords(int32_t cell, int* ixyz) const;
    Point cell_center(int32_t cell) const;

    /// Distance-transform value at a cell centre (distance to the raster
    /// boundary, exact Euclidean over outside cell centres minus h/2).
    double cell_distance(int32_t cell) const;
    const std::vector<double>& cell_distances() const;
    /// Largest cell distance (discrete inradius).
    double inradius() const;

    /// |{ d <= eps }| by cell counting; requires h <= eps/8.
    double collar_measure(double eps) const;

    /// Conservative bounds on d(x) for arbitrary points, from the transform.
    /// For points outside the raster the lower bound uses the companion
    /// transform (distance of outside cells to the inside set).
    double distance_lower_bound(const Point& p) const;
    double distance_upper_bound(const Point& p) const;

    void export_pgm(const std::string& path) const;  // N=2 only

    static std::shared_ptr<RasterDomain> from_domain(const Domain& d, double h);
    /// Build directly from an explicit inside-cell list on a given grid.
    static std::shared_ptr<RasterDomain> from_cells(const Box& box, double h,
                                                    const std::vector<std::array<int, 3>>& cells,
                                                    const std::string& label);
    /// Subset raster on the identical grid (cells must be a subset).
    std::shared_ptr<RasterDomain> subset(const std::vector<uint8_t>& keep_cell,
                                         const std::string& label) const;

private:
    friend class RasterBuilder;
    void finalize(const Point& anchor_hint);
    void compute_edt() const;

    int dim_ = 2;
    Box box_;
    double h_ = 0;
    int n_[3] = {1, 1, 1};
    std::vector<uint8_t> inside_;        // dense grid flags
    std::vector<int32_t> cell_of_dense_; // dense -> compact (-1 outside)
    std::vector<int64_t> cells_;         // compact -> dense
    Point anchor_{0, 0, 0};
    std::string label_;

    mutable std::once_flag edt_once_;
    mutable std::vector<double> dist_;  // per compact cell
    mutable double inradius_ = 0;

    void compute_outside_edt() const;
    mutable std::once_flag outside_edt_once_;
    mutable std::vector<float> outside_dist_;  // dense grid, outside cells only
};

/// Implicit region { formula(x) > 0 } within a bounding box, realized on
/// rasters. Membership is exact; distances come from the transform.
class ImplicitDomain : public Domain {
public:
    ImplicitDomain(int dim, const Box& box, const Expr& formula, const Point& anchor);

    int dim() const override { return dim_; }
    Box bounding_box() const override { return box_; }
    bool contains(const Point& p) const override;
    Point anchor() const override { return anchor_; }
    std::string describe() const override;

private:
    int dim_;
    Box box_;
    Expr formula_;
    Point anchor_;
};

// ---- geometry operations -------------------------------------------------

/// Distance from an interior point to the boundary. Errors if p is outside.
double distance_to_boundary(const Domain& d, const Point& p);

/// Largest grid resolution <= h_target that tiles every bounding-box extent
/// with an integer cell count.
double snap_resolution(const Domain& d, double h_target);

/// Rasterizes a domain at cell size h (cells per axis = round(extent/h); the
/// box must be an integer multiple of h within 1e-9 relative).
std::shared_ptr<RasterDomain> rasterize(const Domain& d, double h);

/// Collar measure |{x in Omega : d(x) <= eps}| on a raster of the domain.
/// Refuses when the raster resolution violates h <= eps/8.
double collar_measure(const Domain& d, double eps, double h);

struct CollarMeasureTable {
    std::vector<double> eps;
    std::vector<double> measure;
    double fitted_exponent = 0;   // g in |collar| ~ a * eps^g
    double fitted_constant = 0;   // a
    double max_fit_residual = 0;
};

struct MinkowskiEstimate {
    double dimension = 0;  // N - fitted exponent
    CollarMeasureTable table;
};

/// Estimates the boundary Minkowski dimension from the collar decay rate.
/// Requires >= 6 eps values spanning >= 2 decades; the collar table must be
/// nondecreasing in eps.
MinkowskiEstimate minkowski_dimension(const Domain& d, const std::vector<double>& eps_grid,
                                      double h = 0 /* 0: eps_min/8 */);

}  // namespace nspect
