#include "nspect/atlas.hpp"

#include <cmath>

namespace nspect {

namespace {

Eigen::Vector3d to_vec(const Point& p) { return {p[0], p[1], p[2]}; }
Point to_point(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

// C^2 quintic ramp: 0 below 0, 1 above 1.
double smooth_ramp(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    return u * u * u * (10 + u * (-15 + 6 * u));
}

Eigen::Matrix3d rot2(double angle) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r(0, 0) = std::cos(angle);
    r(0, 1) = -std::sin(angle);
    r(1, 0) = std::sin(angle);
    r(1, 1) = std::cos(angle);
    return r;
}

}  // namespace

Point Chart::to_chart(const Point& x) const { return to_point(rotation * to_vec(x)); }
Point Chart::from_chart(const Point& z) const {
    return to_point(rotation.transpose() * to_vec(z));
}

Point LipBoundaryAtlas::xi(int j) const {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[dim - 1] = 1.0;
    return to_point(charts[j].rotation.transpose() * e);
}

double LipBoundaryAtlas::profile_at(int j, const Point& z) const {
    const Chart& c = charts[j];
    if (!c.profile) return c.box.hi[dim - 1];
    double args[2] = {z[0], z[1]};
    return c.profile->eval(args);
}

LipBoundaryAtlas::ValidationReport LipBoundaryAtlas::validate(const Domain& dom,
                                                              int samples_per_axis) const {
    ValidationReport rep;
    Box bb = dom.bounding_box();
    const int n = samples_per_axis;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // (i) every interior sample lies in some (V_j)_delta
    int64_t cover_fail = 0;
    auto shrunk_contains = [&](const Chart& c, const Point& x, double margin) {
        Point z = c.to_chart(x);
        for (int a = 0; a < dim; ++a)
            if (z[a] <= c.box.lo[a] + margin || z[a] >= c.box.hi[a] - margin) return false;
        return true;
    };
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            Point p{bb.lo[0] + bb.extent(0) * (ix + 0.5) / n,
                    dim >= 2 ? bb.lo[1] + bb.extent(1) * (iy + 0.5) / n : 0, 0};
            if (dim == 3) p[2] = bb.lo[2] + bb.extent(2) * uni(rng);
            if (!dom.contains(p)) continue;
            bool covered = false;
            for (const auto& c : charts)
                if (shrunk_contains(c, p, delta)) {
                    covered = true;
                    break;
                }
            if (!covered) ++cover_fail;
        }
    rep.cover_failures = cover_fail;
    rep.cover_ok = cover_fail == 0;

    // (ii) sampled agreement between the subgraph form and membership
    int64_t sg_fail = 0;
    for (size_t j = 0; j < charts.size(); ++j) {
        const Chart& c = charts[j];
        for (int s = 0; s < 4000; ++s) {
            Point z{0, 0, 0};
            for (int a = 0; a < dim; ++a)
                z[a] = c.box.lo[a] + c.box.extent(a) * uni(rng);
            Point x = c.from_chart(z);
            bool in_sub = z[dim - 1] < profile_at(static_cast<int>(j), z);
            bool in_dom = dom.contains(x);
            // interior charts assert V_j subset Omega; boundary charts assert
            // the two-sided match
            if (!c.profile) {
                if (!in_dom) ++sg_fail;
            } else if (in_sub != in_dom) {
                ++sg_fail;
            }
        }
    }
    rep.subgraph_failures = sg_fail;
    rep.subgraph_ok = sg_fail == 0;

    // (iii) profile stays delta-inside the chart box where it meets the boundary
    int64_t margin_fail = 0;
    for (size_t j = 0; j < charts.size(); ++j) {
        const Chart& c = charts[j];
        if (!c.profile) continue;
        for (int s = 0; s < 2000; ++s) {
            Point z{0, 0, 0};
            for (int a = 0; a < dim - 1; ++a)
                z[a] = c.box.lo[a] + c.box.extent(a) * uni(rng);
            double phi = profile_at(static_cast<int>(j), z);
            if (phi < c.box.lo[dim - 1] + delta - 1e-12 ||
                phi > c.box.hi[dim - 1] - delta + 1e-12)
                ++margin_fail;
        }
    }
    rep.margin_failures = margin_fail;
    rep.margin_ok = margin_fail == 0;
    return rep;
}

LipBoundaryAtlas square_atlas(double delta) {
    if (!(delta > 0 && delta <= 0.08))
        throw DomainError("square_atlas: delta must lie in (0, 0.08]");
    LipBoundaryAtlas atlas;
    atlas.dim = 2;
    atlas.gamma = 1.0;
    atlas.holder_const = 1.0;
    atlas.delta = delta;

    auto box2 = [](double x0, double x1, double y0, double y1) {
        Box b;
        b.dim = 2;
        b.lo = {x0, y0, 0};
        b.hi = {x1, y1, 0};
        return b;
    };
    const double pi = 3.14159265358979323846;

    // edge charts: constant profiles, full columns inside the x-window
    {
        Chart bottom;  // rotate by pi; chart z = (-x, -y), boundary graph z2 = 0
        bottom.rotation = rot2(pi);
        bottom.box = box2(-0.92, -0.08, -0.42, 0.30);
        bottom.profile = Expr::parse("0", {"x"});
        atlas.charts.push_back(bottom);

        Chart top;  // identity; graph z2 = 1
        top.box = box2(0.08, 0.92, 0.58, 1.42);
        top.profile = Expr::parse("1", {"x"});
        atlas.charts.push_back(top);

        Chart left;  // rotate by -pi/2: z = (y, -x), graph z2 = 0
        left.rotation = rot2(-pi / 2);
        left.box = box2(0.08, 0.92, -0.42, 0.30);
        left.profile = Expr::parse("0", {"x"});
        atlas.charts.push_back(left);

        Chart right;  // rotate by +pi/2: z = (-y, x), graph z2 = 1
        right.rotation = rot2(pi / 2);
        right.box = box2(-0.92, -0.08, 0.58, 1.42);
        right.profile = Expr::parse("1", {"x"});
        atlas.charts.push_back(right);
    }

    // corner charts: diagonal frames, tent profiles phi(z1) = z2c - |z1 - z1c|
    struct CornerSpec {
        double cx, cy, angle;
    };
    const CornerSpec corners[4] = {
        {0, 0, -3 * pi / 4}, {1, 0, 3 * pi / 4}, {1, 1, pi / 4}, {0, 1, -pi / 4}};
    const double u = 0.55, depth = 0.85, above = 0.15;
    for (const auto& cs : corners) {
        Chart c;
        c.rotation = rot2(cs.angle);
        Eigen::Vector3d zc = c.rotation * Eigen::Vector3d(cs.cx, cs.cy, 0);
        c.box = box2(zc[0] - u, zc[0] + u, zc[1] - depth, zc[1] + above);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g - abs(x - (%.17g))", zc[1], zc[0]);
        c.profile = Expr::parse(buf, {"x"});
        atlas.charts.push_back(c);
    }

    // interior chart
    {
        Chart interior;
        interior.box = box2(0.05, 0.95, 0.05, 0.95);
        atlas.charts.push_back(interior);
    }
    return atlas;
}

LipBoundaryAtlas strip_atlas(const Box& base, double height, double delta) {
    if (base.dim != 1) throw DomainError("strip_atlas: base must be one-dimensional");
    LipBoundaryAtlas atlas;
    atlas.dim = 2;
    atlas.gamma = 1.0;
    atlas.holder_const = 1.0;
    atlas.delta = delta;
    Chart c;  // identity; graph z2 = height on top
    c.box.dim = 2;
    c.box.lo = {base.lo[0] - 1.0, -2.0 * height - 1.0, 0};
    c.box.hi = {base.hi[0] + 1.0, height + 2.0 * delta, 0};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", height);
    c.profile = Expr::parse(buf, {"x"});
    atlas.charts.push_back(c);
    return atlas;
}

DeformationMap::DeformationMap(LipBoundaryAtlas atlas, double eps)
    : atlas_(std::move(atlas)), eps_(eps) {
    if (!(eps >= 0 && eps <= atlas_.delta / 4 + 1e-15))
        throw DomainError("deformation: eps must lie in [0, delta/4]");
    for (size_t j = 0; j < atlas_.charts.size(); ++j) xi_.push_back(atlas_.xi(static_cast<int>(j)));
}

double DeformationMap::bump(int j, const Point& x) const {
    const Chart& c = atlas_.charts[j];
    Point z = c.to_chart(x);
    const double inner = 0.75 * atlas_.delta;  // support margin 3 delta / 4
    double b = 1.0;
    for (int a = 0; a < atlas_.dim && b > 0; ++a) {
        // ramp as wide as the chart margin allows; steep ramps would blow up
        // the displacement gradient and shrink the admissible eps range
        double width = std::min(2.0 * atlas_.delta,
                                std::max(atlas_.delta / 8, 0.5 * c.box.extent(a) - inner));
        double d = std::min(z[a] - c.box.lo[a], c.box.hi[a] - z[a]);
        b *= smooth_ramp((d - inner) / width);
    }
    return b;
}

double DeformationMap::bump_sum(const Point& x) const {
    double s = 0;
    for (size_t j = 0; j < atlas_.charts.size(); ++j) s += bump(static_cast<int>(j), x);
    return s;
}

double DeformationMap::psi(int j, const Point& x) const {
    double s = bump_sum(x);
    if (s < 1e-12) return 0;
    return bump(j, x) / s;
}

double DeformationMap::partition_residual(const Point& x) const {
    double s = bump_sum(x);
    if (s < 1e-12) return 1.0;
    double total = 0;
    for (size_t j = 0; j < atlas_.charts.size(); ++j) total += bump(static_cast<int>(j), x) / s;
    return std::abs(total - 1.0);
}

Point DeformationMap::displacement(const Point& x) const {
    double s = bump_sum(x);
    Point d{0, 0, 0};
    if (s < 1e-12) return d;
    for (size_t j = 0; j < atlas_.charts.size(); ++j) {
        double p = bump(static_cast<int>(j), x) / s;
        if (p == 0) continue;
        for (int a = 0; a < atlas_.dim; ++a) d[a] += eps_ * p * xi_[j][a];
    }
    return d;
}

Point DeformationMap::apply(const Point& x) const {
    Point d = displacement(x);
    return {x[0] - d[0], x[1] - d[1], x[2] - d[2]};
}

Point DeformationMap::inverse(const Point& y, int max_iters) const {
    Point x = y;
    for (int i = 0; i < max_iters; ++i) {
        Point d = displacement(x);
        Point xn{y[0] + d[0], y[1] + d[1], y[2] + d[2]};
        double delta2 = dist2(x, xn);
        x = xn;
        if (delta2 < 1e-28) break;
    }
    return x;
}

Eigen::Matrix3d DeformationMap::jacobian_fd(const Point& x, double step) const {
    Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
    for (int a = 0; a < atlas_.dim; ++a) {
        Point xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        Point tp = apply(xp), tm = apply(xm);
        for (int i = 0; i < atlas_.dim; ++i) J(i, a) = (tp[i] - tm[i]) / (2 * step);
    }
    return J;
}

DeformationMap build_deformation(const LipBoundaryAtlas& atlas, double eps, const Domain& dom,
                                 int samples_per_axis) {
    if (!(eps > 0)) throw DomainError("build_deformation: eps must be positive");
    DeformationMap map(atlas, eps);
    Box bb = dom.bounding_box();
    double worst = 0;
    const int n = samples_per_axis;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            Point p{bb.lo[0] + bb.extent(0) * (ix + 0.5) / n,
                    atlas.dim >= 2 ? bb.lo[1] + bb.extent(1) * (iy + 0.5) / n : 0, 0};
            if (!dom.contains(p)) continue;
            worst = std::max(worst, map.partition_residual(p));
        }
    if (worst > 1e-9)
        throw DomainError("build_deformation: partition-of-unity residual " + std::to_string(worst) +
                          " exceeds 1e-9 on the domain (charts do not cover it)");
    return map;
}

std::shared_ptr<RasterDomain> deformation_image(const DeformationMap& map,
                                                const RasterDomain& raster) {
    std::vector<uint8_t> keep(raster.cell_count(), 0);
    for (int32_t c = 0; c < raster.cell_count(); ++c) {
        Point y = raster.cell_center(c);
        Point x = map.inverse(y);
        if (raster.contains(x)) keep[c] = 1;
    }
    return raster.subset(keep, "deformation-image");
}

DeformationCheckReport verify_deformation_inclusions(const DeformationMap& map,
                                                     const Domain& dom, double h) {
    DeformationCheckReport rep;
    rep.eps = map.eps();
    if (h <= 0) h = snap_resolution(dom, map.eps() / 8);
    if (h > map.eps() / 8 * (1 + 1e-12))
        throw DomainError("verify_deformation_inclusions: need h <= eps/8");
    rep.h = h;
    auto raster = rasterize(dom, h);
    const double inv_gamma = 1.0 / map.atlas().gamma;

    // Jacobian deviation on a coarse sample grid
    Box bb = dom.bounding_box();
    const int nj = 40;
    double jd = 0, dd = 0;
    for (int iy = 0; iy < nj; ++iy)
        for (int ix = 0; ix < nj; ++ix) {
            Point p{bb.lo[0] + bb.extent(0) * (ix + 0.5) / nj,
                    bb.lo[1] + bb.extent(1) * (iy + 0.5) / nj, 0};
            if (!dom.contains(p)) continue;
            Eigen::Matrix3d J = map.jacobian_fd(p);
            Eigen::Matrix3d E = J - Eigen::Matrix3d::Identity();
            for (int a = 0; a < map.atlas().dim; ++a)
                for (int b = 0; b < map.atlas().dim; ++b) jd = std::max(jd, std::abs(E(a, b)));
            double det = J.topLeftCorner(map.atlas().dim, map.atlas().dim).determinant();
            dd = std::max(dd, std::abs(det - 1.0));
        }
    rep.jacobian_deviation = jd;
    rep.a1 = jd / map.eps();
    rep.det_deviation = dd;
    rep.a2 = dd / map.eps();

    // cell-exact inclusions via the inverse map
    double depth_min = std::numeric_limits<double>::infinity();
    int64_t image_cells = 0;
    bool injective = true;
    for (int32_t c = 0; c < raster->cell_count(); ++c) {
        Point y = raster->cell_center(c);
        Point x = map.inverse(y);
        bool in_image = dom.contains(x);
        if (in_image) {
            ++image_cells;
            // round trip guards the fixed-point inverse and injectivity
            Point back = map.apply(x);
            if (dist2(back, y) > 1e-20) injective = false;
        } else if (raster->cell_distance(c) > map.eps()) {
            rep.missed_deep_cells += 1;
        }
        // forward image depth
        Point tx = map.apply(y);
        if (!dom.contains(tx)) {
            rep.image_outside_cells += 1;
        } else {
            double d = dom.boundary_distance(tx) ? *dom.boundary_distance(tx)
                                                 : raster->cell_distance(
                                                       raster->cell_at(raster->dense_index_of(tx)));
            depth_min = std::min(depth_min, d);
        }
    }
    rep.injective_ok = injective;
    rep.image_depth_min = depth_min;
    rep.a_depth = depth_min / std::pow(map.eps(), inv_gamma);
    rep.measure_lost = (raster->cell_count() - image_cells) * raster->cell_volume();
    rep.a5 = rep.measure_lost / map.eps();
    return rep;
}

}  // namespace nspect
