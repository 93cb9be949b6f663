#include "nspect/domain.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace nspect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    double ab2 = dist2(a, b);
    if (ab2 == 0) return std::sqrt(dist2(p, a));
    double t = 0;
    for (int i = 0; i < 3; ++i) t += (p[i] - a[i]) * (b[i] - a[i]);
    t = std::clamp(t / ab2, 0.0, 1.0);
    Point q{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
    return std::sqrt(dist2(p, q));
}

// Golden-section minimization of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, int iters = 80) {
    const double gr = 0.61803398874989484820;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-15; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return std::min(fc, fd);
}

}  // namespace

// ---- BoxDomain -------------------------------------------------------------

Point BoxDomain::anchor() const {
    Box b = bounding_box();
    Point p{0, 0, 0};
    for (int i = 0; i < b.dim; ++i) p[i] = 0.5 * (b.lo[i] + b.hi[i]);
    return p;
}

std::string BoxDomain::describe() const {
    std::string s = "box:" + std::to_string(box_.dim);
    for (int i = 0; i < box_.dim; ++i) s += ":" + fmt(box_.lo[i]) + "," + fmt(box_.hi[i]);
    return s;
}

// ---- BallDomain ------------------------------------------------------------

BallDomain::BallDomain(int dim, const Point& center, double radius)
    : dim_(dim), center_(center), radius_(radius) {
    if (dim < 2 || dim > 3) throw DomainError("ball domain: dim must be 2 or 3");
    if (!(radius > 0)) throw DomainError("ball domain: radius must be positive");
}

Box BallDomain::bounding_box() const {
    Box b;
    b.dim = dim_;
    for (int i = 0; i < dim_; ++i) {
        b.lo[i] = center_[i] - radius_;
        b.hi[i] = center_[i] + radius_;
    }
    return b;
}

bool BallDomain::contains(const Point& p) const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += (p[i] - center_[i]) * (p[i] - center_[i]);
    return s < radius_ * radius_;
}

std::optional<double> BallDomain::boundary_distance(const Point& p) const {
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += (p[i] - center_[i]) * (p[i] - center_[i]);
    return std::abs(radius_ - std::sqrt(s));
}

std::string BallDomain::describe() const {
    std::string s = "ball:" + std::to_string(dim_) + ":r=" + fmt(radius_);
    for (int i = 0; i < dim_; ++i) s += "," + fmt(center_[i]);
    return s;
}

// ---- Profile ---------------------------------------------------------------

Profile Profile::from_samples(std::vector<double> values, const Box& base, int nx, int ny) {
    if (base.dim < 1 || base.dim > 2) throw DomainError("profile samples: base dim must be 1 or 2");
    if (nx < 2 || (base.dim == 2 && ny < 2)) throw DomainError("profile samples: need >= 2 per axis");
    if (static_cast<int>(values.size()) != nx * (base.dim == 2 ? ny : 1))
        throw DomainError("profile samples: value count mismatch");
    Profile p;
    p.samples_ = std::move(values);
    p.base_ = base;
    p.nx_ = nx;
    p.ny_ = base.dim == 2 ? ny : 1;
    return p;
}

double Profile::operator()(const double* xbar) const {
    if (expr_) return expr_->eval(xbar);
    // multilinear interpolation on the sample grid
    auto axis = [&](int k, int nk, double x) {
        double t = (x - base_.lo[k]) / (base_.hi[k] - base_.lo[k]) * (nk - 1);
        t = std::clamp(t, 0.0, static_cast<double>(nk - 1));
        int i = std::min(static_cast<int>(t), nk - 2);
        return std::pair<int, double>(i, t - i);
    };
    auto [i, fx] = axis(0, nx_, xbar[0]);
    if (base_.dim == 1) return samples_[i] * (1 - fx) + samples_[i + 1] * fx;
    auto [j, fy] = axis(1, ny_, xbar[1]);
    auto at = [&](int a, int b) { return samples_[b * nx_ + a]; };
    return (at(i, j) * (1 - fx) + at(i + 1, j) * fx) * (1 - fy) +
           (at(i, j + 1) * (1 - fx) + at(i + 1, j + 1) * fx) * fy;
}

std::string Profile::describe() const {
    if (expr_) return "expr{" + expr_->text() + "}";
    uint64_t h = 1469598103934665603ull;
    for (double v : samples_) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        h ^= bits;
        h *= 1099511628211ull;
    }
    return "samples{" + std::to_string(nx_) + "x" + std::to_string(ny_) + ":" + hex_id(h) + "}";
}

// ---- GraphDomain -----------------------------------------------------------

GraphDomain::GraphDomain(const Box& base, Profile profile, double gamma, double holder_const,
                         double k_lo, double k_hi)
    : base_(base),
      profile_(std::move(profile)),
      gamma_(gamma),
      holder_const_(holder_const),
      k_lo_(k_lo),
      k_hi_(k_hi) {
    if (base.dim < 1 || base.dim > 2) throw DomainError("graph domain: base dim must be 1 or 2");
    if (!(gamma > 0 && gamma <= 1)) throw DomainError("graph domain: gamma must be in (0,1]");
    if (!(k_lo > 0)) throw DomainError("graph domain: k_lo must be positive");
    if (!(k_hi >= k_lo)) throw DomainError("graph domain: k_hi < k_lo");
}

Box GraphDomain::bounding_box() const {
    Box b = base_;
    b.dim = base_.dim + 1;
    b.lo[base_.dim] = 0;
    b.hi[base_.dim] = k_hi_;
    return b;
}

bool GraphDomain::contains(const Point& p) const {
    if (!base_.contains(p)) return false;
    double z = p[base_.dim];
    return z > 0 && z < profile_(p.data());
}

Point GraphDomain::anchor() const {
    Point p{0, 0, 0};
    for (int i = 0; i < base_.dim; ++i) p[i] = 0.5 * (base_.lo[i] + base_.hi[i]);
    p[base_.dim] = 0.5 * profile_(p.data());
    return p;
}

std::string GraphDomain::describe() const {
    std::string s = "graph:" + std::to_string(dim()) + ":" + profile_.describe() +
                    ":g=" + fmt(gamma_) + ":M=" + fmt(holder_const_) + ":k=" + fmt(k_lo_) + "," +
                    fmt(k_hi_);
    for (int i = 0; i < base_.dim; ++i) s += ":" + fmt(base_.lo[i]) + "," + fmt(base_.hi[i]);
    return s;
}

void GraphDomain::build_boundary_cloud() const {
    // Graph surface plus side walls, sampled densely; bucketed along axis 0.
    const int nb = base_.dim;
    std::vector<Point>& cloud = cloud_;
    if (nb == 1) {
        const int n = 16385;
        cloud.reserve(n + 512);
        double a = base_.lo[0], b = base_.hi[0];
        for (int i = 0; i < n; ++i) {
            double t = a + (b - a) * i / (n - 1);
            cloud.push_back(make_point(t, profile_(&t)));
        }
        for (double wall : {a, b}) {
            double top = profile_(&wall);
            for (int i = 0; i <= 256; ++i) cloud.push_back(make_point(wall, top * i / 256.0));
        }
    } else {
        const int n = 257;
        cloud.reserve(n * n + 4 * n * 64);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double xb[2] = {base_.lo[0] + base_.extent(0) * i / (n - 1),
                                base_.lo[1] + base_.extent(1) * j / (n - 1)};
                cloud.push_back(make_point(xb[0], xb[1], profile_(xb)));
            }
        // side walls: vertical fans along the four base edges
        for (int e = 0; e < 4; ++e) {
            int ax = e / 2;                       // which coordinate is pinned
            double pin = (e % 2) ? base_.hi[ax] : base_.lo[ax];
            for (int i = 0; i < n; ++i) {
                double xb[2];
                xb[ax] = pin;
                xb[1 - ax] = base_.lo[1 - ax] + base_.extent(1 - ax) * i / (n - 1);
                double top = profile_(xb);
                for (int k = 0; k <= 32; ++k)
                    cloud.push_back(make_point(xb[0], xb[1], top * k / 32.0));
            }
        }
    }
    nbuckets_ = 256;
    bucket_w_ = base_.extent(0) / nbuckets_;
    cloud_buckets_.assign(nbuckets_, {});
    for (size_t k = 0; k < cloud.size(); ++k) {
        int b = std::clamp(static_cast<int>((cloud[k][0] - base_.lo[0]) / bucket_w_), 0,
                           nbuckets_ - 1);
        cloud_buckets_[b].push_back(static_cast<int>(k));
    }
}

std::optional<double> GraphDomain::boundary_distance(const Point& p) const {
    std::call_once(cloud_once_, [this] { build_boundary_cloud(); });
    const int nb = base_.dim;
    const double z = p[nb];
    // bottom face
    double d_bottom = std::sqrt(std::pow(base_.exterior_distance(p), 2) + z * z);
    // cloud (graph surface + walls) via expanding bucket search
    double best2 = d_bottom * d_bottom;
    int home = std::clamp(static_cast<int>((p[0] - base_.lo[0]) / bucket_w_), 0, nbuckets_ - 1);
    for (int ring = 0; ring < nbuckets_; ++ring) {
        double ring_min = (ring - 1) * bucket_w_;
        if (ring > 1 && ring_min * ring_min > best2) break;
        bool any = false;
        for (int sgn : {-1, 1}) {
            int b = home + sgn * ring;
            if (sgn == 1 && ring == 0) continue;
            if (b < 0 || b >= nbuckets_) continue;
            any = true;
            for (int idx : cloud_buckets_[b]) best2 = std::min(best2, dist2(p, cloud_[idx]));
        }
        if (!any && ring > 0 && (home - ring < 0) && (home + ring >= nbuckets_)) break;
    }
    return std::sqrt(best2);
}

double GraphDomain::sampled_holder_quotient(int samples_per_axis) const {
    const int nb = base_.dim;
    double sup = 0;
    if (nb == 1) {
        std::vector<double> xs(samples_per_axis), ps(samples_per_axis);
        for (int i = 0; i < samples_per_axis; ++i) {
            xs[i] = base_.lo[0] + base_.extent(0) * i / (samples_per_axis - 1);
            ps[i] = profile_(&xs[i]);
        }
        for (int i = 0; i < samples_per_axis; ++i)
            for (int j = i + 1; j < samples_per_axis; ++j) {
                double q = std::abs(ps[i] - ps[j]) / std::pow(std::abs(xs[i] - xs[j]), gamma_);
                sup = std::max(sup, q);
            }
    } else {
        const int n = std::min(samples_per_axis, 48);
        std::vector<std::array<double, 3>> pts;  // x, y, phi
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double xb[2] = {base_.lo[0] + base_.extent(0) * i / (n - 1),
                                base_.lo[1] + base_.extent(1) * j / (n - 1)};
                pts.push_back({xb[0], xb[1], profile_(xb)});
            }
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = i + 1; j < pts.size(); ++j) {
                double dx = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
                sup = std::max(sup, std::abs(pts[i][2] - pts[j][2]) / std::pow(dx, gamma_));
            }
    }
    return sup;
}

// ---- CuspDomain ------------------------------------------------------------

CuspDomain::CuspDomain(int dim, double gamma) : dim_(dim), gamma_(gamma) {
    if (dim < 2 || dim > 3) throw DomainError("cusp domain: dim must be 2 or 3");
    if (!(gamma > 0 && gamma <= 1)) throw DomainError("cusp domain: gamma must be in (0,1]");
}

Box CuspDomain::bounding_box() const {
    Box b;
    b.dim = dim_;
    b.lo[0] = 0;
    b.hi[0] = 1;
    for (int i = 1; i < dim_; ++i) {
        b.lo[i] = -1;
        b.hi[i] = 1;
    }
    return b;
}

bool CuspDomain::contains(const Point& p) const {
    double r = dim_ == 2 ? std::abs(p[1]) : std::hypot(p[1], p[2]);
    if (r >= 1 || p[0] >= 1 || p[0] <= 0) return false;
    return std::pow(r, gamma_) < p[0];
}

double CuspDomain::curve_distance(double x, double r) const {
    // distance from (x, r>=0) to the curve { (t, t^{1/gamma}) : t in [0,1] }
    const double ex = 1.0 / gamma_;
    auto d2 = [&](double t) {
        double dr = r - std::pow(t, ex);
        return (x - t) * (x - t) + dr * dr;
    };
    // graded scan (fine near the tip) then golden refinement per bracket
    const int n = 512;
    double best = std::min(d2(0.0), d2(1.0));
    double prev_t = 0, prev_v = d2(0.0);
    double best_prev = prev_t;
    for (int i = 1; i <= n; ++i) {
        double u = static_cast<double>(i) / n;
        double t = u * u;  // graded
        double v = d2(t);
        if (v < best) {
            best = v;
            best_prev = prev_t;
        }
        prev_t = t;
        prev_v = v;
    }
    (void)prev_v;
    // refine around every local-minimum candidate bracket
    double lo = std::max(0.0, best_prev - 2.0 / n);
    double hi = std::min(1.0, best_prev + 4.0 / n + 2e-3);
    best = std::min(best, golden_min(d2, lo, hi));
    best = std::min(best, golden_min(d2, 0.0, std::min(1.0, 4e-2)));  // tip bracket
    return std::sqrt(best);
}

std::optional<double> CuspDomain::boundary_distance(const Point& p) const {
    double r = dim_ == 2 ? std::abs(p[1]) : std::hypot(p[1], p[2]);
    double x = p[0];
    // right face x=1, |y| <= 1
    double d_face = r <= 1 ? std::abs(1 - x) : std::hypot(1 - x, r - 1);
    return std::min(d_face, curve_distance(x, r));
}

std::string CuspDomain::describe() const {
    return "cusp:" + std::to_string(dim_) + ":g=" + fmt(gamma_);
}

// ---- ImplicitDomain --------------------------------------------------------

ImplicitDomain::ImplicitDomain(int dim, const Box& box, const Expr& formula, const Point& anchor)
    : dim_(dim), box_(box), formula_(formula), anchor_(anchor) {
    if (dim < 1 || dim > 3) throw DomainError("implicit domain: dim must be 1..3");
    if (formula.arity() != dim) throw DomainError("implicit domain: formula arity != dim");
    if (!contains(anchor)) throw DomainError("implicit domain: anchor is not inside");
}

bool ImplicitDomain::contains(const Point& p) const {
    if (!box_.contains(p)) return false;
    return formula_.eval(p.data()) > 0;
}

std::string ImplicitDomain::describe() const {
    std::string s = "implicit:" + std::to_string(dim_) + ":{" + formula_.text() + "}";
    for (int i = 0; i < dim_; ++i) s += ":" + fmt(box_.lo[i]) + "," + fmt(box_.hi[i]);
    return s;
}

// ---- RasterDomain ----------------------------------------------------------

double RasterDomain::cell_volume() const {
    double v = 1;
    for (int i = 0; i < dim_; ++i) v *= h_;
    return v;
}

int64_t RasterDomain::dense_index_of(const Point& p) const {
    int idx[3] = {0, 0, 0};
    for (int i = 0; i < dim_; ++i) {
        double t = (p[i] - box_.lo[i]) / h_;
        if (t < 0 || t >= n_[i]) return -1;
        idx[i] = static_cast<int>(t);
    }
    return dense_index(idx[0], idx[1], idx[2]);
}

bool RasterDomain::contains(const Point& p) const {
    int64_t d = dense_index_of(p);
    return d >= 0 && cell_of_dense_[d] >= 0;
}

void RasterDomain::cell_coords(int32_t cell, int* ixyz) const {
    int64_t d = cells_[cell];
    ixyz[0] = static_cast<int>(d % n_[0]);
    ixyz[1] = static_cast<int>((d / n_[0]) % n_[1]);
    ixyz[2] = static_cast<int>(d / (static_cast<int64_t>(n_[0]) * n_[1]));
}

Point RasterDomain::cell_center(int32_t cell) const {
    int c[3];
    cell_coords(cell, c);
    Point p{0, 0, 0};
    for (int i = 0; i < dim_; ++i) p[i] = box_.lo[i] + (c[i] + 0.5) * h_;
    return p;
}

std::string RasterDomain::describe() const {
    uint64_t h = fnv1a(label_);
    for (uint8_t b : inside_) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return "raster:" + std::to_string(dim_) + ":h=" + fmt(h_) + ":" + hex_id(h);
}

namespace {

// 1D squared-distance transform (Felzenszwalb & Huttenlocher lower envelope).
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (f[v[0]] == kInf && k == 0) {
            v[0] = q;
            continue;
        }
        double s;
        for (;;) {
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
            if (s > z[k]) break;
            if (--k < 0) {
                k = 0;
                v[0] = q;
                s = -kInf;
                break;
            }
        }
        if (s != -kInf) {
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = kInf;
        } else {
            z[0] = -kInf;
            z[1] = kInf;
        }
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

void RasterDomain::compute_edt() const {
    // squared distance (cell units) to the nearest non-inside cell centre on
    // the grid padded by one ring of outside cells
    const int px = n_[0] + 2, py = n_[1] + 2, pz = dim_ == 3 ? n_[2] + 2 : 1;
    std::vector<double> grid(static_cast<size_t>(px) * py * pz, 0.0);
    auto pidx = [&](int x, int y, int z) {
        return (static_cast<size_t>(z) * py + y) * px + x;
    };
    for (int32_t c = 0; c < static_cast<int32_t>(cells_.size()); ++c) {
        int xyz[3];
        cell_coords(c, xyz);
        grid[pidx(xyz[0] + 1, xyz[1] + 1, dim_ == 3 ? xyz[2] + 1 : 0)] = kInf;
    }
    const int nmax = std::max({px, py, pz});
    std::vector<double> f(nmax), dd(nmax), z(nmax + 1);
    std::vector<int> v(nmax);
    // axis x
    for (int zz = 0; zz < pz; ++zz)
        for (int y = 0; y < py; ++y) {
            double* row = &grid[pidx(0, y, zz)];
            edt_1d(row, dd.data(), px, v.data(), z.data());
            std::copy(dd.begin(), dd.begin() + px, row);
        }
    // axis y
    if (dim_ >= 2)
        for (int zz = 0; zz < pz; ++zz)
            for (int x = 0; x < px; ++x) {
                for (int y = 0; y < py; ++y) f[y] = grid[pidx(x, y, zz)];
                edt_1d(f.data(), dd.data(), py, v.data(), z.data());
                for (int y = 0; y < py; ++y) grid[pidx(x, y, zz)] = dd[y];
            }
    // axis z
    if (dim_ == 3)
        for (int y = 0; y < py; ++y)
            for (int x = 0; x < px; ++x) {
                for (int zz = 0; zz < pz; ++zz) f[zz] = grid[pidx(x, y, zz)];
                edt_1d(f.data(), dd.data(), pz, v.data(), z.data());
                for (int zz = 0; zz < pz; ++zz) grid[pidx(x, y, zz)] = dd[zz];
            }
    dist_.resize(cells_.size());
    double rmax = 0;
    for (int32_t c = 0; c < static_cast<int32_t>(cells_.size()); ++c) {
        int xyz[3];
        cell_coords(c, xyz);
        double d2 = grid[pidx(xyz[0] + 1, xyz[1] + 1, dim_ == 3 ? xyz[2] + 1 : 0)];
        dist_[c] = (std::sqrt(d2) - 0.5) * h_;
        rmax = std::max(rmax, dist_[c]);
    }
    inradius_ = rmax;
}

const std::vector<double>& RasterDomain::cell_distances() const {
    std::call_once(edt_once_, [this] { compute_edt(); });
    return dist_;
}

double RasterDomain::cell_distance(int32_t cell) const { return cell_distances()[cell]; }

double RasterDomain::inradius() const {
    cell_distances();
    return inradius_;
}

double RasterDomain::collar_measure(double eps) const {
    if (!(eps > 0)) throw DomainError("collar_measure: eps must be positive");
    if (h_ > eps / 8 * (1 + 1e-12))
        throw DomainError("collar_measure: raster too coarse (h=" + fmt(h_) + " > eps/8=" +
                          fmt(eps / 8) + "); re-rasterize with h <= eps/8");
    const auto& d = cell_distances();
    int64_t count = 0;
    for (double v : d)
        if (v <= eps) ++count;
    return count * cell_volume();
}

void RasterDomain::compute_outside_edt() const {
    // distance (cell units) from outside cells to the nearest inside centre
    const int px = n_[0], py = n_[1], pz = dim_ == 3 ? n_[2] : 1;
    std::vector<double> grid(static_cast<size_t>(px) * py * pz, kInf);
    for (int64_t dense : cells_) grid[dense] = 0.0;
    const int nmax = std::max({px, py, pz});
    std::vector<double> f(nmax), dd(nmax), z(nmax + 1);
    std::vector<int> v(nmax);
    auto gidx = [&](int x, int y, int zz) { return (static_cast<size_t>(zz) * py + y) * px + x; };
    for (int zz = 0; zz < pz; ++zz)
        for (int y = 0; y < py; ++y) {
            double* row = &grid[gidx(0, y, zz)];
            edt_1d(row, dd.data(), px, v.data(), z.data());
            std::copy(dd.begin(), dd.begin() + px, row);
        }
    if (dim_ >= 2)
        for (int zz = 0; zz < pz; ++zz)
            for (int x = 0; x < px; ++x) {
                for (int y = 0; y < py; ++y) f[y] = grid[gidx(x, y, zz)];
                edt_1d(f.data(), dd.data(), py, v.data(), z.data());
                for (int y = 0; y < py; ++y) grid[gidx(x, y, zz)] = dd[y];
            }
    if (dim_ == 3)
        for (int y = 0; y < py; ++y)
            for (int x = 0; x < px; ++x) {
                for (int zz = 0; zz < pz; ++zz) f[zz] = grid[gidx(x, y, zz)];
                edt_1d(f.data(), dd.data(), pz, v.data(), z.data());
                for (int zz = 0; zz < pz; ++zz) grid[gidx(x, y, zz)] = dd[zz];
            }
    outside_dist_.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        outside_dist_[i] = static_cast<float>((std::sqrt(grid[i]) - 0.5) * h_);
}

double RasterDomain::distance_lower_bound(const Point& p) const {
    int64_t dense = dense_index_of(p);
    if (dense < 0) return box_.exterior_distance(p);
    int32_t c = cell_of_dense_[dense];
    double slack = 1.5 * h_ * std::sqrt(static_cast<double>(dim_));
    if (c < 0) {
        std::call_once(outside_edt_once_, [this] { compute_outside_edt(); });
        return std::max(0.0, static_cast<double>(outside_dist_[dense]) - slack);
    }
    return std::max(0.0, cell_distance(c) - slack);
}

double RasterDomain::distance_upper_bound(const Point& p) const {
    int64_t dense = dense_index_of(p);
    double slack = 1.5 * h_ * std::sqrt(static_cast<double>(dim_));
    if (dense < 0) return box_.exterior_distance(p) + 2 * box_.volume() + slack;
    int32_t c = cell_of_dense_[dense];
    if (c < 0) {
        std::call_once(outside_edt_once_, [this] { compute_outside_edt(); });
        return static_cast<double>(outside_dist_[dense]) + slack;
    }
    return cell_distance(c) + slack;
}

void RasterDomain::export_pgm(const std::string& path) const {
    if (dim_ == 1) throw DomainError("pgm export: need dim >= 2");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    int zslice = dim_ == 3 ? n_[2] / 2 : 0;
    out << "P2\n" << n_[0] << " " << n_[1] << "\n255\n";
    for (int y = n_[1] - 1; y >= 0; --y) {
        for (int x = 0; x < n_[0]; ++x)
            out << (cell_at(x, y, zslice) >= 0 ? 255 : 0) << (x + 1 == n_[0] ? "" : " ");
        out << "\n";
    }
}

void RasterDomain::finalize(const Point& anchor_hint) {
    const int64_t total = static_cast<int64_t>(n_[0]) * n_[1] * n_[2];
    int64_t anchor_dense = dense_index_of(anchor_hint);
    if (anchor_dense < 0 || !inside_[anchor_dense]) {
        // snap to the nearest inside cell within a small neighbourhood
        int64_t found = -1;
        double best = kInf;
        for (int64_t i = 0; i < total; ++i) {
            if (!inside_[i]) continue;
            int ix = static_cast<int>(i % n_[0]);
            int iy = static_cast<int>((i / n_[0]) % n_[1]);
            int iz = static_cast<int>(i / (static_cast<int64_t>(n_[0]) * n_[1]));
            Point c{box_.lo[0] + (ix + 0.5) * h_, box_.lo[1] + (iy + 0.5) * h_,
                    box_.lo[2] + (iz + 0.5) * h_};
            double d2v = dist2(c, anchor_hint);
            if (d2v < best) {
                best = d2v;
                found = i;
            }
        }
        if (found < 0) throw DomainError("rasterize: empty raster");
        if (best > 4 * dim_ * h_ * h_)
            throw DomainError("rasterize: anchor cell is not inside the raster");
        anchor_dense = found;
    }
    // flood fill (face adjacency) from the anchor; keep that component
    std::vector<uint8_t> keep(total, 0);
    std::deque<int64_t> queue{anchor_dense};
    keep[anchor_dense] = 1;
    const int64_t sx = 1, sy = n_[0];
    const int64_t sz = static_cast<int64_t>(n_[0]) * n_[1];
    while (!queue.empty()) {
        int64_t cur = queue.front();
        queue.pop_front();
        int ix = static_cast<int>(cur % n_[0]);
        int iy = static_cast<int>((cur / n_[0]) % n_[1]);
        int iz = static_cast<int>(cur / sz);
        auto push = [&](int64_t nb) {
            if (inside_[nb] && !keep[nb]) {
                keep[nb] = 1;
                queue.push_back(nb);
            }
        };
        if (ix > 0) push(cur - sx);
        if (ix + 1 < n_[0]) push(cur + sx);
        if (dim_ >= 2 && iy > 0) push(cur - sy);
        if (dim_ >= 2 && iy + 1 < n_[1]) push(cur + sy);
        if (dim_ == 3 && iz > 0) push(cur - sz);
        if (dim_ == 3 && iz + 1 < n_[2]) push(cur + sz);
    }
    inside_ = std::move(keep);
    cell_of_dense_.assign(total, -1);
    cells_.clear();
    for (int64_t i = 0; i < total; ++i)
        if (inside_[i]) {
            cell_of_dense_[i] = static_cast<int32_t>(cells_.size());
            cells_.push_back(i);
        }
    if (cells_.empty()) throw DomainError("rasterize: empty raster");
    {
        int64_t d = anchor_dense;
        int ix = static_cast<int>(d % n_[0]);
        int iy = static_cast<int>((d / n_[0]) % n_[1]);
        int iz = static_cast<int>(d / sz);
        anchor_ = Point{box_.lo[0] + (ix + 0.5) * h_, box_.lo[1] + (iy + 0.5) * h_,
                        box_.lo[2] + (iz + 0.5) * h_};
    }
}

std::shared_ptr<RasterDomain> RasterDomain::from_domain(const Domain& d, double h) {
    if (!(h > 0)) throw DomainError("rasterize: h must be positive");
    auto r = std::make_shared<RasterDomain>();
    r->dim_ = d.dim();
    r->box_ = d.bounding_box();
    r->h_ = h;
    int64_t total = 1;
    for (int i = 0; i < r->dim_; ++i) {
        double cells = r->box_.extent(i) / h;
        int n = static_cast<int>(std::llround(cells));
        if (n < 1 || std::abs(cells - n) > 1e-6)
            throw DomainError("rasterize: bounding box extent " + fmt(r->box_.extent(i)) +
                              " is not an integer multiple of h=" + fmt(h));
        r->n_[i] = n;
        total *= n;
    }
    r->inside_.assign(total, 0);
    for (int iz = 0; iz < r->n_[2]; ++iz)
        for (int iy = 0; iy < r->n_[1]; ++iy)
            for (int ix = 0; ix < r->n_[0]; ++ix) {
                Point c{r->box_.lo[0] + (ix + 0.5) * h, r->box_.lo[1] + (iy + 0.5) * h,
                        r->box_.lo[2] + (iz + 0.5) * h};
                if (d.contains(c)) r->inside_[r->dense_index(ix, iy, iz)] = 1;
            }
    r->label_ = d.describe();
    r->finalize(d.anchor());
    return r;
}

std::shared_ptr<RasterDomain> RasterDomain::from_cells(
    const Box& box, double h, const std::vector<std::array<int, 3>>& cells,
    const std::string& label) {
    auto r = std::make_shared<RasterDomain>();
    r->dim_ = box.dim;
    r->box_ = box;
    r->h_ = h;
    int64_t total = 1;
    for (int i = 0; i < box.dim; ++i) {
        r->n_[i] = static_cast<int>(std::llround(box.extent(i) / h));
        total *= r->n_[i];
    }
    r->inside_.assign(total, 0);
    if (cells.empty()) throw DomainError("from_cells: empty raster");
    for (const auto& c : cells)
        r->inside_[r->dense_index(c[0], box.dim >= 2 ? c[1] : 0, box.dim == 3 ? c[2] : 0)] = 1;
    r->label_ = label;
    Point hint{box.lo[0] + (cells[0][0] + 0.5) * h, box.lo[1] + (cells[0][1] + 0.5) * h,
               box.lo[2] + (cells[0][2] + 0.5) * h};
    r->finalize(hint);
    return r;
}

std::shared_ptr<RasterDomain> RasterDomain::subset(const std::vector<uint8_t>& keep_cell,
                                                   const std::string& label) const {
    if (keep_cell.size() != cells_.size()) throw DomainError("subset: keep flag size mismatch");
    auto r = std::make_shared<RasterDomain>();
    r->dim_ = dim_;
    r->box_ = box_;
    r->h_ = h_;
    for (int i = 0; i < 3; ++i) r->n_[i] = n_[i];
    r->inside_.assign(inside_.size(), 0);
    int32_t best_cell = -1;
    double best_d = -1;
    const auto& dist = cell_distances();
    for (int32_t c = 0; c < static_cast<int32_t>(cells_.size()); ++c) {
        if (!keep_cell[c]) continue;
        r->inside_[cells_[c]] = 1;
        if (dist[c] > best_d) {
            best_d = dist[c];
            best_cell = c;
        }
    }
    if (best_cell < 0) throw DomainError("subset: no cells kept");
    r->label_ = label;
    r->finalize(cell_center(best_cell));
    return r;
}

// ---- operations ------------------------------------------------------------

double distance_to_boundary(const Domain& d, const Point& p) {
    if (!d.contains(p)) throw DomainError("distance_to_boundary: point is not inside the domain");
    if (auto exact = d.boundary_distance(p)) return *exact;
    const auto* raster = dynamic_cast<const RasterDomain*>(&d);
    if (!raster) throw DomainError("distance_to_boundary: domain supports no distance evaluation");
    return raster->cell_distance(raster->cell_at(raster->dense_index_of(p)));
}

std::shared_ptr<RasterDomain> rasterize(const Domain& d, double h) {
    if (const auto* raster = dynamic_cast<const RasterDomain*>(&d))
        if (raster->h() == h) return std::const_pointer_cast<RasterDomain>(
            std::static_pointer_cast<const RasterDomain>(raster->shared_from_this()));
    return RasterDomain::from_domain(d, h);
}

double snap_resolution(const Domain& d, double h_target) {
    if (!(h_target > 0)) throw DomainError("snap_resolution: h must be positive");
    Box bb = d.bounding_box();
    auto divides_all = [&](double h) {
        for (int i = 0; i < bb.dim; ++i) {
            double cells = bb.extent(i) / h;
            if (std::abs(cells - std::llround(cells)) > 1e-6) return false;
        }
        return true;
    };
    // prefer h = 1/m, then h = extent_i / m
    double h = 1.0 / std::ceil(1.0 / h_target - 1e-12);
    if (h <= h_target * (1 + 1e-12) && divides_all(h)) return h;
    for (int i = 0; i < bb.dim; ++i) {
        double e = bb.extent(i);
        h = e / std::ceil(e / h_target - 1e-12);
        if (divides_all(h)) return h;
    }
    throw DomainError("snap_resolution: no common resolution <= " + fmt(h_target));
}

double collar_measure(const Domain& d, double eps, double h) {
    if (const auto* raster = dynamic_cast<const RasterDomain*>(&d))
        return raster->collar_measure(eps);
    if (h <= 0) h = snap_resolution(d, eps / 8);
    return rasterize(d, h)->collar_measure(eps);
}

MinkowskiEstimate minkowski_dimension(const Domain& d, const std::vector<double>& eps_grid,
                                      double h) {
    if (eps_grid.size() < 6) throw FitError("minkowski_dimension: need >= 6 eps values");
    std::vector<double> eps = eps_grid;
    std::sort(eps.begin(), eps.end());
    if (eps.back() / eps.front() < 100 * (1 - 1e-9))
        throw FitError("minkowski_dimension: eps grid must span >= 2 decades");
    if (h <= 0) h = snap_resolution(d, eps.front() / 8);

    std::shared_ptr<const RasterDomain> raster;
    if (const auto* rd = dynamic_cast<const RasterDomain*>(&d))
        raster = std::static_pointer_cast<const RasterDomain>(rd->shared_from_this());
    else
        raster = rasterize(d, h);

    MinkowskiEstimate est;
    est.table.eps = eps;
    est.table.measure.reserve(eps.size());
    for (double e : eps) est.table.measure.push_back(raster->collar_measure(e));
    for (size_t i = 1; i < eps.size(); ++i)
        if (est.table.measure[i] + 1e-15 < est.table.measure[i - 1])
            throw FitError("minkowski_dimension: collar table not monotone; refine the raster");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (est.table.measure[i] <= 0) continue;
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(est.table.measure[i]));
    }
    if (lx.size() < 4) throw FitError("minkowski_dimension: too many empty collars");
    LineFit f = fit_line(lx, ly);
    est.table.fitted_exponent = f.slope;
    est.table.fitted_constant = std::exp(f.intercept);
    est.table.max_fit_residual = f.max_residual;
    est.dimension = d.dim() - f.slope;
    return est;
}

}  // namespace nspect
