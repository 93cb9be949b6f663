#include "nspect/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace nspect {

namespace {

struct DistanceOracle {
    const Domain& dom;
    const RasterDomain* raster;

    explicit DistanceOracle(const Domain& d)
        : dom(d), raster(dynamic_cast<const RasterDomain*>(&d)) {}

    bool inside(const Point& p) const { return dom.contains(p); }

    // lower bound on distance from p to the boundary, valid on either side
    double lower(const Point& p) const {
        if (raster) return raster->distance_lower_bound(p);
        return *dom.boundary_distance(p);
    }
    double upper(const Point& p) const {
        if (raster) return raster->distance_upper_bound(p);
        return *dom.boundary_distance(p);
    }
};

struct Key {
    int level;
    int64_t i[3];
    bool operator==(const Key& o) const {
        return level == o.level && i[0] == o.i[0] && i[1] == o.i[1] && i[2] == o.i[2];
    }
};
struct KeyHash {
    size_t operator()(const Key& k) const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&](uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        };
        mix(static_cast<uint64_t>(k.level));
        for (int a = 0; a < 3; ++a) mix(static_cast<uint64_t>(k.i[a]));
        return static_cast<size_t>(h);
    }
};

struct Builder {
    const Domain& dom;
    DistanceOracle oracle;
    int dim;
    int k_max;
    WhitneyCovering out;

    Builder(const Domain& d, int kmax) : dom(d), oracle(d), dim(d.dim()), k_max(kmax) {
        out.dim = dim;
        out.k_max = kmax;
        out.domain_id = d.id();
    }

    Point center(int level, const int64_t* idx) const {
        double e = std::ldexp(1.0, -level);
        Point c{0, 0, 0};
        for (int a = 0; a < dim; ++a) c[a] = (idx[a] + 0.5) * e;
        return c;
    }

    // conservative selection test: cube certainly satisfies diam <= dist
    bool passes(int level, const int64_t* idx) const {
        Point c = center(level, idx);
        if (!oracle.inside(c)) return false;
        double e = std::ldexp(1.0, -level);
        double diam = e * std::sqrt(static_cast<double>(dim));
        return oracle.lower(c) - 0.5 * diam >= diam;
    }

    void visit(int level, const int64_t* idx, bool parent_passed) {
        Point c = center(level, idx);
        double e = std::ldexp(1.0, -level);
        double half_diag = 0.5 * e * std::sqrt(static_cast<double>(dim));
        if (!oracle.inside(c)) {
            // drop when provably disjoint from the domain
            if (oracle.lower(c) >= half_diag) return;
        } else if (level >= 1 && !parent_passed && passes(level, idx)) {
            WhitneyCube q;
            q.level = level;
            for (int a = 0; a < 3; ++a) q.idx[a] = a < dim ? idx[a] : 0;
            out.cubes.push_back(q);
            out.level_counts[level] += 1;
            return;
        }
        if (level >= k_max) return;
        bool this_passed = level >= 1 && parent_passed && passes(level, idx);
        int64_t child[3] = {0, 0, 0};
        int nc = 1 << dim;
        for (int m = 0; m < nc; ++m) {
            for (int a = 0; a < dim; ++a) child[a] = 2 * idx[a] + ((m >> a) & 1);
            visit(level + 1, child, this_passed);
        }
    }

    void run() {
        Box bb = dom.bounding_box();
        int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            lo[a] = static_cast<int64_t>(std::floor(bb.lo[a]));
            hi[a] = static_cast<int64_t>(std::ceil(bb.hi[a])) - 1;
        }
        int64_t idx[3] = {0, 0, 0};
        for (int64_t z = lo[2]; z <= (dim == 3 ? hi[2] : lo[2]); ++z)
            for (int64_t y = lo[1]; y <= (dim >= 2 ? hi[1] : lo[1]); ++y)
                for (int64_t x = lo[0]; x <= hi[0]; ++x) {
                    idx[0] = x;
                    idx[1] = y;
                    idx[2] = z;
                    visit(0, idx, false);
                }
        std::sort(out.cubes.begin(), out.cubes.end(), [](const WhitneyCube& a, const WhitneyCube& b) {
            if (a.level != b.level) return a.level < b.level;
            for (int i = 0; i < 3; ++i)
                if (a.idx[i] != b.idx[i]) return a.idx[i] < b.idx[i];
            return false;
        });
    }
};

}  // namespace

Point WhitneyCovering::cube_center(const WhitneyCube& q) const {
    double e = cube_edge(q);
    Point c{0, 0, 0};
    for (int a = 0; a < dim; ++a) c[a] = (q.idx[a] + 0.5) * e;
    return c;
}

double WhitneyCovering::union_measure() const {
    double s = 0;
    for (const auto& [k, n] : level_counts) s += static_cast<double>(n) * std::pow(std::ldexp(1.0, -k), dim);
    return s;
}

WhitneyCovering build_whitney(const Domain& d, int k_max) {
    if (k_max < 3) throw DomainError("build_whitney: k_max must be >= 3");
    Builder b(d, k_max);
    b.run();
    if (b.out.cubes.empty())
        throw DomainError("build_whitney: no cube fits at k_max=" + std::to_string(k_max));
    return b.out;
}

WhitneyInvariantReport check_whitney_invariants(const WhitneyCovering& cov, const Domain& d) {
    WhitneyInvariantReport rep;
    DistanceOracle oracle(d);
    const int dim = cov.dim;

    // exact disjointness: dyadic cubes are nested or interior-disjoint, so a
    // violation is exactly an ancestor/duplicate relation in the kept set
    std::unordered_set<Key, KeyHash> kept;
    for (const auto& q : cov.cubes) kept.insert(Key{q.level, {q.idx[0], q.idx[1], q.idx[2]}});
    rep.disjoint = kept.size() == cov.cubes.size();
    for (const auto& q : cov.cubes) {
        Key k{q.level, {q.idx[0], q.idx[1], q.idx[2]}};
        while (k.level > 0 && rep.disjoint) {
            k.level -= 1;
            for (int a = 0; a < 3; ++a) k.i[a] = k.i[a] >> 1;
            if (kept.count(k)) {
                rep.disjoint = false;
                break;
            }
        }
        if (!rep.disjoint) break;
    }

    // condition (iii) with conservative bounds at cube centres
    for (const auto& q : cov.cubes) {
        Point c = cov.cube_center(q);
        double diam = cov.cube_diam(q);
        double lb = oracle.lower(c) - 0.5 * diam;  // lower bound on dist(Q, boundary)
        double ub = oracle.upper(c);               // dist(Q, boundary) <= d(center)
        if (lb + 1e-12 < diam || ub > 4 * diam + 1e-12) rep.condition_iii_violations += 1;
    }

    // touching counts and level gaps on the integer lattice (exact)
    std::unordered_map<Key, int, KeyHash> index;
    std::vector<int> levels;
    for (const auto& [k, n] : cov.level_counts) levels.push_back(k);
    for (size_t i = 0; i < cov.cubes.size(); ++i) {
        const auto& q = cov.cubes[i];
        index[Key{q.level, {q.idx[0], q.idx[1], q.idx[2]}}] = static_cast<int>(i);
    }
    for (const auto& q : cov.cubes) {
        int touch = 0;
        for (int k2 : levels) {
            // level-k2 indices whose closed cube meets the closure of q
            int64_t lo[3], hi[3];
            for (int a = 0; a < dim; ++a) {
                if (k2 >= q.level) {
                    int shift = k2 - q.level;
                    lo[a] = (q.idx[a] << shift) - 1;
                    hi[a] = ((q.idx[a] + 1) << shift);
                } else {
                    int shift = q.level - k2;
                    lo[a] = (q.idx[a] - 1) >> shift;
                    hi[a] = (q.idx[a] + 1) >> shift;
                }
            }
            int64_t it[3] = {lo[0], dim >= 2 ? lo[1] : 0, dim == 3 ? lo[2] : 0};
            for (it[2] = (dim == 3 ? lo[2] : 0); it[2] <= (dim == 3 ? hi[2] : 0); ++it[2])
                for (it[1] = (dim >= 2 ? lo[1] : 0); it[1] <= (dim >= 2 ? hi[1] : 0); ++it[1])
                    for (it[0] = lo[0]; it[0] <= hi[0]; ++it[0]) {
                        if (k2 == q.level && it[0] == q.idx[0] && it[1] == q.idx[1] &&
                            it[2] == q.idx[2])
                            continue;
                        // skip strict-interior candidates (cannot touch, only overlap)
                        if (k2 > q.level) {
                            int shift = k2 - q.level;
                            bool on_shell = false;
                            for (int a = 0; a < dim; ++a)
                                if (it[a] == lo[a] || it[a] == hi[a]) on_shell = true;
                            (void)shift;
                            if (!on_shell) continue;
                        }
                        auto hit = index.find(Key{k2, {it[0], it[1], it[2]}});
                        if (hit == index.end()) continue;
                        touch += 1;
                        rep.max_level_gap = std::max(rep.max_level_gap, std::abs(k2 - q.level));
                    }
        }
        rep.max_touching = std::max(rep.max_touching, touch);
    }

    // n(k) <= c1 2^{N k}
    double c1 = d.bounding_box().volume() + 1.0;
    for (const auto& [k, n] : cov.level_counts)
        if (static_cast<double>(n) > c1 * std::pow(2.0, dim * k)) rep.count_bound_violations += 1;

    rep.union_measure = cov.union_measure();
    return rep;
}

PointCubeDistanceReport check_point_cube_distance(const WhitneyCovering& cov, const Domain& d,
                                                  int samples_per_cube, uint64_t seed) {
    PointCubeDistanceReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    DistanceOracle oracle(d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& q : cov.cubes) {
        double e = cov.cube_edge(q);
        double diam = cov.cube_diam(q);
        for (int s = 0; s < samples_per_cube; ++s) {
            Point p{0, 0, 0};
            for (int a = 0; a < cov.dim; ++a) p[a] = (q.idx[a] + uni(rng)) * e;
            rep.samples += 1;
            double lo = oracle.lower(p), hi = oracle.upper(p);
            if (hi + 1e-12 < diam || lo > 5 * diam + 1e-12) rep.violations += 1;
            rep.min_ratio = std::min(rep.min_ratio, lo / diam);
            rep.max_ratio = std::max(rep.max_ratio, hi / diam);
        }
    }
    return rep;
}

CubeCountDimension cube_count_dimension(const WhitneyCovering& cov) {
    std::vector<int> ks;
    for (const auto& [k, n] : cov.level_counts)
        if (n > 0) ks.push_back(k);
    if (ks.size() < 5) throw FitError("cube_count_dimension: need >= 5 populated levels");
    std::sort(ks.begin(), ks.end());
    size_t start = ks.size() / 2;
    if (ks.size() - start < 3) start = ks.size() - 3;
    CubeCountDimension res;
    std::vector<double> xs, ys;
    for (size_t i = start; i < ks.size(); ++i) {
        res.levels_used.push_back(ks[i]);
        xs.push_back(ks[i]);
        ys.push_back(std::log2(static_cast<double>(cov.level_counts.at(ks[i]))));
    }
    res.fit = fit_line(xs, ys);
    res.lambda_est = res.fit.slope;
    return res;
}

}  // namespace nspect
