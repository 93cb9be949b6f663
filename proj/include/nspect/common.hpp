#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nspect {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};
struct FitError : Error {
    using Error::Error;
};

/// Point in R^N, N <= 3. Unused coordinates stay zero.
using Point = std::array<double, 3>;

inline Point make_point(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline Point make_point(const std::vector<double>& v) {
    if (v.empty() || v.size() > 3) throw DomainError("point must have 1..3 coordinates");
    Point p{0, 0, 0};
    for (size_t i = 0; i < v.size(); ++i) p[i] = v[i];
    return p;
}

inline double dist2(const Point& a, const Point& b) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

/// Axis-aligned box in R^N.
struct Box {
    int dim = 0;
    Point lo{0, 0, 0};
    Point hi{0, 0, 0};

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume() const {
        double v = 1;
        for (int i = 0; i < dim; ++i) v *= extent(i);
        return v;
    }
    bool contains(const Point& p) const {
        for (int i = 0; i < dim; ++i)
            if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
        return true;
    }
    /// Distance from p to the closed box (0 if inside).
    double exterior_distance(const Point& p) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) {
            double d = std::max({lo[i] - p[i], p[i] - hi[i], 0.0});
            s += d * d;
        }
        return std::sqrt(s);
    }
    /// Exact distance from p to the box *boundary* (valid inside and outside).
    double boundary_distance(const Point& p) const {
        bool inside = true;
        for (int i = 0; i < dim; ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) inside = false;
        if (!inside) return exterior_distance(p);
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim; ++i) m = std::min({m, p[i] - lo[i], hi[i] - p[i]});
        return m;
    }
};

/// Least-squares line fit y = slope*x + intercept with residual diagnostics.
struct LineFit {
    double slope = 0;
    double intercept = 0;
    double max_residual = 0;
    double rms_residual = 0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw FitError("fit_line: need >= 2 points");
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw FitError("fit_line: degenerate abscissae");
    LineFit f;
    f.n = n;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        double r = ys[i] - (f.slope * xs[i] + f.intercept);
        f.max_residual = std::max(f.max_residual, std::abs(r));
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

/// Geometric grid of n values from lo to hi (inclusive).
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(lo > 0) || !(hi > lo) || n < 2) throw Error("geometric_grid: bad range");
    std::vector<double> g(n);
    const double r = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * i);
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// FNV-1a over a string; used for stable domain/config identities.
inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex_id(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nspect
