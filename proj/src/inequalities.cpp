#include "nspect/inequalities.hpp"

#include <Eigen/SparseCholesky>

#include "nspect/whitney.hpp"

namespace nspect {

namespace {

// Shared ascent engine: maximizes ||f||_* / ||f||_{W^{1,2}} where the
// numerator gradient is supplied by `weight_step` mapping f to the vector
// |f|^{q-2} f (Sobolev) or w .* f (Hardy). Each step solves with K + B,
// which is the natural preconditioner for this quotient.
template <class StepFn, class ValueFn>
std::pair<double, Eigen::VectorXd> ascend(const DiscreteOperator& op, StepFn&& step,
                                          ValueFn&& value, Eigen::VectorXd f, int max_iters,
                                          double rel_tol,
                                          const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& kb,
                                          int* iters_out) {
    double wnorm = op.sobolev_norm(f);
    if (!(wnorm > 0)) throw SolverError("quotient ascent: zero start vector");
    f /= wnorm;
    double best = value(f);
    Eigen::VectorXd best_f = f;
    int it = 0;
    for (; it < max_iters; ++it) {
        Eigen::VectorXd g = step(f);
        Eigen::VectorXd fn = kb.solve(op.mass * g);
        double wn = op.sobolev_norm(fn);
        if (!(wn > 0) || !std::isfinite(wn)) break;
        fn /= wn;
        double v = value(fn);
        if (v > best) {
            best = v;
            best_f = fn;
        }
        if (std::abs(v - best) <= rel_tol * best && it > 2) {
            f = fn;
            break;
        }
        f = fn;
    }
    if (iters_out) *iters_out += it;
    return {best, best_f};
}

std::vector<Eigen::VectorXd> build_starts(const DiscreteOperator& op, const AscentOptions& opts) {
    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Ones(op.size()));
    for (const auto& s : opts.extra_starts) {
        if (s.size() != op.size()) throw SolverError("ascent start: dimension mismatch");
        starts.push_back(s);
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd v(op.size());
        for (int64_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * gauss(rng);
        starts.push_back(v);
    }
    return starts;
}

}  // namespace

SobolevEstimate estimate_sobolev_constant(const DiscreteOperator& op, double q,
                                          const AscentOptions& opts) {
    if (!(q > 2)) throw SolverError("estimate_sobolev_constant: need q > 2");
    if (q > 10) throw SolverError("estimate_sobolev_constant: q capped at 10");
    SobolevEstimate est;
    est.q = q;

    Eigen::SparseMatrix<double> A = op.stiffness;
    Eigen::SparseMatrix<double> I(op.size(), op.size());
    I.setIdentity();
    A += op.mass * I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kb(A);
    if (kb.info() != Eigen::Success) throw SolverError("estimate_sobolev_constant: factorization failed");

    auto value = [&](const Eigen::VectorXd& f) { return op.lq_norm(f, q) / op.sobolev_norm(f); };
    auto step = [&](const Eigen::VectorXd& f) {
        Eigen::VectorXd g(f.size());
        for (int64_t i = 0; i < f.size(); ++i)
            g[i] = std::pow(std::abs(f[i]), q - 2) * f[i];
        return g;
    };

    double best = 0, worst = std::numeric_limits<double>::infinity();
    for (const auto& s : build_starts(op, opts)) {
        auto [v, f] = ascend(op, step, value, s, opts.max_iters, opts.rel_tol, kb,
                             &est.iterations);
        if (v > best) {
            best = v;
            est.maximizer = f;
        }
        worst = std::min(worst, v);
    }
    est.constant = best;
    est.restart_spread = best > 0 ? (best - worst) / best : 0;
    return est;
}

HardyEstimate estimate_hardy_constant(const DiscreteOperator& op, const Eigen::VectorXd& dist,
                                      double alpha, const AscentOptions& opts) {
    if (!(alpha > 0)) throw SolverError("estimate_hardy_constant: need alpha > 0");
    if (dist.size() != op.size()) throw SolverError("estimate_hardy_constant: distance size");
    if (dist.minCoeff() <= 0)
        throw SolverError("estimate_hardy_constant: distances must be positive");
    HardyEstimate est;
    est.alpha = alpha;

    Eigen::VectorXd w(dist.size());
    for (int64_t i = 0; i < dist.size(); ++i) w[i] = std::pow(dist[i], -2 * alpha);
    est.weight_integral = op.mass * w.sum();
    est.unit_probe = std::sqrt(est.weight_integral) / std::sqrt(op.mass * op.size());

    Eigen::SparseMatrix<double> A = op.stiffness;
    Eigen::SparseMatrix<double> I(op.size(), op.size());
    I.setIdentity();
    A += op.mass * I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kb(A);
    if (kb.info() != Eigen::Success) throw SolverError("estimate_hardy_constant: factorization failed");

    auto value = [&](const Eigen::VectorXd& f) {
        double num = std::sqrt(op.mass * (w.array() * f.array().square()).sum());
        return num / op.sobolev_norm(f);
    };
    auto step = [&](const Eigen::VectorXd& f) { return (w.array() * f.array()).matrix().eval(); };

    double best = 0, worst = std::numeric_limits<double>::infinity();
    for (const auto& s : build_starts(op, opts)) {
        auto [v, f] = ascend(op, step, value, s, opts.max_iters, opts.rel_tol, kb,
                             &est.iterations);
        if (v > best) {
            best = v;
            est.maximizer = f;
        }
        worst = std::min(worst, v);
    }
    est.constant = best;
    est.restart_spread = best > 0 ? (best - worst) / best : 0;
    return est;
}

SobolevExponent hardy_to_sobolev_exponent(double alpha, int N, double p) {
    if (!(alpha > 0)) throw Error("hardy_to_sobolev_exponent: alpha must be positive");
    SobolevExponent out;
    if (N > p) {
        double M = N * (1 + alpha);
        out.q = M * p / (M - p);
    } else {
        out.is_interval = true;
        out.q_lo = p;
        out.q_hi = p * (1 + alpha * p / N);
    }
    return out;
}

double sobolev_to_hardy_exponent(double sigma, double p, double q) {
    if (!(q > p)) throw Error("sobolev_to_hardy_exponent: need q > p");
    if (!(sigma > 0)) throw Error("sobolev_to_hardy_exponent: need sigma > 0");
    return sigma * (1.0 / p - 1.0 / q);
}

InterpolationSplit holder_interpolation_split(double alpha, int N, double p, double r) {
    InterpolationSplit s;
    double a = alpha / N;
    s.lambda = a / (a + 1.0 / p - 1.0 / r);
    s.q = 1.0 / ((1.0 - s.lambda) / p + s.lambda / r);
    return s;
}

CuspMembership example6_membership(double gamma, int N, double delta, double q) {
    if (!(gamma > 0 && gamma <= 1)) throw Error("example6_membership: gamma in (0,1]");
    if (N == 2 && gamma >= 1) throw Error("example6_membership: need gamma < 1 when N = 2");
    CuspMembership m;
    double s = 1.0 + (N - 1) / gamma;
    m.w12_threshold = -1.0 + 0.5 * s;
    m.lq_threshold = s / q;
    m.in_w12 = delta < m.w12_threshold;
    m.in_lq = delta < m.lq_threshold;
    return m;
}

Eigen::VectorXd power_profile_start(const RasterDomain& raster, double delta) {
    Eigen::VectorXd v(raster.cell_count());
    for (int32_t c = 0; c < raster.cell_count(); ++c)
        v[c] = std::pow(raster.cell_center(c)[0], -delta);
    return v;
}

RefinementStudy classify_refinement(const std::vector<double>& hs,
                                    const std::vector<double>& values) {
    if (hs.size() != values.size() || hs.size() < 2)
        throw FitError("classify_refinement: need >= 2 levels");
    RefinementStudy st;
    st.hs = hs;
    st.values = values;
    st.max_growth = 0;
    st.min_growth = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < values.size(); ++i) {
        double g = values[i + 1] / values[i];
        st.growth.push_back(g);
        st.max_growth = std::max(st.max_growth, g);
        st.min_growth = std::min(st.min_growth, g);
    }
    bool stable = true, divergent = true;
    for (double g : st.growth) {
        if (std::abs(g - 1.0) > 0.05) stable = false;
        if (g < 1.5) divergent = false;
    }
    st.verdict = stable      ? RefinementVerdict::Stable
                 : divergent ? RefinementVerdict::Divergent
                             : RefinementVerdict::Inconclusive;
    return st;
}

EquivalenceReport verify_corollary2(const Domain& domain, double q, double alpha,
                                    const std::vector<double>& hs, const AscentOptions& opts) {
    if (hs.size() < 2) throw FitError("verify_corollary2: need >= 2 resolutions");
    EquivalenceReport rep;
    rep.q = q;
    rep.alpha = alpha;
    rep.sigma = alpha / (0.5 - 1.0 / q);

    std::vector<double> hardy_vals, sob_vals, weight_vals;
    for (double h : hs) {
        auto raster = rasterize(domain, h);
        auto op = assemble(raster);
        Eigen::VectorXd dist(raster->cell_count());
        for (int32_t c = 0; c < raster->cell_count(); ++c) dist[c] = raster->cell_distance(c);
        auto hardy = estimate_hardy_constant(op, dist, alpha, opts);
        hardy_vals.push_back(hardy.constant);
        sob_vals.push_back(estimate_sobolev_constant(op, q, opts).constant);
        double wint = 0;
        for (int32_t c = 0; c < raster->cell_count(); ++c)
            wint += std::pow(raster->cell_distance(c), -rep.sigma);
        weight_vals.push_back(wint * std::pow(h, domain.dim()));
    }

    auto verdict_name = [](RefinementVerdict v) {
        switch (v) {
            case RefinementVerdict::Stable: return "stable";
            case RefinementVerdict::Divergent: return "divergent";
            default: return "inconclusive";
        }
    };

    auto hardy_st = classify_refinement(hs, hardy_vals);
    rep.a.name = "hardy";
    rep.a.verdict = hardy_st.verdict;
    rep.a.detail = std::string(verdict_name(hardy_st.verdict)) +
                   ", max growth/halving " + std::to_string(hardy_st.max_growth);

    auto sob_st = classify_refinement(hs, sob_vals);
    auto weight_st = classify_refinement(hs, weight_vals);
    rep.b.name = "weight-integrable + sobolev";
    if (weight_st.verdict == RefinementVerdict::Stable) {
        rep.b.verdict = sob_st.verdict;
    } else if (weight_st.verdict == RefinementVerdict::Divergent) {
        rep.b.verdict = RefinementVerdict::Divergent;
    } else {
        rep.b.verdict = RefinementVerdict::Inconclusive;
    }
    rep.b.detail = std::string("weight ") + verdict_name(weight_st.verdict) + ", sobolev " +
                   verdict_name(sob_st.verdict);

    rep.c.name = "dimension + sobolev";
    try {
        auto mk = minkowski_dimension(domain, geometric_grid(0.004, 0.4, 8));
        bool dim_ok = mk.dimension < domain.dim() - 0.05;
        rep.c.verdict = dim_ok ? sob_st.verdict : RefinementVerdict::Divergent;
        rep.c.detail = "M_est=" + std::to_string(mk.dimension) + ", sobolev " +
                       verdict_name(sob_st.verdict);
    } catch (const Error& e) {
        rep.c.verdict = RefinementVerdict::Inconclusive;
        rep.c.detail = e.what();
    }

    rep.inconclusive = rep.a.verdict == RefinementVerdict::Inconclusive ||
                       rep.b.verdict == RefinementVerdict::Inconclusive ||
                       rep.c.verdict == RefinementVerdict::Inconclusive;
    rep.consistent = !rep.inconclusive && rep.a.verdict == rep.b.verdict &&
                     rep.b.verdict == rep.c.verdict;
    return rep;
}

}  // namespace nspect
