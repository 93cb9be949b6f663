#include "nspect/heat.hpp"

#include <algorithm>

namespace nspect {

namespace {

constexpr double kZeroMode = 1e-10;

int first_nonzero_mode(const SpectrumResult& s) {
    for (int i = 0; i < s.count(); ++i)
        if (s.eigenvalues[i] > kZeroMode) return i;
    return s.count();
}

// max_x K_m(t, x, x) over modes [first, m)
double max_kernel_diag(const SpectrumResult& s, double t, int first) {
    const int m = s.count();
    if (first >= m) return 0;
    Eigen::VectorXd w(m - first);
    for (int i = first; i < m; ++i) w[i - first] = std::exp(-s.eigenvalues[i] * t);
    Eigen::VectorXd diag =
        s.vectors.middleCols(first, m - first).cwiseAbs2() * w;
    return diag.maxCoeff();
}

}  // namespace

SemigroupResult semigroup_apply(const SpectrumResult& spec, const Eigen::VectorXd& f, double t) {
    if (!(t > 0)) throw SolverError("semigroup_apply: t must be positive");
    if (f.size() != spec.vectors.rows()) throw SolverError("semigroup_apply: dimension mismatch");
    Eigen::VectorXd coeff = spec.mass * (spec.vectors.transpose() * f);
    SemigroupResult out;
    Eigen::VectorXd damped = coeff;
    for (int i = 0; i < spec.count(); ++i) damped[i] *= std::exp(-spec.eigenvalues[i] * t);
    out.value = spec.vectors * damped;
    const double lambda_top = spec.eigenvalues.empty() ? 0 : spec.eigenvalues.back();
    out.tail_bound = std::exp(-lambda_top * t) * std::sqrt(spec.mass) * f.norm();
    return out;
}

double kernel_diag_trace(const SpectrumResult& spec, double t) {
    if (!(t > 0)) throw SolverError("kernel_diag_trace: t must be positive");
    double z = 0;
    for (double lam : spec.eigenvalues) z += std::exp(-lam * t);
    return z;
}

Eigen::VectorXd kernel_diagonal(const SpectrumResult& spec, double t) {
    Eigen::VectorXd w(spec.count());
    for (int i = 0; i < spec.count(); ++i) w[i] = std::exp(-spec.eigenvalues[i] * t);
    return spec.vectors.cwiseAbs2() * w;
}

HeatKernelSlice kernel_slice(const SpectrumResult& spec, double t,
                             const std::vector<std::pair<int32_t, int32_t>>& pairs) {
    if (!(t > 0)) throw SolverError("kernel_slice: t must be positive");
    HeatKernelSlice out;
    out.t = t;
    out.modes = spec.count();
    out.pairs = pairs;
    out.values.reserve(pairs.size());
    Eigen::VectorXd w(spec.count());
    for (int i = 0; i < spec.count(); ++i) w[i] = std::exp(-spec.eigenvalues[i] * t);
    for (auto [a, b] : pairs) {
        double v = 0;
        // products grouped so that K(t,x,y) == K(t,y,x) bit-exactly
        for (int i = 0; i < spec.count(); ++i)
            v += w[i] * (spec.vectors(a, i) * spec.vectors(b, i));
        out.values.push_back(v);
    }
    const double lambda_top = spec.eigenvalues.empty() ? 0 : spec.eigenvalues.back();
    // crude tail estimate: remaining modes damped at least this much, with
    // sup-norm growth bounded by the largest computed one
    double sup = spec.sup_norms.empty() ? 0 : *std::max_element(spec.sup_norms.begin(),
                                                                spec.sup_norms.end());
    out.tail_bound = std::exp(-lambda_top * t) * sup * sup;
    return out;
}

double semigroup_two_inf_norm(const SpectrumResult& spec, double t) {
    return std::sqrt(max_kernel_diag(spec, 2 * t, 0));
}

UltracontractivityFit fit_ultracontractivity(const SpectrumResult& spec, int n_window) {
    UltracontractivityFit out;
    const int m = spec.count();
    if (m < 3) throw SolverError("fit_ultracontractivity: need >= 3 modes");
    const int nz = first_nonzero_mode(spec);
    const double lambda_top = spec.eigenvalues.back();
    const double lambda_1 = nz < m ? spec.eigenvalues[nz] : 1.0;
    out.t_lo = 4.0 / lambda_top;
    out.t_hi = std::max(std::min(1.0, 0.5 / lambda_1), 3.0 * out.t_lo);
    std::vector<double> lx, ly;
    for (int i = 0; i < n_window; ++i) {
        double t = out.t_lo * std::pow(out.t_hi / out.t_lo, static_cast<double>(i) / (n_window - 1));
        double r = std::sqrt(max_kernel_diag(spec, 2 * t, nz));
        out.ts.push_back(t);
        out.ratios.push_back(r);
        if (r > 0) {
            lx.push_back(std::log(t));
            ly.push_back(std::log(r));
        }
    }
    out.fit = fit_line(lx, ly);
    out.exponent_M = -4.0 * out.fit.slope;
    out.c5 = smoothing_bound_envelope(spec, out.exponent_M);
    return out;
}

namespace {

// dense log grid over (0, 1] plus the evaluation points the sup-norm and
// growth arguments use (t = 1 and t = 1/lambda_n)
std::vector<double> envelope_grid(const SpectrumResult& spec) {
    std::vector<double> ts;
    for (int i = 0; i <= 180; ++i) ts.push_back(std::pow(10.0, -6.0 + 6.0 * i / 180.0));
    ts.push_back(1.0);
    for (double lam : spec.eigenvalues)
        if (lam > 1.0) ts.push_back(1.0 / lam);
    return ts;
}

}  // namespace

double smoothing_bound_envelope(const SpectrumResult& spec, double M) {
    double c5 = 0;
    for (double t : envelope_grid(spec)) {
        double r = std::sqrt(max_kernel_diag(spec, 2 * t, 0));
        c5 = std::max(c5, r * std::pow(t, M / 4.0));
    }
    return c5;
}

double kernel_bound_envelope(const SpectrumResult& spec, double M) {
    double c6 = 0;
    for (double t : envelope_grid(spec)) c6 = std::max(c6, max_kernel_diag(spec, t, 0) * std::pow(t, M / 2.0));
    return c6;
}

SupNormBoundReport verify_lemma10(const SpectrumResult& spec, double c5, double M) {
    SupNormBoundReport rep;
    rep.c9 = std::exp(1.0) * c5;
    rep.M = M;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < spec.count(); ++n) {
        double lam = spec.eigenvalues[n];
        double bound = lam <= 1.0 ? rep.c9 : rep.c9 * std::pow(lam, M / 4.0);
        double margin = bound - spec.sup_norms[n];
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -1e-9 * bound) rep.violations += 1;
    }
    rep.pass = rep.violations == 0;
    return rep;
}

EigenvalueGrowthReport verify_lemma11(const SpectrumResult& spec, double c6, double c10,
                                      double M) {
    if (c10 < spec.measure * (1 - 1e-12))
        throw SolverError("verify_lemma11: c10 must dominate |Omega|");
    EigenvalueGrowthReport rep;
    rep.n0 = static_cast<int>(std::floor(std::exp(1.0) * c6 * c10)) + 1;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    if (rep.n0 >= spec.count()) {
        rep.status = EigenvalueGrowthReport::Status::Inconclusive;
        return rep;
    }
    for (int n = rep.n0; n < spec.count(); ++n) {
        double bound = std::pow(static_cast<double>(n) / rep.n0, 2.0 / M);
        double margin = spec.eigenvalues[n] - bound;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -1e-9 * std::max(1.0, bound)) rep.violations += 1;
    }
    rep.status = rep.violations == 0 ? EigenvalueGrowthReport::Status::Pass
                                     : EigenvalueGrowthReport::Status::Fail;
    return rep;
}

double gaussian_tail_integral(double M) {
    if (!(M > 0)) throw SolverError("gaussian_tail_integral: M must be positive");
    // integrand exp(-s^{2/M}/2); cutoff where the exponent reaches ~46
    const double cutoff = std::pow(92.0, M / 2.0);
    const int n = 200000;  // composite Simpson (even count)
    auto f = [&](double s) { return std::exp(-0.5 * std::pow(s, 2.0 / M)); };
    double hstep = cutoff / n;
    double acc = f(0) + f(cutoff);
    for (int i = 1; i < n; ++i) acc += f(i * hstep) * (i % 2 ? 4.0 : 2.0);
    return acc * hstep / 3.0;
}

ReconstructionReport verify_lemma12(const SpectrumResult& spec, double c9, double M, int n0,
                                    const std::vector<double>& ts) {
    ReconstructionReport rep;
    rep.c11 = std::pow(M / (2.0 * std::exp(1.0)), M / 2.0);
    rep.c12 = rep.c11 * n0 * gaussian_tail_integral(M);
    rep.c6_prime = c9 * c9 * (n0 + rep.c12);
    rep.ts = ts;
    bool ok = true;
    for (double t : ts) {
        if (!(t > 0 && t <= 1)) throw SolverError("verify_lemma12: t must lie in (0, 1]");
        double sum = 0;
        for (int n = 0; n < spec.count(); ++n)
            sum += std::exp(-spec.eigenvalues[n] * t) * spec.sup_norms[n] * spec.sup_norms[n];
        double bound1 = rep.c6_prime * std::pow(t, -M);
        rep.sum_margins.push_back(bound1 - sum);
        double ratio = semigroup_two_inf_norm(spec, t);
        double bound2 = std::sqrt(std::pow(2.0, -M) * rep.c6_prime) * std::pow(t, -M / 2.0);
        rep.ratio_margins.push_back(bound2 - ratio);
        if (bound1 - sum < -1e-9 * bound1 || bound2 - ratio < -1e-9 * bound2) ok = false;
    }
    rep.pass = ok;
    return rep;
}

LineFit heat_trace_slope(const SpectrumResult& spec, double t_lo, double t_hi, int n_pts) {
    if (!(t_lo > 0 && t_hi > t_lo)) throw SolverError("heat_trace_slope: bad window");
    int zeros = first_nonzero_mode(spec);
    std::vector<double> lx, ly;
    for (int i = 0; i < n_pts; ++i) {
        double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_pts - 1));
        double z = kernel_diag_trace(spec, t) - zeros;
        if (z <= 0) continue;
        lx.push_back(std::log(t));
        ly.push_back(std::log(z));
    }
    return fit_line(lx, ly);
}

}  // namespace nspect
