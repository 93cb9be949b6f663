#pragma once

#include "nspect/discrete_operator.hpp"

namespace nspect {

struct AscentOptions {
    int restarts = 4;        // random restarts in addition to structured starts
    int max_iters = 400;
    double rel_tol = 1e-11;
    uint64_t seed = 7;
    std::vector<Eigen::VectorXd> extra_starts;  // e.g. cusp-adapted x^-delta
};

/// Lower bound on the discrete constant sup ||f||_q / ||f||_{W^{1,2}},
/// found by preconditioned quotient ascent from several starts.
struct SobolevEstimate {
    double q = 0;
    double constant = 0;
    Eigen::VectorXd maximizer;
    double restart_spread = 0;  // (best - worst final value) / best
    int iterations = 0;
};

SobolevEstimate estimate_sobolev_constant(const DiscreteOperator& op, double q,
                                          const AscentOptions& opts = {});

/// Lower bound on the constant in ||d^-alpha f||_2 <= c ||f||_{W^{1,2}}.
/// The f == 1 probe (sqrt of the weight integral over sqrt |Omega|) is
/// reported separately; its divergence under refinement flags an unstable
/// exponent.
struct HardyEstimate {
    double alpha = 0;
    double constant = 0;
    double unit_probe = 0;       // ||d^-alpha||_2 / ||1||_W
    double weight_integral = 0;  // sum d^{-2 alpha} h^N
    Eigen::VectorXd maximizer;
    double restart_spread = 0;
    int iterations = 0;
};

HardyEstimate estimate_hardy_constant(const DiscreteOperator& op, const Eigen::VectorXd& dist,
                                      double alpha, const AscentOptions& opts = {});

/// q reachable from a Hardy exponent alpha: q = Mp/(M-p), M = N(1+alpha)
/// for N > p; an open interval (p, p(1+alpha p/N)) when N <= p.
struct SobolevExponent {
    bool is_interval = false;
    double q = 0;          // when !is_interval
    double q_lo = 0, q_hi = 0;  // open interval otherwise
};

SobolevExponent hardy_to_sobolev_exponent(double alpha, int N, double p);

/// alpha = sigma (1/p - 1/q); errors when q <= p.
double sobolev_to_hardy_exponent(double sigma, double p, double q);

/// Interpolation weight lambda = (a/N) / (a/N + 1/p - 1/r) and the identity
/// 1/q = (1-lambda)/p + lambda/r it satisfies.
struct InterpolationSplit {
    double lambda = 0;
    double q = 0;
};
InterpolationSplit holder_interpolation_split(double alpha, int N, double p, double r);

/// Analytic membership of x^-delta on the model cusp:
/// W^{1,2} iff delta < -1 + (1 + (N-1)/gamma)/2, L^q iff delta < (1 + (N-1)/gamma)/q.
struct CuspMembership {
    bool in_w12 = false;
    bool in_lq = false;
    double w12_threshold = 0;
    double lq_threshold = 0;
};
CuspMembership example6_membership(double gamma, int N, double delta, double q);

/// Power-profile start vector x^-delta sampled at cell centres.
Eigen::VectorXd power_profile_start(const RasterDomain& raster, double delta);

enum class RefinementVerdict { Stable, Divergent, Inconclusive };

/// Refinement study of a per-resolution scalar: stable when each halving
/// moves it by <= 5%, divergent when every halving grows it by >= 1.5x.
struct RefinementStudy {
    std::vector<double> hs;
    std::vector<double> values;
    std::vector<double> growth;  // values[i+1] / values[i]
    double max_growth = 0;
    double min_growth = 0;
    RefinementVerdict verdict = RefinementVerdict::Inconclusive;
};

RefinementStudy classify_refinement(const std::vector<double>& hs,
                                    const std::vector<double>& values);

struct CorollaryLeg {
    std::string name;
    RefinementVerdict verdict = RefinementVerdict::Inconclusive;
    std::string detail;
};

/// Cross-check of the equivalence triangle on one domain:
/// (a) Hardy(alpha) stable, (b) weight integrability + Sobolev(q) stable,
/// (c) boundary dimension < N + Sobolev(q) stable.
struct EquivalenceReport {
    double q = 0, alpha = 0, sigma = 0;
    CorollaryLeg a, b, c;
    bool consistent = false;   // all conclusive legs agree
    bool inconclusive = false; // some leg undecided
};

EquivalenceReport verify_corollary2(const Domain& domain, double q, double alpha,
                                    const std::vector<double>& hs,
                                    const AscentOptions& opts = {});

}  // namespace nspect
