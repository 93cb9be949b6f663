#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nspect/domain.hpp"

namespace nspect {

/// Dyadic cube: edge 2^-level, lower corner at index * 2^-level.
struct WhitneyCube {
    int level;
    int64_t idx[3];
};

/// Whitney covering of a domain by dyadic cubes, truncated at level k_max.
/// Retained cubes satisfy diam(Q) <= dist(Q, boundary) <= 4 diam(Q) with
/// conservative per-cube distance bounds; interiors are pairwise disjoint by
/// lattice construction.
struct WhitneyCovering {
    int dim = 0;
    int k_max = 0;
    uint64_t domain_id = 0;
    std::vector<WhitneyCube> cubes;
    std::map<int, int64_t> level_counts;  // n(k)

    double cube_edge(const WhitneyCube& q) const { return std::ldexp(1.0, -q.level); }
    double cube_diam(const WhitneyCube& q) const {
        return cube_edge(q) * std::sqrt(static_cast<double>(dim));
    }
    Point cube_center(const WhitneyCube& q) const;
    double union_measure() const;
};

/// Builds the covering by top-down refinement of the dyadic mesh.
/// Covers { x : d(x) > 6 * 2^-k_max } (truncation near the boundary only).
WhitneyCovering build_whitney(const Domain& d, int k_max);

struct WhitneyInvariantReport {
    bool disjoint = false;              // interiors pairwise disjoint (exact lattice arithmetic)
    int64_t condition_iii_violations = 0;
    int max_touching = 0;               // max cubes touching a fixed cube
    int max_level_gap = 0;              // max |k1-k2| over touching pairs
    int64_t count_bound_violations = 0; // n(k) <= c1 2^{N k}, c1 = |bbox| + 1
    double union_measure = 0;
    bool pass(int dim) const {
        return disjoint && condition_iii_violations == 0 && max_level_gap <= 2 &&
               max_touching <= static_cast<int>(std::pow(12.0, dim)) &&
               count_bound_violations == 0;
    }
};

WhitneyInvariantReport check_whitney_invariants(const WhitneyCovering& cov, const Domain& d);

struct PointCubeDistanceReport {
    int64_t samples = 0;
    int64_t violations = 0;
    double min_ratio = 0;  // min over samples of d(x)/diam(Q)
    double max_ratio = 0;  // max over samples of d(x)/diam(Q)
};

/// Samples points inside each cube and checks diam(Q) <= d(x) <= 5 diam(Q).
PointCubeDistanceReport check_point_cube_distance(const WhitneyCovering& cov, const Domain& d,
                                                  int samples_per_cube = 4,
                                                  uint64_t seed = 0x77);

struct CubeCountDimension {
    double lambda_est = 0;
    LineFit fit;
    std::vector<int> levels_used;
};

/// Slope of log2 n(k) against k over the largest-k half of the levels.
CubeCountDimension cube_count_dimension(const WhitneyCovering& cov);

}  // namespace nspect
