#include "nspect/io.hpp"

#include <cstring>
#include <fstream>

namespace nspect {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out << content;
}

void write_json(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out.precision(17);
    for (size_t i = 0; i < header.size(); ++i) out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw Error("csv row width mismatch");
        for (size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
}

std::string gnuplot_loglog_script(const std::string& csv_path, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<std::pair<int, std::string>>& y_columns) {
    std::string s;
    s += "set datafile separator ','\n";
    s += "set logscale xy\n";
    s += "set title '" + title + "'\n";
    s += "set xlabel '" + xlabel + "'\n";
    s += "set ylabel '" + ylabel + "'\n";
    s += "plot ";
    for (size_t i = 0; i < y_columns.size(); ++i) {
        s += "'" + csv_path + "' using 1:" + std::to_string(y_columns[i].first) +
             " with linespoints title '" + y_columns[i].second + "'";
        s += (i + 1 < y_columns.size()) ? ", \\\n     " : "\n";
    }
    return s;
}

void write_whitney_csv(const WhitneyCovering& cov, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out << "level,ix,iy,iz\n";
    for (const auto& q : cov.cubes)
        out << q.level << "," << q.idx[0] << "," << q.idx[1] << "," << q.idx[2] << "\n";
}

std::string whitney_gnuplot_script(const WhitneyCovering& cov) {
    std::string s = "set size ratio -1\nunset key\n";
    int id = 1;
    for (const auto& q : cov.cubes) {
        double e = cov.cube_edge(q);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "set object %d rect from %.12g,%.12g to %.12g,%.12g fs empty\n", id++,
                      q.idx[0] * e, q.idx[1] * e, (q.idx[0] + 1) * e, (q.idx[1] + 1) * e);
        s += buf;
    }
    s += "plot [*:*][*:*] NaN\n";
    return s;
}

Json spectrum_to_json(const SpectrumResult& spec) {
    Json j;
    j["domain_id"] = hex_id(spec.domain_id);
    j["dim"] = spec.dim;
    j["h"] = spec.h;
    j["measure"] = spec.measure;
    j["modes"] = spec.count();
    j["tol"] = spec.tol;
    j["seed"] = spec.seed;
    j["iterations"] = spec.iterations;
    j["eigenvalues"] = spec.eigenvalues;
    j["residuals"] = spec.residuals;
    j["sup_norms"] = spec.sup_norms;
    return j;
}

Json minkowski_to_json(const MinkowskiEstimate& est) {
    Json j;
    j["dimension"] = est.dimension;
    j["fitted_exponent"] = est.table.fitted_exponent;
    j["fitted_constant"] = est.table.fitted_constant;
    j["max_fit_residual"] = est.table.max_fit_residual;
    j["eps"] = est.table.eps;
    j["collar_measure"] = est.table.measure;
    return j;
}

Json whitney_report_to_json(const WhitneyCovering& cov, const WhitneyInvariantReport& inv,
                            const PointCubeDistanceReport& pc, const CubeCountDimension* dim) {
    Json j;
    j["k_max"] = cov.k_max;
    j["cubes"] = cov.cubes.size();
    Json counts = Json::object();
    for (const auto& [k, n] : cov.level_counts) counts[std::to_string(k)] = n;
    j["level_counts"] = counts;
    j["union_measure"] = inv.union_measure;
    j["disjoint"] = inv.disjoint;
    j["condition_iii_violations"] = inv.condition_iii_violations;
    j["max_touching"] = inv.max_touching;
    j["max_level_gap"] = inv.max_level_gap;
    j["count_bound_violations"] = inv.count_bound_violations;
    j["point_bound_samples"] = pc.samples;
    j["point_bound_violations"] = pc.violations;
    j["point_ratio_min"] = pc.min_ratio;
    j["point_ratio_max"] = pc.max_ratio;
    if (dim) {
        j["lambda_est"] = dim->lambda_est;
        j["lambda_fit_rms"] = dim->fit.rms_residual;
    }
    return j;
}

Json ultracontractivity_to_json(const UltracontractivityFit& fit) {
    Json j;
    j["exponent_M"] = fit.exponent_M;
    j["c5"] = fit.c5;
    j["t_lo"] = fit.t_lo;
    j["t_hi"] = fit.t_hi;
    j["fit_rms"] = fit.fit.rms_residual;
    j["t"] = fit.ts;
    j["ratio"] = fit.ratios;
    return j;
}

Json lemma10_to_json(const SupNormBoundReport& rep) {
    Json j;
    j["c9"] = rep.c9;
    j["M"] = rep.M;
    j["violations"] = rep.violations;
    j["worst_margin"] = rep.worst_margin;
    j["pass"] = rep.pass;
    return j;
}

Json lemma11_to_json(const EigenvalueGrowthReport& rep) {
    Json j;
    j["n0"] = rep.n0;
    j["violations"] = rep.violations;
    j["worst_margin"] = rep.worst_margin;
    j["status"] = rep.status == EigenvalueGrowthReport::Status::Pass          ? "pass"
                  : rep.status == EigenvalueGrowthReport::Status::Fail        ? "fail"
                                                                              : "inconclusive";
    return j;
}

Json lemma12_to_json(const ReconstructionReport& rep) {
    Json j;
    j["c11"] = rep.c11;
    j["c12"] = rep.c12;
    j["c6_prime"] = rep.c6_prime;
    j["t"] = rep.ts;
    j["sum_margins"] = rep.sum_margins;
    j["ratio_margins"] = rep.ratio_margins;
    j["pass"] = rep.pass;
    return j;
}

Json sobolev_to_json(const SobolevEstimate& est) {
    Json j;
    j["q"] = est.q;
    j["constant"] = est.constant;
    j["restart_spread"] = est.restart_spread;
    j["iterations"] = est.iterations;
    return j;
}

Json hardy_to_json(const HardyEstimate& est) {
    Json j;
    j["alpha"] = est.alpha;
    j["constant"] = est.constant;
    j["unit_probe"] = est.unit_probe;
    j["weight_integral"] = est.weight_integral;
    j["restart_spread"] = est.restart_spread;
    j["iterations"] = est.iterations;
    return j;
}

const char* verdict_name(RefinementVerdict v) {
    switch (v) {
        case RefinementVerdict::Stable:
            return "stable";
        case RefinementVerdict::Divergent:
            return "divergent";
        default:
            return "inconclusive";
    }
}

Json refinement_to_json(const RefinementStudy& st) {
    Json j;
    j["h"] = st.hs;
    j["values"] = st.values;
    j["growth"] = st.growth;
    j["max_growth"] = st.max_growth;
    j["min_growth"] = st.min_growth;
    j["verdict"] = verdict_name(st.verdict);
    return j;
}

Json equivalence_to_json(const EquivalenceReport& rep) {
    Json j;
    j["q"] = rep.q;
    j["alpha"] = rep.alpha;
    j["sigma"] = rep.sigma;
    auto leg = [](const CorollaryLeg& l) {
        Json x;
        x["name"] = l.name;
        x["verdict"] = verdict_name(l.verdict);
        x["detail"] = l.detail;
        return x;
    };
    j["leg_a"] = leg(rep.a);
    j["leg_b"] = leg(rep.b);
    j["leg_c"] = leg(rep.c);
    j["consistent"] = rep.consistent;
    j["inconclusive"] = rep.inconclusive;
    return j;
}

Json stability_to_json(const StabilityReport& rep) {
    Json j;
    j["family"] = rep.family == PerturbationFamily::GraphShrink     ? "graph_shrink"
                  : rep.family == PerturbationFamily::CollarRemoval ? "collar_removal"
                                                                    : "deformation";
    j["eps"] = rep.eps;
    j["gamma"] = rep.gamma;
    j["h"] = rep.h;
    j["lambda1"] = rep.lambda1;
    j["lambda2"] = rep.lambda2;
    j["measure_diff"] = rep.measure_diff;
    j["noise_floor"] = rep.noise_floor;
    j["b_n"] = rep.b_n;
    Json exps = Json::array();
    for (double e : rep.exponent_n) {
        if (std::isnan(e))
            exps.push_back(nullptr);
        else
            exps.push_back(e);
    }
    j["exponent_n"] = exps;
    j["inclusions_ok"] = rep.inclusions_ok;
    j["class_ok"] = rep.class_ok;
    j["monotonicity_ok"] = rep.monotonicity_ok;
    return j;
}

Json theorem13_to_json(const Theorem13Report& rep) {
    Json j;
    j["measure_diff"] = rep.measure_diff;
    j["c5"] = rep.c5;
    j["chain_pass"] = rep.chain_pass;
    j["all_conclusive"] = rep.all_conclusive;
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        Json x;
        x["n"] = r.n;
        x["lambda1"] = r.lambda1;
        x["mu2"] = r.mu2;
        x["lambda2"] = r.lambda2;
        x["b_n1"] = std::isinf(r.b_n1) ? Json() : Json(r.b_n1);
        x["eps_n1"] = r.eps_n1;
        x["bound"] = std::isinf(r.bound) ? Json() : Json(r.bound);
        x["smallness_ok"] = r.smallness_ok;
        x["chain_ok"] = r.chain_ok;
        rows.push_back(x);
    }
    j["rows"] = rows;
    return j;
}

Json corollary16_to_json(const Corollary16Report& rep) {
    Json j;
    j["sigma"] = rep.sigma;
    j["two_sided"] = rep.two_sided;
    j["pass"] = rep.pass;
    j["limit_deviation"] = rep.limit_deviation;
    j["b_n4"] = rep.b_n4;
    Json rows = Json::array();
    for (const auto& r : rep.rows) {
        Json x;
        x["n"] = r.n;
        x["eps"] = r.eps;
        x["lambda1"] = r.lambda1;
        x["lambda2"] = r.lambda2;
        x["lower"] = r.lower;
        x["upper"] = r.upper;
        x["ok"] = r.ok;
        rows.push_back(x);
    }
    j["rows"] = rows;
    return j;
}

Json deformation_to_json(const DeformationCheckReport& rep) {
    Json j;
    j["eps"] = rep.eps;
    j["h"] = rep.h;
    j["jacobian_deviation"] = rep.jacobian_deviation;
    j["a1"] = rep.a1;
    j["det_deviation"] = rep.det_deviation;
    j["a2"] = rep.a2;
    j["missed_deep_cells"] = rep.missed_deep_cells;
    j["image_depth_min"] = rep.image_depth_min;
    j["a_depth"] = rep.a_depth;
    j["image_outside_cells"] = rep.image_outside_cells;
    j["measure_lost"] = rep.measure_lost;
    j["a5"] = rep.a5;
    j["injective_ok"] = rep.injective_ok;
    j["pass"] = rep.pass();
    return j;
}

namespace {
constexpr uint64_t kSpectrumMagic = 0x4e53504543543031ull;  // "NSPECT01"
}

void write_spectrum_binary(const SpectrumResult& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    auto put = [&](const void* p, size_t n) { out.write(static_cast<const char*>(p), n); };
    uint64_t cells = spec.vectors.rows();
    uint64_t modes = spec.count();
    put(&kSpectrumMagic, 8);
    put(&cells, 8);
    put(&modes, 8);
    put(&spec.h, 8);
    put(&spec.mass, 8);
    put(&spec.measure, 8);
    put(&spec.domain_id, 8);
    put(&spec.tol, 8);
    put(&spec.seed, 8);
    int64_t dim = spec.dim, iters = spec.iterations;
    put(&dim, 8);
    put(&iters, 8);
    put(spec.eigenvalues.data(), 8 * modes);
    put(spec.residuals.data(), 8 * modes);
    put(spec.sup_norms.data(), 8 * modes);
    put(spec.vectors.data(), 8 * cells * modes);
}

bool read_spectrum_binary(const std::string& path, SpectrumResult& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    auto get = [&](void* p, size_t n) { in.read(static_cast<char*>(p), n); };
    uint64_t magic = 0, cells = 0, modes = 0;
    get(&magic, 8);
    if (magic != kSpectrumMagic) return false;
    get(&cells, 8);
    get(&modes, 8);
    get(&out.h, 8);
    get(&out.mass, 8);
    get(&out.measure, 8);
    get(&out.domain_id, 8);
    get(&out.tol, 8);
    get(&out.seed, 8);
    int64_t dim = 0, iters = 0;
    get(&dim, 8);
    get(&iters, 8);
    out.dim = static_cast<int>(dim);
    out.iterations = static_cast<int>(iters);
    out.eigenvalues.resize(modes);
    out.residuals.resize(modes);
    out.sup_norms.resize(modes);
    get(out.eigenvalues.data(), 8 * modes);
    get(out.residuals.data(), 8 * modes);
    get(out.sup_norms.data(), 8 * modes);
    out.vectors.resize(cells, modes);
    get(out.vectors.data(), 8 * cells * modes);
    return static_cast<bool>(in);
}

}  // namespace nspect
