#include "nspect/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>

namespace nspect {

namespace fs = std::filesystem;

static constexpr const char* kToolVersion = "nspect 0.1.0";

Lab::Lab(std::string cache_dir) : cache_dir_(std::move(cache_dir)) {
    if (cache_dir_.empty()) {
        const char* env = std::getenv("NSPECT_CACHE_DIR");
        if (env) cache_dir_ = env;
    }
    if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
}

std::shared_ptr<const RasterDomain> Lab::raster(const Domain& d, double h) {
    auto key = std::make_pair(d.id(), static_cast<int64_t>(std::llround(1.0 / h * 1e6)));
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = rasters_.find(key);
        if (it != rasters_.end()) return it->second;
    }
    std::shared_ptr<const RasterDomain> r = rasterize(d, h);
    std::lock_guard<std::mutex> lock(mu_);
    return rasters_.emplace(key, std::move(r)).first->second;
}

std::shared_ptr<const SpectrumResult> Lab::spectrum(const Domain& d, double h, int m, double tol,
                                                    uint64_t seed) {
    auto key = std::make_tuple(d.id(), static_cast<int64_t>(std::llround(1.0 / h * 1e6)), m,
                               static_cast<int64_t>(std::llround(-std::log10(tol) * 100)), seed);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = spectra_.find(key);
        if (it != spectra_.end()) return it->second;
    }
    std::string disk;
    if (!cache_dir_.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "spec_%s_h%.9g_m%d_t%.3g_s%llu.bin", hex_id(d.id()).c_str(),
                      h, m, tol, static_cast<unsigned long long>(seed));
        disk = (fs::path(cache_dir_) / buf).string();
        auto cached = std::make_shared<SpectrumResult>();
        if (read_spectrum_binary(disk, *cached) && cached->count() == m &&
            cached->domain_id == d.id()) {
            std::lock_guard<std::mutex> lock(mu_);
            return spectra_.emplace(key, std::move(cached)).first->second;
        }
    }
    auto rast = raster(d, h);
    auto op = assemble(rast);
    auto spec = std::make_shared<SpectrumResult>(lowest_eigenpairs(op, m, tol, seed));
    if (!disk.empty()) write_spectrum_binary(*spec, disk);
    std::lock_guard<std::mutex> lock(mu_);
    return spectra_.emplace(key, std::move(spec)).first->second;
}

RunContext::RunContext(std::string out_dir, const ConfigFile& cfg, int jobs)
    : out_dir_(std::move(out_dir)), jobs_(jobs) {
    fs::create_directories(out_dir_);
    manifest_["tool"] = kToolVersion;
    manifest_["config"] = cfg.name();
    manifest_["config_hash"] = hex_id(cfg.content_hash());
    manifest_["steps"] = Json::array();
}

std::string RunContext::path(const std::string& filename) const {
    return (fs::path(out_dir_) / filename).string();
}

void RunContext::emit_json(const std::string& filename, const Json& j) {
    write_json(path(filename), j);
    files_.push_back(filename);
}

void RunContext::emit_text(const std::string& filename, const std::string& content) {
    write_text_file(path(filename), content);
    files_.push_back(filename);
}

void RunContext::emit_csv(const std::string& filename, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
    write_csv(path(filename), header, rows);
    files_.push_back(filename);
}

void RunContext::record_step(const std::string& name, std::chrono::steady_clock::time_point t0) {
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    Json s;
    s["name"] = name;
    s["ms"] = ms;
    manifest_["steps"].push_back(s);
}

void RunContext::write_manifest() {
    manifest_["files"] = files_;
    write_json(path("manifest.json"), manifest_);
}

namespace {

struct CommonParams {
    DomainPtr domain;
    double h;
    int m;
    double tol;
    uint64_t seed;
};

CommonParams read_common(const ConfigFile& cfg, const std::string& section, double default_h,
                         int default_m) {
    CommonParams p;
    p.domain = domain_from_config(cfg);
    p.h = cfg.get_number_or(section, "h", default_h);
    p.m = static_cast<int>(cfg.get_number_or(section, "m", default_m));
    p.tol = cfg.get_number_or(section, "tol", 1e-8);
    p.seed = static_cast<uint64_t>(cfg.get_number_or(section, "seed", 2024));
    return p;
}

int verdict_exit(bool any_fail, bool any_inconclusive) {
    if (any_fail) return 1;
    if (any_inconclusive) return 2;
    return 0;
}

}  // namespace

CommandResult cmd_spectrum(const ConfigFile& cfg, RunContext& ctx) {
    auto p = read_common(cfg, "spectrum", 1.0 / 128, 10);
    bool dump_vectors = cfg.get_bool_or("spectrum", "vectors", false);
    cfg.assert_consumed({"domain", "spectrum"});
    auto spec = ctx.step("solve", [&] {
        return ctx.lab().spectrum(*p.domain, p.h, p.m, p.tol, p.seed);
    });
    Json j = spectrum_to_json(*spec);
    ctx.emit_json("spectrum.json", j);
    if (dump_vectors) {
        write_spectrum_binary(*spec, ctx.path("eigenvectors.bin"));
        ctx.emit_text("eigenvectors.README",
                      "binary spectrum dump: magic, cells, modes, h, mass, measure, domain id, "
                      "tol, seed, dim, iterations; then eigenvalues, residuals, sup norms, "
                      "column-major eigenvectors (doubles)\n");
    }
    ctx.write_manifest();
    bool fail = false;
    for (int n = 0; n < spec->count(); ++n)
        if (spec->residuals[n] > p.tol * 10) fail = true;
    CommandResult res;
    res.exit_code = fail ? 1 : 0;
    res.summary = j;
    return res;
}

CommandResult cmd_whitney(const ConfigFile& cfg, RunContext& ctx) {
    auto domain = domain_from_config(cfg);
    int k_max = static_cast<int>(cfg.get_number_or("whitney", "k_max", 8));
    int samples = static_cast<int>(cfg.get_number_or("whitney", "samples_per_cube", 4));
    cfg.assert_consumed({"domain", "whitney"});

    auto cov = ctx.step("build", [&] { return build_whitney(*domain, k_max); });
    auto inv = ctx.step("invariants", [&] { return check_whitney_invariants(cov, *domain); });
    auto pc = ctx.step("point-bound",
                       [&] { return check_point_cube_distance(cov, *domain, samples); });
    CubeCountDimension dim;
    bool have_dim = true;
    try {
        dim = cube_count_dimension(cov);
    } catch (const FitError&) {
        have_dim = false;
    }
    Json j = whitney_report_to_json(cov, inv, pc, have_dim ? &dim : nullptr);
    ctx.emit_json("whitney.json", j);
    write_whitney_csv(cov, ctx.path("whitney.csv"));
    if (domain->dim() == 2) ctx.emit_text("whitney.gnuplot", whitney_gnuplot_script(cov));
    ctx.write_manifest();
    CommandResult res;
    res.exit_code = (inv.pass(domain->dim()) && pc.violations == 0) ? 0 : 1;
    res.summary = j;
    return res;
}

CommandResult cmd_dimension(const ConfigFile& cfg, RunContext& ctx) {
    auto domain = domain_from_config(cfg);
    std::vector<double> eps;
    if (cfg.has("dimension", "eps")) {
        eps = cfg.get_numbers("dimension", "eps");
    } else {
        double lo = cfg.get_number_or("dimension", "eps_lo", 0.004);
        double hi = cfg.get_number_or("dimension", "eps_hi", 0.4);
        int n = static_cast<int>(cfg.get_number_or("dimension", "n_eps", 8));
        eps = geometric_grid(lo, hi, n);
    }
    double h = cfg.get_number_or("dimension", "h", 0);
    cfg.assert_consumed({"domain", "dimension"});

    auto est = ctx.step("estimate", [&] { return minkowski_dimension(*domain, eps, h); });
    Json j = minkowski_to_json(est);
    const int N = domain->dim();
    bool in_band = est.dimension >= N - 1 - 0.15 && est.dimension <= N + 0.15;
    j["dimension_band_ok"] = in_band;
    ctx.emit_json("dimension.json", j);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < est.table.eps.size(); ++i)
        rows.push_back({est.table.eps[i], est.table.measure[i]});
    ctx.emit_csv("collar.csv", {"eps", "measure"}, rows);
    ctx.emit_text("collar.gnuplot",
                  gnuplot_loglog_script("collar.csv", "collar measure", "eps", "|collar|",
                                        {{2, "measure"}}));
    ctx.write_manifest();
    CommandResult res;
    res.exit_code = in_band ? 0 : 1;
    res.summary = j;
    return res;
}

CommandResult cmd_heatkernel(const ConfigFile& cfg, RunContext& ctx) {
    auto p = read_common(cfg, "heat", 1.0 / 64, 40);
    double M_prescribed = cfg.get_number_or("heat", "M", 0);
    double t_lo = cfg.get_number_or("heat", "trace_t_lo", 0.01);
    double t_hi = cfg.get_number_or("heat", "trace_t_hi", 0.1);
    cfg.assert_consumed({"domain", "heat"});

    auto spec = ctx.step("solve", [&] {
        return ctx.lab().spectrum(*p.domain, p.h, p.m, p.tol, p.seed);
    });
    auto fit = ctx.step("fit", [&] { return fit_ultracontractivity(*spec); });
    double M = M_prescribed > 0 ? M_prescribed : fit.exponent_M;
    double c5 = M_prescribed > 0 ? smoothing_bound_envelope(*spec, M) : fit.c5;
    double c6 = kernel_bound_envelope(*spec, M);
    auto l10 = verify_lemma10(*spec, c5, M);
    auto l11 = verify_lemma11(*spec, c6, spec->measure, M);
    auto l12 = verify_lemma12(*spec, l10.c9, M, std::max(1, l11.n0));
    auto slope = heat_trace_slope(*spec, t_lo, t_hi);

    Json j;
    j["spectrum"] = spectrum_to_json(*spec);
    j["ultracontractivity"] = ultracontractivity_to_json(fit);
    j["M_used"] = M;
    j["c5_used"] = c5;
    j["c6"] = c6;
    j["lemma10"] = lemma10_to_json(l10);
    j["lemma11"] = lemma11_to_json(l11);
    j["lemma12"] = lemma12_to_json(l12);
    j["trace_slope"] = slope.slope;
    ctx.emit_json("heat.json", j);

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 33; ++i) {
        double t = t_lo * std::pow(t_hi / t_lo, i / 32.0);
        rows.push_back({t, kernel_diag_trace(*spec, t)});
    }
    ctx.emit_csv("trace.csv", {"t", "Z"}, rows);
    ctx.emit_text("trace.gnuplot",
                  gnuplot_loglog_script("trace.csv", "heat trace", "t", "Z(t)", {{2, "Z"}}));
    ctx.write_manifest();

    bool fail = !l10.pass || !l12.pass ||
                l11.status == EigenvalueGrowthReport::Status::Fail;
    bool inconclusive = l11.status == EigenvalueGrowthReport::Status::Inconclusive;
    CommandResult res;
    res.exit_code = verdict_exit(fail, inconclusive);
    res.summary = j;
    return res;
}

CommandResult cmd_sobolev(const ConfigFile& cfg, RunContext& ctx) {
    auto domain = domain_from_config(cfg);
    double q = cfg.get_number("sobolev", "q");
    std::vector<double> hs = cfg.get_numbers_or("sobolev", "hs", {1.0 / 64, 1.0 / 128, 1.0 / 256});
    double alpha = cfg.get_number_or("sobolev", "alpha", 0);
    AscentOptions opts;
    opts.restarts = static_cast<int>(cfg.get_number_or("sobolev", "restarts", 3));
    opts.max_iters = static_cast<int>(cfg.get_number_or("sobolev", "max_iters", 300));
    opts.seed = static_cast<uint64_t>(cfg.get_number_or("sobolev", "seed", 7));
    cfg.assert_consumed({"domain", "sobolev"});
    std::sort(hs.rbegin(), hs.rend());

    const auto* cusp = dynamic_cast<const CuspDomain*>(domain.get());
    Json j;
    j["q"] = q;
    std::vector<double> values;
    Json per_level = Json::array();
    for (double h : hs) {
        auto raster = ctx.lab().raster(*domain, h);
        auto op = assemble(raster);
        AscentOptions local = opts;
        if (cusp) {
            auto mem = example6_membership(cusp->gamma(), cusp->dim(), 0, q);
            double dw = mem.w12_threshold, dq = mem.lq_threshold;
            double delta = dq < dw ? 0.5 * (dq + dw) : 0.9 * dw;
            local.extra_starts.push_back(power_profile_start(*raster, delta));
        }
        auto est = ctx.step("sobolev h=" + std::to_string(h),
                            [&] { return estimate_sobolev_constant(op, q, local); });
        values.push_back(est.constant);
        Json row = sobolev_to_json(est);
        row["h"] = h;
        if (alpha > 0) {
            Eigen::VectorXd dist(raster->cell_count());
            for (int32_t c = 0; c < raster->cell_count(); ++c) dist[c] = raster->cell_distance(c);
            row["hardy"] = hardy_to_json(estimate_hardy_constant(op, dist, alpha, local));
        }
        per_level.push_back(row);
    }
    auto study = classify_refinement(hs, values);
    j["levels"] = per_level;
    j["refinement"] = refinement_to_json(study);
    if (cusp) {
        double qmax = 2 * (cusp->gamma() + cusp->dim() - 1) / (cusp->dim() - 1 - cusp->gamma());
        j["sharp_exponent_q"] = qmax;
        j["ref"] = "example-6";
        j["beyond_sharp_exponent"] = q > qmax;
    }
    ctx.emit_json("sobolev.json", j);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < hs.size(); ++i) rows.push_back({hs[i], values[i]});
    ctx.emit_csv("refinement.csv", {"h", "constant"}, rows);
    ctx.write_manifest();

    CommandResult res;
    res.exit_code = study.verdict == RefinementVerdict::Stable      ? 0
                    : study.verdict == RefinementVerdict::Divergent ? 1
                                                                    : 2;
    res.summary = j;
    return res;
}

CommandResult cmd_perturb(const ConfigFile& cfg, RunContext& ctx) {
    auto domain = domain_from_config(cfg);
    std::string family_name = cfg.get_string_or("perturb", "family", "collar_removal");
    std::vector<double> eps = cfg.get_numbers("perturb", "eps");
    StabilityOptions opts;
    opts.n_max = static_cast<int>(cfg.get_number_or("perturb", "n_max", 8));
    opts.h = cfg.get_number_or("perturb", "h", 0);
    opts.tol = cfg.get_number_or("perturb", "tol", 1e-8);
    opts.seed = static_cast<uint64_t>(cfg.get_number_or("perturb", "seed", 2024));
    opts.gamma = cfg.get_number_or("perturb", "gamma", 1.0);
    opts.jobs = ctx.jobs();
    cfg.assert_consumed({"domain", "perturb"});

    PerturbationFamily family;
    if (family_name == "graph_shrink")
        family = PerturbationFamily::GraphShrink;
    else if (family_name == "collar_removal")
        family = PerturbationFamily::CollarRemoval;
    else
        throw ConfigError("perturb: unknown family '" + family_name + "'");

    auto rep = ctx.step("sweep", [&] { return stability_sweep(*domain, family, eps, opts); });
    Json j = stability_to_json(rep);

    // verdict table per (n, eps)
    Json verdicts = Json::array();
    bool any_fail = !rep.inclusions_ok || !rep.class_ok;
    bool any_signal = false;
    for (int n = 1; n <= opts.n_max; ++n)
        for (size_t ie = 0; ie < rep.eps.size(); ++ie) {
            double dev = rep.deviation(ie, n);
            double band = rep.b_n[n] * std::pow(rep.eps[ie], opts.gamma);
            Json row;
            row["n"] = n;
            row["eps"] = rep.eps[ie];
            row["deviation"] = dev;
            row["band"] = band;
            bool ok = dev <= band + rep.noise_floor[n] + 1e-12;
            row["ok"] = ok;
            any_fail = any_fail || !ok;
            if (dev > rep.noise_floor[n]) any_signal = true;
            verdicts.push_back(row);
        }
    j["verdicts"] = verdicts;
    if (family == PerturbationFamily::GraphShrink && !rep.monotonicity_ok) any_fail = true;
    ctx.emit_json("perturb.json", j);

    std::vector<std::vector<double>> rows;
    for (size_t ie = 0; ie < rep.eps.size(); ++ie)
        for (int n = 0; n <= opts.n_max; ++n)
            rows.push_back({rep.eps[ie], static_cast<double>(n), rep.lambda1[n],
                            rep.lambda2[ie][n], rep.deviation(ie, n)});
    ctx.emit_csv("sweep.csv", {"eps", "n", "lambda1", "lambda2", "deviation"}, rows);
    ctx.emit_text("sweep.gnuplot",
                  gnuplot_loglog_script("sweep.csv", "eigenvalue deviation", "eps", "|dev|",
                                        {{5, "deviation"}}));
    ctx.write_manifest();

    CommandResult res;
    res.exit_code = verdict_exit(any_fail, !any_signal);
    res.summary = j;
    return res;
}

CommandResult cmd_verify_all(const ConfigFile& cfg, RunContext& ctx) {
    auto p = read_common(cfg, "verify", 1.0 / 64, 40);
    int k_max = static_cast<int>(cfg.get_number_or("verify", "k_max", 8));
    double gamma = cfg.get_number_or("verify", "gamma", 1.0);
    double M_prescribed = cfg.get_number_or("verify", "M", 0);
    int n_max = static_cast<int>(cfg.get_number_or("verify", "n_max", 6));
    std::vector<double> eps = cfg.get_numbers_or("verify", "eps", {0.02, 0.04, 0.08});
    double collar_eps = cfg.get_number_or("verify", "collar_eps", 0.02);
    std::vector<double> mink_eps =
        cfg.get_numbers_or("verify", "minkowski_eps", geometric_grid(0.004, 0.4, 8));
    double sweep_h = cfg.get_number_or("verify", "sweep_h", 0);
    cfg.assert_consumed({"domain", "verify"});

    const Domain& dom = *p.domain;
    const int N = dom.dim();
    Json rows = Json::array();
    bool any_fail = false, any_inconclusive = false;
    auto add_row = [&](const std::string& check, const std::string& ref, const std::string& verdict,
                       const Json& detail) {
        Json r;
        r["check"] = check;
        r["ref"] = ref;
        r["verdict"] = verdict;
        r["detail"] = detail;
        rows.push_back(r);
        if (verdict == "fail") any_fail = true;
        if (verdict == "inconclusive") any_inconclusive = true;
    };

    // collar dimension
    ctx.step("minkowski", [&] {
        auto est = minkowski_dimension(dom, mink_eps);
        bool ok = est.dimension >= N - 1 - 0.15 && est.dimension <= N + 0.15;
        Json d;
        d["dimension"] = est.dimension;
        add_row("collar-dimension", "minkowski-M", ok ? "pass" : "fail", d);
    });

    // whitney invariants and the pointwise bound
    ctx.step("whitney", [&] {
        auto cov = build_whitney(dom, k_max);
        auto inv = check_whitney_invariants(cov, dom);
        auto pc = check_point_cube_distance(cov, dom, 4);
        Json d;
        d["cubes"] = cov.cubes.size();
        d["max_touching"] = inv.max_touching;
        d["union_measure"] = inv.union_measure;
        add_row("whitney-invariants", "whitney-conditions-i-v", inv.pass(N) ? "pass" : "fail", d);
        Json d2;
        d2["violations"] = pc.violations;
        d2["ratio_min"] = pc.min_ratio;
        d2["ratio_max"] = pc.max_ratio;
        add_row("whitney-point-bound", "diam-le-d-le-5diam", pc.violations == 0 ? "pass" : "fail",
                d2);
    });

    // spectrum + smoothing machinery
    auto spec = ctx.step("spectrum", [&] {
        return ctx.lab().spectrum(dom, p.h, p.m, p.tol, p.seed);
    });
    {
        auto fit = fit_ultracontractivity(*spec);
        double M = M_prescribed > 0 ? M_prescribed : fit.exponent_M;
        double c5 = M_prescribed > 0 ? smoothing_bound_envelope(*spec, M) : fit.c5;
        double c6 = kernel_bound_envelope(*spec, M);
        Json d;
        d["fitted_M"] = fit.exponent_M;
        d["M_used"] = M;
        d["c5"] = c5;
        d["c6"] = c6;
        add_row("smoothing-fit", "prop3-eq7-eq8", fit.exponent_M >= N - 0.3 ? "pass" : "fail", d);

        auto l10 = verify_lemma10(*spec, c5, M);
        add_row("supnorm-bounds", "lemma10-eq10", l10.pass ? "pass" : "fail", lemma10_to_json(l10));
        auto l11 = verify_lemma11(*spec, c6, spec->measure, M);
        add_row("eigenvalue-growth", "lemma11-eq11",
                l11.status == EigenvalueGrowthReport::Status::Pass          ? "pass"
                : l11.status == EigenvalueGrowthReport::Status::Inconclusive ? "inconclusive"
                                                                             : "fail",
                lemma11_to_json(l11));
        auto l12 = verify_lemma12(*spec, l10.c9, M, std::max(1, l11.n0));
        add_row("reconstruction", "lemma12-eq12", l12.pass ? "pass" : "fail", lemma12_to_json(l12));

        // inradius bound
        auto raster = ctx.lab().raster(dom, p.h);
        bool ok = true;
        int upto = std::min(spec->count() - 1, 10);
        for (int n = 1; n <= upto; ++n)
            if (spec->eigenvalues[n] > inradius_upper_bound(*raster, n) * (1 + 1e-9)) ok = false;
        Json d2;
        d2["modes_checked"] = upto;
        add_row("inradius-bound", "remark14", ok ? "pass" : "fail", d2);

        // restriction chain on the collar-removed inner domain
        auto inner = collar_removal(*raster, collar_eps);
        auto op2 = assemble(inner);
        auto spec2 = lowest_eigenpairs(op2, n_max + 1, p.tol, p.seed);
        auto t13 = verify_theorem13(*spec, op2, spec2, shared_grid_cell_map(*raster, *inner), c5,
                                    n_max);
        add_row("restriction-chain", "theorem13-eq14", t13.chain_pass ? "pass" : "fail",
                theorem13_to_json(t13));
    }

    // two-sided chain and the eps sweep
    {
        StabilityOptions sopts;
        sopts.n_max = n_max;
        sopts.h = sweep_h;
        sopts.tol = p.tol;
        sopts.seed = p.seed;
        sopts.gamma = gamma;
        sopts.jobs = ctx.jobs();
        auto c16 = ctx.step("corollary16",
                            [&] { return verify_corollary16(dom, eps, gamma, n_max, sopts); });
        add_row("two-sided-chain", "corollary16-eq17", c16.pass ? "pass" : "fail",
                corollary16_to_json(c16));

        const auto* graph = dynamic_cast<const GraphDomain*>(&dom);
        auto family = graph ? PerturbationFamily::GraphShrink : PerturbationFamily::CollarRemoval;
        auto sweep = ctx.step("sweep", [&] { return stability_sweep(dom, family, eps, sopts); });
        bool ok = sweep.inclusions_ok && sweep.class_ok;
        bool signal = false;
        for (int n = 1; n <= n_max; ++n) {
            if (std::isnan(sweep.exponent_n[n])) continue;
            signal = true;
            if (sweep.exponent_n[n] < gamma - 0.25 || sweep.exponent_n[n] > gamma + 0.5) ok = false;
        }
        if (family == PerturbationFamily::GraphShrink && !sweep.monotonicity_ok) ok = false;
        add_row("stability-sweep", "theorem21-eq28",
                !signal ? "inconclusive" : (ok ? "pass" : "fail"), stability_to_json(sweep));
    }

    Json j;
    j["domain"] = dom.describe();
    j["rows"] = rows;
    j["pass"] = !any_fail && !any_inconclusive;
    ctx.emit_json("verify_all.json", j);
    ctx.write_manifest();

    CommandResult res;
    res.exit_code = verdict_exit(any_fail, any_inconclusive);
    res.summary = j;
    return res;
}

}  // namespace nspect
