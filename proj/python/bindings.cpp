// Python bindings for the main operations: domains, rasters, spectra, heat
// checks, inequality estimates, and perturbation sweeps. Structured results
// cross the boundary as JSON strings; the package wrapper parses them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nspect/pipeline.hpp"

namespace py = pybind11;
using namespace nspect;

namespace {

Point as_point(const std::vector<double>& v) { return make_point(v); }

std::shared_ptr<BoxDomain> make_box(const std::vector<double>& lo,
                                    const std::vector<double>& hi) {
    if (lo.size() != hi.size() || lo.empty() || lo.size() > 3)
        throw DomainError("box: lo/hi must have 1..3 matching entries");
    Box b;
    b.dim = static_cast<int>(lo.size());
    for (size_t i = 0; i < lo.size(); ++i) {
        b.lo[i] = lo[i];
        b.hi[i] = hi[i];
    }
    return std::make_shared<BoxDomain>(b);
}

std::shared_ptr<GraphDomain> make_graph(const std::vector<double>& base_lo,
                                        const std::vector<double>& base_hi,
                                        const std::string& profile, double gamma,
                                        double holder_const, double k_lo, double k_hi) {
    Box base;
    base.dim = static_cast<int>(base_lo.size());
    for (size_t i = 0; i < base_lo.size(); ++i) {
        base.lo[i] = base_lo[i];
        base.hi[i] = base_hi[i];
    }
    std::vector<std::string> vars = base.dim == 1 ? std::vector<std::string>{"x"}
                                                  : std::vector<std::string>{"x", "y"};
    return std::make_shared<GraphDomain>(base, Profile::from_expr(Expr::parse(profile, vars)),
                                         gamma, holder_const, k_lo, k_hi);
}

std::string whitney_json(const Domain& dom, int k_max) {
    auto cov = build_whitney(dom, k_max);
    auto inv = check_whitney_invariants(cov, dom);
    auto pc = check_point_cube_distance(cov, dom, 4);
    CubeCountDimension dim;
    const CubeCountDimension* dp = nullptr;
    try {
        dim = cube_count_dimension(cov);
        dp = &dim;
    } catch (const FitError&) {
    }
    return whitney_report_to_json(cov, inv, pc, dp).dump();
}

std::string minkowski_json(const Domain& dom, const std::vector<double>& eps) {
    return minkowski_to_json(minkowski_dimension(dom, eps)).dump();
}

std::string sweep_json(const Domain& dom, const std::string& family,
                       const std::vector<double>& eps, int n_max, double h, double gamma) {
    StabilityOptions opts;
    opts.n_max = n_max;
    opts.h = h;
    opts.gamma = gamma;
    PerturbationFamily fam;
    if (family == "graph_shrink")
        fam = PerturbationFamily::GraphShrink;
    else if (family == "collar_removal")
        fam = PerturbationFamily::CollarRemoval;
    else
        throw ConfigError("unknown family '" + family + "'");
    return stability_to_json(stability_sweep(dom, fam, eps, opts)).dump();
}

std::string run_command(const std::string& command, const std::string& config_text,
                        const std::string& out_dir, int jobs) {
    auto cfg = ConfigFile::parse_string(config_text, "<python>");
    RunContext ctx(out_dir, cfg, jobs);
    CommandResult res;
    if (command == "spectrum")
        res = cmd_spectrum(cfg, ctx);
    else if (command == "whitney")
        res = cmd_whitney(cfg, ctx);
    else if (command == "dimension")
        res = cmd_dimension(cfg, ctx);
    else if (command == "heatkernel")
        res = cmd_heatkernel(cfg, ctx);
    else if (command == "sobolev")
        res = cmd_sobolev(cfg, ctx);
    else if (command == "perturb")
        res = cmd_perturb(cfg, ctx);
    else if (command == "verify_all")
        res = cmd_verify_all(cfg, ctx);
    else
        throw ConfigError("unknown command '" + command + "'");
    Json out;
    out["exit_code"] = res.exit_code;
    out["summary"] = res.summary;
    return out.dump();
}

}  // namespace

PYBIND11_MODULE(_nspect, m) {
    m.doc() = "Neumann spectra, heat-kernel bounds, and boundary-perturbation checks";

    py::register_exception<Error>(m, "NspectError");

    py::class_<Domain, DomainPtr>(m, "Domain")
        .def("dim", &Domain::dim)
        .def("contains", [](const Domain& d, const std::vector<double>& p) {
            return d.contains(as_point(p));
        })
        .def("describe", &Domain::describe);

    py::class_<BoxDomain, Domain, std::shared_ptr<BoxDomain>>(m, "BoxDomain");
    py::class_<BallDomain, Domain, std::shared_ptr<BallDomain>>(m, "BallDomain");
    py::class_<GraphDomain, Domain, std::shared_ptr<GraphDomain>>(m, "GraphDomain")
        .def("holder_quotient",
             [](const GraphDomain& g, int samples) { return g.sampled_holder_quotient(samples); },
             py::arg("samples") = 128);
    py::class_<CuspDomain, Domain, std::shared_ptr<CuspDomain>>(m, "CuspDomain");

    m.def("box", &make_box, py::arg("lo"), py::arg("hi"));
    m.def("ball",
          [](int dim, const std::vector<double>& center, double r) {
              return std::make_shared<BallDomain>(dim, as_point(center), r);
          },
          py::arg("dim"), py::arg("center"), py::arg("radius"));
    m.def("graph", &make_graph, py::arg("base_lo"), py::arg("base_hi"), py::arg("profile"),
          py::arg("gamma") = 1.0, py::arg("holder_const") = 1.0, py::arg("k_lo") = 1.0,
          py::arg("k_hi") = 1.0);
    m.def("cusp",
          [](int dim, double gamma) { return std::make_shared<CuspDomain>(dim, gamma); },
          py::arg("dim"), py::arg("gamma"));
    m.def("graph_shrink",
          [](const GraphDomain& g, double eps) {
              return std::make_shared<GraphDomain>(graph_shrink(g, eps));
          });

    m.def("distance_to_boundary",
          [](const Domain& d, const std::vector<double>& p) {
              return distance_to_boundary(d, as_point(p));
          });
    m.def("collar_measure",
          [](const Domain& d, double eps, double h) { return collar_measure(d, eps, h); },
          py::arg("domain"), py::arg("eps"), py::arg("h") = 0.0);

    py::class_<RasterDomain, Domain, std::shared_ptr<RasterDomain>>(m, "Raster")
        .def("cell_count", &RasterDomain::cell_count)
        .def("measure", &RasterDomain::measure)
        .def("h", &RasterDomain::h)
        .def("inradius", &RasterDomain::inradius)
        .def("collar_measure", &RasterDomain::collar_measure)
        .def("export_pgm", &RasterDomain::export_pgm);
    m.def("rasterize",
          [](const Domain& d, double h) { return rasterize(d, h); });

    py::class_<SpectrumResult>(m, "Spectrum")
        .def_readonly("eigenvalues", &SpectrumResult::eigenvalues)
        .def_readonly("residuals", &SpectrumResult::residuals)
        .def_readonly("sup_norms", &SpectrumResult::sup_norms)
        .def_readonly("h", &SpectrumResult::h)
        .def_readonly("measure", &SpectrumResult::measure)
        .def("count", &SpectrumResult::count)
        .def("eigenvector",
             [](const SpectrumResult& s, int n) {
                 if (n < 0 || n >= s.count()) throw SolverError("mode index out of range");
                 return std::vector<double>(s.vectors.col(n).data(),
                                            s.vectors.col(n).data() + s.vectors.rows());
             })
        .def("trace", [](const SpectrumResult& s, double t) { return kernel_diag_trace(s, t); })
        .def("trace_slope",
             [](const SpectrumResult& s, double t_lo, double t_hi) {
                 return heat_trace_slope(s, t_lo, t_hi).slope;
             })
        .def("two_inf_norm",
             [](const SpectrumResult& s, double t) { return semigroup_two_inf_norm(s, t); });

    m.def("spectrum",
          [](const Domain& d, double h, int m_modes, double tol, uint64_t seed) {
              return lowest_eigenpairs(assemble(rasterize(d, h)), m_modes, tol, seed);
          },
          py::arg("domain"), py::arg("h"), py::arg("m"), py::arg("tol") = 1e-8,
          py::arg("seed") = 2024);

    m.def("inradius_upper_bound",
          [](const Domain& d, double h, int n) { return inradius_upper_bound(*rasterize(d, h), n); });
    m.def("dirichlet_ball_eigenvalue", &dirichlet_ball_eigenvalue);

    m.def("smoothing_bound_envelope", &smoothing_bound_envelope);
    m.def("fit_ultracontractivity_json", [](const SpectrumResult& s) {
        return ultracontractivity_to_json(fit_ultracontractivity(s)).dump();
    });
    m.def("verify_bound_chain_json", [](const SpectrumResult& s, double M) {
        double c5 = smoothing_bound_envelope(s, M);
        double c6 = kernel_bound_envelope(s, M);
        auto l10 = verify_lemma10(s, c5, M);
        auto l11 = verify_lemma11(s, c6, s.measure, M);
        auto l12 = verify_lemma12(s, l10.c9, M, std::max(1, l11.n0));
        Json j;
        j["lemma10"] = lemma10_to_json(l10);
        j["lemma11"] = lemma11_to_json(l11);
        j["lemma12"] = lemma12_to_json(l12);
        return j.dump();
    });

    m.def("sobolev_constant",
          [](const Domain& d, double h, double q) {
              return estimate_sobolev_constant(assemble(rasterize(d, h)), q).constant;
          });
    m.def("hardy_constant", [](const Domain& d, double h, double alpha) {
        auto raster = rasterize(d, h);
        auto op = assemble(raster);
        Eigen::VectorXd dist(raster->cell_count());
        for (int32_t c = 0; c < raster->cell_count(); ++c) dist[c] = raster->cell_distance(c);
        return estimate_hardy_constant(op, dist, alpha).constant;
    });
    m.def("hardy_to_sobolev_exponent", [](double alpha, int N, double p) {
        auto e = hardy_to_sobolev_exponent(alpha, N, p);
        return e.is_interval ? py::make_tuple(e.q_lo, e.q_hi) : py::make_tuple(e.q, e.q);
    });
    m.def("sobolev_to_hardy_exponent", &sobolev_to_hardy_exponent);
    m.def("example6_membership", [](double gamma, int N, double delta, double q) {
        auto r = example6_membership(gamma, N, delta, q);
        return py::make_tuple(r.in_w12, r.in_lq);
    });

    m.def("whitney_json", &whitney_json, py::arg("domain"), py::arg("k_max") = 8);
    m.def("minkowski_json", &minkowski_json);
    m.def("stability_sweep_json", &sweep_json, py::arg("domain"), py::arg("family"),
          py::arg("eps"), py::arg("n_max") = 8, py::arg("h") = 0.0, py::arg("gamma") = 1.0);
    m.def("run_command_json", &run_command, py::arg("command"), py::arg("config_text"),
          py::arg("out_dir"), py::arg("jobs") = 1);
}
