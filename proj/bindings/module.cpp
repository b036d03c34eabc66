// Python bindings for the main operations: expression calculus, metric
// analysis, the mobility system, the catalog and geodesic-flow checks.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "projgeo/catalog.hpp"
#include "projgeo/flow.hpp"
#include "projgeo/verify.hpp"
#include "projgeo/version.hpp"

namespace py = pybind11;
using namespace projgeo;

namespace {

Coord coord_from(const std::string& c) {
    if (c == "x") return Coord::X;
    if (c == "y") return Coord::Y;
    throw Error("coordinate must be 'x' or 'y'");
}

NormalFormParams params_from(const py::dict& d) {
    NormalFormParams p;
    for (auto item : d) {
        std::string key = py::cast<std::string>(item.first);
        double value = py::cast<double>(item.second);
        if (key == "a")
            p.a = value;
        else if (key == "b")
            p.b = value;
        else if (key == "c")
            p.c = value;
        else if (key == "eps1" || key == "eps")
            p.eps1 = static_cast<int>(value);
        else if (key == "eps2")
            p.eps2 = static_cast<int>(value);
        else
            throw Error("unknown parameter '" + key + "'");
    }
    return p;
}

Metric2 make_metric(const std::string& E, const std::string& G, const std::string& F,
                    std::tuple<double, double, double, double> domain, const ParamEnv& params,
                    const std::vector<std::string>& excludes) {
    Metric2 g;
    g.E = parse_expr(E);
    g.F = parse_expr(F);
    g.G = parse_expr(G);
    g.env = params;
    g.domain.x0 = std::get<0>(domain);
    g.domain.x1 = std::get<1>(domain);
    g.domain.y0 = std::get<2>(domain);
    g.domain.y1 = std::get<3>(domain);
    for (const auto& e : excludes) g.domain.excludes.push_back(parse_expr(e));
    validate_nondegenerate(g);
    return g;
}

QuadraticForm form_from(const py::tuple& t) {
    if (t.size() != 3) throw Error("a quadratic form needs three component expressions");
    return {parse_expr(py::cast<std::string>(t[0])), parse_expr(py::cast<std::string>(t[1])),
            parse_expr(py::cast<std::string>(t[2]))};
}

}  // namespace

PYBIND11_MODULE(projgeo, m) {
    m.doc() = "Projective-symmetry analysis of 2-D metrics: connections, Liouville "
              "invariants, the mobility system, normal forms and geodesic-flow checks";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "ProjGeoError");

    py::class_<Expr>(m, "Expr")
        .def("__str__", [](const Expr& e) { return to_string(e); })
        .def("__repr__", [](const Expr& e) { return "Expr(" + to_string(e) + ")"; });

    m.def("parse", &parse_expr, py::arg("text"), "Parse an expression");
    m.def(
        "eval",
        [](const Expr& e, double x, double y, const ParamEnv& env) {
            return eval(e, x, y, env);
        },
        py::arg("expr"), py::arg("x"), py::arg("y"), py::arg("params") = ParamEnv{});
    m.def(
        "diff", [](const Expr& e, const std::string& c) { return diff(e, coord_from(c)); },
        py::arg("expr"), py::arg("coord"));
    m.def("simplify", [](const Expr& e) { return simplify(e); });

    py::class_<Metric2>(m, "Metric")
        .def(py::init(&make_metric), py::arg("E"), py::arg("G"), py::arg("F") = "0",
             py::arg("domain") = std::make_tuple(0.25, 2.75, -1.0, 1.0),
             py::arg("params") = ParamEnv{}, py::arg("excludes") = std::vector<std::string>{})
        .def_property_readonly("E", [](const Metric2& g) { return to_string(g.E); })
        .def_property_readonly("F", [](const Metric2& g) { return to_string(g.F); })
        .def_property_readonly("G", [](const Metric2& g) { return to_string(g.G); })
        .def_property_readonly("params", [](const Metric2& g) { return g.env; })
        .def_property_readonly("domain", [](const Metric2& g) {
            return std::make_tuple(g.domain.x0, g.domain.x1, g.domain.y0, g.domain.y1);
        });

    m.def("load_metric", &load_metric_file, py::arg("path"));
    m.def(
        "catalog",
        [](const std::string& id, const py::dict& params) {
            return instantiate(parse_normal_form_id(id), params_from(params));
        },
        py::arg("id"), py::arg("params") = py::dict());

    m.def("scalar_curvature", &scalar_curvature, py::arg("metric"));
    m.def("grad_norm_sq", &grad_norm_sq, py::arg("metric"), py::arg("f"));
    m.def("laplacian", &laplacian, py::arg("metric"), py::arg("f"));

    m.def(
        "is_flat",
        [](const Metric2& g, int samples, double tol) {
            return is_flat(projective_connection(g), sample_points(g, samples), tol);
        },
        py::arg("metric"), py::arg("samples") = 60, py::arg("tol") = 1e-9);

    m.def(
        "symmetry_dimension",
        [](const Metric2& g, int samples) {
            auto bound = symmetry_dimension_bound(projective_connection(g),
                                                  sample_points(g, samples));
            return bound == SymmetryDimension::Full8 ? "=8" : "<8";
        },
        py::arg("metric"), py::arg("samples") = 12,
        "\"=8\" when the prolongation curvature vanishes, else \"<8\"");

    m.def(
        "symmetry_residual",
        [](const Metric2& g, const std::string& z1, const std::string& z2, int samples) {
            VectorField Z{parse_expr(z1), parse_expr(z2)};
            return symmetry_residual(projective_connection(g), Z, sample_points(g, samples))
                .max_abs;
        },
        py::arg("metric"), py::arg("z1"), py::arg("z2"), py::arg("samples") = 60);

    m.def(
        "killing_residual",
        [](const Metric2& g, const std::string& z1, const std::string& z2, int samples) {
            VectorField Z{parse_expr(z1), parse_expr(z2)};
            return killing_residual(g, Z, sample_points(g, samples));
        },
        py::arg("metric"), py::arg("z1"), py::arg("z2"), py::arg("samples") = 60);

    m.def(
        "metrizability_residual",
        [](const Metric2& g, int samples) {
            return metrizability_residual(projective_connection(g), mobility_matrix(g),
                                          sample_points(g, samples), g.env)
                .max_abs;
        },
        py::arg("metric"), py::arg("samples") = 60,
        "Residual of the metric's own mobility matrix in the linear system");

    m.def(
        "mobility_dimension",
        [](double A, double B, double C, double D, int case_tag,
           std::vector<std::complex<double>> alphas, std::pair<double, double> x_range) {
            std::array<std::complex<double>, 3> al{};
            for (std::size_t i = 0; i < alphas.size() && i < 3; ++i) al[i] = alphas[i];
            CoefficientSystem sys =
                build_coefficient_system(ABCDConnection{A, B, C, D}, case_tag, al);
            return solution_space_dimension(sys, x_range).dimension;
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"), py::arg("case_tag") = 3,
        py::arg("alphas") = std::vector<std::complex<double>>{0.0, 0.0, 0.0},
        py::arg("x_range") = std::make_pair(0.5, 2.5));

    m.def(
        "fingerprint",
        [](const std::string& id, const py::dict& params) {
            Fingerprint fp = fingerprint(parse_normal_form_id(id), params_from(params));
            py::dict out;
            out["probes"] = fp.probe_xs;
            py::list triples;
            for (const auto& t : fp.at_probes)
                triples.append(py::make_tuple(t[0], t[1], t[2]));
            out["R_I_lapR"] = triples;
            if (fp.curve_origin)
                out["origin"] = py::make_tuple(fp.curve_origin->first, fp.curve_origin->second);
            return out;
        },
        py::arg("id"), py::arg("params") = py::dict());

    m.def(
        "distinguish",
        [](const std::string& idA, const py::dict& pA, const std::string& idB,
           const py::dict& pB) {
            DistinguishVerdict v = distinguish(parse_normal_form_id(idA), params_from(pA),
                                               parse_normal_form_id(idB), params_from(pB));
            py::dict out;
            switch (v.kind) {
                case DistinguishVerdict::Kind::Distinct: out["verdict"] = "distinct"; break;
                case DistinguishVerdict::Kind::Identical: out["verdict"] = "identical"; break;
                case DistinguishVerdict::Kind::SameFamily:
                    out["verdict"] = "same-family";
                    break;
                case DistinguishVerdict::Kind::Indeterminate:
                    out["verdict"] = "indeterminate";
                    break;
            }
            out["witness"] = v.witness;
            out["detail"] = v.detail;
            return out;
        },
        py::arg("idA"), py::arg("paramsA"), py::arg("idB"), py::arg("paramsB"));

    m.def(
        "integrate_geodesic",
        [](const Metric2& g, std::tuple<double, double, double, double> state, double T,
           double h) {
            Trajectory tr = integrate_geodesic(
                g,
                GeodesicState{std::get<0>(state), std::get<1>(state), std::get<2>(state),
                              std::get<3>(state)},
                T, h);
            py::dict out;
            std::vector<double> xs, ys, vxs, vys;
            for (const auto& s : tr.states) {
                xs.push_back(s.x);
                ys.push_back(s.y);
                vxs.push_back(s.vx);
                vys.push_back(s.vy);
            }
            out["t"] = tr.t;
            out["x"] = xs;
            out["y"] = ys;
            out["vx"] = vxs;
            out["vy"] = vys;
            out["clipped"] = tr.clipped;
            out["energy_drift"] = tr.energy_drift;
            return out;
        },
        py::arg("metric"), py::arg("state"), py::arg("T") = 3.0, py::arg("h") = 1e-3);

    m.def(
        "integral_drift",
        [](const Metric2& g, std::tuple<double, double, double, double> state,
           const py::tuple& form, double T, double h) {
            Trajectory tr = integrate_geodesic(
                g,
                GeodesicState{std::get<0>(state), std::get<1>(state), std::get<2>(state),
                              std::get<3>(state)},
                T, h);
            return integral_drift(tr, form_from(form), g.env);
        },
        py::arg("metric"), py::arg("state"), py::arg("form"), py::arg("T") = 3.0,
        py::arg("h") = 1e-3);

    m.def(
        "suite_drifts",
        [](const std::string& name, double D, double T, int trajectories, unsigned seed) {
            IntegralSuite suite =
                name == "koenigs" ? koenigs_suite() : superintegrable_suite(D);
            std::mt19937_64 rng(seed);
            py::dict out;
            std::map<std::string, double> worst;
            for (int i = 0; i < trajectories; ++i) {
                GeodesicState s0 = random_geodesic_seed(suite.metric, rng);
                Trajectory tr = integrate_geodesic(suite.metric, s0, T);
                for (const auto& lf : suite.integrals) {
                    double d = integral_drift(tr, lf.form);
                    auto it = worst.find(lf.label);
                    worst[lf.label] = it == worst.end() ? d : std::max(it->second, d);
                }
            }
            for (const auto& [k, v] : worst) out[py::str(k)] = v;
            return out;
        },
        py::arg("name"), py::arg("D") = -0.5, py::arg("T") = 3.0,
        py::arg("trajectories") = 3, py::arg("seed") = 20250808,
        "Max conserved-quantity drift per labeled integral of a built-in suite");

    m.def(
        "projective_equivalence",
        [](const Metric2& g, const Metric2& gbar, int trials, double T, unsigned seed) {
            EquivalenceReport rep = projective_equivalence_check(g, gbar, trials, T, seed);
            py::dict out;
            out["equivalent"] = rep.equivalent;
            out["max_drift"] = rep.max_drift;
            return out;
        },
        py::arg("g"), py::arg("gbar"), py::arg("trials") = 5, py::arg("T") = 3.0,
        py::arg("seed") = 20250808);

    m.def(
        "acceptance",
        [](unsigned seed) {
            py::list out;
            for (const auto& r : run_acceptance_suite(nullptr, seed)) {
                py::dict d;
                d["index"] = r.index;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 20250808, "Run the acceptance criteria and return their results");
}
