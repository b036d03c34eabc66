// projgeo command-line front end: loads metric/connection specs, runs the
// analyses, and emits diff-friendly key-value reports.
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "projgeo/catalog.hpp"
#include "projgeo/flow.hpp"
#include "projgeo/report.hpp"
#include "projgeo/verify.hpp"

namespace pg = projgeo;

namespace {

struct CommonOpts {
    double tol = 1e-8;
    int samples = 100;
    unsigned seed = 20250808;
    std::string format = "keyvalue";
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--tol", o.tol, "Tolerance for pass/fail verdicts")->check(CLI::PositiveNumber);
    cmd->add_option("--samples", o.samples, "Number of domain sample points");
    cmd->add_option("--seed", o.seed, "Random seed recorded in the report");
    cmd->add_option("--format", o.format, "Report format: keyvalue or text")
        ->check(CLI::IsMember({"keyvalue", "text"}));
    cmd->add_option("--out", o.out, "Write the report to this file instead of stdout");
}

void emit(const pg::Report& rep, const CommonOpts& o) {
    if (o.out.empty()) {
        std::cout << rep.str();
    } else {
        std::ofstream f(o.out);
        if (!f) throw pg::Error("cannot open output file '" + o.out + "'");
        f << rep.str();
    }
}

void stamp(pg::Report& rep, const CommonOpts& o) {
    rep.kv("seed", o.seed);
    rep.kv("tol", o.tol);
    rep.kv("samples", o.samples);
}

// A spec file is a connection when it defines K-coefficients, a metric when
// it defines E/G.
bool looks_like_connection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pg::Error("cannot open spec '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "E" || key == "G" || key == "F") return false;
        if (key == "K0" || key == "K1" || key == "K2" || key == "K3") return true;
    }
    return false;
}

pg::NormalFormParams parse_params_arg(const std::string& text) {
    pg::NormalFormParams p;
    if (text.empty()) return p;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw pg::Error("bad parameter assignment '" + item + "' (expected key=value)");
        std::string key = item.substr(0, eq);
        double value = std::stod(item.substr(eq + 1));
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
            throw pg::Error("unknown parameter '" + key + "'");
    }
    return p;
}

std::string params_string(pg::NormalFormId id, const pg::NormalFormParams& p) {
    std::ostringstream os;
    switch (id) {
        case pg::NormalFormId::N1a:
            os << "b=" << p.b << ",eps1=" << p.eps1 << ",eps2=" << p.eps2;
            break;
        case pg::NormalFormId::N1b:
            os << "a=" << p.a << ",b=" << p.b << ",eps1=" << p.eps1 << ",eps2=" << p.eps2;
            break;
        case pg::NormalFormId::N1c:
            os << "a=" << p.a << ",eps=" << p.eps1;
            break;
        case pg::NormalFormId::N2a:
            os << "eps1=" << p.eps1 << ",eps2=" << p.eps2;
            break;
        case pg::NormalFormId::N2b:
            os << "a=" << p.a << ",eps1=" << p.eps1 << ",eps2=" << p.eps2;
            break;
        case pg::NormalFormId::N2c:
            os << "a=" << p.a << ",c=" << p.c << ",eps1=" << p.eps1 << ",eps2=" << p.eps2;
            break;
    }
    return os.str();
}

std::vector<double> default_probes(const pg::Domain& d, const pg::ParamEnv& env) {
    std::vector<double> xs;
    double ymid = 0.5 * (d.y0 + d.y1);
    for (int i = 0; i < 4; ++i) {
        double x = d.x0 + (i + 0.5) * (d.x1 - d.x0) / 4.0;
        if (pg::point_in_domain(d, env, {x, ymid})) xs.push_back(x);
    }
    if (xs.empty()) {
        for (const auto& p : pg::sample_points(d, env, 4)) xs.push_back(p.x);
    }
    return xs;
}

int cmd_analyze(const std::string& path, const CommonOpts& o) {
    pg::Metric2 g = pg::load_metric_file(path);
    pg::validate_nondegenerate(g, o.samples);

    pg::Report rep("analyze");
    stamp(rep, o);
    rep.kv("input", path);
    rep.kv("input_hash", pg::hash_file_hex(path));

    pg::ProjectiveConnection pc = pg::projective_connection(g);
    pg::LiouvilleInvariant li = pg::liouville_invariants(pc);
    auto samples = pg::sample_points(g, o.samples);
    double l1 = 0, l2 = 0;
    for (const auto& p : samples) {
        l1 = std::max(l1, std::abs(pg::eval(li.L1, p, pc.env)));
        l2 = std::max(l2, std::abs(pg::eval(li.L2, p, pc.env)));
    }
    bool flat = pg::is_flat(pc, samples);
    rep.kv("L1_max", l1);
    rep.kv("L2_max", l2);
    rep.kv("flat", flat);
    auto bound_samples = pg::sample_points(g, std::min(o.samples, 12));
    rep.kv("symmetry_dimension",
           pg::symmetry_dimension_bound(pc, bound_samples) == pg::SymmetryDimension::Full8
               ? "=8"
               : "<8");

    pg::Expr R = pg::scalar_curvature(g);
    pg::Expr I = pg::grad_norm_sq(g, R);
    pg::Expr dR = pg::laplacian(g, R);

    auto xs = default_probes(g.domain, g.env);
    double ymid = 0.5 * (g.domain.y0 + g.domain.y1);
    int idx = 0;
    for (double x : xs) {
        std::string pre = "probe" + std::to_string(idx++);
        rep.kv(pre + ".x", x);
        rep.kv(pre + ".y", ymid);
        rep.kv(pre + ".K0", pg::eval(pc.K0, x, ymid, pc.env));
        rep.kv(pre + ".K1", pg::eval(pc.K1, x, ymid, pc.env));
        rep.kv(pre + ".K2", pg::eval(pc.K2, x, ymid, pc.env));
        rep.kv(pre + ".K3", pg::eval(pc.K3, x, ymid, pc.env));
        rep.kv(pre + ".R", pg::eval(R, x, ymid, g.env));
        rep.kv(pre + ".I", pg::eval(I, x, ymid, g.env));
        rep.kv(pre + ".lapR", pg::eval(dR, x, ymid, g.env));
    }
    emit(rep, o);
    return 0;
}

int cmd_symmetry(const std::string& spec, const std::string& vf_path, const CommonOpts& o) {
    pg::ProjectiveConnection pc;
    if (looks_like_connection(spec)) {
        pc = pg::load_connection_file(spec);
    } else {
        pc = pg::projective_connection(pg::load_metric_file(spec));
    }
    pg::VectorField Z = pg::load_vectorfield_file(vf_path);
    auto samples = pg::sample_points(pc.domain, pc.env, o.samples);
    pg::ResidualStats stats = pg::symmetry_residual(pc, Z, samples);

    pg::Report rep("symmetry");
    stamp(rep, o);
    rep.kv("input", spec);
    rep.kv("input_hash", pg::hash_file_hex(spec));
    rep.kv("field", vf_path);
    rep.kv("field_hash", pg::hash_file_hex(vf_path));
    for (int i = 0; i < 4; ++i)
        rep.kv("residual_eq" + std::to_string(i + 1), stats.per_equation[i]);
    rep.kv("residual_max", stats.max_abs);
    rep.kv("is_symmetry", stats.max_abs <= o.tol);
    emit(rep, o);
    return 0;
}

int cmd_flatness(const std::string& spec, const CommonOpts& o) {
    pg::ProjectiveConnection pc;
    if (looks_like_connection(spec)) {
        pc = pg::load_connection_file(spec);
    } else {
        pc = pg::projective_connection(pg::load_metric_file(spec));
    }
    auto samples = pg::sample_points(pc.domain, pc.env, o.samples);
    pg::LiouvilleInvariant li = pg::liouville_invariants(pc);
    double l1 = 0, l2 = 0;
    for (const auto& p : samples) {
        l1 = std::max(l1, std::abs(pg::eval(li.L1, p, pc.env)));
        l2 = std::max(l2, std::abs(pg::eval(li.L2, p, pc.env)));
    }
    double tol = o.tol > 0 ? o.tol : 1e-9;

    pg::Report rep("flatness");
    stamp(rep, o);
    rep.kv("input", spec);
    rep.kv("input_hash", pg::hash_file_hex(spec));
    rep.kv("L1_max", l1);
    rep.kv("L2_max", l2);
    rep.kv("flat", std::max(l1, l2) <= tol);
    emit(rep, o);
    return 0;
}

int cmd_mobility(double A, double B, double C, double D, int case_tag,
                 const std::vector<double>& are, const std::vector<double>& aim, double x0,
                 double x1, int ncheck, const CommonOpts& o) {
    std::array<std::complex<double>, 3> alphas{};
    for (int i = 0; i < 3; ++i) {
        double re = i < static_cast<int>(are.size()) ? are[i] : 0.0;
        double im = i < static_cast<int>(aim.size()) ? aim[i] : 0.0;
        alphas[i] = {re, im};
    }
    pg::ABCDConnection conn{A, B, C, D};
    pg::CoefficientSystem sys = pg::build_coefficient_system(conn, case_tag, alphas);
    pg::DimensionResult res = pg::solution_space_dimension(sys, {x0, x1}, ncheck);

    pg::Report rep("mobility");
    stamp(rep, o);
    std::ostringstream cfg;
    cfg << A << " " << B << " " << C << " " << D << " case" << case_tag;
    rep.kv("config_hash", pg::hash_hex(cfg.str()));
    rep.kv("A", A);
    rep.kv("B", B);
    rep.kv("C", C);
    rep.kv("D", D);
    rep.kv("case", case_tag);
    rep.kv("normalization_case", conn.normalization_case());
    rep.kv("x_range", pg::Report::format_double(x0) + " " + pg::Report::format_double(x1));
    rep.kv("dimension", res.dimension);
    for (int i = 0; i < res.singular_values.size(); ++i)
        rep.kv("sigma" + std::to_string(i), res.singular_values(i));
    for (int col = 0; col < res.dimension; ++col) {
        std::ostringstream vec;
        for (int r = 0; r < 9; ++r) {
            if (r) vec << " ";
            vec << pg::Report::format_double(res.basis(r, col).real());
            if (std::abs(res.basis(r, col).imag()) > 0)
                vec << (res.basis(r, col).imag() >= 0 ? "+" : "") <<
                    pg::Report::format_double(res.basis(r, col).imag()) << "i";
        }
        rep.kv("basis" + std::to_string(col), vec.str());

        // Constraint residual along the solution, as a quality indicator.
        auto path = pg::integrate_coefficient_vector(sys, res.basis.col(col), {x0, x1}, 51);
        double worst = 0;
        for (const auto& [x, cvec] : path) {
            pg::Vector3cd gap =
                sys.constraint(x) * cvec.segment<3>(6) - sys.rhs(x) * cvec.segment<3>(3);
            worst = std::max(worst, gap.cwiseAbs().maxCoeff());
        }
        rep.kv("basis" + std::to_string(col) + ".constraint_residual", worst);
    }
    emit(rep, o);
    return 0;
}

int cmd_catalog(const std::string& id_str, const std::string& params, const CommonOpts& o) {
    pg::NormalFormId id = pg::parse_normal_form_id(id_str);
    pg::NormalFormParams p = parse_params_arg(params);
    pg::Metric2 g = pg::instantiate(id, p);

    pg::Report rep("catalog");
    stamp(rep, o);
    rep.kv("id", id_str);
    rep.kv("params", params_string(id, p));
    rep.kv("config_hash", pg::hash_hex(id_str + ":" + params_string(id, p)));
    rep.kv("E", pg::to_string(g.E));
    rep.kv("F", pg::to_string(g.F));
    rep.kv("G", pg::to_string(g.G));
    rep.kv("family_dimension", pg::family_dimension(id));
    if (pg::family_dimension(id) == 3) {
        switch (pg::killing_class(id, p)) {
            case pg::KillingClass::XType: rep.kv("killing_class", "X"); break;
            case pg::KillingClass::YType: rep.kv("killing_class", "Y"); break;
            case pg::KillingClass::ZType: rep.kv("killing_class", "Z"); break;
        }
    }

    pg::Fingerprint fp = pg::fingerprint(id, p);
    for (std::size_t i = 0; i < fp.probe_xs.size(); ++i) {
        std::string pre = "probe" + std::to_string(i);
        rep.kv(pre + ".x", fp.probe_xs[i]);
        rep.kv(pre + ".R", fp.at_probes[i][0]);
        rep.kv(pre + ".I", fp.at_probes[i][1]);
        rep.kv(pre + ".lapR", fp.at_probes[i][2]);
    }
    if (fp.curve_origin) {
        rep.kv("origin.R", fp.curve_origin->first);
        rep.kv("origin.lapR", fp.curve_origin->second);
    }
    emit(rep, o);
    return 0;
}

int cmd_distinguish(const std::string& idA, const std::string& pa, const std::string& idB,
                    const std::string& pb, const CommonOpts& o) {
    pg::NormalFormId a = pg::parse_normal_form_id(idA);
    pg::NormalFormId b = pg::parse_normal_form_id(idB);
    pg::NormalFormParams paA = parse_params_arg(pa);
    pg::NormalFormParams paB = parse_params_arg(pb);
    pg::DistinguishVerdict v = pg::distinguish(a, paA, b, paB);

    pg::Report rep("distinguish");
    stamp(rep, o);
    rep.kv("entryA", idA + "(" + params_string(a, paA) + ")");
    rep.kv("entryB", idB + "(" + params_string(b, paB) + ")");
    rep.kv("config_hash", pg::hash_hex(idA + params_string(a, paA) + "|" + idB +
                                       params_string(b, paB)));
    switch (v.kind) {
        case pg::DistinguishVerdict::Kind::Distinct: rep.kv("verdict", "distinct"); break;
        case pg::DistinguishVerdict::Kind::Identical: rep.kv("verdict", "identical"); break;
        case pg::DistinguishVerdict::Kind::SameFamily: rep.kv("verdict", "same-family"); break;
        case pg::DistinguishVerdict::Kind::Indeterminate:
            rep.kv("verdict", "indeterminate");
            break;
    }
    if (!v.witness.empty()) rep.kv("witness", v.witness);
    if (!v.detail.empty()) rep.kv("detail", v.detail);
    emit(rep, o);
    return v.kind == pg::DistinguishVerdict::Kind::Indeterminate ? 3 : 0;
}

int cmd_geodesic(const std::string& spec, const std::string& suite_name, double suite_D,
                 const std::string& state_str, double T, double h, const CommonOpts& o) {
    pg::Metric2 g;
    std::vector<pg::LabeledForm> integrals;
    std::string source;
    if (!suite_name.empty()) {
        pg::IntegralSuite suite;
        if (suite_name == "exp") {
            suite = pg::superintegrable_suite(suite_D);
            source = "suite:exp D=" + pg::Report::format_double(suite_D);
        } else if (suite_name == "koenigs") {
            suite = pg::koenigs_suite();
            source = "suite:koenigs";
        } else {
            throw pg::Error("unknown suite '" + suite_name + "' (expected exp or koenigs)");
        }
        g = suite.metric;
        integrals = suite.integrals;
    } else {
        if (spec.empty()) throw pg::Error("geodesic needs a metric spec or --suite");
        g = pg::load_metric_file(spec);
        source = spec;
    }
    // The metric itself is always tracked as the energy column.
    integrals.insert(integrals.begin(), {"energy", {g.E, g.F, g.G}});

    std::istringstream ss(state_str);
    pg::GeodesicState s0;
    char comma;
    if (!(ss >> s0.x >> comma >> s0.y >> comma >> s0.vx >> comma >> s0.vy))
        throw pg::Error("bad --state (expected x,y,vx,vy)");

    pg::Trajectory tr = pg::integrate_geodesic(g, s0, T, h);

    std::ostringstream os;
    os << "# geodesic " << source << " state=" << state_str << " T=" << T << " h=" << h
       << " seed=" << o.seed << (tr.clipped ? " clipped=true" : "") << "\n";
    os << "# columns: t x y vx vy";
    for (const auto& lf : integrals) os << " " << lf.label;
    os << "\n";
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const auto& s = tr.states[i];
        os << pg::Report::format_double(tr.t[i]) << " " << pg::Report::format_double(s.x)
           << " " << pg::Report::format_double(s.y) << " "
           << pg::Report::format_double(s.vx) << " " << pg::Report::format_double(s.vy);
        for (const auto& lf : integrals)
            os << " "
               << pg::Report::format_double(
                      pg::form_value(lf.form, {s.x, s.y}, s.vx, s.vy, g.env));
        os << "\n";
    }
    for (const auto& lf : integrals)
        os << "# max_drift " << lf.label << " = "
           << pg::Report::format_double(pg::integral_drift(tr, lf.form, g.env)) << "\n";
    if (o.out.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(o.out);
        if (!f) throw pg::Error("cannot open output file '" + o.out + "'");
        f << os.str();
    }
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    auto results = pg::run_acceptance_suite(&std::cout, o.seed);
    pg::Report rep("verify");
    stamp(rep, o);
    int failed = 0;
    for (const auto& r : results) {
        rep.kv("criterion" + std::to_string(r.index),
               std::string(r.passed ? "PASS" : "FAIL") + " " + r.name);
        if (!r.passed) ++failed;
    }
    rep.kv("failed", failed);
    emit(rep, o);
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"projgeo: projective-symmetry analysis of 2-D metrics"};
    app.require_subcommand(1);

    CommonOpts o;

    std::string metric_path, vf_path, spec_path;
    auto* analyze = app.add_subcommand("analyze", "Connection, invariants and curvature of a metric");
    analyze->add_option("spec", metric_path, "Metric spec file")->required();
    add_common(analyze, o);

    std::string sym_spec, sym_field;
    auto* symmetry = app.add_subcommand("symmetry", "Residual of the symmetry system for a field");
    symmetry->add_option("spec", sym_spec, "Metric or connection spec file")->required();
    symmetry->add_option("field", sym_field, "Vector field spec file")->required();
    add_common(symmetry, o);

    auto* flatness = app.add_subcommand("flatness", "Flatness verdict via the Liouville invariants");
    flatness->add_option("spec", spec_path, "Metric or connection spec file")->required();
    add_common(flatness, o);

    double A = 0, B = 0, C = 0, D = 0, x0 = 0.5, x1 = 2.5;
    int case_tag = 3, ncheck = 12;
    std::vector<double> alpha_re, alpha_im;
    auto* mobility =
        app.add_subcommand("mobility", "Dimension of the mobility solution space");
    mobility->add_option("--A", A, "Coefficient A")->required();
    mobility->add_option("--B", B, "Coefficient B")->required();
    mobility->add_option("--C", C, "Coefficient C")->required();
    mobility->add_option("--D", D, "Coefficient D")->required();
    mobility->add_option("--case", case_tag, "Mode case 1, 2 or 3")->required();
    mobility->add_option("--alpha-re", alpha_re, "Real parts of the three modes");
    mobility->add_option("--alpha-im", alpha_im, "Imaginary parts of the three modes");
    mobility->add_option("--x0", x0, "Left end of the integration interval");
    mobility->add_option("--x1", x1, "Right end of the integration interval");
    mobility->add_option("--ncheck", ncheck, "Number of constraint checkpoints");
    add_common(mobility, o);

    std::string cat_id, cat_params;
    auto* catalog = app.add_subcommand("catalog", "Instantiate a normal form and fingerprint it");
    catalog->add_option("id", cat_id, "Normal form id (1a..2c)")->required();
    catalog->add_option("--params", cat_params, "Comma-separated key=value parameters");
    add_common(catalog, o);

    std::string idA, idB, paramsA, paramsB;
    auto* dist = app.add_subcommand("distinguish", "Decide whether two catalog entries are isometric");
    dist->add_option("idA", idA, "First normal form id")->required();
    dist->add_option("idB", idB, "Second normal form id")->required();
    dist->add_option("--params-a", paramsA, "Parameters of the first entry");
    dist->add_option("--params-b", paramsB, "Parameters of the second entry");
    add_common(dist, o);

    std::string geo_spec, suite_name, state_str = "1,0,0.6,0.4";
    double suite_D = -0.5, T = 3.0, h = 1e-3;
    auto* geod = app.add_subcommand("geodesic", "Integrate a geodesic and dump the trajectory");
    geod->add_option("spec", geo_spec, "Metric spec file");
    geod->add_option("--suite", suite_name, "Built-in suite: exp or koenigs");
    geod->add_option("--D", suite_D, "Coupling constant for the exp suite");
    geod->add_option("--state", state_str, "Initial state x,y,vx,vy");
    geod->add_option("--T", T, "Integration time");
    geod->add_option("--step", h, "Step size");
    add_common(geod, o);

    auto* verify = app.add_subcommand("verify", "Run the full acceptance suite");
    add_common(verify, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(metric_path, o);
        if (symmetry->parsed()) return cmd_symmetry(sym_spec, sym_field, o);
        if (flatness->parsed()) return cmd_flatness(spec_path, o);
        if (mobility->parsed())
            return cmd_mobility(A, B, C, D, case_tag, alpha_re, alpha_im, x0, x1, ncheck, o);
        if (catalog->parsed()) return cmd_catalog(cat_id, cat_params, o);
        if (dist->parsed()) return cmd_distinguish(idA, paramsA, idB, paramsB, o);
        if (geod->parsed())
            return cmd_geodesic(geo_spec, suite_name, suite_D, state_str, T, h, o);
        if (verify->parsed()) return cmd_verify(o);
    } catch (const pg::IndeterminateRankError& e) {
        std::cerr << "error (indeterminate): " << e.what() << "\n";
        return 3;
    } catch (const pg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
