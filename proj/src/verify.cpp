#include "projgeo/verify.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "projgeo/catalog.hpp"
#include "projgeo/flow.hpp"

namespace projgeo {

namespace {

using cd = std::complex<double>;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void fail(const std::string& msg) {
        ok = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << msg;
    }
    void note(const std::string& msg) {
        if (detail.tellp() > 0) detail << "; ";
        detail << msg;
    }
    void expect(bool cond, const std::string& msg) {
        if (!cond) fail(msg);
    }
};

struct CatalogEntry {
    NormalFormId id;
    NormalFormParams p;
};

std::vector<CatalogEntry> fixed_catalog() {
    return {
        {NormalFormId::N1a, {1.0, 3.0, 0.0, 1, 1}},
        {NormalFormId::N1b, {1.0, 3.0, 0.0, 1, 1}},
        {NormalFormId::N1c, {1.5, 0.0, 0.0, 1, 1}},
        {NormalFormId::N2a, {1.0, 0.0, 0.0, 1, 1}},
        {NormalFormId::N2b, {1.0, 0.0, 0.0, 1, 1}},
        {NormalFormId::N2c, {1.0, 0.0, 1.0, 1, 1}},
    };
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// 1. Catalog self-consistency at 100 samples per form.
Check criterion_catalog() {
    Check c;
    VectorField vertical{Expr::constant(0.0), Expr::constant(1.0)};
    VectorField scaling{Expr::constant(1.0), Expr::y()};
    for (const auto& [id, p] : fixed_catalog()) {
        Metric2 g = instantiate(id, p);
        auto samples = sample_points(g, 100);
        ChristoffelField ch = christoffel(g);
        double lc = covariant_derivative_residual(g, ch, samples);
        c.expect(lc <= 1e-9, to_string(id) + ": Levi-Civita residual " + fmt(lc));

        ProjectiveConnection pc = projective_connection(ch, g.env, g.domain);
        QuadraticForm a = mobility_matrix(g);
        double lin = metrizability_residual(pc, a, samples, g.env).max_abs;
        c.expect(lin <= 1e-8, to_string(id) + ": metrizability residual " + fmt(lin));

        double rv = symmetry_residual(pc, vertical, samples).max_abs;
        c.expect(rv <= 1e-8, to_string(id) + ": (0,1) residual " + fmt(rv));
        double rs = symmetry_residual(pc, scaling, samples).max_abs;
        if (rs > 1e-8) {
            std::string msg = to_string(id) + ": (1,y) residual " + fmt(rs);
            if (id == NormalFormId::N2c)
                msg += " [these coordinates carry (0,1) as the Killing field; the "
                       "connection is y'' = -3/(2x) y' + eps1 (x^3 - eps2 x/2) y'^3 and "
                       "(1,y) is not among its symmetries - its transitive pair here is "
                       "(0,1) with an exponential second field]";
            c.fail(msg);
        }
    }
    return c;
}

// 2. Flatness oracle plus the 625-point criterion grid.
Check criterion_flatness() {
    Check c;
    Metric2 flat;
    flat.E = Expr::constant(1.0);
    flat.F = Expr::constant(0.0);
    flat.G = Expr::constant(1.0);
    flat.domain = {-1, 1, -1, 1, {}};
    c.expect(is_flat(projective_connection(flat), sample_points(flat, 60)),
             "flat metric not recognized as flat");

    Metric2 sphere;
    sphere.E = parse_expr("1/(1+x^2+y^2)^2");
    sphere.F = Expr::constant(0.0);
    sphere.G = sphere.E;
    sphere.domain = {-1, 1, -1, 1, {}};
    c.expect(is_flat(projective_connection(sphere), sample_points(sphere, 60)),
             "constant-curvature metric not recognized as flat");

    for (const auto& [id, p] : fixed_catalog()) {
        Metric2 g = instantiate(id, p);
        c.expect(!is_flat(projective_connection(g), sample_points(g, 60)),
                 to_string(id) + " misclassified as flat");
    }

    const double vals[5] = {-2, -1, 0, 1, 2};
    auto samples = sample_points({0.25, 2.75, -1.0, 1.0, {}}, {}, 12);
    int disagreements = 0;
    for (double A : vals)
        for (double B : vals)
            for (double C : vals)
                for (double D : vals) {
                    bool criterion = (6 * D * (B - 2) - 2 * C * C == 0.0) &&
                                     (C + 9 * A * D - B * C == 0.0);
                    ABCDConnection conn{A, B, C, D};
                    bool computed = is_flat(conn.to_projective_connection(), samples);
                    if (computed != criterion) ++disagreements;
                }
    c.expect(disagreements == 0,
             "criterion grid disagreements: " + std::to_string(disagreements));
    if (c.ok) c.note("oracles and 625-point grid agree");
    return c;
}

// 3. Curvature pins for the exponential and rational forms.
Check criterion_curvature_pins() {
    Check c;
    const double probes[4] = {0.3, 0.7, 1.1, 1.6};

    for (auto [b, e1] : {std::pair{3.0, 1}, std::pair{-1.0, -1}}) {
        NormalFormParams p;
        p.b = b;
        p.eps1 = e1;
        Metric2 g = instantiate(NormalFormId::N1a, p);
        Expr R = scalar_curvature(g);
        for (double x : probes) {
            double expect = e1 * b * std::exp(-(b + 2) * x);
            double got = eval(R, x, 0.0, g.env);
            if (std::abs(got - expect) > 1e-8 * (1 + std::abs(expect)))
                c.fail("R(1a,b=" + fmt(b) + ") at x=" + fmt(x) + ": " + fmt(got) +
                       " != " + fmt(expect));
        }
    }

    // Rational form, fixed parameters a = 1, c = 1, eps = (1,1).
    const double a = 1.0, cc = 1.0, e2 = 1.0;
    NormalFormParams p2c{a, 0.0, cc, 1, 1};
    Metric2 g = instantiate(NormalFormId::N2c, p2c);
    Expr R = scalar_curvature(g);
    Expr I = grad_norm_sq(g, R);
    Expr dR = laplacian(g, R);
    double iratio = 0, dratio = 0;
    for (double x : probes) {
        double u = cc * x + 2 * x * x + e2;
        double Rv = (3 * cc * x * x + 4 * x * x * x + 6 * e2 * x + 0.5 * e2 * cc) / a;
        double Iv = std::pow(u, 4) * x / (a * a * a);
        double dRv = (2 * e2 + 5 * cc * x + 16 * x * x) * u * u / (a * a);
        double Rg = eval(R, x, 0.0, g.env);
        double Ig = eval(I, x, 0.0, g.env);
        double dRg = eval(dR, x, 0.0, g.env);
        if (std::abs(Rg - Rv) > 1e-8 * (1 + std::abs(Rv)))
            c.fail("R(2c) at x=" + fmt(x) + ": " + fmt(Rg) + " != " + fmt(Rv));
        if (std::abs(Ig - Iv) > 1e-8 * (1 + std::abs(Iv)))
            c.fail("I(2c) at x=" + fmt(x) + ": " + fmt(Ig) + " != reference " + fmt(Iv));
        if (std::abs(dRg - dRv) > 1e-8 * (1 + std::abs(dRv)))
            c.fail("lapR(2c) at x=" + fmt(x) + ": " + fmt(dRg) + " != reference " + fmt(dRv));
        iratio = Ig / Iv;
        dratio = dRg / dRv;
    }
    if (!c.ok)
        c.note("computed I and lap R are " + fmt(iratio) + "x and " + fmt(dratio) +
               "x the reference closed forms; those references are mutually inconsistent "
               "with the reference R (which matches): from R it follows that R_x = 6u/a, "
               "hence I = 36 u^4 x/a^3 and lap R = 3(2e2+5cx+16x^2)u^2/a^2 - the computed "
               "values match these and the independent finite-difference oracle");

    Fingerprint fp = fingerprint(NormalFormId::N2c, p2c);
    if (fp.curve_origin) {
        auto [R0, dR0] = *fp.curve_origin;
        double R0ref = e2 * cc / (2 * a);
        double dR0ref = 2 * e2 / (a * a);  // e2^3 = e2
        if (std::abs(R0 - R0ref) > 1e-10 * (1 + std::abs(R0ref)))
            c.fail("R at x=0: " + fmt(R0) + " != " + fmt(R0ref));
        if (std::abs(dR0 - dR0ref) > 1e-10 * (1 + std::abs(dR0ref)))
            c.fail("lap R at x=0: " + fmt(dR0) + " != reference " + fmt(dR0ref) +
                   " (computed equals 3x the reference, consistent with the above)");
    } else {
        c.fail("missing curve origin for 2c");
    }
    return c;
}

// 4. Solution-space dimensions of the separated coefficient system.
Check criterion_dimensions() {
    Check c;
    auto dim = [&](ABCDConnection conn, int case_tag, std::array<cd, 3> alphas) {
        return solution_space_dimension(build_coefficient_system(conn, case_tag, alphas))
            .dimension;
    };
    int d1 = dim({0, 0, 1, 0}, 1, {cd(0.3), cd(-0.4), cd(1.1)});
    c.expect(d1 == 0, "C=1 case: dim " + std::to_string(d1) + " != 0");
    int d2 = dim({1, 0, 0, 1}, 3, {cd(0), cd(0), cd(0)});
    c.expect(d2 == 0, "A=1,D=1 case: dim " + std::to_string(d2) + " != 0");
    int d3 = dim({0, -1, 0, 1}, 3, {cd(0), cd(0), cd(0)});
    c.expect(d3 == 2, "B=-1,D=1 case: dim " + std::to_string(d3) + " != 2");
    int d4 = dim({0, 1, 0, 1}, 3, {cd(0), cd(0), cd(0)});
    c.expect(d4 == 2, "B=1,D=1 case: dim " + std::to_string(d4) + " != 2");
    if (c.ok) c.note("dims 0/0/2/2 as required");
    return c;
}

// 5. Conserved cross-integral for equivalent pairs, drifting for others.
Check criterion_equivalence(unsigned seed) {
    Check c;
    const std::pair<double, double> BD[] = {{-1.0, 1.0}, {-0.5, 1.0}, {0.5, -0.5},
                                            {1.0, 1.0},  {2.0, 1.0}};
    const std::pair<double, double> Hs[] = {{1.1, 2.0}, {1.2, 3.0}, {2.0, 4.0},
                                            {1.1, 2.5}, {1.3, 2.2}};
    auto family = [](double B, double D, double H) {
        return metric_from_mobility(mobility_solution_family(B, D, 1.0, H), {},
                                    {0.5, 2.5, -2.0, 2.0, {}});
    };
    for (int i = 0; i < 5; ++i) {
        auto [B, D] = BD[i];
        EquivalenceReport rep = projective_equivalence_check(
            family(B, D, Hs[i].first), family(B, D, Hs[i].second), 5, 3.0, seed + i);
        c.expect(rep.equivalent && rep.max_drift <= 1e-6,
                 "pair B=" + fmt(B) + ": drift " + fmt(rep.max_drift));
    }

    Metric2 exp1a = instantiate(NormalFormId::N1a, {1.0, 3.0, 0.0, 1, 1});
    Metric2 exp2a = instantiate(NormalFormId::N2a, {1.0, 0.0, 0.0, 1, 1});
    Metric2 rational = instantiate(NormalFormId::N2c, {1.0, 0.0, 1.0, 1, 1});
    IntegralSuite ks = koenigs_suite();
    Metric2 fam = family(-1.0, 1.0, 1.5);
    const std::pair<const Metric2*, const Metric2*> pairs[] = {
        {&exp1a, &ks.metric}, {&exp1a, &exp2a}, {&ks.metric, &exp2a},
        {&rational, &exp1a},  {&fam, &exp2a},
    };
    int idx = 0;
    for (auto [a, b] : pairs) {
        EquivalenceReport rep = projective_equivalence_check(*a, *b, 5, 3.0, seed + 100 + idx);
        c.expect(!rep.equivalent && rep.max_drift > 1e-3,
                 "inequivalent pair " + std::to_string(idx) + " drift only " +
                     fmt(rep.max_drift));
        ++idx;
    }
    if (c.ok) c.note("5 equivalent pairs conserve at 1e-6, 5 inequivalent pairs drift > 1e-3");
    return c;
}

// 6. The superintegrable quartet and the quartic-family triple.
Check criterion_suites(unsigned seed) {
    Check c;
    IntegralSuite suite = superintegrable_suite(-0.5);
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd values(10, 4);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        GeodesicState s0 = random_geodesic_seed(suite.metric, rng);
        Trajectory tr = integrate_geodesic(suite.metric, s0, 3.0);
        for (int j = 0; j < 4; ++j) {
            worst = std::max(worst, integral_drift(tr, suite.integrals[j].form));
            const GeodesicState& s = tr.states.front();
            values(i, j) = form_value(suite.integrals[j].form, {s.x, s.y}, s.vx, s.vy);
        }
    }
    c.expect(worst <= 1e-6, "quartet drift " + fmt(worst));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++rank;
    c.expect(rank == 4, "quartet evaluation rank " + std::to_string(rank) + " != 4");

    IntegralSuite ks = koenigs_suite();
    double kworst = 0;
    for (int i = 0; i < 5; ++i) {
        GeodesicState s0 = random_geodesic_seed(ks.metric, rng);
        Trajectory tr = integrate_geodesic(ks.metric, s0, 3.0);
        for (const auto& lf : ks.integrals)
            kworst = std::max(kworst, integral_drift(tr, lf.form));
    }
    c.expect(kworst <= 1e-6, "quartic-family triple drift " + fmt(kworst));
    if (c.ok)
        c.note("quartet drift " + fmt(worst) + ", rank 4; triple drift " + fmt(kworst) +
               " (quartet ships the drift-verified variants of the two y-dependent forms)");
    return c;
}

// 7. The two field-transfer maps.
Check criterion_maps(unsigned seed) {
    Check c;
    VectorField K{Expr::constant(0.0), Expr::constant(1.0)};
    auto family = [](double B, double D, double H) {
        return metric_from_mobility(mobility_solution_family(B, D, 1.0, H), {},
                                    {0.5, 2.5, -2.0, 2.0, {}});
    };
    const std::tuple<double, double, double, double> cases[] = {
        {-1.0, 1.0, 1.1, 2.0}, {-0.5, 1.0, 1.2, 3.0}, {1.0, 1.0, 1.1, 2.5}};
    for (auto [B, D, H1, H2] : cases) {
        Metric2 ga = family(B, D, H1);
        Metric2 gb = family(B, D, H2);
        VectorField Kbar = knebelman_map(ga, gb, K);
        double r = killing_residual(gb, Kbar, sample_points(gb, 60));
        c.expect(r <= 1e-6, "transferred Killing residual " + fmt(r) + " for B=" + fmt(B));
    }

    IntegralSuite suite = superintegrable_suite(-0.5);
    const Metric2& g = suite.metric;
    ProjectiveConnection pc = projective_connection(g);
    auto samples = sample_points(g, 50);

    VectorField z2 = symmetry_from_integral(g, K, suite.integrals[2].form);
    double r2 = symmetry_residual(pc, z2, samples).max_abs;
    c.expect(r2 <= 1e-6, "induced field residual " + fmt(r2));

    QuadraticForm fk = killing_integral_square(g, K);
    VectorField zk = symmetry_from_integral(g, K, fk);
    double zmax = 0;
    for (const auto& p : samples)
        zmax = std::max({zmax, std::abs(eval(zk.Z1, p)), std::abs(eval(zk.Z2, p))});
    c.expect(zmax <= 1e-9, "kernel image " + fmt(zmax) + " != 0");

    const double al = 0.7, be = -1.3;
    QuadraticForm combo{
        simplify(al * suite.integrals[0].form.a11 + be * suite.integrals[2].form.a11),
        simplify(al * suite.integrals[0].form.a12 + be * suite.integrals[2].form.a12),
        simplify(al * suite.integrals[0].form.a22 + be * suite.integrals[2].form.a22)};
    VectorField zc = symmetry_from_integral(g, K, combo);
    VectorField z0 = symmetry_from_integral(g, K, suite.integrals[0].form);
    double lmax = 0;
    for (const auto& p : samples) {
        lmax = std::max(lmax, std::abs(eval(zc.Z1, p) -
                                       (al * eval(z0.Z1, p) + be * eval(z2.Z1, p))));
        lmax = std::max(lmax, std::abs(eval(zc.Z2, p) -
                                       (al * eval(z0.Z2, p) + be * eval(z2.Z2, p))));
    }
    c.expect(lmax <= 1e-9, "linearity defect " + fmt(lmax));
    (void)seed;
    if (c.ok) c.note("Killing transfer, induced symmetries, kernel and linearity all hold");
    return c;
}

// 8. Distinguishing matrix over a 12-entry parameter grid.
Check criterion_distinguish() {
    Check c;
    std::vector<CatalogEntry> grid = {
        {NormalFormId::N1a, {1.0, 3.0, 0.0, 1, 1}},
        {NormalFormId::N1a, {1.0, 3.0, 0.0, 1, -1}},
        {NormalFormId::N1a, {1.0, -1.0, 0.0, -1, 1}},
        {NormalFormId::N1b, {1.0, 3.0, 0.0, 1, 1}},
        {NormalFormId::N1b, {2.0, 3.0, 0.0, 1, 1}},
        {NormalFormId::N1c, {1.0, 0.0, 0.0, 1, 1}},
        {NormalFormId::N1c, {1.0, 0.0, 0.0, -1, 1}},
        {NormalFormId::N2a, {1.0, 0.0, 0.0, 1, 1}},
        {NormalFormId::N2a, {1.0, 0.0, 0.0, -1, -1}},
        {NormalFormId::N2b, {1.0, 0.0, 0.0, 1, 1}},
        {NormalFormId::N2c, {1.0, 0.0, 1.0, 1, 1}},
        {NormalFormId::N2c, {1.0, 0.0, 2.0, 1, -1}},
    };
    int indeterminate = 0, wrong = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto self = distinguish(grid[i].id, grid[i].p, grid[i].id, grid[i].p);
        if (self.kind != DistinguishVerdict::Kind::Identical) {
            ++wrong;
            c.fail("self-pair " + std::to_string(i) + " not identical");
        }
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            auto v = distinguish(grid[i].id, grid[i].p, grid[j].id, grid[j].p);
            if (v.kind == DistinguishVerdict::Kind::Indeterminate) {
                ++indeterminate;
                c.fail("pair (" + std::to_string(i) + "," + std::to_string(j) +
                       ") indeterminate");
            } else if (v.kind != DistinguishVerdict::Kind::Distinct || v.witness.empty()) {
                ++wrong;
                c.fail("pair (" + std::to_string(i) + "," + std::to_string(j) +
                       ") not distinct-with-witness");
            }
        }
    }
    if (c.ok)
        c.note("66 unordered pairs distinct with witnesses, 12 self-pairs identical, 0 "
               "indeterminate");
    return c;
}

// 9. Expression engine: derivative property and print/parse round trip.
Check criterion_expressions(unsigned seed) {
    Check c;
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    };
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

    std::function<Expr(int)> gen = [&](int depth) -> Expr {
        if (depth <= 0) {
            switch (pick(4)) {
                case 0: return Expr::x();
                case 1: return Expr::y();
                case 2: return Expr::constant(uniform(-3, 3));
                default: return Expr::parameter("k");
            }
        }
        switch (pick(9)) {
            case 0: return gen(depth - 1) + gen(depth - 1);
            case 1: return gen(depth - 1) - gen(depth - 1);
            case 2: return gen(depth - 1) * gen(depth - 1);
            case 3: return Expr::div(gen(depth - 1), 2.0 + Expr::pow_int(Expr::x(), 2));
            case 4: return Expr::pow_int(gen(depth - 1), 1 + pick(3));
            case 5: return Expr::pow_rat(1.5 + Expr::pow_int(Expr::y(), 2), 1 + pick(3),
                                         2 + pick(2));
            case 6: return Expr::exp(Expr::constant(uniform(-1, 1)) * gen(depth - 1));
            case 7: return Expr::ln(2.0 + Expr::pow_int(Expr::x(), 2));
            default: return Expr::atan(gen(depth - 1));
        }
    };

    ParamEnv env{{"k", 0.75}};
    int diff_failures = 0, round_failures = 0, checked = 0;
    for (int i = 0; i < 1000; ++i) {
        Expr e = gen(1 + pick(6));
        Expr dx = diff(e, Coord::X);
        Expr back = parse_expr(to_string(e));
        double x = uniform(-1.5, 1.5), y = uniform(-1.5, 1.5);
        const double h = 1e-5;
        try {
            double sym = eval(dx, x, y, env);
            double fd = (eval(e, x + h, y, env) - eval(e, x - h, y, env)) / (2 * h);
            if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
            if (std::abs(sym - fd) > 1e-5 * (1 + std::abs(sym))) ++diff_failures;
            double v0 = eval(e, x, y, env);
            double v1 = eval(back, x, y, env);
            if (std::abs(v0 - v1) > 1e-12 * (1 + std::abs(v0))) ++round_failures;
            ++checked;
        } catch (const DomainError&) {
            continue;
        }
    }
    c.expect(diff_failures == 0,
             "derivative property failures: " + std::to_string(diff_failures));
    c.expect(round_failures == 0,
             "round-trip failures: " + std::to_string(round_failures));
    c.expect(checked >= 800, "only " + std::to_string(checked) + " usable cases");
    if (c.ok) c.note(std::to_string(checked) + " random cases pass both properties");
    return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(std::ostream* progress, unsigned seed) {
    struct Item {
        const char* name;
        std::function<Check()> run;
        double budget_seconds;  // 0 = untimed
    };
    const Item items[] = {
        {"catalog self-consistency", [] { return criterion_catalog(); }, 10.0},
        {"flatness oracle and criterion grid", [] { return criterion_flatness(); }, 0},
        {"curvature pins", [] { return criterion_curvature_pins(); }, 0},
        {"mobility solution-space dimensions", [] { return criterion_dimensions(); }, 30.0},
        {"projective equivalence drift", [=] { return criterion_equivalence(seed); }, 0},
        {"superintegrable suites", [=] { return criterion_suites(seed); }, 0},
        {"killing and integral transfer maps", [=] { return criterion_maps(seed); }, 0},
        {"distinguishing matrix", [] { return criterion_distinguish(); }, 0},
        {"expression engine properties", [=] { return criterion_expressions(seed); }, 0},
    };

    std::vector<CriterionResult> results;
    int index = 1;
    for (const auto& item : items) {
        auto t0 = std::chrono::steady_clock::now();
        Check c = item.run();
        auto t1 = std::chrono::steady_clock::now();
        CriterionResult r;
        r.index = index++;
        r.name = item.name;
        r.seconds = std::chrono::duration<double>(t1 - t0).count();
        r.passed = c.ok;
        if (item.budget_seconds > 0 && r.seconds > item.budget_seconds) {
            r.passed = false;
            c.fail("runtime " + fmt(r.seconds) + "s exceeds " + fmt(item.budget_seconds) +
                   "s");
        }
        r.detail = c.detail.str();
        if (progress) {
            (*progress) << "criterion " << r.index << " " << (r.passed ? "PASS" : "FAIL")
                        << " - " << r.name;
            if (!r.detail.empty()) (*progress) << ": " << r.detail;
            (*progress) << " [" << fmt(r.seconds) << "s]" << std::endl;
        }
        results.push_back(std::move(r));
    }
    return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

}  // namespace projgeo
