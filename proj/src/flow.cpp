#include "projgeo/flow.hpp"

#include <cmath>

namespace projgeo {

namespace {

struct GeodesicRhs {
    Expr g111, g112, g122, g211, g212, g222;  // parameter-resolved Christoffels

    static GeodesicRhs build(const Metric2& g) {
        ChristoffelField c = christoffel(g);
        auto resolve = [&](const Expr& e) { return simplify(substitute_params(e, g.env)); };
        return {resolve(c.x_xx), resolve(c.x_xy), resolve(c.x_yy),
                resolve(c.y_xx), resolve(c.y_xy), resolve(c.y_yy)};
    }

    void accel(const GeodesicState& s, double& ax, double& ay) const {
        double xx = s.vx * s.vx, xy = s.vx * s.vy, yy = s.vy * s.vy;
        ax = -(eval(g111, s.x, s.y) * xx + 2.0 * eval(g112, s.x, s.y) * xy +
               eval(g122, s.x, s.y) * yy);
        ay = -(eval(g211, s.x, s.y) * xx + 2.0 * eval(g212, s.x, s.y) * xy +
               eval(g222, s.x, s.y) * yy);
    }
};

GeodesicState rk4_step(const GeodesicRhs& rhs, const GeodesicState& s, double h) {
    auto deriv = [&](const GeodesicState& q) {
        GeodesicState d;
        d.x = q.vx;
        d.y = q.vy;
        rhs.accel(q, d.vx, d.vy);
        return d;
    };
    auto advance = [](const GeodesicState& q, const GeodesicState& d, double f) {
        return GeodesicState{q.x + f * d.x, q.y + f * d.y, q.vx + f * d.vx, q.vy + f * d.vy};
    };
    GeodesicState k1 = deriv(s);
    GeodesicState k2 = deriv(advance(s, k1, h / 2));
    GeodesicState k3 = deriv(advance(s, k2, h / 2));
    GeodesicState k4 = deriv(advance(s, k3, h));
    return GeodesicState{s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                         s.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                         s.vx + h / 6 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx),
                         s.vy + h / 6 * (k1.vy + 2 * k2.vy + 2 * k3.vy + k4.vy)};
}

QuadraticForm resolved_metric_form(const Metric2& g) {
    auto resolve = [&](const Expr& e) { return simplify(substitute_params(e, g.env)); };
    return {resolve(g.E), resolve(g.F), resolve(g.G)};
}

Expr resolved_det(const Metric2& g) {
    return simplify(substitute_params(det_expr(g), g.env));
}

}  // namespace

Trajectory integrate_geodesic(const Metric2& g, GeodesicState s0, double T, double h) {
    if (!point_in_domain(g.domain, g.env, {s0.x, s0.y}))
        throw DomainError("geodesic seed lies outside the metric domain");
    if (s0.vx == 0.0 && s0.vy == 0.0) throw Error("geodesic seed has zero velocity");

    GeodesicRhs rhs = GeodesicRhs::build(g);
    QuadraticForm gf = resolved_metric_form(g);

    Trajectory tr;
    tr.step = h;
    int n = static_cast<int>(std::ceil(T / h));
    tr.t.reserve(n + 1);
    tr.states.reserve(n + 1);
    tr.t.push_back(0.0);
    tr.states.push_back(s0);
    tr.energy0 = form_value(gf, {s0.x, s0.y}, s0.vx, s0.vy);

    GeodesicState s = s0;
    for (int i = 0; i < n; ++i) {
        GeodesicState next = rk4_step(rhs, s, h);
        if (!std::isfinite(next.x) || !std::isfinite(next.y) || !std::isfinite(next.vx) ||
            !std::isfinite(next.vy) ||
            !point_in_domain(g.domain, g.env, {next.x, next.y})) {
            tr.clipped = true;
            break;
        }
        s = next;
        tr.t.push_back((i + 1) * h);
        tr.states.push_back(s);
        double e = form_value(gf, {s.x, s.y}, s.vx, s.vy);
        tr.energy_drift = std::max(tr.energy_drift, std::abs(e - tr.energy0) /
                                                        (std::abs(tr.energy0) + 1e-300));
    }
    return tr;
}

double integral_drift(const Trajectory& tr, const QuadraticForm& F, const ParamEnv& env) {
    if (tr.states.empty()) return 0.0;
    const GeodesicState& s0 = tr.states.front();
    double f0 = form_value(F, {s0.x, s0.y}, s0.vx, s0.vy, env);
    double worst = 0.0;
    for (const auto& s : tr.states) {
        double f = form_value(F, {s.x, s.y}, s.vx, s.vy, env);
        worst = std::max(worst, std::abs(f - f0) / (std::abs(f0) + 1e-300));
    }
    return worst;
}

QuadraticForm equivalence_integral(const Metric2& g, const Metric2& gbar) {
    QuadraticForm gb = resolved_metric_form(gbar);
    Expr ratio = Expr::div(resolved_det(g), resolved_det(gbar));
    Expr factor = Expr::pow_rat(ratio, 2, 3);
    return {simplify(gb.a11 * factor), simplify(gb.a12 * factor), simplify(gb.a22 * factor)};
}

GeodesicState random_geodesic_seed(const Metric2& g, std::mt19937_64& rng,
                                   const Metric2* other) {
    QuadraticForm gf = resolved_metric_form(g);
    QuadraticForm of;
    Domain box = g.domain;
    if (other) {
        of = resolved_metric_form(*other);
        box.x0 = std::max(box.x0, other->domain.x0);
        box.x1 = std::min(box.x1, other->domain.x1);
        box.y0 = std::max(box.y0, other->domain.y0);
        box.y1 = std::min(box.y1, other->domain.y1);
        if (box.x0 >= box.x1 || box.y0 >= box.y1)
            throw DomainError("metric domains do not overlap");
        for (const auto& e : other->domain.excludes) box.excludes.push_back(e);
    }

    std::uniform_real_distribution<double> ux(box.x0, box.x1), uy(box.y0, box.y1),
        uang(0.0, 6.283185307179586);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Point p{ux(rng), uy(rng)};
        if (!point_in_domain(box, g.env, p, 5e-2)) continue;
        if (other && !point_in_domain(other->domain, other->env, p, 5e-2)) continue;
        double th = uang(rng);
        GeodesicState s{p.x, p.y, std::cos(th), std::sin(th)};
        // Stay clearly away from the null cones of either metric.
        auto scale = [&](const QuadraticForm& f) {
            return std::abs(eval(f.a11, p)) + 2 * std::abs(eval(f.a12, p)) +
                   std::abs(eval(f.a22, p));
        };
        if (std::abs(form_value(gf, p, s.vx, s.vy)) < 0.05 * scale(gf)) continue;
        if (other && std::abs(form_value(of, p, s.vx, s.vy)) < 0.05 * scale(of)) continue;
        return s;
    }
    throw DomainError("could not draw a usable geodesic seed");
}

EquivalenceReport projective_equivalence_check(const Metric2& g, const Metric2& gbar,
                                               int trials, double T, unsigned seed) {
    QuadraticForm I = equivalence_integral(g, gbar);
    std::mt19937_64 rng(seed);
    EquivalenceReport rep;
    rep.trials = trials;
    rep.seed = seed;
    for (int i = 0; i < trials; ++i) {
        GeodesicState s0 = random_geodesic_seed(g, rng, &gbar);
        Trajectory tr = integrate_geodesic(g, s0, T);
        rep.max_drift = std::max(rep.max_drift, integral_drift(tr, I));
    }
    rep.equivalent = rep.max_drift <= 1e-6;
    return rep;
}

namespace {

void require_killing(const Metric2& g, const VectorField& K, const char* who) {
    auto samples = sample_points(g, 40);
    double r = killing_residual(g, K, samples);
    if (r > 1e-6)
        throw PreconditionError(std::string(who) +
                                ": the supplied field is not Killing (residual " +
                                std::to_string(r) + ")");
}

void require_integral(const Metric2& g, const QuadraticForm& F, const char* who,
                      unsigned seed = 314159) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 3; ++i) {
        GeodesicState s0 = random_geodesic_seed(g, rng);
        Trajectory tr = integrate_geodesic(g, s0, 2.0);
        double d = integral_drift(tr, F, g.env);
        if (d > 1e-6)
            throw PreconditionError(std::string(who) +
                                    ": the supplied form is not conserved (drift " +
                                    std::to_string(d) + ")");
    }
}

void require_equivalent(const Metric2& g, const Metric2& gbar, const char* who) {
    EquivalenceReport rep = projective_equivalence_check(g, gbar, 3, 2.0);
    if (!rep.equivalent)
        throw PreconditionError(std::string(who) +
                                ": metrics are not projectively equivalent (drift " +
                                std::to_string(rep.max_drift) + ")");
}

}  // namespace

VectorField knebelman_map(const Metric2& g, const Metric2& gbar, const VectorField& K) {
    require_killing(g, K, "knebelman_map");
    require_equivalent(g, gbar, "knebelman_map");

    auto rg = [&](const Expr& e) { return simplify(substitute_params(e, g.env)); };
    auto rb = [&](const Expr& e) { return simplify(substitute_params(e, gbar.env)); };
    Expr E = rg(g.E), F = rg(g.F), G = rg(g.G);
    Expr Eb = rb(gbar.E), Fb = rb(gbar.F), Gb = rb(gbar.G);
    Expr detg = resolved_det(g), detb = resolved_det(gbar);
    Expr K1 = rg(K.Z1), K2 = rg(K.Z2);

    Expr w1 = E * K1 + F * K2;
    Expr w2 = F * K1 + G * K2;
    Expr factor = Expr::pow_rat(Expr::div(detb, detg), 1, 3);
    VectorField out;
    out.Z1 = simplify(factor * Expr::div(Gb * w1 - Fb * w2, detb));
    out.Z2 = simplify(factor * Expr::div(Eb * w2 - Fb * w1, detb));
    return out;
}

VectorField symmetry_from_integral(const Metric2& g, const VectorField& K,
                                   const QuadraticForm& F) {
    require_killing(g, K, "symmetry_from_integral");
    QuadraticForm Fr{simplify(substitute_params(F.a11, g.env)),
                     simplify(substitute_params(F.a12, g.env)),
                     simplify(substitute_params(F.a22, g.env))};
    require_integral(g, Fr, "symmetry_from_integral");

    auto rg = [&](const Expr& e) { return simplify(substitute_params(e, g.env)); };
    Expr E = rg(g.E), Fg = rg(g.F), G = rg(g.G);
    Expr detg = resolved_det(g);
    Expr K1 = rg(K.Z1), K2 = rg(K.Z2);
    Expr w1 = E * K1 + Fg * K2;
    Expr w2 = Fg * K1 + G * K2;

    // det(f) f^{-1} = adj(f), linear in f.
    VectorField out;
    out.Z1 = simplify(Expr::div(Fr.a22 * w1 - Fr.a12 * w2, detg));
    out.Z2 = simplify(Expr::div(Fr.a11 * w2 - Fr.a12 * w1, detg));
    return out;
}

QuadraticForm killing_integral_square(const Metric2& g, const VectorField& K) {
    auto rg = [&](const Expr& e) { return simplify(substitute_params(e, g.env)); };
    Expr E = rg(g.E), F = rg(g.F), G = rg(g.G);
    Expr K1 = rg(K.Z1), K2 = rg(K.Z2);
    Expr w1 = simplify(E * K1 + F * K2);
    Expr w2 = simplify(F * K1 + G * K2);
    return {simplify(w1 * w1), simplify(w1 * w2), simplify(w2 * w2)};
}

QuadraticForm transfer_integral(const Metric2& g, const Metric2& gbar,
                                const QuadraticForm& h) {
    require_equivalent(g, gbar, "transfer_integral");
    QuadraticForm hr{simplify(substitute_params(h.a11, g.env)),
                     simplify(substitute_params(h.a12, g.env)),
                     simplify(substitute_params(h.a22, g.env))};
    require_integral(g, hr, "transfer_integral");

    Expr factor = Expr::pow_rat(Expr::div(resolved_det(gbar), resolved_det(g)), 2, 3);
    return {simplify(hr.a11 * factor), simplify(hr.a12 * factor),
            simplify(hr.a22 * factor)};
}

IntegralSuite superintegrable_suite(double D) {
    if (D == 0.0) throw Error("superintegrable_suite: D must be nonzero");
    IntegralSuite suite;
    suite.metric.E = parse_expr("exp(3*x)");
    suite.metric.F = Expr::constant(0.0);
    suite.metric.G = simplify(substitute_params(parse_expr("-2*D*exp(x)"), {{"D", D}}));
    suite.metric.domain = {0.25, 2.75, -6.0, 6.0, {}};

    Expr e3 = Expr::exp(3.0 * Expr::x());
    Expr e2 = Expr::exp(2.0 * Expr::x());
    Expr e1 = Expr::exp(Expr::x());
    Expr y = Expr::y();

    QuadraticForm H{simplify(0.5 * e3), Expr::constant(0.0), simplify(-D * e1)};
    QuadraticForm F1{Expr::constant(0.0), Expr::constant(0.0), e2};
    QuadraticForm F2{simplify(0.5 * y * e3), simplify(-0.5 * e3), simplify(-D * y * e1)};
    QuadraticForm F3{simplify(0.5 * y * y * e3), simplify(Expr::neg(y) * e3),
                     simplify(-D * y * y * e1 + 2.0 * e3)};
    suite.integrals = {{"H", H}, {"F1", F1}, {"F2", F2}, {"F3", F3}};
    return suite;
}

IntegralSuite koenigs_suite() {
    IntegralSuite suite;
    Expr s = parse_expr("4*x^2+y^2+1");
    suite.metric.E = s;
    suite.metric.F = Expr::constant(0.0);
    suite.metric.G = s;
    suite.metric.domain = {-2.0, 2.0, -2.0, 2.0, {}};

    Expr x = Expr::x(), y = Expr::y();
    QuadraticForm F0{s, Expr::constant(0.0), s};
    QuadraticForm F1{simplify(s * y * y), Expr::constant(0.0),
                     simplify(Expr::neg(s) * (4.0 * x * x + 1.0))};
    QuadraticForm F2{simplify(s * x * y * y), simplify(-0.5 * s * s * y),
                     simplify(s * x * y * y + s * s * x)};
    suite.integrals = {{"F0", F0}, {"F1", F1}, {"F2", F2}};
    return suite;
}

}  // namespace projgeo
