#include <cmath>
#include <sstream>

#include <doctest.h>

#include "projgeo/metric.hpp"

using namespace projgeo;

namespace {

Metric2 flat_metric() {
    Metric2 g;
    g.E = Expr::constant(1.0);
    g.F = Expr::constant(0.0);
    g.G = Expr::constant(1.0);
    g.domain = {-1.0, 1.0, -1.0, 1.0, {}};
    return g;
}

// e^{3x} dx^2 - 2D e^x dy^2 with D bound in the environment.
Metric2 exp_metric(double D) {
    Metric2 g;
    g.E = parse_expr("exp(3*x)");
    g.F = Expr::constant(0.0);
    g.G = parse_expr("-2*D*exp(x)");
    g.env = {{"D", D}};
    g.domain = {0.25, 2.75, -1.0, 1.0, {}};
    return g;
}

Metric2 koenigs_metric() {
    Metric2 g;
    g.E = parse_expr("4*x^2+y^2+1");
    g.F = Expr::constant(0.0);
    g.G = g.E;
    g.domain = {-1.0, 1.0, -1.0, 1.0, {}};
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("metric");

TEST_CASE("sampling respects the rectangle and excluded loci") {
    Domain d{0.25, 2.75, -1.0, 1.0, {parse_expr("x-1")}};
    auto pts = sample_points(d, {}, 100);
    CHECK(pts.size() == 100);
    for (const auto& p : pts) {
        CHECK(p.x >= 0.25);
        CHECK(p.x <= 2.75);
        CHECK(p.y >= -1.0);
        CHECK(p.y <= 1.0);
        CHECK(std::abs(p.x - 1.0) >= 1e-3);
    }
    Domain empty{-1e-4, 1e-4, -1.0, 1.0, {parse_expr("x")}};
    CHECK_THROWS_AS(sample_points(empty, {}, 10), DomainError);
}

TEST_CASE("christoffels of the flat metric vanish") {
    auto c = christoffel(flat_metric());
    for (const Expr* e : {&c.x_xx, &c.x_xy, &c.x_yy, &c.y_xx, &c.y_xy, &c.y_yy}) {
        CHECK(eval(*e, 0.3, -0.7) == 0.0);
    }
}

TEST_CASE("christoffels of a diagonal exponential metric") {
    Metric2 g = exp_metric(0.8);
    auto c = christoffel(g);
    auto samples = sample_points(g, 20);

    // Independent oracle: the closed diagonal-metric formulas
    // E_x/2E, G_x/2G, -G_x/2E evaluated numerically.
    Expr Ex = diff(g.E, Coord::X);
    Expr Gx = diff(g.G, Coord::X);
    for (const auto& p : samples) {
        double E = eval(g.E, p, g.env), G = eval(g.G, p, g.env);
        double ex = eval(Ex, p, g.env), gx = eval(Gx, p, g.env);
        CHECK(eval(c.x_xx, p, g.env) == doctest::Approx(ex / (2 * E)).epsilon(1e-10));
        CHECK(eval(c.y_xy, p, g.env) == doctest::Approx(gx / (2 * G)).epsilon(1e-10));
        CHECK(eval(c.x_yy, p, g.env) == doctest::Approx(-gx / (2 * E)).epsilon(1e-10));
        // Pinned values: 3/2, 1/2, D e^{-2x}.
        CHECK(eval(c.x_xx, p, g.env) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(eval(c.y_xy, p, g.env) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(eval(c.x_yy, p, g.env) ==
              doctest::Approx(0.8 * std::exp(-2 * p.x)).epsilon(1e-12));
        CHECK(eval(c.y_xx, p, g.env) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(eval(c.x_xy, p, g.env) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(eval(c.y_yy, p, g.env) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("christoffel of a conformal metric") {
    Metric2 g = koenigs_metric();
    auto c = christoffel(g);
    for (const auto& p : sample_points(g, 20)) {
        double s = 4 * p.x * p.x + p.y * p.y + 1;
        CHECK(eval(c.x_xx, p, g.env) == doctest::Approx(4 * p.x / s).epsilon(1e-10));
    }
}

TEST_CASE("levi-civita residual is numerically zero") {
    for (Metric2 g : {exp_metric(-0.5), koenigs_metric()}) {
        auto c = christoffel(g);
        auto samples = sample_points(g, 100);
        CHECK(covariant_derivative_residual(g, c, samples) <= 1e-9);
    }
}

TEST_CASE("scalar curvature: flat and exponential-family pins") {
    CHECK(eval(scalar_curvature(flat_metric()), 0.2, 0.4) == doctest::Approx(0.0));

    // eps1 e^{(b+2)x} dx^2 + eps2 e^{bx} dy^2 has R = eps1 b e^{-(b+2)x}.
    for (auto [b, eps1] : {std::pair{3.0, 1.0}, std::pair{-1.0, -1.0}}) {
        Metric2 g;
        g.E = parse_expr("eps1*exp((b+2)*x)");
        g.F = Expr::constant(0.0);
        g.G = parse_expr("eps2*exp(b*x)");
        g.env = {{"b", b}, {"eps1", eps1}, {"eps2", 1.0}};
        g.domain = {0.25, 2.75, -1.0, 1.0, {}};
        Expr R = scalar_curvature(g);
        for (double x : {0.3, 0.7, 1.1, 1.6}) {
            double expected = eps1 * b * std::exp(-(b + 2) * x);
            CHECK(eval(R, x, 0.0, g.env) == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("scalar curvature of the dim-3 rational form") {
    // a/((c x + 2x^2 + eps2)^2 x) dx^2 + a eps1 x/(c x + 2x^2 + eps2) dy^2:
    // R = (3c x^2 + 4x^3 + 6 eps2 x + eps2 c / 2)/a, hence R_x = 6u/a for
    // u = c x + 2x^2 + eps2, giving I = 36 u^4 x / a^3 and
    // lap R = 3 (2 eps2 + 5 c x + 16 x^2) u^2 / a^2.
    Metric2 g;
    g.E = parse_expr("a/((c*x+2*x^2+eps2)^2*x)");
    g.F = Expr::constant(0.0);
    g.G = parse_expr("a*eps1*x/(c*x+2*x^2+eps2)");
    g.env = {{"a", 2.0}, {"c", 1.5}, {"eps1", 1.0}, {"eps2", 1.0}};
    g.domain = {0.25, 2.75, -1.0, 1.0, {parse_expr("x"), parse_expr("c*x+2*x^2+eps2")}};

    const double a = 2.0, c = 1.5, e2 = 1.0;
    Expr R = scalar_curvature(g);
    Expr I = grad_norm_sq(g, R);
    Expr dR = laplacian(g, R);
    for (double x : {0.3, 0.7, 1.1, 1.6}) {
        double u = c * x + 2 * x * x + e2;
        double Rv = (3 * c * x * x + 4 * x * x * x + 6 * e2 * x + 0.5 * e2 * c) / a;
        double Iv = 36.0 * std::pow(u, 4) * x / (a * a * a);
        double dRv = 3.0 * (2 * e2 + 5 * c * x + 16 * x * x) * u * u / (a * a);
        CHECK(eval(R, x, 0.0, g.env) == doctest::Approx(Rv).epsilon(1e-9));
        CHECK(eval(I, x, 0.0, g.env) == doctest::Approx(Iv).epsilon(1e-9));
        CHECK(eval(dR, x, 0.0, g.env) == doctest::Approx(dRv).epsilon(1e-9));
    }
}

TEST_CASE("gradient norm and laplacian against finite-difference oracles") {
    Metric2 g;
    g.E = parse_expr("a/((c*x+2*x^2+eps2)^2*x)");
    g.F = Expr::constant(0.0);
    g.G = parse_expr("a*eps1*x/(c*x+2*x^2+eps2)");
    g.env = {{"a", 2.0}, {"c", 1.5}, {"eps1", 1.0}, {"eps2", 1.0}};
    g.domain = {0.25, 2.75, -1.0, 1.0, {parse_expr("x"), parse_expr("c*x+2*x^2+eps2")}};

    Expr R = scalar_curvature(g);
    Expr I = grad_norm_sq(g, R);
    Expr dR = laplacian(g, R);
    Expr det = det_expr(g);
    const double h = 1e-4;
    for (double x : {0.4, 0.9, 1.3}) {
        // grad norm oracle: g^{xx} (dR/dx)^2 + g^{yy} (dR/dy)^2 with central FD
        double E = eval(g.E, x, 0.0, g.env), G = eval(g.G, x, 0.0, g.env);
        double Rx = (eval(R, x + h, 0.0, g.env) - eval(R, x - h, 0.0, g.env)) / (2 * h);
        double Iv = Rx * Rx / E;
        CHECK(eval(I, x, 0.0, g.env) == doctest::Approx(Iv).epsilon(1e-6));
        (void)G;

        // laplacian oracle: (1/w) d/dx (w g^{xx} dR/dx) with w = sqrt|det|
        auto flux = [&](double xx) {
            double w = std::sqrt(std::abs(eval(det, xx, 0.0, g.env)));
            double rx = (eval(R, xx + h, 0.0, g.env) - eval(R, xx - h, 0.0, g.env)) / (2 * h);
            return w * rx / eval(g.E, xx, 0.0, g.env);
        };
        double w0 = std::sqrt(std::abs(eval(det, x, 0.0, g.env)));
        double lap = (flux(x + h) - flux(x - h)) / (2 * h) / w0;
        CHECK(eval(dR, x, 0.0, g.env) == doctest::Approx(lap).epsilon(1e-5));
    }
}

TEST_CASE("euclidean reductions of gradient norm and laplacian") {
    Metric2 g = flat_metric();
    Expr f = parse_expr("x^2");
    Expr gn = grad_norm_sq(g, f);
    CHECK(eval(gn, 1.3, -0.4) == doctest::Approx(4 * 1.3 * 1.3).epsilon(1e-14));
    CHECK(eval(grad_norm_sq(g, Expr::constant(7.0)), 0.1, 0.2) == 0.0);

    Expr lap = laplacian(g, parse_expr("x^2+y^2"));
    CHECK(eval(lap, 0.6, -0.2) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(eval(laplacian(g, Expr::constant(3.0)), 0.1, 0.2) == 0.0);
}

TEST_CASE("pullback: identity and scaling maps") {
    Metric2 g;
    g.E = parse_expr("eps1*exp((b+2)*x)");
    g.F = Expr::constant(0.0);
    g.G = parse_expr("eps2*exp(b*x)");
    g.env = {{"b", 3.0}, {"eps1", 1.0}, {"eps2", 1.0}};
    g.domain = {0.25, 2.75, -1.0, 1.0, {}};

    CoordinateMap identity{Expr::x(), Expr::y()};
    Metric2 same = pullback(g, identity, g.domain);
    for (const auto& p : sample_points(g, 16)) {
        CHECK(eval(same.E, p, g.env) == doctest::Approx(eval(g.E, p, g.env)).epsilon(1e-12));
        CHECK(eval(same.G, p, g.env) == doctest::Approx(eval(g.G, p, g.env)).epsilon(1e-12));
    }

    // y_old = y_new / c rescales G by c^{-2}.
    const double c = 2.5;
    CoordinateMap scale{Expr::x(), Expr::y() / c};
    Metric2 scaled = pullback(g, scale, g.domain);
    for (const auto& p : sample_points(g, 16)) {
        CHECK(eval(scaled.G, p, g.env) ==
              doctest::Approx(eval(g.G, p, g.env) / (c * c)).epsilon(1e-12));
        CHECK(eval(scaled.E, p, g.env) == doctest::Approx(eval(g.E, p, g.env)).epsilon(1e-12));
    }

    // x_old = x_new + c multiplies the components by e^{(b+2)c}, e^{bc}.
    CoordinateMap translate{Expr::x() + 0.4, Expr::y()};
    Metric2 shifted = pullback(g, translate, {0.25, 2.0, -1.0, 1.0, {}});
    for (const auto& p : sample_points(shifted.domain, g.env, 16)) {
        CHECK(eval(shifted.E, p, g.env) ==
              doctest::Approx(eval(g.E, p, g.env) * std::exp(5 * 0.4)).epsilon(1e-12));
        CHECK(eval(shifted.G, p, g.env) ==
              doctest::Approx(eval(g.G, p, g.env) * std::exp(3 * 0.4)).epsilon(1e-12));
    }
}

TEST_CASE("pullback against a numeric jacobian oracle") {
    Metric2 g = koenigs_metric();
    CoordinateMap map{Expr::x() + 0.3 * Expr::pow_int(Expr::y(), 2),
                      Expr::y() + 0.2 * Expr::pow_int(Expr::x(), 2)};
    Domain nd{-0.5, 0.5, -0.5, 0.5, {}};
    Metric2 pulled = pullback(g, map, nd);

    const double h = 1e-6;
    for (const auto& p : sample_points(nd, g.env, 16)) {
        auto mapped = [&](double xn, double yn) {
            return Point{eval(map.x_of, xn, yn, g.env), eval(map.y_of, xn, yn, g.env)};
        };
        Point q = mapped(p.x, p.y);
        double j11 = (mapped(p.x + h, p.y).x - mapped(p.x - h, p.y).x) / (2 * h);
        double j21 = (mapped(p.x + h, p.y).y - mapped(p.x - h, p.y).y) / (2 * h);
        double j12 = (mapped(p.x, p.y + h).x - mapped(p.x, p.y - h).x) / (2 * h);
        double j22 = (mapped(p.x, p.y + h).y - mapped(p.x, p.y - h).y) / (2 * h);
        double E = eval(g.E, q, g.env), F = eval(g.F, q, g.env), G = eval(g.G, q, g.env);
        double Ebar = E * j11 * j11 + 2 * F * j11 * j21 + G * j21 * j21;
        double Fbar = E * j11 * j12 + F * (j11 * j22 + j12 * j21) + G * j21 * j22;
        double Gbar = E * j12 * j12 + 2 * F * j12 * j22 + G * j22 * j22;
        CHECK(eval(pulled.E, p, g.env) == doctest::Approx(Ebar).epsilon(1e-7));
        CHECK(eval(pulled.F, p, g.env) == doctest::Approx(Fbar).epsilon(2e-7));
        CHECK(eval(pulled.G, p, g.env) == doctest::Approx(Gbar).epsilon(1e-7));
    }
}

TEST_CASE("scalar curvature is invariant under coordinate changes") {
    Metric2 g = koenigs_metric();
    Expr R = scalar_curvature(g);

    const CoordinateMap maps[] = {
        {Expr::x() + 0.3 * Expr::pow_int(Expr::y(), 2), Expr::y() + 0.2 * Expr::pow_int(Expr::x(), 2)},
        {0.8 * Expr::x() + 0.1 * Expr::y(), Expr::y() - 0.2 * Expr::x()},
        {Expr::x() + 0.1 * Expr::exp(Expr::y()), Expr::y() + 0.2 * Expr::atan(Expr::x())},
    };
    Domain nd{-0.4, 0.4, -0.4, 0.4, {}};
    for (const auto& map : maps) {
        Metric2 pulled = pullback(g, map, nd);
        Expr Rbar = scalar_curvature(pulled);
        for (const auto& p : sample_points(nd, g.env, 12)) {
            Point q{eval(map.x_of, p, g.env), eval(map.y_of, p, g.env)};
            double expect = eval(R, q, g.env);
            double got = eval(Rbar, p, g.env);
            CHECK(std::abs(got - expect) <= 1e-7 * (1.0 + std::abs(expect)));
        }
    }
}

TEST_CASE("degenerate metrics are rejected") {
    Metric2 g = flat_metric();
    g.E = Expr::constant(0.0);
    CHECK_THROWS_AS(validate_nondegenerate(g), DegenerateMetricError);
}

TEST_CASE("metric spec files") {
    std::istringstream in(R"(# test metric
E = eps1*exp((b+2)*x)
G = eps2*exp(b*x)
param b = 3
param eps1 = 1
param eps2 = 1
domain = 0.25 2.75 -1 1
)");
    Metric2 g = parse_metric_spec(in);
    CHECK(eval(g.E, 0.5, 0.0, g.env) == doctest::Approx(std::exp(2.5)).epsilon(1e-14));
    CHECK(eval(g.F, 0.5, 0.0, g.env) == 0.0);
    CHECK(g.domain.x0 == 0.25);

    std::istringstream bad("E = x\ndomain = 0 1 0 1\n");
    CHECK_THROWS_AS(parse_metric_spec(bad), ParseError);  // missing G

    std::istringstream excl("E = 1\nG = 1\nexclude = x-1\ndomain = 0 2 0 1\n");
    Metric2 h = parse_metric_spec(excl);
    CHECK(h.domain.excludes.size() == 1);
}

TEST_SUITE_END();
