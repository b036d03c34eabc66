#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "projgeo/expr.hpp"

using namespace projgeo;

namespace {

// Central finite difference, the independent oracle for diff().
double fd_x(const Expr& e, double x, double y, const ParamEnv& env, double h = 1e-5) {
    return (eval(e, x + h, y, env) - eval(e, x - h, y, env)) / (2.0 * h);
}

double fd_y(const Expr& e, double x, double y, const ParamEnv& env, double h = 1e-5) {
    return (eval(e, x, y + h, env) - eval(e, x, y - h, env)) / (2.0 * h);
}

// Random expression generator for the property tests. Generated trees are
// kept within a domain-safe grammar subset: denominators and ln/ root
// arguments are built positive.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(unsigned seed) : rng(seed) {}

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    }
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    Expr positive_atom() {
        switch (pick(3)) {
            case 0: return Expr::constant(uniform(0.5, 3.0));
            case 1: return 2.0 + Expr::pow_int(Expr::x(), 2);
            default: return 1.5 + Expr::pow_int(Expr::y(), 2);
        }
    }

    Expr node(int depth) {
        if (depth <= 0) {
            switch (pick(4)) {
                case 0: return Expr::x();
                case 1: return Expr::y();
                case 2: return Expr::constant(uniform(-3.0, 3.0));
                default: return Expr::parameter("k");
            }
        }
        switch (pick(9)) {
            case 0: return node(depth - 1) + node(depth - 1);
            case 1: return node(depth - 1) - node(depth - 1);
            case 2: return node(depth - 1) * node(depth - 1);
            case 3: return Expr::div(node(depth - 1), positive_atom());
            case 4: return Expr::pow_int(node(depth - 1), 1 + pick(3));
            case 5: return Expr::pow_rat(positive_atom(), 1 + pick(3), 2 + pick(2));
            case 6: return Expr::exp(Expr::constant(uniform(-1.0, 1.0)) * node(depth - 1));
            case 7: return Expr::ln(positive_atom());
            default: return Expr::atan(node(depth - 1));
        }
    }
};

}  // namespace

TEST_SUITE_BEGIN("expr");

TEST_CASE("parse atomic tokens") {
    Expr e = parse_expr("x");
    CHECK(eval(e, 2.0, 5.0) == 2.0);
    CHECK(eval(parse_expr("y"), 2.0, 5.0) == 5.0);
    CHECK(eval(parse_expr("3.5"), 0, 0) == 3.5);
}

TEST_CASE("parse catalog-style expression") {
    Expr e = parse_expr("eps1*exp((b+2)*x)");
    ParamEnv env{{"eps1", 1.0}, {"b", 3.0}};
    CHECK(eval(e, 0.3, 0.0, env) == doctest::Approx(std::exp(5.0 * 0.3)).epsilon(1e-14));
    ParamEnv env2{{"eps1", -1.0}, {"b", -1.0}};
    CHECK(eval(e, 0.7, 0.0, env2) == doctest::Approx(-std::exp(0.7)).epsilon(1e-14));
}

TEST_CASE("syntax error carries byte offset") {
    CHECK_THROWS_AS(parse_expr("1/(x"), ParseError);
    try {
        parse_expr("1/(x");
    } catch (const ParseError& err) {
        CHECK(err.offset() == 4);
    }
    CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr("x +"), ParseError);
    CHECK_THROWS_AS(parse_expr(""), ParseError);
    CHECK_THROWS_AS(parse_expr("x^b"), ParseError);
}

TEST_CASE("eval errors") {
    CHECK_THROWS_AS(eval(parse_expr("1/x"), 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(eval(parse_expr("ln(x)"), -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(eval(parse_expr("b*x"), 1.0, 0.0), DomainError);  // unbound parameter
    CHECK_THROWS_AS(eval(parse_expr("x^(1/2)"), -1.0, 0.0), DomainError);
    // Odd roots of negative bases are real.
    CHECK(eval(parse_expr("x^(1/3)"), -8.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(eval(parse_expr("x^(2/3)"), -8.0, 0.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(eval(parse_expr("x^(-2/3)"), -8.0, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("basic evaluation") {
    CHECK(eval(parse_expr("x+y"), 1.0, 2.0) == 3.0);
    CHECK(eval(parse_expr("exp((b+2)*x)"), 0.0, 5.0, {{"b", 3.0}}) == 1.0);
    CHECK(eval(parse_expr("atan(x)"), 1.0, 0.0) == doctest::Approx(std::atan(1.0)));
    CHECK(eval(parse_expr("2*x^3"), 2.0, 0.0) == 16.0);
    CHECK(eval(parse_expr("x^-2"), 2.0, 0.0) == 0.25);
}

TEST_CASE("diff basics") {
    Expr e = parse_expr("exp(b*x)");
    ParamEnv env{{"b", 3.0}};
    Expr dx = diff(e, Coord::X);
    CHECK(eval(dx, 0.4, 0.0, env) ==
          doctest::Approx(3.0 * std::exp(3.0 * 0.4)).epsilon(1e-13));
    Expr dy = diff(e, Coord::Y);
    CHECK(eval(dy, 0.4, 0.0, env) == 0.0);
}

TEST_CASE("diff against finite difference, pinned example") {
    Expr e = parse_expr("4*x^2+y^2+1");
    Expr dx = diff(e, Coord::X);
    CHECK(eval(dx, 1.0, 2.0) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(fd_x(e, 1.0, 2.0, {}) == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("derivative property: 1000 random expressions vs finite differences") {
    Gen gen(12021);
    ParamEnv env{{"k", 0.75}};
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        Expr e = gen.node(1 + gen.pick(6));
        Expr dx = diff(e, Coord::X);
        Expr dy = diff(e, Coord::Y);
        double x = gen.uniform(-1.5, 1.5);
        double y = gen.uniform(-1.5, 1.5);
        double v_sym_x, v_sym_y, v_fd_x, v_fd_y;
        try {
            v_sym_x = eval(dx, x, y, env);
            v_sym_y = eval(dy, x, y, env);
            v_fd_x = fd_x(e, x, y, env);
            v_fd_y = fd_y(e, x, y, env);
        } catch (const DomainError&) {
            continue;  // random point fell outside the tree's real domain
        }
        if (!std::isfinite(v_sym_x) || !std::isfinite(v_fd_x) || !std::isfinite(v_sym_y) ||
            !std::isfinite(v_fd_y))
            continue;
        // Scale-aware bound; the FD truncation error grows with the value.
        CHECK(std::abs(v_sym_x - v_fd_x) <= 1e-5 * (1.0 + std::abs(v_sym_x)));
        CHECK(std::abs(v_sym_y - v_fd_y) <= 1e-5 * (1.0 + std::abs(v_sym_y)));
        ++checked;
    }
    CHECK(checked > 800);
}

TEST_CASE("print/parse round trip preserves values") {
    Gen gen(777);
    ParamEnv env{{"k", -1.25}};
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        Expr e = gen.node(1 + gen.pick(6));
        Expr back = parse_expr(to_string(e));
        for (int j = 0; j < 4; ++j) {
            double x = gen.uniform(-1.5, 1.5);
            double y = gen.uniform(-1.5, 1.5);
            double a, b;
            try {
                a = eval(e, x, y, env);
                b = eval(back, x, y, env);
            } catch (const DomainError&) {
                continue;
            }
            if (!std::isfinite(a)) continue;
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("simplify examples") {
    CHECK(to_string(simplify(parse_expr("0*exp(x)+y"))) == "y");
    CHECK(to_string(simplify(parse_expr("(b+2)-b-2"))) == "0");
    Expr e = simplify(parse_expr("exp(x)*exp(x)"));
    double v = eval(e, 0.3, 0.0);
    CHECK(v == doctest::Approx(std::exp(0.6)).epsilon(1e-14));
    // one of the two canonical forms
    std::string s = to_string(e);
    CHECK((s == "exp(x)^2" || s == "exp(2*x)"));
}

TEST_CASE("simplify preserves values on random expressions") {
    Gen gen(2025);
    ParamEnv env{{"k", 0.4}};
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        Expr e = gen.node(1 + gen.pick(6));
        Expr s = simplify(e);
        for (int j = 0; j < 16; ++j) {
            double x = gen.uniform(-1.5, 1.5);
            double y = gen.uniform(-1.5, 1.5);
            double a, b;
            try {
                a = eval(e, x, y, env);
                b = eval(s, x, y, env);
            } catch (const DomainError&) {
                continue;
            }
            if (!std::isfinite(a)) continue;
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
            ++checked;
        }
    }
    CHECK(checked > 2000);
}

TEST_CASE("substitute") {
    Expr e = parse_expr("b*x + c*y");
    Expr r = substitute_params(e, {{"b", 2.0}});
    CHECK(free_parameters(r) == std::vector<std::string>{"c"});
    CHECK(eval(r, 1.0, 1.0, {{"c", 5.0}}) == 7.0);

    Expr g = substitute_coords(parse_expr("x^2 + y"), parse_expr("2*y"), parse_expr("x+1"));
    // x -> 2y, y -> x+1 simultaneously
    CHECK(eval(g, 3.0, 2.0) == doctest::Approx(16.0 + 4.0).epsilon(1e-14));
}

TEST_SUITE_END();
