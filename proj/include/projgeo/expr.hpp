#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "projgeo/errors.hpp"

namespace projgeo {

enum class Coord { X, Y };

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Bindings for the named real parameters appearing in expressions.
using ParamEnv = std::map<std::string, double>;

namespace detail {
struct Node;
}

// Immutable symbolic expression in the coordinates x,y and named real
// parameters. Construction goes through the static factories or the
// arithmetic operators below; evaluation and differentiation are pure,
// so Exprs are safe to share across threads.
class Expr {
public:
    Expr();  // the constant 0

    static Expr constant(double v);
    static Expr coordinate(Coord c);
    static Expr x();
    static Expr y();
    static Expr parameter(std::string name);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr neg(Expr u);
    static Expr div(Expr num, Expr den);
    static Expr pow_int(Expr base, long n);
    // Real rational power p/q. For negative bases only odd q is defined
    // (real root); q is normalized positive and p/q reduced.
    static Expr pow_rat(Expr base, long p, long q);
    static Expr exp(Expr u);
    static Expr ln(Expr u);
    static Expr atan(Expr u);

    const detail::Node& node() const { return *node_; }

private:
    explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const detail::Node> node_;
    friend struct detail::Node;
    friend Expr make_expr(std::shared_ptr<const detail::Node>);
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(double a, Expr b);
Expr operator+(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator/(double a, Expr b);
Expr operator/(Expr a, double b);

// IEEE-double evaluation at the point (x,y). Every Parameter node must be
// bound in `env`; throws DomainError otherwise and on domain violations.
double eval(const Expr& e, double x, double y, const ParamEnv& env = {});
double eval(const Expr& e, Point p, const ParamEnv& env = {});

// Exact symbolic partial derivative.
Expr diff(const Expr& e, Coord c);

// Value-preserving cleanup: constant folding, 0/1 absorption, flattening of
// nested sums/products, collection of like terms and integer powers. Not a
// general canonicalizer.
Expr simplify(const Expr& e);

// Printer; output re-parses to an expression with the same values.
std::string to_string(const Expr& e);

// Recursive-descent parser for the expression grammar:
//   expr     := ['+'|'-'] term (('+'|'-') term)*
//   term     := factor (('*'|'/') factor)*
//   factor   := atom ('^' exponent)?
//   atom     := number | ident | '(' expr ')' | func '(' expr ')'
//   func     := 'exp' | 'ln' | 'atan'
//   exponent := integer | '(' integer ('/' integer)? ')'
// Identifiers x,y are coordinates; every other identifier is a parameter.
Expr parse_expr(std::string_view text);

// Replace parameters bound in `env` by constants (unbound ones are kept).
Expr substitute_params(const Expr& e, const ParamEnv& env);

// Replace the coordinates by expressions (simultaneous substitution).
Expr substitute_coords(const Expr& e, const Expr& x_repl, const Expr& y_repl);

bool depends_on(const Expr& e, Coord c);
std::vector<std::string> free_parameters(const Expr& e);

// Probabilistic zero test: |e| <= tol at every supplied sample point.
bool numerically_zero(const Expr& e, const std::vector<Point>& samples,
                      const ParamEnv& env, double tol = 1e-10);

}  // namespace projgeo
