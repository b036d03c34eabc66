#include "projgeo/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <utility>

namespace projgeo {

namespace detail {

enum class Kind {
    Constant,
    Coordinate,
    Parameter,
    Neg,
    Add,
    Mul,
    Div,
    PowInt,
    PowRat,
    Exp,
    Ln,
    Atan,
};

struct Node {
    Kind kind;
    double value = 0.0;    // Constant
    Coord coord = Coord::X;  // Coordinate
    std::string name;      // Parameter
    long p = 0;            // PowInt / PowRat numerator
    long q = 1;            // PowRat denominator (> 0)
    std::vector<Expr> args;
};

}  // namespace detail

using detail::Kind;
using detail::Node;

namespace {

std::shared_ptr<Node> new_node(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

bool is_constant(const Expr& e, double v) {
    return e.node().kind == Kind::Constant && e.node().value == v;
}

bool is_kind(const Expr& e, Kind k) { return e.node().kind == k; }

double const_value(const Expr& e) { return e.node().value; }

}  // namespace

Expr make_expr(std::shared_ptr<const Node> n) { return Expr(std::move(n)); }

Expr::Expr() : node_(nullptr) {
    static const auto zero = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Constant;
        n->value = 0.0;
        return n;
    }();
    node_ = zero;
}

Expr Expr::constant(double v) {
    auto n = new_node(Kind::Constant);
    n->value = v;
    return make_expr(std::move(n));
}

Expr Expr::coordinate(Coord c) {
    auto n = new_node(Kind::Coordinate);
    n->coord = c;
    return make_expr(std::move(n));
}

Expr Expr::x() { return coordinate(Coord::X); }
Expr Expr::y() { return coordinate(Coord::Y); }

Expr Expr::parameter(std::string name) {
    auto n = new_node(Kind::Parameter);
    n->name = std::move(name);
    return make_expr(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms) {
    if (terms.empty()) return constant(0.0);
    if (terms.size() == 1) return terms.front();
    auto n = new_node(Kind::Add);
    n->args = std::move(terms);
    return make_expr(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
    if (factors.empty()) return constant(1.0);
    if (factors.size() == 1) return factors.front();
    auto n = new_node(Kind::Mul);
    n->args = std::move(factors);
    return make_expr(std::move(n));
}

Expr Expr::neg(Expr u) {
    auto n = new_node(Kind::Neg);
    n->args = {std::move(u)};
    return make_expr(std::move(n));
}

Expr Expr::div(Expr num, Expr den) {
    auto n = new_node(Kind::Div);
    n->args = {std::move(num), std::move(den)};
    return make_expr(std::move(n));
}

Expr Expr::pow_int(Expr base, long p) {
    auto n = new_node(Kind::PowInt);
    n->args = {std::move(base)};
    n->p = p;
    return make_expr(std::move(n));
}

Expr Expr::pow_rat(Expr base, long p, long q) {
    if (q == 0) throw Error("pow_rat: zero denominator");
    if (q < 0) {
        p = -p;
        q = -q;
    }
    long g = std::gcd(p < 0 ? -p : p, q);
    if (g > 1) {
        p /= g;
        q /= g;
    }
    if (q == 1) return pow_int(std::move(base), p);
    auto n = new_node(Kind::PowRat);
    n->args = {std::move(base)};
    n->p = p;
    n->q = q;
    return make_expr(std::move(n));
}

Expr Expr::exp(Expr u) {
    auto n = new_node(Kind::Exp);
    n->args = {std::move(u)};
    return make_expr(std::move(n));
}

Expr Expr::ln(Expr u) {
    auto n = new_node(Kind::Ln);
    n->args = {std::move(u)};
    return make_expr(std::move(n));
}

Expr Expr::atan(Expr u) {
    auto n = new_node(Kind::Atan);
    n->args = {std::move(u)};
    return make_expr(std::move(n));
}

Expr operator+(Expr a, Expr b) { return Expr::add({std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return Expr::add({std::move(a), Expr::neg(std::move(b))}); }
Expr operator*(Expr a, Expr b) { return Expr::mul({std::move(a), std::move(b)}); }
Expr operator/(Expr a, Expr b) { return Expr::div(std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::neg(std::move(a)); }
Expr operator+(double a, Expr b) { return Expr::constant(a) + std::move(b); }
Expr operator+(Expr a, double b) { return std::move(a) + Expr::constant(b); }
Expr operator-(double a, Expr b) { return Expr::constant(a) - std::move(b); }
Expr operator-(Expr a, double b) { return std::move(a) - Expr::constant(b); }
Expr operator*(double a, Expr b) { return Expr::constant(a) * std::move(b); }
Expr operator*(Expr a, double b) { return std::move(a) * Expr::constant(b); }
Expr operator/(double a, Expr b) { return Expr::constant(a) / std::move(b); }
Expr operator/(Expr a, double b) { return std::move(a) / Expr::constant(b); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double pow_rat_value(double b, long p, long q) {
    if (b > 0.0) return std::pow(b, static_cast<double>(p) / static_cast<double>(q));
    if (b == 0.0) {
        if (p > 0) return 0.0;
        if (p == 0) return 1.0;
        throw DomainError("zero raised to a negative rational power");
    }
    if (q % 2 == 0) throw DomainError("even root of a negative value");
    double root = -std::pow(-b, 1.0 / static_cast<double>(q));
    return std::pow(root, static_cast<double>(p));
}

double eval_node(const Node& n, double x, double y, const ParamEnv& env) {
    switch (n.kind) {
        case Kind::Constant:
            return n.value;
        case Kind::Coordinate:
            return n.coord == Coord::X ? x : y;
        case Kind::Parameter: {
            auto it = env.find(n.name);
            if (it == env.end()) throw DomainError("unbound parameter '" + n.name + "'");
            return it->second;
        }
        case Kind::Neg:
            return -eval_node(n.args[0].node(), x, y, env);
        case Kind::Add: {
            double s = 0.0;
            for (const auto& a : n.args) s += eval_node(a.node(), x, y, env);
            return s;
        }
        case Kind::Mul: {
            double s = 1.0;
            for (const auto& a : n.args) s *= eval_node(a.node(), x, y, env);
            return s;
        }
        case Kind::Div: {
            double den = eval_node(n.args[1].node(), x, y, env);
            if (den == 0.0) throw DomainError("division by zero");
            return eval_node(n.args[0].node(), x, y, env) / den;
        }
        case Kind::PowInt: {
            double b = eval_node(n.args[0].node(), x, y, env);
            if (n.p == 0) return 1.0;
            if (b == 0.0 && n.p < 0) throw DomainError("zero raised to a negative power");
            return std::pow(b, static_cast<double>(n.p));
        }
        case Kind::PowRat:
            return pow_rat_value(eval_node(n.args[0].node(), x, y, env), n.p, n.q);
        case Kind::Exp:
            return std::exp(eval_node(n.args[0].node(), x, y, env));
        case Kind::Ln: {
            double u = eval_node(n.args[0].node(), x, y, env);
            if (u <= 0.0) throw DomainError("ln of a nonpositive value");
            return std::log(u);
        }
        case Kind::Atan:
            return std::atan(eval_node(n.args[0].node(), x, y, env));
    }
    throw Error("eval: corrupt node");
}

}  // namespace

double eval(const Expr& e, double x, double y, const ParamEnv& env) {
    return eval_node(e.node(), x, y, env);
}

double eval(const Expr& e, Point p, const ParamEnv& env) { return eval(e, p.x, p.y, env); }

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, Coord c) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::Constant:
        case Kind::Parameter:
            return Expr::constant(0.0);
        case Kind::Coordinate:
            return Expr::constant(n.coord == c ? 1.0 : 0.0);
        case Kind::Neg:
            return simplify(Expr::neg(diff(n.args[0], c)));
        case Kind::Add: {
            std::vector<Expr> terms;
            terms.reserve(n.args.size());
            for (const auto& a : n.args) terms.push_back(diff(a, c));
            return simplify(Expr::add(std::move(terms)));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                std::vector<Expr> factors = n.args;
                factors[i] = diff(n.args[i], c);
                terms.push_back(Expr::mul(std::move(factors)));
            }
            return simplify(Expr::add(std::move(terms)));
        }
        case Kind::Div: {
            const Expr& u = n.args[0];
            const Expr& v = n.args[1];
            Expr num = diff(u, c) * v - u * diff(v, c);
            return simplify(Expr::div(std::move(num), Expr::pow_int(v, 2)));
        }
        case Kind::PowInt: {
            if (n.p == 0) return Expr::constant(0.0);
            const Expr& b = n.args[0];
            Expr factor = Expr::constant(static_cast<double>(n.p)) *
                          Expr::pow_int(b, n.p - 1) * diff(b, c);
            return simplify(factor);
        }
        case Kind::PowRat: {
            const Expr& b = n.args[0];
            Expr factor = Expr::constant(static_cast<double>(n.p) / static_cast<double>(n.q)) *
                          Expr::pow_rat(b, n.p - n.q, n.q) * diff(b, c);
            return simplify(factor);
        }
        case Kind::Exp:
            return simplify(Expr::exp(n.args[0]) * diff(n.args[0], c));
        case Kind::Ln:
            return simplify(Expr::div(diff(n.args[0], c), n.args[0]));
        case Kind::Atan: {
            Expr den = 1.0 + Expr::pow_int(n.args[0], 2);
            return simplify(Expr::div(diff(n.args[0], c), std::move(den)));
        }
    }
    throw Error("diff: corrupt node");
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

// Splits a term into (constant coefficient, remaining factor).
std::pair<double, Expr> split_coeff(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == Kind::Constant) return {n.value, Expr::constant(1.0)};
    if (n.kind == Kind::Mul && !n.args.empty() && is_kind(n.args[0], Kind::Constant)) {
        std::vector<Expr> rest(n.args.begin() + 1, n.args.end());
        return {const_value(n.args[0]), Expr::mul(std::move(rest))};
    }
    return {1.0, e};
}

// Splits a factor into (base, integer exponent).
std::pair<Expr, long> split_power(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == Kind::PowInt) return {n.args[0], n.p};
    return {e, 1};
}

Expr simp(const Expr& e);

Expr simp_mul(std::vector<Expr> factors) {
    // Flatten, fold constants, then collect repeated bases into integer powers.
    std::vector<Expr> flat;
    double c = 1.0;
    for (auto& f : factors) {
        const Node& n = f.node();
        if (n.kind == Kind::Constant) {
            c *= n.value;
        } else if (n.kind == Kind::Mul) {
            for (const auto& a : n.args) {
                if (is_kind(a, Kind::Constant))
                    c *= const_value(a);
                else
                    flat.push_back(a);
            }
        } else {
            flat.push_back(std::move(f));
        }
    }
    if (c == 0.0) return Expr::constant(0.0);

    std::vector<std::pair<std::string, std::pair<Expr, long>>> grouped;
    for (const auto& f : flat) {
        auto [base, exp] = split_power(f);
        std::string key = to_string(base);
        bool found = false;
        for (auto& g : grouped) {
            if (g.first == key) {
                g.second.second += exp;
                found = true;
                break;
            }
        }
        if (!found) grouped.push_back({std::move(key), {base, exp}});
    }

    std::vector<Expr> out;
    if (c != 1.0) out.push_back(Expr::constant(c));
    for (auto& g : grouped) {
        auto& [base, exp] = g.second;
        if (exp == 0) continue;
        if (exp == 1)
            out.push_back(base);
        else
            out.push_back(Expr::pow_int(base, exp));
    }
    if (out.empty()) return Expr::constant(c == 1.0 ? 1.0 : c);
    if (out.size() == 1) return out.front();
    return Expr::mul(std::move(out));
}

Expr simp_add(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    double c = 0.0;
    for (auto& t : terms) {
        const Node& n = t.node();
        if (n.kind == Kind::Constant) {
            c += n.value;
        } else if (n.kind == Kind::Add) {
            for (const auto& a : n.args) {
                if (is_kind(a, Kind::Constant))
                    c += const_value(a);
                else
                    flat.push_back(a);
            }
        } else {
            flat.push_back(std::move(t));
        }
    }

    std::vector<std::pair<std::string, std::pair<double, Expr>>> grouped;
    for (const auto& t : flat) {
        auto [coeff, core] = split_coeff(t);
        std::string key = to_string(core);
        bool found = false;
        for (auto& g : grouped) {
            if (g.first == key) {
                g.second.first += coeff;
                found = true;
                break;
            }
        }
        if (!found) grouped.push_back({std::move(key), {coeff, core}});
    }

    std::vector<Expr> out;
    for (auto& g : grouped) {
        auto& [coeff, core] = g.second;
        if (coeff == 0.0) continue;
        if (coeff == 1.0)
            out.push_back(core);
        else
            out.push_back(simp_mul({Expr::constant(coeff), core}));
    }
    if (c != 0.0) out.push_back(Expr::constant(c));
    if (out.empty()) return Expr::constant(0.0);
    if (out.size() == 1) return out.front();
    return Expr::add(std::move(out));
}

Expr simp(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::Constant:
        case Kind::Coordinate:
        case Kind::Parameter:
            return e;
        case Kind::Neg:
            return simp_mul({Expr::constant(-1.0), simp(n.args[0])});
        case Kind::Add: {
            std::vector<Expr> terms;
            terms.reserve(n.args.size());
            for (const auto& a : n.args) terms.push_back(simp(a));
            return simp_add(std::move(terms));
        }
        case Kind::Mul: {
            std::vector<Expr> factors;
            factors.reserve(n.args.size());
            for (const auto& a : n.args) factors.push_back(simp(a));
            return simp_mul(std::move(factors));
        }
        case Kind::Div: {
            Expr u = simp(n.args[0]);
            Expr v = simp(n.args[1]);
            if (is_constant(u, 0.0)) return Expr::constant(0.0);
            if (is_kind(v, Kind::Constant)) {
                double d = const_value(v);
                if (d != 0.0) {
                    if (is_kind(u, Kind::Constant)) return Expr::constant(const_value(u) / d);
                    return simp_mul({Expr::constant(1.0 / d), std::move(u)});
                }
            }
            return Expr::div(std::move(u), std::move(v));
        }
        case Kind::PowInt: {
            Expr b = simp(n.args[0]);
            if (n.p == 0) return Expr::constant(1.0);
            if (n.p == 1) return b;
            const Node& bn = b.node();
            if (bn.kind == Kind::Constant && (bn.value != 0.0 || n.p > 0))
                return Expr::constant(std::pow(bn.value, static_cast<double>(n.p)));
            if (bn.kind == Kind::PowInt) return simp(Expr::pow_int(bn.args[0], bn.p * n.p));
            if (bn.kind == Kind::Exp)
                return Expr::exp(simp_mul({Expr::constant(static_cast<double>(n.p)), bn.args[0]}));
            return Expr::pow_int(std::move(b), n.p);
        }
        case Kind::PowRat: {
            Expr b = simp(n.args[0]);
            const Node& bn = b.node();
            if (bn.kind == Kind::Constant) {
                double v = bn.value;
                bool valid = v > 0.0 || (v == 0.0 && n.p > 0) || (v < 0.0 && n.q % 2 == 1);
                if (valid) return Expr::constant(pow_rat_value(v, n.p, n.q));
            }
            return Expr::pow_rat(std::move(b), n.p, n.q);
        }
        case Kind::Exp: {
            Expr u = simp(n.args[0]);
            if (is_constant(u, 0.0)) return Expr::constant(1.0);
            if (is_kind(u, Kind::Constant)) return Expr::constant(std::exp(const_value(u)));
            return Expr::exp(std::move(u));
        }
        case Kind::Ln: {
            Expr u = simp(n.args[0]);
            if (is_kind(u, Kind::Constant) && const_value(u) > 0.0)
                return Expr::constant(std::log(const_value(u)));
            if (is_kind(u, Kind::Exp)) return u.node().args[0];
            return Expr::ln(std::move(u));
        }
        case Kind::Atan: {
            Expr u = simp(n.args[0]);
            if (is_kind(u, Kind::Constant)) return Expr::constant(std::atan(const_value(u)));
            return Expr::atan(std::move(u));
        }
    }
    throw Error("simplify: corrupt node");
}

}  // namespace

Expr simplify(const Expr& e) { return simp(e); }

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: 0 sum, 1 product, 2 power, 3 atom.
std::string repr_double(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string print_node(const Node& n, int parent_prec);

std::string print_expr(const Expr& e, int parent_prec) {
    return print_node(e.node(), parent_prec);
}

std::string wrap(std::string s) { return "(" + std::move(s) + ")"; }

std::string print_node(const Node& n, int parent_prec) {
    switch (n.kind) {
        case Kind::Constant: {
            if (n.value < 0.0 || std::signbit(n.value)) {
                std::string s = "-" + repr_double(-n.value);
                return parent_prec > 0 ? wrap(std::move(s)) : s;
            }
            return repr_double(n.value);
        }
        case Kind::Coordinate:
            return n.coord == Coord::X ? "x" : "y";
        case Kind::Parameter:
            return n.name;
        case Kind::Neg: {
            std::string s = "-" + print_expr(n.args[0], 1);
            return parent_prec > 0 ? wrap(std::move(s)) : s;
        }
        case Kind::Add: {
            std::string s;
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                const Node& t = n.args[i].node();
                if (i == 0) {
                    // A leading minus is legal at the head of an expression.
                    s += print_node(t, 0);
                    continue;
                }
                // Render negated terms as subtraction.
                if (t.kind == Kind::Neg) {
                    s += " - " + print_expr(t.args[0], 1);
                } else if (t.kind == Kind::Constant && t.value < 0.0) {
                    s += " - " + repr_double(-t.value);
                } else if (t.kind == Kind::Mul && !t.args.empty() &&
                           is_kind(t.args[0], Kind::Constant) && const_value(t.args[0]) < 0.0) {
                    std::vector<Expr> rest(t.args.begin() + 1, t.args.end());
                    Expr pos = Expr::mul(std::move(rest));
                    double c = -const_value(t.args[0]);
                    if (c == 1.0)
                        s += " - " + print_expr(pos, 1);
                    else
                        s += " - " + repr_double(c) + "*" + print_expr(pos, 1);
                } else {
                    s += " + " + print_node(t, 1);
                }
            }
            return parent_prec > 0 ? wrap(std::move(s)) : s;
        }
        case Kind::Mul: {
            std::string s;
            bool negated = false;
            std::size_t start = 0;
            if (!n.args.empty() && is_kind(n.args[0], Kind::Constant) &&
                const_value(n.args[0]) == -1.0 && n.args.size() > 1) {
                negated = true;
                start = 1;
            }
            for (std::size_t i = start; i < n.args.size(); ++i) {
                if (i > start) s += "*";
                s += print_expr(n.args[i], 2);
            }
            if (negated) {
                s = "-" + s;
                return parent_prec > 0 ? wrap(std::move(s)) : s;
            }
            return parent_prec > 1 ? wrap(std::move(s)) : s;
        }
        case Kind::Div: {
            std::string s = print_expr(n.args[0], 1) + "/" + print_expr(n.args[1], 2);
            return parent_prec > 1 ? wrap(std::move(s)) : s;
        }
        case Kind::PowInt: {
            std::string base = print_expr(n.args[0], 3);
            std::string s = base + "^" + std::to_string(n.p);
            return parent_prec > 2 ? wrap(std::move(s)) : s;
        }
        case Kind::PowRat: {
            std::string base = print_expr(n.args[0], 3);
            std::string s =
                base + "^(" + std::to_string(n.p) + "/" + std::to_string(n.q) + ")";
            return parent_prec > 2 ? wrap(std::move(s)) : s;
        }
        case Kind::Exp:
            return "exp(" + print_expr(n.args[0], 0) + ")";
        case Kind::Ln:
            return "ln(" + print_expr(n.args[0], 0) + ")";
        case Kind::Atan:
            return "atan(" + print_expr(n.args[0], 0) + ")";
    }
    throw Error("to_string: corrupt node");
}

}  // namespace

std::string to_string(const Expr& e) { return print_node(e.node(), 0); }

// ---------------------------------------------------------------------------
// Substitution and queries

Expr substitute_params(const Expr& e, const ParamEnv& env) {
    const Node& n = e.node();
    if (n.kind == Kind::Parameter) {
        auto it = env.find(n.name);
        return it == env.end() ? e : Expr::constant(it->second);
    }
    if (n.args.empty()) return e;
    auto m = std::make_shared<Node>(n);
    for (auto& a : m->args) a = substitute_params(a, env);
    return make_expr(std::move(m));
}

Expr substitute_coords(const Expr& e, const Expr& x_repl, const Expr& y_repl) {
    const Node& n = e.node();
    if (n.kind == Kind::Coordinate) return n.coord == Coord::X ? x_repl : y_repl;
    if (n.args.empty()) return e;
    auto m = std::make_shared<Node>(n);
    for (auto& a : m->args) a = substitute_coords(a, x_repl, y_repl);
    return make_expr(std::move(m));
}

bool depends_on(const Expr& e, Coord c) {
    const Node& n = e.node();
    if (n.kind == Kind::Coordinate) return n.coord == c;
    for (const auto& a : n.args)
        if (depends_on(a, c)) return true;
    return false;
}

namespace {
void collect_params(const Node& n, std::set<std::string>& out) {
    if (n.kind == Kind::Parameter) out.insert(n.name);
    for (const auto& a : n.args) collect_params(a.node(), out);
}
}  // namespace

std::vector<std::string> free_parameters(const Expr& e) {
    std::set<std::string> s;
    collect_params(e.node(), s);
    return {s.begin(), s.end()};
}

bool numerically_zero(const Expr& e, const std::vector<Point>& samples, const ParamEnv& env,
                      double tol) {
    for (const auto& p : samples) {
        if (std::abs(eval(e, p, env)) > tol) return false;
    }
    return true;
}

}  // namespace projgeo
