#include "projgeo/metric.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace projgeo {

namespace {

double halton(unsigned long i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

struct Inverse {
    Expr i11, i12, i22;  // entries of g^{-1}
};

Inverse inverse_metric(const Metric2& g) {
    Expr det = det_expr(g);
    return {Expr::div(g.G, det), Expr::div(Expr::neg(g.F), det), Expr::div(g.E, det)};
}

// sqrt(|d|) as (d^2)^(1/4): real and smooth away from d = 0, with the correct
// derivative, for either sign of d.
Expr sqrt_abs(const Expr& d) { return Expr::pow_rat(Expr::pow_int(d, 2), 1, 4); }

}  // namespace

double locus_distance(const Expr& f, Point p, const ParamEnv& env) {
    double v = eval(f, p, env);
    double gx = eval(diff(f, Coord::X), p, env);
    double gy = eval(diff(f, Coord::Y), p, env);
    return std::abs(v) / (std::hypot(gx, gy) + 1e-12);
}

bool point_in_domain(const Domain& domain, const ParamEnv& env, Point p, double min_distance) {
    if (p.x < domain.x0 || p.x > domain.x1 || p.y < domain.y0 || p.y > domain.y1) return false;
    for (const auto& f : domain.excludes) {
        if (locus_distance(f, p, env) < min_distance) return false;
    }
    return true;
}

std::vector<Point> sample_points(const Domain& domain, const ParamEnv& env, int n,
                                 double min_distance) {
    std::vector<Point> pts;
    pts.reserve(n);
    // Cache locus gradients once instead of re-deriving per point.
    std::vector<std::pair<Expr, std::pair<Expr, Expr>>> loci;
    for (const auto& f : domain.excludes)
        loci.push_back({f, {diff(f, Coord::X), diff(f, Coord::Y)}});

    unsigned long budget = 200ul * static_cast<unsigned long>(n) + 1000;
    for (unsigned long i = 1; pts.size() < static_cast<std::size_t>(n) && i < budget; ++i) {
        Point p{domain.x0 + (domain.x1 - domain.x0) * halton(i, 2),
                domain.y0 + (domain.y1 - domain.y0) * halton(i, 3)};
        bool ok = true;
        for (const auto& [f, grad] : loci) {
            double v = eval(f, p, env);
            double gx = eval(grad.first, p, env);
            double gy = eval(grad.second, p, env);
            if (std::abs(v) / (std::hypot(gx, gy) + 1e-12) < min_distance) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back(p);
    }
    if (pts.size() < static_cast<std::size_t>(n))
        throw DomainError("sampling domain is (almost) entirely excluded");
    return pts;
}

std::vector<Point> sample_points(const Metric2& g, int n) {
    return sample_points(g.domain, g.env, n);
}

Expr det_expr(const Metric2& g) {
    return simplify(g.E * g.G - Expr::pow_int(g.F, 2));
}

void validate_nondegenerate(const Metric2& g, int n_samples, double tol) {
    Expr det = det_expr(g);
    for (const auto& p : sample_points(g, n_samples)) {
        double d = eval(det, p, g.env);
        if (std::abs(d) <= tol) {
            std::ostringstream os;
            os << "degenerate metric: |det| = " << std::abs(d) << " at (" << p.x << ", " << p.y
               << ")";
            throw DegenerateMetricError(os.str());
        }
    }
}

ChristoffelField christoffel(const Metric2& g) {
    Inverse inv = inverse_metric(g);
    Expr Ex = diff(g.E, Coord::X), Ey = diff(g.E, Coord::Y);
    Expr Fx = diff(g.F, Coord::X), Fy = diff(g.F, Coord::Y);
    Expr Gx = diff(g.G, Coord::X), Gy = diff(g.G, Coord::Y);

    Expr half = Expr::constant(0.5);
    ChristoffelField c;
    c.x_xx = simplify(half * (inv.i11 * Ex + inv.i12 * (2.0 * Fx - Ey)));
    c.x_xy = simplify(half * (inv.i11 * Ey + inv.i12 * Gx));
    c.x_yy = simplify(half * (inv.i11 * (2.0 * Fy - Gx) + inv.i12 * Gy));
    c.y_xx = simplify(half * (inv.i12 * Ex + inv.i22 * (2.0 * Fx - Ey)));
    c.y_xy = simplify(half * (inv.i12 * Ey + inv.i22 * Gx));
    c.y_yy = simplify(half * (inv.i12 * (2.0 * Fy - Gx) + inv.i22 * Gy));
    return c;
}

double covariant_derivative_residual(const Metric2& g, const ChristoffelField& c,
                                     const std::vector<Point>& samples) {
    // gamma[i][j][k] = Gamma^i_{jk}, indices 0 = x, 1 = y.
    const Expr gamma[2][2][2] = {{{c.x_xx, c.x_xy}, {c.x_xy, c.x_yy}},
                                 {{c.y_xx, c.y_xy}, {c.y_xy, c.y_yy}}};
    const Expr comp[2][2] = {{g.E, g.F}, {g.F, g.G}};

    std::vector<Expr> residuals;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                Expr r = diff(comp[i][j], k == 0 ? Coord::X : Coord::Y);
                std::vector<Expr> terms{r};
                for (int m = 0; m < 2; ++m) {
                    terms.push_back(Expr::neg(gamma[m][j][k] * comp[i][m]));
                    terms.push_back(Expr::neg(gamma[m][i][k] * comp[m][j]));
                }
                residuals.push_back(simplify(Expr::add(std::move(terms))));
            }
        }
    }

    double worst = 0.0;
    for (const auto& r : residuals) {
        for (const auto& p : samples) worst = std::max(worst, std::abs(eval(r, p, g.env)));
    }
    return worst;
}

Expr scalar_curvature(const Metric2& g) {
    ChristoffelField c = christoffel(g);
    const Expr gamma[2][2][2] = {{{c.x_xx, c.x_xy}, {c.x_xy, c.x_yy}},
                                 {{c.y_xx, c.y_xy}, {c.y_xy, c.y_yy}}};
    Expr dgamma[2][2][2][2];  // d/dx_k of gamma[i][l][j]
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    dgamma[i][l][j][k] = diff(gamma[i][l][j], k == 0 ? Coord::X : Coord::Y);

    // Ricci tensor R_{jl} = R^i_{jil} with
    // R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
    //           + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}.
    Expr ricci[2][2];
    for (int j = 0; j < 2; ++j) {
        for (int l = 0; l < 2; ++l) {
            std::vector<Expr> terms;
            for (int i = 0; i < 2; ++i) {
                const int k = i;
                terms.push_back(dgamma[i][l][j][k]);
                terms.push_back(Expr::neg(dgamma[i][k][j][l]));
                for (int m = 0; m < 2; ++m) {
                    terms.push_back(gamma[i][k][m] * gamma[m][l][j]);
                    terms.push_back(Expr::neg(gamma[i][l][m] * gamma[m][k][j]));
                }
            }
            ricci[j][l] = simplify(Expr::add(std::move(terms)));
        }
    }

    Inverse inv = inverse_metric(g);
    const Expr ginv[2][2] = {{inv.i11, inv.i12}, {inv.i12, inv.i22}};
    std::vector<Expr> terms;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) terms.push_back(ginv[j][l] * ricci[j][l]);
    return simplify(Expr::add(std::move(terms)));
}

Expr grad_norm_sq(const Metric2& g, const Expr& f) {
    Inverse inv = inverse_metric(g);
    Expr fx = diff(f, Coord::X), fy = diff(f, Coord::Y);
    return simplify(inv.i11 * Expr::pow_int(fx, 2) + 2.0 * inv.i12 * fx * fy +
                    inv.i22 * Expr::pow_int(fy, 2));
}

Expr laplacian(const Metric2& g, const Expr& f) {
    Inverse inv = inverse_metric(g);
    Expr w = sqrt_abs(det_expr(g));
    Expr fx = diff(f, Coord::X), fy = diff(f, Coord::Y);
    Expr flux_x = simplify(w * (inv.i11 * fx + inv.i12 * fy));
    Expr flux_y = simplify(w * (inv.i12 * fx + inv.i22 * fy));
    Expr div = diff(flux_x, Coord::X) + diff(flux_y, Coord::Y);
    return simplify(Expr::div(std::move(div), w));
}

Metric2 pullback(const Metric2& g, const CoordinateMap& map, const Domain& new_domain) {
    Expr j11 = diff(map.x_of, Coord::X);  // d(x_old)/d(x_new)
    Expr j12 = diff(map.x_of, Coord::Y);
    Expr j21 = diff(map.y_of, Coord::X);
    Expr j22 = diff(map.y_of, Coord::Y);

    auto compose = [&](const Expr& e) { return substitute_coords(e, map.x_of, map.y_of); };
    Expr E = compose(g.E), F = compose(g.F), G = compose(g.G);

    Metric2 out;
    out.E = simplify(E * j11 * j11 + 2.0 * F * j11 * j21 + G * j21 * j21);
    out.F = simplify(E * j11 * j12 + F * (j11 * j22 + j12 * j21) + G * j21 * j22);
    out.G = simplify(E * j12 * j12 + 2.0 * F * j12 * j22 + G * j22 * j22);
    out.env = g.env;
    out.domain = new_domain;

    Expr jac = simplify(j11 * j22 - j12 * j21);
    for (const auto& p : sample_points(out.domain, out.env, 32)) {
        if (std::abs(eval(jac, p, out.env)) < 1e-12)
            throw DomainError("singular Jacobian at a sample point of the new domain");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spec files

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Metric2 parse_metric_spec(std::istream& in) {
    Metric2 g;
    bool have_E = false, have_G = false, have_domain = false;
    g.F = Expr::constant(0.0);

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;

        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("metric spec line " + std::to_string(lineno) + ": expected '='", 0);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "E") {
            g.E = parse_expr(value);
            have_E = true;
        } else if (key == "F") {
            g.F = parse_expr(value);
        } else if (key == "G") {
            g.G = parse_expr(value);
            have_G = true;
        } else if (key == "domain") {
            std::istringstream ss(value);
            if (!(ss >> g.domain.x0 >> g.domain.x1 >> g.domain.y0 >> g.domain.y1))
                throw ParseError("metric spec line " + std::to_string(lineno) +
                                     ": domain needs four numbers",
                                 0);
            have_domain = true;
        } else if (key == "exclude") {
            g.domain.excludes.push_back(parse_expr(value));
        } else if (key.rfind("param ", 0) == 0) {
            std::string name = trim(key.substr(6));
            if (name.empty())
                throw ParseError("metric spec line " + std::to_string(lineno) + ": empty param name",
                                 0);
            g.env[name] = std::stod(value);
        } else {
            throw ParseError("metric spec line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'",
                             0);
        }
    }
    if (!have_E || !have_G) throw ParseError("metric spec: E and G are required", 0);
    if (!have_domain) throw ParseError("metric spec: domain is required", 0);
    return g;
}

Metric2 load_metric_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open metric spec '" + path + "'");
    return parse_metric_spec(in);
}

}  // namespace projgeo
