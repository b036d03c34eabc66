#include "projgeo/projective.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace projgeo {

ProjectiveConnection projective_connection(const ChristoffelField& c, const ParamEnv& env,
                                           const Domain& domain) {
    ProjectiveConnection pc;
    pc.K0 = simplify(Expr::neg(c.y_xx));
    pc.K1 = simplify(c.x_xx - 2.0 * c.y_xy);
    pc.K2 = simplify(Expr::neg(c.y_yy - 2.0 * c.x_xy));
    pc.K3 = c.x_yy;
    pc.env = env;
    pc.domain = domain;
    return pc;
}

ProjectiveConnection projective_connection(const Metric2& g) {
    return projective_connection(christoffel(g), g.env, g.domain);
}

ResidualStats symmetry_residual(const ProjectiveConnection& pc, const VectorField& Z,
                                const std::vector<Point>& samples) {
    const Expr& K0 = pc.K0;
    const Expr& K1 = pc.K1;
    const Expr& K2 = pc.K2;
    const Expr& K3 = pc.K3;
    Expr K0x = diff(K0, Coord::X), K0y = diff(K0, Coord::Y);
    Expr K1x = diff(K1, Coord::X), K1y = diff(K1, Coord::Y);
    Expr K2x = diff(K2, Coord::X), K2y = diff(K2, Coord::Y);
    Expr K3x = diff(K3, Coord::X), K3y = diff(K3, Coord::Y);

    const Expr& Z1 = Z.Z1;
    const Expr& Z2 = Z.Z2;
    Expr Z1x = diff(Z1, Coord::X), Z1y = diff(Z1, Coord::Y);
    Expr Z2x = diff(Z2, Coord::X), Z2y = diff(Z2, Coord::Y);
    Expr Z1xx = diff(Z1x, Coord::X), Z1xy = diff(Z1x, Coord::Y), Z1yy = diff(Z1y, Coord::Y);
    Expr Z2xx = diff(Z2x, Coord::X), Z2xy = diff(Z2x, Coord::Y), Z2yy = diff(Z2y, Coord::Y);

    const Expr eqs[4] = {
        simplify(Z2xx - 2.0 * K0 * Z1x - K1 * Z2x + K0 * Z2y - K0x * Z1 - K0y * Z2),
        simplify(Expr::neg(Z1xx) + 2.0 * Z2xy - K1 * Z1x - 3.0 * K0 * Z1y - 2.0 * K2 * Z2x -
                 K1x * Z1 - K1y * Z2),
        simplify(-2.0 * Z1xy + Z2yy - 2.0 * K1 * Z1y - 3.0 * K3 * Z2x - K2 * Z2y - K2x * Z1 -
                 K2y * Z2),
        simplify(Expr::neg(Z1yy) + K3 * Z1x - K2 * Z1y - 2.0 * K3 * Z2y - K3x * Z1 - K3y * Z2),
    };

    ResidualStats stats;
    for (const auto& p : samples) {
        for (int i = 0; i < 4; ++i) {
            double v = std::abs(eval(eqs[i], p, pc.env));
            stats.per_equation[i] = std::max(stats.per_equation[i], v);
            if (v > stats.max_abs) {
                stats.max_abs = v;
                stats.argmax = p;
            }
        }
    }
    return stats;
}

LiouvilleInvariant liouville_invariants(const ProjectiveConnection& pc) {
    const Expr& K0 = pc.K0;
    const Expr& K1 = pc.K1;
    const Expr& K2 = pc.K2;
    const Expr& K3 = pc.K3;
    Expr K0x = diff(K0, Coord::X), K0y = diff(K0, Coord::Y);
    Expr K1y = diff(K1, Coord::Y);
    Expr K1xy = diff(diff(K1, Coord::X), Coord::Y);
    Expr K2x = diff(K2, Coord::X);
    Expr K2xx = diff(K2x, Coord::X);
    Expr K0yy = diff(K0y, Coord::Y);
    Expr K3x = diff(K3, Coord::X);
    Expr K2y = diff(K2, Coord::Y);
    Expr K2xy = diff(K2x, Coord::Y);
    Expr K1yy = diff(K1y, Coord::Y);
    Expr K3xx = diff(K3x, Coord::X);
    Expr K3y = diff(K3, Coord::Y);
    Expr K1x = diff(K1, Coord::X);

    LiouvilleInvariant li;
    li.L1 = simplify(2.0 * K1xy - K2xx - 3.0 * K0yy - 6.0 * K0 * K3x - 3.0 * K3 * K0x +
                     3.0 * K0 * K2y + 3.0 * K2 * K0y + K1 * K2x - 2.0 * K1 * K1y);
    li.L2 = simplify(2.0 * K2xy - K1yy - 3.0 * K3xx + 6.0 * K3 * K0y + 3.0 * K0 * K3y -
                     3.0 * K3 * K1x - 3.0 * K1 * K3x - K2 * K1y + 2.0 * K2 * K2x);
    return li;
}

double killing_residual(const Metric2& g, const VectorField& K,
                        const std::vector<Point>& samples) {
    const Expr& Z1 = K.Z1;
    const Expr& Z2 = K.Z2;
    Expr z1x = diff(Z1, Coord::X), z1y = diff(Z1, Coord::Y);
    Expr z2x = diff(Z2, Coord::X), z2y = diff(Z2, Coord::Y);
    Expr Ex = diff(g.E, Coord::X), Ey = diff(g.E, Coord::Y);
    Expr Fx = diff(g.F, Coord::X), Fy = diff(g.F, Coord::Y);
    Expr Gx = diff(g.G, Coord::X), Gy = diff(g.G, Coord::Y);

    const Expr comps[3] = {
        simplify(Z1 * Ex + Z2 * Ey + 2.0 * (g.E * z1x + g.F * z2x)),
        simplify(Z1 * Fx + Z2 * Fy + g.F * z1x + g.G * z2x + g.E * z1y + g.F * z2y),
        simplify(Z1 * Gx + Z2 * Gy + 2.0 * (g.F * z1y + g.G * z2y)),
    };

    double worst = 0.0;
    for (const auto& p : samples)
        for (const auto& c : comps) worst = std::max(worst, std::abs(eval(c, p, g.env)));
    return worst;
}

bool is_flat(const ProjectiveConnection& pc, const std::vector<Point>& samples, double tol) {
    LiouvilleInvariant li = liouville_invariants(pc);
    for (const auto& p : samples) {
        if (std::abs(eval(li.L1, p, pc.env)) > tol) return false;
        if (std::abs(eval(li.L2, p, pc.env)) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Prolongation

namespace {

// Values of the connection coefficients and their derivatives at one point.
struct KJetValues {
    double k[4];
    double kx[4], ky[4];
    double kxx[4], kxy[4], kyy[4];
};

struct ConnectionJets {
    Expr k[4];
    Expr kx[4], ky[4];
    Expr kxx[4], kxy[4], kyy[4];

    static ConnectionJets build(const ProjectiveConnection& pc) {
        ConnectionJets j;
        j.k[0] = pc.K0;
        j.k[1] = pc.K1;
        j.k[2] = pc.K2;
        j.k[3] = pc.K3;
        for (int i = 0; i < 4; ++i) {
            j.kx[i] = diff(j.k[i], Coord::X);
            j.ky[i] = diff(j.k[i], Coord::Y);
            j.kxx[i] = diff(j.kx[i], Coord::X);
            j.kxy[i] = diff(j.kx[i], Coord::Y);
            j.kyy[i] = diff(j.ky[i], Coord::Y);
        }
        return j;
    }

    KJetValues at(Point p, const ParamEnv& env) const {
        KJetValues v;
        for (int i = 0; i < 4; ++i) {
            v.k[i] = eval(k[i], p, env);
            v.kx[i] = eval(kx[i], p, env);
            v.ky[i] = eval(ky[i], p, env);
            v.kxx[i] = eval(kxx[i], p, env);
            v.kxy[i] = eval(kxy[i], p, env);
            v.kyy[i] = eval(kyy[i], p, env);
        }
        return v;
    }
};

using Vec8 = Eigen::Matrix<double, 8, 1>;

Vec8 unit(int i) {
    Vec8 v = Vec8::Zero();
    v(i) = 1.0;
    return v;
}

// Coefficient vectors, over the jet basis, of the derivatives that the
// symmetry system solves for. Basis order:
// 0:Z1 1:Z2 2:Z1_x 3:Z2_x 4:Z1_y 5:Z2_y 6:Z1_xy 7:Z2_xy.
struct JetRelations {
    Vec8 z1xx, z2xx, z1yy, z2yy;     // second order, from the system itself
    Vec8 z1xxy, z2xxy, z1xyy, z2xyy;  // third order, from its derivatives
};

JetRelations jet_relations(const KJetValues& kj) {
    const double* k = kj.k;
    const double* kx = kj.kx;
    const double* ky = kj.ky;

    JetRelations r;
    r.z2xx = kx[0] * unit(0) + ky[0] * unit(1) + 2 * k[0] * unit(2) + k[1] * unit(3) -
             k[0] * unit(5);
    r.z1xx = -kx[1] * unit(0) - ky[1] * unit(1) - k[1] * unit(2) - 2 * k[2] * unit(3) -
             3 * k[0] * unit(4) + 2 * unit(7);
    r.z2yy = kx[2] * unit(0) + ky[2] * unit(1) + 3 * k[3] * unit(3) + 2 * k[1] * unit(4) +
             k[2] * unit(5) + 2 * unit(6);
    r.z1yy = -kx[3] * unit(0) - ky[3] * unit(1) + k[3] * unit(2) - k[2] * unit(4) -
             2 * k[3] * unit(5);

    // d/dy of the Z2_xx relation (substituting the Z2_yy relation).
    r.z2xxy = kj.kxy[0] * unit(0) + kj.kyy[0] * unit(1) + 2 * ky[0] * unit(2) +
              ky[1] * unit(3) + kx[0] * unit(4) + 2 * k[0] * unit(6) + k[1] * unit(7) -
              k[0] * r.z2yy;

    // d/dx of the Z1_yy relation (substituting the Z1_xx relation).
    r.z1xyy = k[3] * r.z1xx - kj.kxx[3] * unit(0) - kj.kxy[3] * unit(1) - ky[3] * unit(3) -
              kx[2] * unit(4) - 2 * kx[3] * unit(5) - k[2] * unit(6) - 2 * k[3] * unit(7);

    // d/dy of the second equation and d/dx of the third give
    //   -Z1_xxy + 2 Z2_xyy = U,   -2 Z1_xxy + Z2_xyy = V.
    Vec8 U = kj.kxy[1] * unit(0) + kj.kyy[1] * unit(1) + ky[1] * unit(2) +
             2 * ky[2] * unit(3) + (3 * ky[0] + kx[1]) * unit(4) + ky[1] * unit(5) +
             k[1] * unit(6) + 2 * k[2] * unit(7) + 3 * k[0] * r.z1yy;
    Vec8 V = kj.kxx[2] * unit(0) + kj.kxy[2] * unit(1) + kx[2] * unit(2) +
             (3 * kx[3] + ky[2]) * unit(3) + 2 * kx[1] * unit(4) + kx[2] * unit(5) +
             2 * k[1] * unit(6) + k[2] * unit(7) + 3 * k[3] * r.z2xx;
    r.z1xxy = (U - 2 * V) / 3.0;
    r.z2xyy = (2 * U - V) / 3.0;
    return r;
}

// X(i,j) = coefficient of basis element i in d/dx of basis element j.
void assemble_xy(const KJetValues& kj, Matrix8d& X, Matrix8d& Y) {
    JetRelations r = jet_relations(kj);
    X.col(0) = unit(2);
    X.col(1) = unit(3);
    X.col(2) = r.z1xx;
    X.col(3) = r.z2xx;
    X.col(4) = unit(6);
    X.col(5) = unit(7);
    X.col(6) = r.z1xxy;
    X.col(7) = r.z2xxy;

    Y.col(0) = unit(4);
    Y.col(1) = unit(5);
    Y.col(2) = unit(6);
    Y.col(3) = unit(7);
    Y.col(4) = r.z1yy;
    Y.col(5) = r.z2yy;
    Y.col(6) = r.z1xyy;
    Y.col(7) = r.z2xyy;
}

}  // namespace

SymmetryConnectionSample prolonged_connection_at(const ProjectiveConnection& pc, Point p) {
    ConnectionJets jets = ConnectionJets::build(pc);

    SymmetryConnectionSample s;
    s.p = p;
    assemble_xy(jets.at(p, pc.env), s.X, s.Y);

    // Curvature L = Y_x - X_y + [X, Y]; the matrix derivatives come from a
    // 5-point stencil, which keeps the truncation error well below the
    // dimension-decision tolerance.
    const double h = 2.5e-3;
    auto at = [&](double x, double y) {
        Matrix8d Xs, Ys;
        assemble_xy(jets.at({x, y}, pc.env), Xs, Ys);
        return std::make_pair(Xs, Ys);
    };
    auto [Xp1, Yp1] = at(p.x + h, p.y);
    auto [Xm1, Ym1] = at(p.x - h, p.y);
    auto [Xp2, Yp2] = at(p.x + 2 * h, p.y);
    auto [Xm2, Ym2] = at(p.x - 2 * h, p.y);
    Matrix8d Yx = (8.0 * (Yp1 - Ym1) - (Yp2 - Ym2)) / (12.0 * h);

    auto [Xq1, Yq1] = at(p.x, p.y + h);
    auto [Xq2, Yq2] = at(p.x, p.y + 2 * h);
    auto [Xr1, Yr1] = at(p.x, p.y - h);
    auto [Xr2, Yr2] = at(p.x, p.y - 2 * h);
    Matrix8d Xy = (8.0 * (Xq1 - Xr1) - (Xq2 - Xr2)) / (12.0 * h);

    s.L = Yx - Xy + s.X * s.Y - s.Y * s.X;
    return s;
}

SymmetryDimension symmetry_dimension_bound(const ProjectiveConnection& pc,
                                           const std::vector<Point>& samples, double tol) {
    for (const auto& p : samples) {
        SymmetryConnectionSample s = prolonged_connection_at(pc, p);
        if (s.L.cwiseAbs().maxCoeff() > tol) return SymmetryDimension::LessThan8;
    }
    return SymmetryDimension::Full8;
}

// ---------------------------------------------------------------------------
// Spec files

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

ProjectiveConnection parse_connection_spec(std::istream& in) {
    ProjectiveConnection pc;
    pc.K0 = Expr::constant(0.0);
    pc.K1 = Expr::constant(0.0);
    pc.K2 = Expr::constant(0.0);
    pc.K3 = Expr::constant(0.0);
    bool have_domain = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim_copy(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("connection spec line " + std::to_string(lineno) + ": expected '='",
                             0);
        std::string key = trim_copy(t.substr(0, eq));
        std::string value = trim_copy(t.substr(eq + 1));
        if (key == "K0")
            pc.K0 = parse_expr(value);
        else if (key == "K1")
            pc.K1 = parse_expr(value);
        else if (key == "K2")
            pc.K2 = parse_expr(value);
        else if (key == "K3")
            pc.K3 = parse_expr(value);
        else if (key == "domain") {
            std::istringstream ss(value);
            if (!(ss >> pc.domain.x0 >> pc.domain.x1 >> pc.domain.y0 >> pc.domain.y1))
                throw ParseError("connection spec line " + std::to_string(lineno) +
                                     ": domain needs four numbers",
                                 0);
            have_domain = true;
        } else if (key == "exclude")
            pc.domain.excludes.push_back(parse_expr(value));
        else if (key.rfind("param ", 0) == 0)
            pc.env[trim_copy(key.substr(6))] = std::stod(value);
        else
            throw ParseError("connection spec line " + std::to_string(lineno) +
                                 ": unknown key '" + key + "'",
                             0);
    }
    if (!have_domain) throw ParseError("connection spec: domain is required", 0);
    return pc;
}

ProjectiveConnection load_connection_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open connection spec '" + path + "'");
    return parse_connection_spec(in);
}

VectorField parse_vectorfield_spec(std::istream& in) {
    Expr z1 = Expr::constant(0.0), z2 = Expr::constant(0.0);
    ParamEnv env;
    bool have1 = false, have2 = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim_copy(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("vector field spec line " + std::to_string(lineno) +
                                 ": expected '='",
                             0);
        std::string key = trim_copy(t.substr(0, eq));
        std::string value = trim_copy(t.substr(eq + 1));
        if (key == "Z1") {
            z1 = parse_expr(value);
            have1 = true;
        } else if (key == "Z2") {
            z2 = parse_expr(value);
            have2 = true;
        } else if (key.rfind("param ", 0) == 0) {
            env[trim_copy(key.substr(6))] = std::stod(value);
        } else {
            throw ParseError("vector field spec line " + std::to_string(lineno) +
                                 ": unknown key '" + key + "'",
                             0);
        }
    }
    if (!have1 && !have2)
        throw ParseError("vector field spec: at least one of Z1, Z2 is required", 0);
    return {simplify(substitute_params(z1, env)), simplify(substitute_params(z2, env))};
}

VectorField load_vectorfield_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vector field spec '" + path + "'");
    return parse_vectorfield_spec(in);
}

}  // namespace projgeo
