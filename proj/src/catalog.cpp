#include "projgeo/catalog.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace projgeo {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(msg);
}

bool near(double v, double w) { return std::abs(v - w) < 1e-9; }

void check_eps(int e, const char* name, const std::string& id) {
    if (e != 1 && e != -1)
        throw Error("normal form " + id + ": " + name + " in {-1,1} violated (got " +
                    std::to_string(e) + ")");
}

}  // namespace

NormalFormId parse_normal_form_id(const std::string& s) {
    if (s == "1a") return NormalFormId::N1a;
    if (s == "1b") return NormalFormId::N1b;
    if (s == "1c") return NormalFormId::N1c;
    if (s == "2a") return NormalFormId::N2a;
    if (s == "2b") return NormalFormId::N2b;
    if (s == "2c") return NormalFormId::N2c;
    throw Error("unknown normal form id '" + s + "' (expected 1a..1c, 2a..2c)");
}

std::string to_string(NormalFormId id) {
    switch (id) {
        case NormalFormId::N1a: return "1a";
        case NormalFormId::N1b: return "1b";
        case NormalFormId::N1c: return "1c";
        case NormalFormId::N2a: return "2a";
        case NormalFormId::N2b: return "2b";
        case NormalFormId::N2c: return "2c";
    }
    throw Error("corrupt normal form id");
}

int family_dimension(NormalFormId id) {
    switch (id) {
        case NormalFormId::N1a:
        case NormalFormId::N1b:
        case NormalFormId::N1c:
            return 2;
        default:
            return 3;
    }
}

Metric2 instantiate(NormalFormId id, const NormalFormParams& p) {
    const std::string name = to_string(id);
    Metric2 g;
    g.F = Expr::constant(0.0);
    g.domain = {0.25, 2.75, -1.5, 1.5, {}};

    switch (id) {
        case NormalFormId::N1a:
            check_eps(p.eps1, "eps1", name);
            check_eps(p.eps2, "eps2", name);
            require(!near(p.b, -2) && !near(p.b, 0) && !near(p.b, 1),
                    "normal form 1a: b not in {-2,0,1} violated (got b = " +
                        std::to_string(p.b) + ")");
            g.E = parse_expr("eps1*exp((b+2)*x)");
            g.G = parse_expr("eps2*exp(b*x)");
            g.env = {{"b", p.b}, {"eps1", double(p.eps1)}, {"eps2", double(p.eps2)}};
            break;
        case NormalFormId::N1b:
            check_eps(p.eps1, "eps1", name);
            check_eps(p.eps2, "eps2", name);
            require(p.a != 0.0, "normal form 1b: a != 0 violated");
            require(!near(p.b, -2) && !near(p.b, 0) && !near(p.b, 1),
                    "normal form 1b: b not in {-2,0,1} violated (got b = " +
                        std::to_string(p.b) + ")");
            g.E = parse_expr("a*exp((b+2)*x)/(exp(b*x)+eps2)^2");
            g.G = parse_expr("a*eps1*exp(b*x)/(exp(b*x)+eps2)");
            g.env = {{"a", p.a}, {"b", p.b}, {"eps1", double(p.eps1)},
                     {"eps2", double(p.eps2)}};
            g.domain.excludes.push_back(parse_expr("exp(b*x)+eps2"));
            break;
        case NormalFormId::N1c:
            check_eps(p.eps1, "eps", name);
            require(p.a != 0.0, "normal form 1c: a != 0 violated");
            g.E = parse_expr("a*exp(2*x)/x^2");
            g.G = parse_expr("a*eps/x");
            g.env = {{"a", p.a}, {"eps", double(p.eps1)}};
            g.domain.excludes.push_back(Expr::x());
            break;
        case NormalFormId::N2a:
            check_eps(p.eps1, "eps1", name);
            check_eps(p.eps2, "eps2", name);
            g.E = parse_expr("eps1*exp(3*x)");
            g.G = parse_expr("eps2*exp(x)");
            g.env = {{"eps1", double(p.eps1)}, {"eps2", double(p.eps2)}};
            break;
        case NormalFormId::N2b:
            check_eps(p.eps1, "eps1", name);
            check_eps(p.eps2, "eps2", name);
            require(p.a != 0.0, "normal form 2b: a != 0 violated");
            g.E = parse_expr("a*exp(3*x)/(exp(x)+eps2)^2");
            g.G = parse_expr("a*eps1*exp(x)/(exp(x)+eps2)");
            g.env = {{"a", p.a}, {"eps1", double(p.eps1)}, {"eps2", double(p.eps2)}};
            g.domain.excludes.push_back(parse_expr("exp(x)+eps2"));
            break;
        case NormalFormId::N2c:
            check_eps(p.eps1, "eps1", name);
            check_eps(p.eps2, "eps2", name);
            require(p.a > 0.0, "normal form 2c: a > 0 violated (got a = " +
                                   std::to_string(p.a) + ")");
            g.E = parse_expr("a/((c*x+2*x^2+eps2)^2*x)");
            g.G = parse_expr("a*eps1*x/(c*x+2*x^2+eps2)");
            g.env = {{"a", p.a}, {"c", p.c}, {"eps1", double(p.eps1)},
                     {"eps2", double(p.eps2)}};
            g.domain.excludes.push_back(Expr::x());
            g.domain.excludes.push_back(parse_expr("c*x+2*x^2+eps2"));
            break;
    }
    validate_nondegenerate(g);
    return g;
}

VectorField killing_field(NormalFormId) {
    return {Expr::constant(0.0), Expr::constant(1.0)};
}

namespace {

// Value at x = 0 of a polynomial-extendable function given by an Expr with a
// removable singularity there: symmetric Lagrange interpolation through
// nodes clear of the excluded loci (exact through degree 7).
double extend_to_origin(const Expr& f, const ParamEnv& env) {
    const double nodes[8] = {-0.32, -0.24, -0.16, -0.08, 0.08, 0.16, 0.24, 0.32};
    double value = 0.0;
    for (int i = 0; i < 8; ++i) {
        double li = 1.0;
        for (int j = 0; j < 8; ++j) {
            if (j == i) continue;
            li *= (0.0 - nodes[j]) / (nodes[i] - nodes[j]);
        }
        value += li * eval(f, nodes[i], 0.0, env);
    }
    return value;
}

}  // namespace

Fingerprint fingerprint(NormalFormId id, const NormalFormParams& p,
                        const std::vector<double>& probe_xs) {
    Metric2 g = instantiate(id, p);
    Fingerprint fp;
    fp.R = scalar_curvature(g);
    fp.I = grad_norm_sq(g, fp.R);
    fp.dR = laplacian(g, fp.R);
    fp.probe_xs = probe_xs;
    for (double x : probe_xs) {
        if (!point_in_domain(g.domain, g.env, {x, 0.0}))
            throw DomainError("fingerprint probe x = " + std::to_string(x) +
                              " lies outside the domain of form " + to_string(id));
        fp.at_probes.push_back({eval(fp.R, x, 0.0, g.env), eval(fp.I, x, 0.0, g.env),
                                eval(fp.dR, x, 0.0, g.env)});
    }
    if (id == NormalFormId::N2c)
        fp.curve_origin = {{extend_to_origin(fp.R, g.env), extend_to_origin(fp.dR, g.env)}};
    return fp;
}

KillingClass killing_class(NormalFormId id, const NormalFormParams& p) {
    switch (id) {
        case NormalFormId::N2a:
        case NormalFormId::N2b:
            return KillingClass::XType;
        case NormalFormId::N2c:
            return p.eps1 * p.eps2 == -1 ? KillingClass::YType : KillingClass::ZType;
        default:
            throw Error("killing_class: only defined for the dim-3 forms");
    }
}

// ---------------------------------------------------------------------------
// Distinguishing procedure

namespace {

// The distinguishing procedure compares many entries pairwise; fingerprints
// are pure functions of (id, params), so they are memoized.
const Fingerprint& cached_fingerprint(NormalFormId id, const NormalFormParams& p) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<Fingerprint>> cache;
    char key[160];
    std::snprintf(key, sizeof(key), "%d|%a|%a|%a|%d|%d", static_cast<int>(id), p.a, p.b, p.c,
                  p.eps1, p.eps2);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Fingerprint>(fingerprint(id, p))).first;
    return *it->second;
}

bool relevant_params_equal(NormalFormId id, const NormalFormParams& a,
                           const NormalFormParams& b) {
    switch (id) {
        case NormalFormId::N1a:
            return a.b == b.b && a.eps1 == b.eps1 && a.eps2 == b.eps2;
        case NormalFormId::N1b:
            return a.a == b.a && a.b == b.b && a.eps1 == b.eps1 && a.eps2 == b.eps2;
        case NormalFormId::N1c:
            return a.a == b.a && a.eps1 == b.eps1;
        case NormalFormId::N2a:
            return a.eps1 == b.eps1 && a.eps2 == b.eps2;
        case NormalFormId::N2b:
            return a.a == b.a && a.eps1 == b.eps1 && a.eps2 == b.eps2;
        case NormalFormId::N2c:
            return a.a == b.a && a.c == b.c && a.eps1 == b.eps1 && a.eps2 == b.eps2;
    }
    return false;
}

struct SignData {
    int det_sign;
    int killing_sign;  // sign of g(K, K) = sign of G
};

SignData signs_of(const Metric2& g) {
    Point probe{0.7, 0.0};
    if (!point_in_domain(g.domain, g.env, probe)) probe = sample_points(g, 1).front();
    double E = eval(g.E, probe, g.env);
    double G = eval(g.G, probe, g.env);
    return {E * G > 0 ? 1 : -1, G > 0 ? 1 : -1};
}

// Scalar curvature profiles are compared modulo the only isometry freedom
// left in these coordinates, a shift x -> x + x0. Returns the residual of
// the best shift.
double best_translation_residual(const Expr& RA, const ParamEnv& envA, const Expr& RB,
                                 const ParamEnv& envB) {
    const int n_probe = 9;
    double probes[n_probe];
    for (int i = 0; i < n_probe; ++i) probes[i] = 0.6 + 0.8 * i / (n_probe - 1);

    double scale = 1.0;
    for (double x : probes) scale = std::max(scale, std::abs(eval(RB, x, 0.0, envB)));

    auto objective = [&](double x0) {
        double worst = 0.0;
        for (double x : probes) {
            double va;
            try {
                va = eval(RA, x + x0, 0.0, envA);
            } catch (const DomainError&) {
                return std::numeric_limits<double>::infinity();
            }
            if (!std::isfinite(va)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::abs(va - eval(RB, x, 0.0, envB)));
        }
        return worst / scale;
    };

    double best = std::numeric_limits<double>::infinity();
    double best_x0 = 0.0;
    for (double x0 = -2.5; x0 <= 2.5 + 1e-12; x0 += 0.005) {
        double v = objective(x0);
        if (v < best) {
            best = v;
            best_x0 = x0;
        }
    }
    // Golden-section refinement around the best grid point.
    double lo = best_x0 - 0.005, hi = best_x0 + 0.005;
    const double phi = 0.61803398874989484;
    double c1 = hi - phi * (hi - lo), c2 = lo + phi * (hi - lo);
    double f1 = objective(c1), f2 = objective(c2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - phi * (hi - lo);
            f1 = objective(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + phi * (hi - lo);
            f2 = objective(c2);
        }
    }
    return std::min(best, std::min(f1, f2));
}

bool ratio_is_one(const Fingerprint& fp) {
    for (const auto& t : fp.at_probes) {
        double denom = 9.0 * t[0] * t[0] * t[0];
        if (std::abs(t[1] - denom) > 1e-8 * (1.0 + std::abs(denom))) return false;
    }
    return true;
}

DistinguishVerdict distinct(std::string witness, std::string detail = "") {
    return {DistinguishVerdict::Kind::Distinct, std::move(witness), std::move(detail)};
}

}  // namespace

DistinguishVerdict distinguish(NormalFormId idA, const NormalFormParams& pA, NormalFormId idB,
                               const NormalFormParams& pB) {
    if (idA == idB && relevant_params_equal(idA, pA, pB))
        return {DistinguishVerdict::Kind::Identical, "", "equal parameter tuples"};

    if (family_dimension(idA) != family_dimension(idB))
        return distinct("projective algebra dimension",
                        to_string(idA) + " has dim " + std::to_string(family_dimension(idA)) +
                            ", " + to_string(idB) + " has dim " +
                            std::to_string(family_dimension(idB)));

    Metric2 gA = instantiate(idA, pA);
    Metric2 gB = instantiate(idB, pB);
    const Fingerprint& fpA = cached_fingerprint(idA, pA);
    const Fingerprint& fpB = cached_fingerprint(idB, pB);
    SignData sA = signs_of(gA), sB = signs_of(gB);

    if (family_dimension(idA) == 3) {
        KillingClass cA = killing_class(idA, pA), cB = killing_class(idB, pB);
        if (cA != cB)
            return distinct("Killing conjugacy class", "the Killing fields sit in different "
                                                       "conjugacy classes of the algebra");

        if (cA == KillingClass::XType) {
            bool oneA = ratio_is_one(fpA), oneB = ratio_is_one(fpB);
            if (oneA != oneB)
                return distinct("I/(9R^3)", oneA ? to_string(idA) + " has constant ratio 1"
                                                 : to_string(idB) + " has constant ratio 1");
            if (oneA) {
                // Both of the constant-ratio type: only the signs remain.
                if (sA.det_sign != sB.det_sign) return distinct("metric signature");
                if (sA.killing_sign != sB.killing_sign)
                    return distinct("sign of Killing length");
                if (idA == idB)
                    return {DistinguishVerdict::Kind::SameFamily, "",
                            "indistinguishable invariants within tolerance"};
                return {DistinguishVerdict::Kind::Indeterminate, "",
                        "invariants agree across different ids"};
            }
            // Both of the non-constant-ratio type: compare curvature profiles.
            double res = best_translation_residual(fpA.R, gA.env, fpB.R, gB.env);
            if (res > 1e-8) return distinct("R profile", "no shift matches the profiles");
            if (sA.det_sign != sB.det_sign) return distinct("metric signature");
            if (sA.killing_sign != sB.killing_sign) return distinct("sign of Killing length");
            if (idA == idB)
                return {DistinguishVerdict::Kind::SameFamily, "",
                        "indistinguishable invariants within tolerance"};
            return {DistinguishVerdict::Kind::Indeterminate, "",
                    "invariants agree across different ids"};
        }

        // Both are of the rational (curve) type: the analytic curve
        // x -> (R, I, lap R) is completed at x = 0 by I = 0, lap R != 0, and
        // the curve point there recovers the parameters.
        if (!fpA.curve_origin || !fpB.curve_origin)
            return {DistinguishVerdict::Kind::Indeterminate, "", "missing curve origin"};
        auto [R0A, dR0A] = *fpA.curve_origin;
        auto [R0B, dR0B] = *fpB.curve_origin;
        if (std::abs(dR0A - dR0B) > 1e-6 * (1.0 + std::abs(dR0A)))
            return distinct("curve point at x=0",
                            "lap R at the origin differs: " + std::to_string(dR0A) + " vs " +
                                std::to_string(dR0B));
        if (std::abs(R0A - R0B) > 1e-6 * (1.0 + std::abs(R0A)))
            return distinct("curve point at x=0", "R at the origin differs: " +
                                                      std::to_string(R0A) + " vs " +
                                                      std::to_string(R0B));
        // Curve point (a, c, eps2) plus the conjugacy class (eps1 eps2)
        // already pin every parameter of this family.
        if (idA == idB)
            return {DistinguishVerdict::Kind::SameFamily, "",
                    "indistinguishable invariants within tolerance"};
        return {DistinguishVerdict::Kind::Indeterminate, "",
                "invariants agree across different ids"};
    }

    // Two-dimensional families: translation matching of the curvature profile
    // decides, then the remaining sign parameters.
    double res = best_translation_residual(fpA.R, gA.env, fpB.R, gB.env);
    if (res > 1e-8) return distinct("R profile", "no shift matches the profiles");
    if (sA.det_sign != sB.det_sign) return distinct("metric signature");
    if (sA.killing_sign != sB.killing_sign) return distinct("sign of Killing length");
    if (idA == idB)
        return {DistinguishVerdict::Kind::SameFamily, "",
                "indistinguishable invariants within tolerance"};
    return {DistinguishVerdict::Kind::Indeterminate, "",
            "invariants agree across different ids"};
}

}  // namespace projgeo
