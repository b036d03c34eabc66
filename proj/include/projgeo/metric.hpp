#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "projgeo/expr.hpp"

namespace projgeo {

// Sampling rectangle plus zero loci that samples (and trajectories) must
// stay away from.
struct Domain {
    double x0 = -1.0, x1 = 1.0;
    double y0 = -1.0, y1 = 1.0;
    std::vector<Expr> excludes;
};

// 2-D (pseudo-)Riemannian metric E dx^2 + 2F dx dy + G dy^2 with parameter
// bindings and its sampling domain.
struct Metric2 {
    Expr E, F, G;
    ParamEnv env;
    Domain domain;
};

// The six Levi-Civita connection coefficients; symmetric in the lower
// indices by construction.
struct ChristoffelField {
    Expr x_xx, x_xy, x_yy;  // upper index x
    Expr y_xx, y_xy, y_yy;  // upper index y
};

// Coordinate change: the source coordinates expressed as functions of the
// target ones, (x, y) = (x_of(xn, yn), y_of(xn, yn)).
struct CoordinateMap {
    Expr x_of, y_of;
};

// Deterministic low-discrepancy samples of the domain rectangle, rejecting
// points whose estimated distance to an excluded zero locus is below
// `min_distance`. Throws DomainError when the domain is essentially empty.
std::vector<Point> sample_points(const Domain& domain, const ParamEnv& env, int n,
                                 double min_distance = 1e-3);
std::vector<Point> sample_points(const Metric2& g, int n);

// First-order estimate |f(p)| / |grad f(p)| of the distance from p to the
// zero locus of f.
double locus_distance(const Expr& f, Point p, const ParamEnv& env);

bool point_in_domain(const Domain& domain, const ParamEnv& env, Point p,
                     double min_distance = 1e-3);

Expr det_expr(const Metric2& g);

// Throws DegenerateMetricError when |det| <= tol at some sample point.
void validate_nondegenerate(const Metric2& g, int n_samples = 100, double tol = 1e-9);

ChristoffelField christoffel(const Metric2& g);

// Max over samples of the covariant-derivative components of g in the given
// connection; ~0 certifies the Levi-Civita property.
double covariant_derivative_residual(const Metric2& g, const ChristoffelField& c,
                                     const std::vector<Point>& samples);

// Scalar curvature from the full Riemann tensor contraction (Ricci scalar;
// equals twice the Gauss curvature, positive on the round sphere).
Expr scalar_curvature(const Metric2& g);

// |grad f|^2 = g^{ij} f_i f_j.
Expr grad_norm_sq(const Metric2& g, const Expr& f);

// Laplace-Beltrami operator; sqrt|det g| is used, so signature (1,1) metrics
// are handled.
Expr laplacian(const Metric2& g, const Expr& f);

// Transported metric under the coordinate change `map` (components J^T g J
// composed with the map). The Jacobian must be nonsingular on the new domain.
Metric2 pullback(const Metric2& g, const CoordinateMap& map, const Domain& new_domain);

// Plain-text metric description:
//   E = <expr>      (required)
//   F = <expr>      (optional, defaults to 0)
//   G = <expr>      (required)
//   param <name> = <real>
//   domain = x0 x1 y0 y1   (required)
//   exclude = <expr>       (repeatable)
// '#' starts a comment.
Metric2 parse_metric_spec(std::istream& in);
Metric2 load_metric_file(const std::string& path);

}  // namespace projgeo
