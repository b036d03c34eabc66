#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "projgeo/projective.hpp"

namespace projgeo {

// Symmetric 2x2 field a11 dx^2 + 2 a12 dx dy + a22 dy^2. Holds both mobility
// matrices and quadratic integrals of geodesic flows.
struct QuadraticForm {
    Expr a11, a12, a22;
};

Expr quadratic_form_det(const QuadraticForm& q);
double form_value(const QuadraticForm& q, Point p, double vx, double vy,
                  const ParamEnv& env = {});

// y'' = A e^x + B y' + C e^{-x} y'^2 + D e^{-2x} y'^3, the normal form of a
// connection with a transitive two-dimensional symmetry algebra.
struct ABCDConnection {
    double A = 0, B = 0, C = 0, D = 0;

    // 1: D != 0, C = 0;  2: D = 0, C != 0, B = 0;  3: A = B = C = D = 0;
    // 0: none of the normalization classes.
    int normalization_case() const;

    ProjectiveConnection to_projective_connection(
        const Domain& domain = {0.25, 2.75, -1.0, 1.0, {}}) const;
};

using Matrix9cd = Eigen::Matrix<std::complex<double>, 9, 9>;
using Vector9cd = Eigen::Matrix<std::complex<double>, 9, 1>;
using Matrix3cd = Eigen::Matrix<std::complex<double>, 3, 3>;
using Vector3cd = Eigen::Matrix<std::complex<double>, 3, 1>;

// The 9x9 first-order ODE system (plus a 3x3 algebraic constraint block)
// governing the x-coefficients of the separated mobility ansatz
//   a11 = sum_i c_{0i} mu_i(y),  a12 = (1/2) sum_i c_{1i} mu_i(y),
//   a22 = sum_i c_{2i} mu_i(y),
// where the mu_i are the exponential-polynomial modes picked by `case_tag`:
//   case 1: e^{a1 y}, e^{a2 y}, e^{a3 y}        (a_i pairwise distinct, k = 0,0)
//   case 2: e^{a1 y}, e^{a2 y}, y e^{a2 y}      (a1 != a2 = a3,      k = 0,-1)
//   case 3: e^{a y},  y e^{a y}, y^2 e^{a y}    (a1 = a2 = a3,       k = -1,-2)
// Complex-conjugate alphas are allowed; the system is integrated over C and
// conjugation symmetry makes the complex solution dimension equal the real one.
struct CoefficientSystem {
    int case_tag = 3;
    std::array<std::complex<double>, 3> alphas{};
    std::array<double, 2> k{};  // mode-coupling entries fixed by the case
    double A = 0, B = 0, C = 0, D = 0;

    Matrix9cd M(double x) const;            // d c / dx = M(x) c
    Matrix3cd constraint(double x) const;   // constraint(x) * c2 = rhs(x) * c1
    double rhs(double x) const;             // D e^{-2x}
};

struct DimensionResult {
    int dimension = 0;
    Eigen::MatrixXcd basis;  // 9 x dimension, initial conditions at x0
    Eigen::VectorXd singular_values;
    double x0 = 0;
};

struct MetrizabilityStats {
    double max_abs = 0.0;
    std::array<double, 4> per_equation{};
    Point argmax;
};

// a = det(g)^{-2/3} g with the real-cube-root convention (valid for both
// metric signatures).
QuadraticForm mobility_matrix(const Metric2& g);

// Residuals of the linear metrizability system that a mobility matrix of a
// metric with projective connection `pc` must satisfy.
MetrizabilityStats metrizability_residual(const ProjectiveConnection& pc,
                                          const QuadraticForm& a,
                                          const std::vector<Point>& samples,
                                          const ParamEnv& env = {});

// Inverse of mobility_matrix: g = a / det(a)^2.
Metric2 metric_from_mobility(const QuadraticForm& a, const ParamEnv& env,
                             const Domain& domain);

// Assembles the separated ODE system for the given connection, case and modes.
// Throws when the alphas are inconsistent with the case tag.
CoefficientSystem build_coefficient_system(const ABCDConnection& conn, int case_tag,
                                           const std::array<std::complex<double>, 3>& alphas);

// Integrates the 9x9 fundamental matrix over x_range, stacks the algebraic
// constraint at n_check points, and returns 9 - rank of the constraint map.
// Rank uses a relative singular-value threshold of 1e-7 and requires a 1e3
// gap between the smallest kept and largest dropped value; otherwise throws
// IndeterminateRankError.
DimensionResult solution_space_dimension(const CoefficientSystem& sys,
                                         std::pair<double, double> x_range = {0.5, 2.5},
                                         int n_check = 12);

// Dense solution c(x) for one initial condition (for consistency checks and
// reports).
std::vector<std::pair<double, Vector9cd>> integrate_coefficient_vector(
    const CoefficientSystem& sys, const Vector9cd& c0, std::pair<double, double> x_range,
    int n_out = 51);

// The two-parameter family of diagonal mobility matrices solving the
// metrizability system of y'' = B y' + D e^{-2x} y'^3 (D != 0): for B != 1
//   a = lambda diag(e^{2Bx/3}, (D e^{2(B-1)x}/(B-1) + H) e^{-4Bx/3}),
// and for B = 1
//   a = lambda diag(e^{2x/3}, (2Dx + H) e^{-4x/3}).
QuadraticForm mobility_solution_family(double B, double D, double lambda, double H);

}  // namespace projgeo
