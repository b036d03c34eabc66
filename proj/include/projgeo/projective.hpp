#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "projgeo/metric.hpp"

namespace projgeo {

// Second-order ODE y'' = K0 + K1 y' + K2 y'^2 + K3 y'^3 encoding the
// unparametrized geodesics of a connection.
struct ProjectiveConnection {
    Expr K0, K1, K2, K3;
    ParamEnv env;
    Domain domain;
};

struct VectorField {
    Expr Z1, Z2;
};

// Lowest-order differential invariants of a projective connection; both
// vanish exactly on flat (straightenable) connections.
struct LiouvilleInvariant {
    Expr L1, L2;
};

using Matrix8d = Eigen::Matrix<double, 8, 8>;

// Pointwise data of the rank-8 linear connection carrying the symmetry
// prolongation: d Zhat = Zhat (X dx + Y dy) for the 8-jet
// Zhat = (Z1, Z2, Z1_x, Z2_x, Z1_y, Z2_y, Z1_xy, Z2_xy).
struct SymmetryConnectionSample {
    Point p;
    Matrix8d X, Y;
    Matrix8d L;  // curvature Y_x - X_y + [X, Y]
};

struct ResidualStats {
    double max_abs = 0.0;
    std::array<double, 4> per_equation{};
    Point argmax;
};

// The projective connection of an affine connection.
ProjectiveConnection projective_connection(const ChristoffelField& c, const ParamEnv& env,
                                           const Domain& domain);
ProjectiveConnection projective_connection(const Metric2& g);

// Residuals of the linear symmetry PDE system for the field Z over the samples.
ResidualStats symmetry_residual(const ProjectiveConnection& pc, const VectorField& Z,
                                const std::vector<Point>& samples);

LiouvilleInvariant liouville_invariants(const ProjectiveConnection& pc);

// Max over samples of the three Lie-derivative components of g along K;
// ~0 certifies the Killing property.
double killing_residual(const Metric2& g, const VectorField& K,
                        const std::vector<Point>& samples);

// True iff max(|L1|, |L2|) <= tol at all samples.
bool is_flat(const ProjectiveConnection& pc, const std::vector<Point>& samples,
             double tol = 1e-9);

// Assembles the prolonged connection matrices at p (numeric entries, linear
// solve for the third-derivative relations) and the curvature L by a 5-point
// stencil in the base point.
SymmetryConnectionSample prolonged_connection_at(const ProjectiveConnection& pc, Point p);

enum class SymmetryDimension { Full8, LessThan8 };

// "=8" iff the prolongation curvature vanishes (max-abs entry <= tol) at all
// samples; otherwise the symmetry algebra has dimension < 8.
SymmetryDimension symmetry_dimension_bound(const ProjectiveConnection& pc,
                                           const std::vector<Point>& samples,
                                           double tol = 1e-6);

// Plain-text connection description: lines `K0 = <expr>` .. `K3 = <expr>`,
// plus the `param`/`domain`/`exclude` lines of the metric format.
ProjectiveConnection parse_connection_spec(std::istream& in);
ProjectiveConnection load_connection_file(const std::string& path);

// Plain-text vector field: lines `Z1 = <expr>`, `Z2 = <expr>` and optional
// `param` lines (parameters are resolved into the components).
VectorField parse_vectorfield_spec(std::istream& in);
VectorField load_vectorfield_file(const std::string& path);

}  // namespace projgeo
