#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "projgeo/liouville.hpp"
#include "projgeo/projective.hpp"

namespace projgeo {

// The six normal forms of metrics with a transitive algebra of projective
// vector fields: "1a".."1c" carry a two-dimensional algebra, "2a".."2c" a
// three-dimensional one.
enum class NormalFormId { N1a, N1b, N1c, N2a, N2b, N2c };

NormalFormId parse_normal_form_id(const std::string& s);
std::string to_string(NormalFormId id);
int family_dimension(NormalFormId id);  // 2 or 3

// Parameter slots; each form reads the subset it declares:
//   1a: b, eps1, eps2      1b: a, b, eps1, eps2     1c: a, eps1 (the form's eps)
//   2a: eps1, eps2         2b: a, eps1, eps2        2c: a, c, eps1, eps2
struct NormalFormParams {
    double a = 1.0;
    double b = 3.0;
    double c = 0.0;
    int eps1 = 1;
    int eps2 = 1;
};

// Builds the metric with validated parameters and a domain that stays away
// from the form's singular loci. Throws Error naming the violated constraint.
Metric2 instantiate(NormalFormId id, const NormalFormParams& p);

// Every normal form has the downward coordinate field as its Killing field.
VectorField killing_field(NormalFormId id);

// Scalar-curvature fingerprint: R, its gradient square I, its Laplacian,
// evaluated at probe abscissae (y = 0; all fingerprints are y-independent).
// For the 2c family the analytic continuation across x = 0 is recorded too.
struct Fingerprint {
    Expr R, I, dR;
    std::vector<double> probe_xs;
    std::vector<std::array<double, 3>> at_probes;
    std::optional<std::pair<double, double>> curve_origin;  // (R, lap R) at x = 0
};

Fingerprint fingerprint(NormalFormId id, const NormalFormParams& p,
                        const std::vector<double>& probe_xs = {0.3, 0.7, 1.1, 1.6});

// Conjugacy class of the Killing field inside the three-dimensional
// projective algebra (only defined for the 2a/2b/2c forms).
enum class KillingClass { XType, YType, ZType };
KillingClass killing_class(NormalFormId id, const NormalFormParams& p);

struct DistinguishVerdict {
    enum class Kind { Distinct, Identical, SameFamily, Indeterminate };
    Kind kind = Kind::Indeterminate;
    std::string witness;  // which invariant separated the pair
    std::string detail;
};

// Decides whether two catalog entries are isometric, via invariants only:
// algebra dimension, Killing conjugacy class, the I/(9R^3) scalar, the
// x = 0 curve point of the 2c family, translation matching of R profiles,
// metric signature and the sign of the Killing length.
DistinguishVerdict distinguish(NormalFormId idA, const NormalFormParams& pA, NormalFormId idB,
                               const NormalFormParams& pB);

}  // namespace projgeo
