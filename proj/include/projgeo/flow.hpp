#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "projgeo/liouville.hpp"

namespace projgeo {

struct GeodesicState {
    double x = 0, y = 0;
    double vx = 0, vy = 0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<GeodesicState> states;
    double step = 0;
    bool clipped = false;     // left the domain before reaching T
    double energy0 = 0;       // g(xi, xi) at the seed
    double energy_drift = 0;  // max relative drift of g(xi, xi)
};

// Classical fixed-step 4th-order integration of the geodesic equations.
// Trajectories that would leave the domain (or come within 1e-3 of an
// excluded locus) are truncated and flagged, not failed.
Trajectory integrate_geodesic(const Metric2& g, GeodesicState s0, double T, double h = 1e-3);

// max_t |F(xi(t)) - F(xi(0))| / (|F(xi(0))| + tiny).
double integral_drift(const Trajectory& tr, const QuadraticForm& F, const ParamEnv& env = {});

// The conserved quantity characterizing projective equivalence:
// I(xi) = gbar(xi,xi) (det g / det gbar)^{2/3}, parameter-resolved.
QuadraticForm equivalence_integral(const Metric2& g, const Metric2& gbar);

struct EquivalenceReport {
    bool equivalent = false;
    double max_drift = 0;
    int trials = 0;
    unsigned seed = 0;
};

// Drift-tests the equivalence integral along seeded geodesics of g. Both
// metrics must overlap in domain; seeds are drawn from the intersection.
EquivalenceReport projective_equivalence_check(const Metric2& g, const Metric2& gbar,
                                               int trials = 5, double T = 3.0,
                                               unsigned seed = 20250808);

// Transplants a Killing field of g to one of a projectively equivalent gbar:
// Kbar = (det gbar / det g)^{1/3} gbar^{-1} g K.
VectorField knebelman_map(const Metric2& g, const Metric2& gbar, const VectorField& K);

// The projective field induced by a quadratic integral F of the flow of g:
// Z_F = (det f / det g) f^{-1} g K (linear in F).
VectorField symmetry_from_integral(const Metric2& g, const VectorField& K,
                                   const QuadraticForm& F);

// F_K = (g(K, .))^2, the kernel direction of the map above.
QuadraticForm killing_integral_square(const Metric2& g, const VectorField& K);

// Carries integrals between projectively equivalent flows:
// h -> (det gbar / det g)^{2/3} h.
QuadraticForm transfer_integral(const Metric2& g, const Metric2& gbar,
                                const QuadraticForm& h);

struct LabeledForm {
    std::string label;
    QuadraticForm form;
};

struct IntegralSuite {
    Metric2 metric;
    std::vector<LabeledForm> integrals;
};

// The exponential superintegrable metric e^{3x}dx^2 - 2D e^x dy^2 with its
// four-dimensional space of quadratic integrals (D != 0).
IntegralSuite superintegrable_suite(double D);

// The classical quartic-family example (4x^2+y^2+1)(dx^2+dy^2) with its
// three quadratic integrals and no Killing field.
IntegralSuite koenigs_suite();

// Deterministic in-domain seed with a clearly non-null velocity for g (and
// optionally a second metric sharing the domain).
GeodesicState random_geodesic_seed(const Metric2& g, std::mt19937_64& rng,
                                   const Metric2* other = nullptr);

}  // namespace projgeo
