#pragma once

// Fundamental-domain descriptions of the four surface families, together with
// the Mobius identifications that glue their boundary arcs. Every domain is a
// vertical strip {x_lo <= x <= x_hi} bounded below by a chain of geodesic or
// horocycle arcs and above by the cusp cut. Specs serialize to JSON and feed
// the mesh generator.

#include <hsurf/spectral.hpp>

#include <map>
#include <string>
#include <vector>

namespace hsurf {

// Orientation-preserving isometry z -> (az+b)/(cz+d) of the upper half plane
// (real coefficients, det = 1), optionally pre-composed with the reflection
// x -> -x. With reflect set, apply(z) evaluates the matrix at -conj(z).
struct Mobius {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    bool reflect = false;

    cplx apply(cplx z) const;
    double apply_real(double x) const; // boundary action on the real axis
    Mobius inverse() const;

    static Mobius identity() { return {}; }
    static Mobius from_coeffs(double a, double b, double c, double d);
    static Mobius translation(double t);
    static Mobius scaling(double k); // z -> k z, k > 0
    // maps the geodesic half-circle (center c, radius r) to the imaginary
    // axis with the apex c + ir going to i
    static Mobius circle_to_axis(double c, double r);
    // outer composed with inner: apply(z) = outer(inner(z))
    static Mobius compose(const Mobius& outer, const Mobius& inner);
};

// Scalar function of (x, y) parsed from an arithmetic expression with the
// usual operators, parentheses, the constants pi and e, and the functions
// sin cos tan asin acos atan exp log sqrt abs sinh cosh tanh.
class ScalarField {
  public:
    struct Instr {
        int op;
        double value;
    };

    ScalarField(); // constant 1
    explicit ScalarField(std::string expr);
    double operator()(double x, double y) const;
    const std::string& expression() const { return expr_; }
    bool is_constant_one() const;

  private:
    std::string expr_;
    std::vector<Instr> prog_;
};

enum class ArcKind { CircularArc, VerticalSegment, HorocycleSegment };
enum class ArcBC { Identified, Neumann, Dirichlet, CuspBoundary };
enum class ArcRole { Bottom, Side, Top };
enum class Family { ModularOrbifold, Billiard, GenusOne, ThreeCusps };
enum class SymmetryReduction { None, Even, Odd };

// One boundary arc of the fundamental domain.
//  - CircularArc: z(p) = center + radius e^{ip}, p in [lo, hi] (0 < p < pi)
//  - VerticalSegment: z(p) = x + ip, p in [lo, hi]
//  - HorocycleSegment: z(p) = post(frame(p + i height)), p in [lo, hi]; the
//    frame is the unit-width cusp normalizer, so the segment is a horizontal
//    line in cusp coordinates
struct BoundaryArc {
    std::string tag;
    ArcKind kind = ArcKind::CircularArc;
    ArcBC bc = ArcBC::Neumann;
    ArcRole role = ArcRole::Bottom;
    double center = 0.0;
    double radius = 0.0;
    double x = 0.0;
    double lo = 0.0, hi = 0.0;
    int cusp = -1; // 1-based cusp index for horocycle segments
    double height = 0.0;
    Mobius frame; // identity unless horocycle piece of a finite cusp
    Mobius post;

    cplx point(double p) const;
    // hyperbolic arclength coordinate along the supporting geodesic
    // (circular: log tan(p/2); vertical: log p)
    double arclen_coord(double p) const;
    double param_from_arclen(double lam) const;
    double hyperbolic_length() const;
    // recover the parameter of a point known to lie on the arc's support
    double param_of(cplx z, double tol = 1e-9) const;
};

struct Identification {
    std::string source, target;
    Mobius map;
    double source_lo = 0.0, source_hi = 0.0; // parameter range on the source arc
};

struct CuspSpec {
    int k = 1;          // 1-based index; k = 1 is the cusp at infinity
    double a = 0.0;     // cut height in cusp coordinates
    double width = 1.0; // period of the cusp coordinate
    Mobius frame;       // cusp coordinates -> domain coordinates
    double x_lo = -0.5, x_hi = 0.5; // cut-circle interval present in the domain
};

struct SurfaceSpec {
    Family family = Family::ModularOrbifold;
    std::map<std::string, double> params;
    std::vector<BoundaryArc> arcs; // bottom chain in ascending x, then sides, then cusp cuts
    std::vector<Identification> identifications;
    std::vector<CuspSpec> cusps;
    ScalarField conformal_weight;       // metric weight multiplying y^{-2}
    ScalarField potential{std::string("0")};
    SymmetryReduction reduction = SymmetryReduction::None;
    double x_lo = -0.5, x_hi = 0.5;

    int num_cusps() const { return static_cast<int>(cusps.size()); }
    const BoundaryArc& arc(const std::string& tag) const;
};

// angle between the distinguished geodesic and the vertical direction used
// throughout the genus-one construction: alpha = arcsin(tanh(l/2))
double alpha_angle(double l);

// length of the second distinguished closed geodesic on the once-punctured
// torus with parameters (l, tau)
double second_geodesic_length(double l, double tau);

// the length l at which the two distinguished geodesics have equal length for
// a given twist; solves cosh(l) = 2 + cosh(l tau) to 1e-12
double equal_length_locus(double tau);

SurfaceSpec build_modular(double a = 2.0, double q = 0.0,
                          SymmetryReduction red = SymmetryReduction::None);
SurfaceSpec build_artin(double r, double a = 1.5);
SurfaceSpec build_genus_one(double l, double tau, double a = -1.0);
SurfaceSpec build_genus_zero_three_cusps(double a_inf = 1.5, double a_zero = 0.7,
                                         double a_half = 0.7);

std::string surface_to_json(const SurfaceSpec& spec);
SurfaceSpec surface_from_json(const std::string& doc);

} // namespace hsurf
