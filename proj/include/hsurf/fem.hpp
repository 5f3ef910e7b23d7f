#pragma once
// Finite elements for the Laplacian of the hyperbolic (optionally conformally
// weighted) metric on the truncated fundamental domain, with natural boundary
// conditions.  Because the 2-D Dirichlet energy is conformally invariant, the
// stiffness matrix is the flat Euclidean one; the metric enters only through
// the mass weight e^{phi} y^{-2} (and the potential term).  The module also
// extracts cusp-cut Fourier traces of eigenfunctions and solves the shifted
// complex systems that anchor the boundary-operator series acceleration.

#include <complex>
#include <map>
#include <vector>

#include "hsurf/linalg.hpp"
#include "hsurf/mesh.hpp"

namespace hsurf {

enum class ElementOrder { Linear = 1, Quadratic = 2 };

// One quadrature node of a cusp-cut trace: cusp coordinate x, trapezoid
// weight w, and the free-dof index carrying the nodal value (-1 when the
// node is constrained to zero by a Dirichlet wall).
struct TraceNode {
    int dof = -1;
    double x = 0.0;
    double w = 0.0;
};

// Assembled forms of one surface/mesh pair over the free degrees of freedom,
// ready for eigenpair extraction and anchored boundary solves.
struct FemProblem {
    ElementOrder order = ElementOrder::Linear;
    int n = 0;  // free dofs
    SparseSymmetricMatrix K;     // Dirichlet energy + potential term
    SparseSymmetricMatrix Mmat;  // mass with weight e^{phi} y^{-2}

    // trace quadrature per cusp, ascending k; for a cut that wraps around
    // (identified ends) the duplicate end node is already dropped and the
    // weights are periodic
    std::vector<std::vector<TraceNode>> cusp_nodes;
    std::vector<double> a;  // cut heights per cusp
    SymmetryReduction reduction = SymmetryReduction::None;

    std::vector<int> free_of_dof;  // mesh dof -> free index, -1 if constrained
    // quadratic elements: free index of the edge bubble keyed by the
    // endpoint mesh-dof pair (lo, hi); keying by dofs rather than vertices
    // makes glued boundary edges share their midpoint automatically
    std::map<std::pair<int, int>, int> edge_free;

    int num_cusps() const { return static_cast<int>(a.size()); }
};

// Fourier trace basis on a cusp cut.  An unreduced surface uses e^{2 pi i m
// x} with m = -J..J; the even (Neumann-wall) reduction uses {1, sqrt(2)
// cos(2 pi m x)} with m = 0..J, and the odd (Dirichlet-wall) reduction uses
// sqrt(2) sin(2 pi m x) with m = 1..J.  Coefficients are always normalized
// as full-period integrals against the unit-period basis with the measure
// dx/a_k, and eigenfunctions of reduced problems count as normalized on the
// full (unreduced) surface.
std::vector<int> trace_mode_list(SymmetryReduction red, int J);

// Spectral boundary data of the interior Neumann problem: eigenvalues with
// the Fourier coefficients of their cusp-cut traces.  Column index alpha
// runs over cusps k = 1..p (outer) and the mode list (inner).
struct NeumannSpectralData {
    SymmetryReduction reduction = SymmetryReduction::None;
    int J = 0;
    int p = 0;
    std::vector<double> a;              // cut heights
    std::vector<double> eigenvalues;    // ascending
    Eigen::MatrixXcd coeffs;            // (j, alpha)

    int modes_per_cusp() const {
        return static_cast<int>(trace_mode_list(reduction, J).size());
    }
    int num_modes() const { return p * modes_per_cusp(); }
    // alpha index of mode m on cusp k (k is 1-based)
    int alpha(int k, int m) const;
};

// Boundary response matrix at one spectral point: entry (alpha, beta) is the
// Fourier coefficient alpha of the Dirichlet trace of the solution of
// (P - s0(1-s0)) psi = 0 whose Neumann datum is basis element beta.
struct AnchorSolve {
    cplx s0;
    cplx lambda0;  // s0 (1 - s0)
    SymmetryReduction reduction = SymmetryReduction::None;
    int J = 0;
    int p = 0;
    std::vector<double> a;
    Eigen::MatrixXcd nd;

    int modes_per_cusp() const {
        return static_cast<int>(trace_mode_list(reduction, J).size());
    }
    int alpha(int k, int m) const;
};

// Assemble stiffness (Dirichlet energy plus potential term) and weighted
// mass over the mesh, eliminating dofs on Dirichlet walls.  The surface
// description supplies the conformal weight, the potential, and the wall
// boundary conditions; it must describe the same geometry the mesh was
// built from (a weight or potential may differ — the mesh is reusable
// across conformal perturbations).  Throws std::domain_error if the
// conformal weight is not strictly positive at a quadrature point.
FemProblem assemble(const Mesh& mesh, const SurfaceSpec& spec,
                    ElementOrder order = ElementOrder::Linear);

// First n eigenpairs of K v = lambda Mmat v (n is clamped to the number of
// free dofs); vectors come back Mmat-orthonormal.
GeneralizedEigs solve_spectrum(const FemProblem& fp, int n);

// Cusp-cut Fourier coefficients of the first eigenfunctions, by trapezoid
// quadrature on the uniform trace nodes.  Requires the trace resolution to
// support the truncation: at least 4J intervals per full period.
NeumannSpectralData extract_boundary_data(const FemProblem& fp,
                                          const GeneralizedEigs& eigs, int J);

// Solve the complex shifted systems (K - s0(1-s0) Mmat) psi = load for every
// trace basis datum and return the matrix of trace coefficients.  Throws
// std::runtime_error when the shifted system is singular to working
// precision (s0(1-s0) too close to an eigenvalue — move the anchor).
AnchorSolve direct_nd_at(const FemProblem& fp, cplx s0, int J);

// direct_nd_at with an automatic spectral-gap guard: raises Im(s0) in small
// steps until s0(1-s0) stays at least min_dist away from every eigenvalue in
// `eigenvalues`, then runs the direct solve at the adjusted parameter.
AnchorSolve direct_nd_near(const FemProblem& fp,
                           const std::vector<double>& eigenvalues, cplx s0,
                           int J, double min_dist = 1e-2);

}  // namespace hsurf
