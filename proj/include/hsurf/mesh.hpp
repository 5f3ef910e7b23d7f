#pragma once
// Triangulation of fundamental domains in the upper half-plane.  The mesher
// marches structured rows between the bottom boundary chain and the cusp cut
// at the top, so nodes on identified boundary arcs land exactly on their
// images and can be merged into shared degrees of freedom.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "hsurf/geometry.hpp"

namespace hsurf {

// Location of a mesh vertex on the domain boundary: the arc it lies on and
// its parameter there.  Vertices at arc junctions carry one entry per
// incident arc; interior vertices carry none.
struct VertexTag {
    std::string arc;
    double param = 0.0;
};

// One boundary edge together with the arc it lies on.  `cusp` is the 1-based
// cusp index when the arc is a cusp cut, and 0 otherwise.
struct BoundaryEdge {
    int a = -1, b = -1;
    std::string arc;
    int cusp = 0;
};

// Ordered trace of one cusp cut: the mesh vertices along the cut with their
// cusp coordinate, ascending.  When the ends of the cut are identified the
// first and last vertices share a degree of freedom.
struct CuspTrace {
    int k = 1;
    std::vector<int> vertices;
    std::vector<double> x;
};

struct Mesh {
    SurfaceSpec spec;
    double h = 0.0;
    int n_boundary = 0;
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    // vertex pairs glued by a boundary identification; each pair shares a dof
    std::vector<std::pair<int, int>> identified_pairs;
    std::vector<std::vector<VertexTag>> vertex_tags;
    std::vector<CuspTrace> cusp_traces; // one per cusp, ascending k
    std::vector<int> dof_map;           // vertex -> dof, onto 0..num_dofs-1
    int num_dofs = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
};

// Mesh the fundamental domain with target hyperbolic edge length h.  Every
// cusp cut receives exactly n_boundary equal intervals of the cusp
// coordinate (n_boundary must be even and at least 64).  Throws
// std::invalid_argument when h is too coarse for some arc to receive at
// least 8 nodes, and std::runtime_error when identified arcs fail to match.
Mesh triangulate(const SurfaceSpec& spec, double h, int n_boundary = 128);

// Quadrisect every triangle.  New boundary nodes are projected onto the true
// arcs, identified pairs stay matched, and every cusp cut ends up with twice
// as many intervals.
Mesh refine(const Mesh& mesh);

// Smallest interior angle over all triangles, in degrees.
double mesh_min_angle(const Mesh& mesh);

std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const std::string& doc);

} // namespace hsurf
