#include "hsurf/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hsurf {

namespace {

// quadrature rules in barycentric coordinates, weights summing to one
struct QuadRule {
    std::vector<std::array<double, 3>> pts;
    std::vector<double> w;
};

// edge midpoints: exact through quadratic integrands
const QuadRule& midpoint_rule() {
    static const QuadRule r = {{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
                               {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    return r;
}

// six-point rule, exact through quartic integrands
const QuadRule& six_point_rule() {
    static const QuadRule r = [] {
        const double a1 = 0.816847572980459, b1 = 0.091576213509771;
        const double w1 = 0.109951743655322;
        const double a2 = 0.108103018168070, b2 = 0.445948490915965;
        const double w2 = 0.223381589678011;
        QuadRule q;
        q.pts = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                 {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        q.w = {w1, w1, w1, w2, w2, w2};
        return q;
    }();
    return r;
}

// values and gradients of the element shape functions at one barycentric
// point; gradients are combinations of the constant barycentric gradients
void shape_values(ElementOrder order, const std::array<double, 3>& xi,
                  const std::array<std::array<double, 2>, 3>& g, std::vector<double>& N,
                  std::vector<std::array<double, 2>>& grad) {
    if (order == ElementOrder::Linear) {
        N = {xi[0], xi[1], xi[2]};
        grad = {g[0], g[1], g[2]};
        return;
    }
    N.resize(6);
    grad.resize(6);
    for (int i = 0; i < 3; ++i) {
        N[i] = xi[i] * (2.0 * xi[i] - 1.0);
        grad[i] = {(4.0 * xi[i] - 1.0) * g[i][0], (4.0 * xi[i] - 1.0) * g[i][1]};
    }
    const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
    for (int e = 0; e < 3; ++e) {
        const int i = ea[e], j = eb[e];
        N[3 + e] = 4.0 * xi[i] * xi[j];
        grad[3 + e] = {4.0 * (xi[j] * g[i][0] + xi[i] * g[j][0]),
                       4.0 * (xi[j] * g[i][1] + xi[i] * g[j][1])};
    }
}

std::pair<int, int> dof_edge_key(int da, int db) { return {std::min(da, db), std::max(da, db)}; }

// trace basis element for the coefficient sum (conjugated where complex)
cplx coeff_basis(SymmetryReduction red, int m, double x) {
    switch (red) {
        case SymmetryReduction::None:
            return std::exp(cplx(0.0, -2.0 * M_PI * m * x));
        case SymmetryReduction::Even:
            return m == 0 ? 1.0 : std::sqrt(2.0) * std::cos(2.0 * M_PI * m * x);
        case SymmetryReduction::Odd:
            return std::sqrt(2.0) * std::sin(2.0 * M_PI * m * x);
    }
    return 0.0;
}

// the Neumann datum itself (unconjugated)
cplx datum_basis(SymmetryReduction red, int m, double x) {
    return std::conj(coeff_basis(red, m, x));
}

// normalization of the coefficient functional: full-period integrals of a
// reduced eigenfunction count twice and its norm counts the mirror copy
double reduction_factor(SymmetryReduction red) {
    return red == SymmetryReduction::None ? 1.0 : std::sqrt(2.0);
}

int alpha_of(SymmetryReduction red, int J, int k, int m) {
    const auto modes = trace_mode_list(red, J);
    const auto it = std::find(modes.begin(), modes.end(), m);
    if (it == modes.end()) throw std::invalid_argument("trace mode out of range");
    return (k - 1) * static_cast<int>(modes.size()) +
           static_cast<int>(it - modes.begin());
}

void check_truncation(const FemProblem& fp, int J) {
    if (J < 1) throw std::invalid_argument("trace truncation J must be at least 1");
    for (int k = 0; k < fp.num_cusps(); ++k) {
        const int nodes = static_cast<int>(fp.cusp_nodes[k].size());
        // intervals per full period of the cusp coordinate
        const int per_period =
            fp.reduction == SymmetryReduction::None ? nodes : 2 * (nodes - 1);
        if (per_period < 4 * J)
            throw std::invalid_argument(
                "trace truncation J = " + std::to_string(J) +
                " exceeds the cut resolution (need 4J intervals, have " +
                std::to_string(per_period) + ")");
    }
}

}  // namespace

std::vector<int> trace_mode_list(SymmetryReduction red, int J) {
    std::vector<int> modes;
    switch (red) {
        case SymmetryReduction::None:
            for (int m = -J; m <= J; ++m) modes.push_back(m);
            break;
        case SymmetryReduction::Even:
            for (int m = 0; m <= J; ++m) modes.push_back(m);
            break;
        case SymmetryReduction::Odd:
            for (int m = 1; m <= J; ++m) modes.push_back(m);
            break;
    }
    return modes;
}

int NeumannSpectralData::alpha(int k, int m) const { return alpha_of(reduction, J, k, m); }
int AnchorSolve::alpha(int k, int m) const { return alpha_of(reduction, J, k, m); }

FemProblem assemble(const Mesh& mesh, const SurfaceSpec& spec, ElementOrder order) {
    if (mesh.num_vertices() == 0 || mesh.num_triangles() == 0)
        throw std::invalid_argument("assemble: empty mesh");
    if (static_cast<int>(mesh.dof_map.size()) != mesh.num_vertices() || mesh.num_dofs <= 0)
        throw std::invalid_argument("assemble: mesh has no degree-of-freedom map");

    FemProblem fp;
    fp.order = order;
    fp.reduction = spec.reduction;

    // ---- constrained mesh dofs: vertices on Dirichlet walls
    std::vector<char> dof_constrained(mesh.num_dofs, 0);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        for (const auto& tag : mesh.vertex_tags[v])
            if (spec.arc(tag.arc).bc == ArcBC::Dirichlet) dof_constrained[mesh.dof_map[v]] = 1;

    fp.free_of_dof.assign(mesh.num_dofs, -1);
    int nfree = 0;
    for (int d = 0; d < mesh.num_dofs; ++d)
        if (!dof_constrained[d]) fp.free_of_dof[d] = nfree++;

    // ---- quadratic elements: one bubble per edge, keyed by the endpoint
    // dof pair so that glued boundary edges share their midpoint unknown
    std::set<std::pair<int, int>> dirichlet_edges;
    if (order == ElementOrder::Quadratic) {
        for (const auto& e : mesh.boundary_edges)
            if (spec.arc(e.arc).bc == ArcBC::Dirichlet)
                dirichlet_edges.insert(dof_edge_key(mesh.dof_map[e.a], mesh.dof_map[e.b]));
        for (const auto& tri : mesh.triangles)
            for (int c = 0; c < 3; ++c) {
                const auto key =
                    dof_edge_key(mesh.dof_map[tri[c]], mesh.dof_map[tri[(c + 1) % 3]]);
                fp.edge_free.emplace(key, -1);
            }
        for (auto& [key, idx] : fp.edge_free)
            if (!dirichlet_edges.count(key)) idx = nfree++;
    }
    fp.n = nfree;

    // ---- element loops
    const QuadRule& mass_rule =
        order == ElementOrder::Linear ? midpoint_rule() : six_point_rule();
    const QuadRule& stiff_rule = midpoint_rule();  // gradients are linear at most

    std::vector<Eigen::Triplet<double>> tk, tm;
    std::vector<int> ldof;
    std::vector<double> N;
    std::vector<std::array<double, 2>> grad;
    for (const auto& tri : mesh.triangles) {
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        const double det =
            (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        if (!(det > 0.0)) throw std::invalid_argument("assemble: degenerate or flipped triangle");
        const double area = 0.5 * det;
        // constant gradients of the barycentric coordinates
        const std::array<std::array<double, 2>, 3> g = {
            {{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
             {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
             {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}}};

        ldof.clear();
        for (int c = 0; c < 3; ++c) ldof.push_back(fp.free_of_dof[mesh.dof_map[tri[c]]]);
        if (order == ElementOrder::Quadratic)
            for (int c = 0; c < 3; ++c)
                ldof.push_back(fp.edge_free.at(
                    dof_edge_key(mesh.dof_map[tri[c]], mesh.dof_map[tri[(c + 1) % 3]])));
        const int nl = static_cast<int>(ldof.size());
        std::vector<double> Ke(nl * nl, 0.0), Me(nl * nl, 0.0);

        for (size_t q = 0; q < stiff_rule.pts.size(); ++q) {
            shape_values(order, stiff_rule.pts[q], g, N, grad);
            const double wq = stiff_rule.w[q] * area;
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j <= i; ++j) {
                    const double val =
                        wq * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
                    Ke[i * nl + j] += val;
                    if (i != j) Ke[j * nl + i] += val;
                }
        }
        for (size_t q = 0; q < mass_rule.pts.size(); ++q) {
            const auto& xi = mass_rule.pts[q];
            const double xq = xi[0] * p0[0] + xi[1] * p1[0] + xi[2] * p2[0];
            const double yq = xi[0] * p0[1] + xi[1] * p1[1] + xi[2] * p2[1];
            const double ephi = spec.conformal_weight(xq, yq);
            if (!(ephi > 0.0))
                throw std::domain_error(
                    "assemble: non-positive conformal factor at (x, y) = (" +
                    std::to_string(xq) + ", " + std::to_string(yq) + ")");
            const double wgt = ephi / (yq * yq);
            const double pot = spec.potential(xq, yq);
            shape_values(order, xi, g, N, grad);
            const double wq = mass_rule.w[q] * area;
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j <= i; ++j) {
                    const double mij = wq * wgt * N[i] * N[j];
                    Me[i * nl + j] += mij;
                    Ke[i * nl + j] += pot * mij;
                    if (i != j) {
                        Me[j * nl + i] += mij;
                        Ke[j * nl + i] += pot * mij;
                    }
                }
        }

        for (int i = 0; i < nl; ++i) {
            if (ldof[i] < 0) continue;
            for (int j = 0; j < nl; ++j) {
                if (ldof[j] < 0) continue;
                tk.emplace_back(ldof[i], ldof[j], Ke[i * nl + j]);
                tm.emplace_back(ldof[i], ldof[j], Me[i * nl + j]);
            }
        }
    }
    fp.K.resize(fp.n, fp.n);
    fp.Mmat.resize(fp.n, fp.n);
    fp.K.setFromTriplets(tk.begin(), tk.end());
    fp.Mmat.setFromTriplets(tm.begin(), tm.end());
    fp.K.makeCompressed();
    fp.Mmat.makeCompressed();

    // ---- cusp-cut trace quadrature: trapezoid on the vertex values for
    // linear elements; composite Simpson including the edge-midpoint
    // unknowns for quadratic ones, so the full trace space carries loads
    // and coefficients (leaving the midpoints out would silently drop the
    // bubble components and clamp the boundary accuracy to second order)
    for (const auto& c : spec.cusps) fp.a.push_back(c.a);
    for (const auto& tr : mesh.cusp_traces) {
        if (tr.vertices.size() < 2) throw std::invalid_argument("assemble: empty cusp trace");
        const int n_int = static_cast<int>(tr.vertices.size()) - 1;
        const double span = tr.x.back() - tr.x.front();
        const double dx = span / n_int;
        const bool wraps =
            mesh.dof_map[tr.vertices.front()] == mesh.dof_map[tr.vertices.back()];
        std::vector<TraceNode> nodes;
        if (order == ElementOrder::Linear) {
            const int count = wraps ? n_int : n_int + 1;
            for (int i = 0; i < count; ++i) {
                TraceNode node;
                node.dof = fp.free_of_dof[mesh.dof_map[tr.vertices[i]]];
                node.x = tr.x[i];
                node.w = (!wraps && (i == 0 || i == n_int)) ? 0.5 * dx : dx;
                nodes.push_back(node);
            }
        } else {
            for (int i = 0; i < n_int; ++i) {
                TraceNode v;
                v.dof = fp.free_of_dof[mesh.dof_map[tr.vertices[i]]];
                v.x = tr.x[i];
                v.w = (!wraps && i == 0) ? dx / 6.0 : dx / 3.0;
                nodes.push_back(v);
                const auto key = dof_edge_key(mesh.dof_map[tr.vertices[i]],
                                              mesh.dof_map[tr.vertices[i + 1]]);
                const auto it = fp.edge_free.find(key);
                if (it == fp.edge_free.end())
                    throw std::invalid_argument(
                        "assemble: a cusp-cut interval is not a mesh edge");
                TraceNode m;
                m.dof = it->second;
                m.x = 0.5 * (tr.x[i] + tr.x[i + 1]);
                m.w = 2.0 * dx / 3.0;
                nodes.push_back(m);
            }
            if (!wraps) {
                TraceNode v;
                v.dof = fp.free_of_dof[mesh.dof_map[tr.vertices[n_int]]];
                v.x = tr.x[n_int];
                v.w = dx / 6.0;
                nodes.push_back(v);
            }
        }
        fp.cusp_nodes.push_back(std::move(nodes));
        // intervals per full period of the cusp coordinate (a reduced trace
        // covers half the period)
        fp.trace_intervals.push_back(fp.reduction == SymmetryReduction::None ? n_int
                                                                             : 2 * n_int);
    }
    if (fp.cusp_nodes.size() != fp.a.size())
        throw std::invalid_argument("assemble: mesh traces do not match the cusp list");
    return fp;
}

GeneralizedEigs solve_spectrum(const FemProblem& fp, int n) {
    return generalized_eigs(fp.K, fp.Mmat, std::min(n, fp.n));
}

NeumannSpectralData extract_boundary_data(const FemProblem& fp, const GeneralizedEigs& eigs,
                                          int J) {
    check_truncation(fp, J);
    NeumannSpectralData data;
    data.reduction = fp.reduction;
    data.J = J;
    data.p = fp.num_cusps();
    data.a = fp.a;
    const int nev = static_cast<int>(eigs.values.size());
    for (int j = 0; j < nev; ++j) data.eigenvalues.push_back(eigs.values[j]);

    const auto modes = trace_mode_list(fp.reduction, J);
    const int mpc = static_cast<int>(modes.size());
    data.coeffs = Eigen::MatrixXcd::Zero(nev, data.p * mpc);
    const double factor = reduction_factor(fp.reduction);
    for (int k = 0; k < data.p; ++k) {
        const double scale = factor / fp.a[k];
        for (const auto& node : fp.cusp_nodes[k]) {
            if (node.dof < 0) continue;  // constrained to zero
            for (int i = 0; i < mpc; ++i) {
                const cplx basis = scale * node.w * coeff_basis(fp.reduction, modes[i], node.x);
                for (int j = 0; j < nev; ++j)
                    data.coeffs(j, k * mpc + i) += eigs.vectors(node.dof, j) * basis;
            }
        }
    }
    return data;
}

AnchorSolve direct_nd_at(const FemProblem& fp, cplx s0, int J) {
    check_truncation(fp, J);
    AnchorSolve out;
    out.s0 = s0;
    out.lambda0 = s0 * (1.0 - s0);
    out.reduction = fp.reduction;
    out.J = J;
    out.p = fp.num_cusps();
    out.a = fp.a;

    const auto modes = trace_mode_list(fp.reduction, J);
    const int mpc = static_cast<int>(modes.size());
    const int na = out.p * mpc;

    // shifted complex system and one load column per trace basis datum;
    // loads and traces use the same trapezoid nodes, so the response matrix
    // is exactly the eigenpair series summed over the whole discrete spectrum
    SparseComplexMatrix S =
        fp.K.cast<cplx>() - (fp.Mmat.cast<cplx>() * out.lambda0).eval();
    S.makeCompressed();
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(fp.n, na);
    const double factor = reduction_factor(fp.reduction);
    for (int k = 0; k < out.p; ++k) {
        const double scale = factor / fp.a[k];
        for (const auto& node : fp.cusp_nodes[k]) {
            if (node.dof < 0) continue;
            for (int i = 0; i < mpc; ++i)
                B(node.dof, k * mpc + i) +=
                    scale * node.w * datum_basis(fp.reduction, modes[i], node.x);
        }
    }

    Eigen::MatrixXcd X;
    try {
        X = solve_sparse_complex_multi(S, B);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "direct_nd_at: shifted system is singular to working precision; "
            "s0 (1 - s0) sits on the interior spectrum, move the anchor");
    }
    const double scale_b = B.norm();
    const double resid = (S * X - B).norm();
    if (!X.allFinite() || resid > 1e-8 * std::max(1.0, scale_b))
        throw std::runtime_error(
            "direct_nd_at: shifted solve lost all accuracy (residual " +
            std::to_string(resid) + "); s0 (1 - s0) is too close to the interior "
            "spectrum, move the anchor");

    out.nd = Eigen::MatrixXcd::Zero(na, na);
    for (int k = 0; k < out.p; ++k) {
        for (const auto& node : fp.cusp_nodes[k]) {
            if (node.dof < 0) continue;
            for (int i = 0; i < mpc; ++i) {
                const cplx basis =
                    factor * node.w * coeff_basis(fp.reduction, modes[i], node.x);
                out.nd.row(k * mpc + i) += basis * X.row(node.dof);
            }
        }
    }
    return out;
}

AnchorSolve direct_nd_near(const FemProblem& fp,
                           const std::vector<double>& eigenvalues, cplx s0,
                           int J, double min_dist) {
    auto spectral_gap = [&](cplx s) {
        const cplx lam = s * (1.0 - s);
        double gap = std::numeric_limits<double>::infinity();
        for (double ev : eigenvalues) gap = std::min(gap, std::abs(lam - ev));
        return gap;
    };
    cplx s = s0;
    const double step = std::max(min_dist / (4.0 * std::max(1.0, std::abs(2.0 * s0 - 1.0))), 1e-4);
    int tries = 0;
    while (spectral_gap(s) < min_dist) {
        s += cplx(0.0, step);
        if (++tries > 10000)
            throw std::runtime_error(
                "direct_nd_near: could not clear the spectrum near the requested anchor");
    }
    return direct_nd_at(fp, s, J);
}

}  // namespace hsurf
