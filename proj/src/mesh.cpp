#include "hsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <json.hpp>

namespace hsurf {

namespace {

using json = nlohmann::json;

constexpr double kMatchTol = 1e-9; // joints and identified images must agree this well

// Sampling coordinate in which boundary maps act affinely: hyperbolic
// arclength on geodesic arcs, the cusp coordinate on horocycle segments.
double samp_coord(const BoundaryArc& a, double p) {
    return a.kind == ArcKind::HorocycleSegment ? p : a.arclen_coord(p);
}

double samp_param(const BoundaryArc& a, double lam) {
    return a.kind == ArcKind::HorocycleSegment ? lam : a.param_from_arclen(lam);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b] = a;
    }
};

// One sampled node on a boundary arc, before mesh vertices exist.
struct ArcNode {
    double param;
    cplx z;
};

// A glued node pair addressed by (arc tag, parameter); resolved to vertex
// indices once the chain vertices are created.
struct PairRef {
    std::string arc_a;
    double param_a;
    std::string arc_b;
    double param_b;
};

double dist(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    return std::hypot(p[0] - q[0], p[1] - q[1]);
}

// ---------------------------------------------------------------------------
// Bottom chain sampling

struct ChainPlan {
    // per bottom arc tag: nodes ascending in the arc parameter
    std::map<std::string, std::vector<ArcNode>> nodes;
    std::vector<PairRef> pairs;
};

const CuspSpec& cusp_of(const SurfaceSpec& spec, int k) {
    for (const auto& c : spec.cusps)
        if (c.k == k) return c;
    throw std::invalid_argument("triangulate: arc references an unknown cusp");
}

void require_at_least(int n, int minimum, const std::string& tag) {
    if (n < minimum)
        throw std::invalid_argument("triangulate: arc '" + tag + "' would receive " +
                                    std::to_string(n + 1) + " nodes; decrease h");
}

// Uniform subdivision of [lo, hi] in the sampling coordinate.
std::vector<ArcNode> sample_arc(const BoundaryArc& arc, double p_lo, double p_hi, int n) {
    const double la = samp_coord(arc, p_lo), lb = samp_coord(arc, p_hi);
    std::vector<ArcNode> out;
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double p = i == 0   ? p_lo
                         : i == n ? p_hi
                                  : samp_param(arc, la + (lb - la) * i / n);
        out.push_back({p, arc.point(p)});
    }
    return out;
}

// Sample the source range of one identification piece and append the exact
// images to the target arc's node list.
void sample_piece(const SurfaceSpec& spec, const BoundaryArc& arc, const Identification& id,
                  double h, ChainPlan& plan) {
    const BoundaryArc& target = spec.arc(id.target);
    const double la = samp_coord(arc, id.source_lo), lb = samp_coord(arc, id.source_hi);
    const int n = std::max(2, static_cast<int>(std::ceil(std::abs(lb - la) / h)));

    // the map is an isometry, so it is affine between the sampling coordinates
    const double qa = target.param_of(id.map.apply(arc.point(id.source_lo)), kMatchTol);
    const double qb = target.param_of(id.map.apply(arc.point(id.source_hi)), kMatchTol);
    const double ma = samp_coord(target, qa), mb = samp_coord(target, qb);

    auto& src_nodes = plan.nodes[arc.tag];
    auto& tgt_nodes = plan.nodes[target.tag];
    for (int i = 0; i <= n; ++i) {
        const double lam = la + (lb - la) * i / n;
        const double p = i == 0 ? id.source_lo : i == n ? id.source_hi : samp_param(arc, lam);
        const cplx z = arc.point(p);
        const cplx zt = id.map.apply(z);
        const double q = samp_param(target, ma + (mb - ma) * i / n);
        if (std::abs(target.point(q) - zt) > kMatchTol)
            throw std::runtime_error("triangulate: identified arcs '" + arc.tag + "' -> '" +
                                     id.target + "' fail to match");
        src_nodes.push_back({p, z});
        tgt_nodes.push_back({q, zt});
        plan.pairs.push_back({arc.tag, p, target.tag, q});
    }
}

// Sample an arc glued to itself: nodes on one half of the arc, mirror images
// on the other, with the fixed point of the involution as a shared node.
void sample_self_glued(const BoundaryArc& arc, const Identification& id, double h,
                       ChainPlan& plan) {
    const double la = samp_coord(arc, arc.lo), lb = samp_coord(arc, arc.hi);
    const double mid = 0.5 * (la + lb); // the involution swaps the ends, so this is fixed
    const int n = static_cast<int>(std::ceil(std::abs(lb - mid) / h));
    require_at_least(2 * std::max(n, 1), 8, arc.tag);

    auto& nodes = plan.nodes[arc.tag];
    const double pm = samp_param(arc, mid);
    nodes.push_back({pm, arc.point(pm)});
    for (int i = 1; i <= n; ++i) {
        const double p = i == n ? arc.hi : samp_param(arc, mid + (lb - mid) * i / n);
        const cplx z = arc.point(p);
        const cplx zm = id.map.apply(z);
        const double q = samp_param(arc, mid - (lb - mid) * i / n);
        if (std::abs(arc.point(q) - zm) > kMatchTol)
            throw std::runtime_error("triangulate: self-glued arc '" + arc.tag +
                                     "' fails to match its mirror image");
        nodes.push_back({p, z});
        nodes.push_back({q, zm});
        plan.pairs.push_back({arc.tag, p, arc.tag, q});
    }
}

ChainPlan sample_bottom_chain(const SurfaceSpec& spec, double h, int n_boundary) {
    ChainPlan plan;

    // classify bottom arcs: targets of a non-trivial identification are
    // filled by images of their sources
    std::set<std::string> image_arcs;
    for (const auto& id : spec.identifications) {
        if (id.source == id.target) continue;
        const BoundaryArc& t = spec.arc(id.target);
        if (t.role == ArcRole::Bottom) image_arcs.insert(id.target);
    }

    for (const auto& arc : spec.arcs) {
        if (arc.role != ArcRole::Bottom) continue;
        if (arc.kind == ArcKind::HorocycleSegment) {
            const CuspSpec& c = cusp_of(spec, arc.cusp);
            const double frac = (arc.hi - arc.lo) / (c.x_hi - c.x_lo);
            const int n = static_cast<int>(std::lround(n_boundary * frac));
            auto nodes = sample_arc(arc, arc.lo, arc.hi, n);
            auto& dst = plan.nodes[arc.tag];
            dst.insert(dst.end(), nodes.begin(), nodes.end());
            continue;
        }
        if (image_arcs.count(arc.tag)) continue;

        std::vector<const Identification*> pieces;
        for (const auto& id : spec.identifications)
            if (id.source == arc.tag) pieces.push_back(&id);

        if (pieces.empty()) {
            const int n = static_cast<int>(std::ceil(arc.hyperbolic_length() / h));
            require_at_least(n, 8, arc.tag);
            plan.nodes[arc.tag] = sample_arc(arc, arc.lo, arc.hi, n);
        } else if (pieces.size() == 1 && pieces[0]->target == arc.tag) {
            sample_self_glued(arc, *pieces[0], h, plan);
        } else {
            std::sort(pieces.begin(), pieces.end(),
                      [](const Identification* a, const Identification* b) {
                          return a->source_lo < b->source_lo;
                      });
            double cursor = arc.lo;
            for (const Identification* id : pieces) {
                if (std::abs(id->source_lo - cursor) > kMatchTol)
                    throw std::runtime_error("triangulate: gluing pieces of arc '" + arc.tag +
                                             "' do not cover it");
                sample_piece(spec, arc, *id, h, plan);
                cursor = id->source_hi;
            }
            if (std::abs(cursor - arc.hi) > kMatchTol)
                throw std::runtime_error("triangulate: gluing pieces of arc '" + arc.tag +
                                         "' do not cover it");
        }
    }

    // order every list by parameter and drop duplicates (piece junctions are
    // emitted once per piece)
    for (auto& [tag, nodes] : plan.nodes) {
        const BoundaryArc& arc = spec.arc(tag);
        std::sort(nodes.begin(), nodes.end(),
                  [](const ArcNode& a, const ArcNode& b) { return a.param < b.param; });
        std::vector<ArcNode> unique;
        for (const auto& nd : nodes) {
            if (!unique.empty() &&
                std::abs(samp_coord(arc, nd.param) - samp_coord(arc, unique.back().param)) <= 1e-10)
                continue;
            unique.push_back(nd);
        }
        nodes = std::move(unique);
        require_at_least(static_cast<int>(nodes.size()) - 1, 8, tag);
        if (std::abs(nodes.front().param - arc.lo) > kMatchTol ||
            std::abs(nodes.back().param - arc.hi) > kMatchTol)
            throw std::runtime_error("triangulate: images do not cover arc '" + tag + "'");
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Row ladder

struct Builder {
    const SurfaceSpec& spec;
    Mesh mesh;
    std::map<std::string, std::vector<int>> arc_vertices; // ascending arc parameter

    explicit Builder(const SurfaceSpec& s) : spec(s) {}

    int add_vertex(cplx z) {
        mesh.vertices.push_back({z.real(), z.imag()});
        mesh.vertex_tags.emplace_back();
        return mesh.num_vertices() - 1;
    }
    void tag(int v, const std::string& arc, double param) {
        for (const auto& t : mesh.vertex_tags[v])
            if (t.arc == arc) return;
        mesh.vertex_tags[v].push_back({arc, param});
    }
    void tri(int a, int b, int c) { mesh.triangles.push_back({a, b, c}); }
};

// Find the vertex for a (tag, param) address created from a chain plan.
int vertex_at(const Builder& b, const SurfaceSpec& spec, const std::string& tag, double param) {
    const BoundaryArc& arc = spec.arc(tag);
    const double lam = samp_coord(arc, param);
    const auto& ids = b.arc_vertices.at(tag);
    int best = -1;
    double best_d = 1e300;
    for (int v : ids) {
        for (const auto& t : b.mesh.vertex_tags[v]) {
            if (t.arc != tag) continue;
            const double d = std::abs(samp_coord(arc, t.param) - lam);
            if (d < best_d) {
                best_d = d;
                best = v;
            }
        }
    }
    if (best < 0 || best_d > 1e-8)
        throw std::runtime_error("triangulate: lost track of a glued node on arc '" + tag + "'");
    return best;
}

double min_triangle_angle_deg(const Mesh& m, const std::array<int, 3>& t) {
    double worst = 180.0;
    for (int k = 0; k < 3; ++k) {
        const auto& a = m.vertices[t[k]];
        const auto& b = m.vertices[t[(k + 1) % 3]];
        const auto& c = m.vertices[t[(k + 2) % 3]];
        const double ux = b[0] - a[0], uy = b[1] - a[1];
        const double vx = c[0] - a[0], vy = c[1] - a[1];
        const double dot = ux * vx + uy * vy;
        const double cr = ux * vy - uy * vx;
        worst = std::min(worst, std::atan2(std::abs(cr), dot) * 180.0 / M_PI);
    }
    return worst;
}

void verify_mesh(const Mesh& m) {
    for (const auto& v : m.vertices)
        if (!(v[1] > 0.0)) throw std::runtime_error("mesh vertex left the upper half-plane");
    for (const auto& t : m.triangles) {
        const auto& a = m.vertices[t[0]];
        const auto& b = m.vertices[t[1]];
        const auto& c = m.vertices[t[2]];
        const double area2 =
            (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if (!(area2 > 0.0)) throw std::runtime_error("self-intersecting geometry in the mesh");
    }
    for (const auto& [u, v] : m.identified_pairs) {
        const cplx zu(m.vertices[u][0], m.vertices[u][1]);
        const cplx zv(m.vertices[v][0], m.vertices[v][1]);
        double best = 1e300;
        for (const auto& id : m.spec.identifications) {
            best = std::min(best, std::abs(id.map.apply(zu) - zv));
            best = std::min(best, std::abs(id.map.apply(zv) - zu));
        }
        if (best > 1e-10)
            throw std::runtime_error("failed matching of identified boundary nodes");
    }
}

void finalize_dofs(Mesh& m) {
    UnionFind uf(m.num_vertices());
    for (const auto& [u, v] : m.identified_pairs) uf.unite(u, v);
    m.dof_map.assign(m.num_vertices(), -1);
    std::unordered_map<int, int> root_dof;
    int next = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
        const int r = uf.find(v);
        auto it = root_dof.find(r);
        if (it == root_dof.end()) it = root_dof.emplace(r, next++).first;
        m.dof_map[v] = it->second;
    }
    m.num_dofs = next;
}

// Stitch two horizontal vertex rows (upper above lower, both ascending in x)
// with counterclockwise triangles.  Pointers advance so the fractional
// positions stay aligned, which keeps the strip untwisted even where rows
// hug a steep floor; ties pick the shorter diagonal.
void stitch_rows(Builder& b, const std::vector<int>& up, const std::vector<int>& lo) {
    size_t i = 0, j = 0;
    const auto& vs = b.mesh.vertices;
    const double nu = static_cast<double>(up.size()) - 1.0;
    const double nl = static_cast<double>(lo.size()) - 1.0;
    const double eps = 0.25 * std::min(1.0 / std::max(nu, 1.0), 1.0 / std::max(nl, 1.0));
    while (i + 1 < up.size() || j + 1 < lo.size()) {
        bool advance_upper;
        if (i + 1 >= up.size())
            advance_upper = false;
        else if (j + 1 >= lo.size())
            advance_upper = true;
        else {
            const double qu = (i + 1) / nu, ql = (j + 1) / nl;
            if (qu < ql - eps)
                advance_upper = true;
            else if (ql < qu - eps)
                advance_upper = false;
            else
                advance_upper = dist(vs[up[i + 1]], vs[lo[j]]) <= dist(vs[lo[j + 1]], vs[up[i]]);
        }
        if (advance_upper) {
            b.tri(up[i], lo[j], up[i + 1]);
            ++i;
        } else {
            b.tri(up[i], lo[j], lo[j + 1]);
            ++j;
        }
    }
}

const BoundaryArc* side_arc_at(const SurfaceSpec& spec, double x) {
    for (const auto& a : spec.arcs)
        if (a.role == ArcRole::Side && std::abs(a.x - x) < 1e-12) return &a;
    return nullptr;
}

const BoundaryArc& top_arc(const SurfaceSpec& spec) {
    for (const auto& a : spec.arcs)
        if (a.role == ArcRole::Top) return a;
    throw std::invalid_argument("triangulate: the domain has no cusp cut at the top");
}

void build_cusp_traces(Mesh& m, const Builder& b, int n_boundary) {
    for (const auto& c : m.spec.cusps) {
        CuspTrace tr;
        tr.k = c.k;
        std::vector<std::pair<double, int>> entries;
        for (const auto& arc : m.spec.arcs) {
            if (arc.kind != ArcKind::HorocycleSegment || arc.cusp != c.k) continue;
            const auto& ids = b.arc_vertices.at(arc.tag);
            for (int v : ids) {
                for (const auto& t : b.mesh.vertex_tags[v])
                    if (t.arc == arc.tag) entries.push_back({t.param, v});
            }
        }
        std::sort(entries.begin(), entries.end());
        const double dx = (c.x_hi - c.x_lo) / n_boundary;
        for (const auto& [x, v] : entries) {
            if (!tr.x.empty() && std::abs(x - tr.x.back()) <= 0.5 * dx) continue;
            tr.x.push_back(x);
            tr.vertices.push_back(v);
        }
        if (static_cast<int>(tr.x.size()) != n_boundary + 1)
            throw std::runtime_error("triangulate: cusp cut lost nodes");
        for (int i = 0; i <= n_boundary; ++i)
            if (std::abs(tr.x[i] - (c.x_lo + i * dx)) > kMatchTol)
                throw std::runtime_error("triangulate: cusp cut nodes are not uniform");
        m.cusp_traces.push_back(std::move(tr));
    }
    std::sort(m.cusp_traces.begin(), m.cusp_traces.end(),
              [](const CuspTrace& a, const CuspTrace& b) { return a.k < b.k; });
}

} // namespace

// ---------------------------------------------------------------------------

// smallest interior angle of a triangle in radians, or -1 if it is folded
double tri_min_angle_rad(const Mesh& m, const std::array<int, 3>& tri) {
    double best = 1e300;
    for (int c = 0; c < 3; ++c) {
        const auto& p0 = m.vertices[tri[c]];
        const auto& p1 = m.vertices[tri[(c + 1) % 3]];
        const auto& p2 = m.vertices[tri[(c + 2) % 3]];
        const double ax = p1[0] - p0[0], ay = p1[1] - p0[1];
        const double bx = p2[0] - p0[0], by = p2[1] - p0[1];
        const double cr = ax * by - ay * bx;
        if (!(cr > 0.0)) return -1.0;
        best = std::min(best, std::atan2(cr, ax * bx + ay * by));
    }
    return best;
}

int64_t vertex_pair_key(int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    return static_cast<int64_t>(lo) * (1LL << 31) + hi;
}

// Alternate angle-improving diagonal flips (boundary edges frozen, vertex
// positions untouched) with guarded centroid smoothing of interior vertices;
// neither move can break gluing, tags, or traces.
void improve_mesh(Mesh& m) {
    std::set<int64_t> frozen;
    for (const auto& e : m.boundary_edges) frozen.insert(vertex_pair_key(e.a, e.b));

    for (int pass = 0; pass < 3; ++pass) {
        // ---- diagonal flips
        std::unordered_map<int64_t, std::vector<int>> tris_of;
        for (size_t t = 0; t < m.triangles.size(); ++t)
            for (int c = 0; c < 3; ++c)
                tris_of[vertex_pair_key(m.triangles[t][c], m.triangles[t][(c + 1) % 3])]
                    .push_back(static_cast<int>(t));
        std::vector<char> dirty(m.triangles.size(), 0);
        for (const auto& [k, ts] : tris_of) {
            if (ts.size() != 2 || frozen.count(k)) continue;
            const int t1 = ts[0], t2 = ts[1];
            if (dirty[t1] || dirty[t2]) continue;
            int u = -1, v = -1, c1 = -1, c2 = -1;
            for (int c = 0; c < 3; ++c) {
                const auto& tri = m.triangles[t1];
                if (vertex_pair_key(tri[c], tri[(c + 1) % 3]) == k) {
                    u = tri[c];
                    v = tri[(c + 1) % 3];
                    c1 = tri[(c + 2) % 3];
                }
            }
            for (int c = 0; c < 3; ++c) {
                const auto& tri = m.triangles[t2];
                if (tri[c] == v && tri[(c + 1) % 3] == u) c2 = tri[(c + 2) % 3];
            }
            if (c1 < 0 || c2 < 0) continue;
            const double q_old = std::min(tri_min_angle_rad(m, m.triangles[t1]),
                                          tri_min_angle_rad(m, m.triangles[t2]));
            const std::array<int, 3> n1 = {u, c2, c1}, n2 = {c2, v, c1};
            const double q_new =
                std::min(tri_min_angle_rad(m, n1), tri_min_angle_rad(m, n2));
            if (q_new > q_old + 1e-12) {
                m.triangles[t1] = n1;
                m.triangles[t2] = n2;
                dirty[t1] = dirty[t2] = 1;
            }
        }

        // ---- guarded smoothing, two sweeps
        std::vector<std::vector<int>> incident(m.vertices.size());
        for (size_t t = 0; t < m.triangles.size(); ++t)
            for (int c = 0; c < 3; ++c)
                incident[m.triangles[t][c]].push_back(static_cast<int>(t));
        auto local_quality = [&](int v) {
            double best = 1e300;
            for (int t : incident[v]) best = std::min(best, tri_min_angle_rad(m, m.triangles[t]));
            return best;
        };
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (int v = 0; v < static_cast<int>(m.vertices.size()); ++v) {
                if (!m.vertex_tags[v].empty() || incident[v].empty()) continue;
                double sx = 0.0, sy = 0.0;
                int n = 0;
                for (int t : incident[v])
                    for (int c = 0; c < 3; ++c) {
                        const int u2 = m.triangles[t][c];
                        if (u2 == v) continue;
                        sx += m.vertices[u2][0];
                        sy += m.vertices[u2][1];
                        ++n;
                    }
                if (n == 0) continue;
                const double before = local_quality(v);
                const std::array<double, 2> old = m.vertices[v];
                for (double alpha : {1.0, 0.5, 0.25}) {
                    m.vertices[v] = {old[0] + alpha * (sx / n - old[0]),
                                     old[1] + alpha * (sy / n - old[1])};
                    if (local_quality(v) > before) break;
                    m.vertices[v] = old;
                }
            }
        }
    }
}

// thrown internally when the straight point-blend rows fold over a floor
// that plunges almost vertically; the caller retries with graph-surface rows
struct FoldDetected {};

static Mesh triangulate_attempt(const SurfaceSpec& spec, double h, int n_boundary,
                                bool graph_rows) {
    Builder b(spec);
    b.mesh.spec = spec;
    b.mesh.h = h;
    b.mesh.n_boundary = n_boundary;

    // ---- bottom chain vertices, walking the arcs in ascending x
    const ChainPlan plan = sample_bottom_chain(spec, h, n_boundary);
    std::vector<int> chain;
    for (const auto& arc : spec.arcs) {
        if (arc.role != ArcRole::Bottom) continue;
        const auto& nodes = plan.nodes.at(arc.tag);
        const bool fwd = nodes.front().z.real() < nodes.back().z.real();
        auto& ids = b.arc_vertices[arc.tag];
        ids.assign(nodes.size(), -1);
        const int n = static_cast<int>(nodes.size());
        for (int step = 0; step < n; ++step) {
            const int k = fwd ? step : n - 1 - step; // index in ascending-parameter order
            const ArcNode& nd = nodes[k];
            int v;
            if (step == 0 && !chain.empty()) {
                v = chain.back();
                const cplx prev(b.mesh.vertices[v][0], b.mesh.vertices[v][1]);
                if (std::abs(prev - nd.z) > kMatchTol)
                    throw std::runtime_error("triangulate: bottom arcs do not join at '" +
                                             arc.tag + "'");
            } else {
                v = b.add_vertex(nd.z);
                chain.push_back(v);
            }
            ids[k] = v;
            b.tag(v, arc.tag, nd.param);
        }
    }

    // glued node pairs on the bottom chain
    for (const auto& pr : plan.pairs) {
        const int u = vertex_at(b, spec, pr.arc_a, pr.param_a);
        const int v = vertex_at(b, spec, pr.arc_b, pr.param_b);
        if (u != v) b.mesh.identified_pairs.push_back({u, v});
    }

    // ---- row ladder between the chain and the cusp cut
    //
    // Rows live on the graph surfaces y = (1 - t) * floor(x) + t * a, so a row
    // can never cross the floor no matter how steeply the floor plunges; the
    // x-distribution of each row blends the chain's node abscissae into the
    // uniform top grid.
    const BoundaryArc& top = top_arc(spec);
    const double a = top.height;
    const double x_lo = spec.x_lo, width = spec.x_hi - spec.x_lo;
    const int n_chain = static_cast<int>(chain.size()) - 1;

    std::vector<double> cxs(chain.size()), cys(chain.size());
    for (size_t i = 0; i < chain.size(); ++i) {
        cxs[i] = b.mesh.vertices[chain[i]][0];
        cys[i] = b.mesh.vertices[chain[i]][1];
    }
    const double floor_max = *std::max_element(cys.begin(), cys.end());
    if (!(a > floor_max))
        throw std::invalid_argument("triangulate: the cusp cut must lie above the floor");

    // floor height at abscissa x, interpolated along the chain polyline
    auto floor_y = [&](double x) {
        if (x <= cxs.front()) return cys.front();
        if (x >= cxs.back()) return cys.back();
        const auto it = std::upper_bound(cxs.begin(), cxs.end(), x);
        const size_t i1 = static_cast<size_t>(it - cxs.begin());
        const double dx = cxs[i1] - cxs[i1 - 1];
        if (!(dx > 0.0)) return cys[i1 - 1];
        const double f = (x - cxs[i1 - 1]) / dx;
        return cys[i1 - 1] + f * (cys[i1] - cys[i1 - 1]);
    };
    // chain node interpolated at fractional index q in [0, 1]
    auto chain_x_at = [&](double q) {
        const double r = std::clamp(q, 0.0, 1.0) * n_chain;
        const int i0 = std::min(static_cast<int>(r), n_chain - 1);
        const double f = r - i0;
        return cxs[i0] + f * (cxs[i0 + 1] - cxs[i0]);
    };
    auto chain_y_at = [&](double q) {
        const double r = std::clamp(q, 0.0, 1.0) * n_chain;
        const int i0 = std::min(static_cast<int>(r), n_chain - 1);
        const double f = r - i0;
        return cys[i0] + f * (cys[i0 + 1] - cys[i0]);
    };
    // The transverse node distribution relaxes from the chain's clustering to
    // the uniform top grid faster than the height does (cubic ease), so the
    // tight clusters a steep flank stamps into the chain widen within a few
    // rows instead of propagating shear far up the ladder.
    auto ease = [](double t) {
        const double u = 1.0 - t;
        return 1.0 - u * u * u;
    };
    auto row_count_at = [&](double t) {
        return std::max(1, static_cast<int>(std::lround((1.0 - t) * n_chain + t * n_boundary)));
    };
    auto row_x_at = [&](double q, double t) {
        const double s = ease(t);
        return (1.0 - s) * chain_x_at(q) + s * (x_lo + q * width);
    };

    // Vertical step from the current row's segment statistics: stay inside
    // the aspect band that keeps both the shortest and the longest segment
    // away from sliver angles; when no uniform step can (wildly graded rows,
    // e.g. a floor that almost touches the real axis), take the geometric
    // compromise but never collapse below a third of the nominal step.
    auto vertical_step = [&](double t) {
        const int count = row_count_at(t);
        double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0, ysum = 0.0;
        double xprev = 0.0, yprev = 0.0;
        for (int i = 0; i <= count; ++i) {
            const double q = static_cast<double>(i) / count;
            const double x = row_x_at(q, t);
            const double y = graph_rows ? (1.0 - t) * floor_y(x) + t * a
                                        : (1.0 - t) * chain_y_at(q) + t * a;
            ysum += y;
            if (i > 0) {
                wmin = std::min(wmin, x - xprev);
                wmax = std::max(wmax, std::hypot(x - xprev, y - yprev));
            }
            xprev = x;
            yprev = y;
        }
        const double ybar = ysum / (count + 1);
        const double v_hi = 1.7 * wmin, v_lo = wmax / 1.7;
        if (v_lo <= v_hi) return std::clamp(h * ybar, v_lo, v_hi);
        return std::max(std::sqrt(v_lo * v_hi), h * ybar / 6.0);
    };

    // Descending heights t in (0, 1]; t = 1 is the cusp cut, t = 0 the chain.
    // Each step re-spaces the remaining interval into equal gaps so the final
    // gap onto the chain never degenerates or overshoots, and a step may grow
    // only gently over its predecessor so the gaps vary smoothly even where
    // the step estimate jitters.
    std::vector<double> levels = {1.0};
    {
        double t = 1.0, dt_prev = 0.0;
        while (true) {
            double dt = vertical_step(t) / (a - floor_max);
            if (dt_prev > 0.0) dt = std::min(dt, 1.25 * dt_prev);
            dt_prev = dt;
            const long n_rem = std::max(1L, std::lround(t / dt));
            if (n_rem == 1) break;
            t -= t / static_cast<double>(n_rem);
            levels.push_back(t);
        }
    }
    if (levels.size() < 8)
        throw std::invalid_argument("triangulate: fewer than 8 rows between floor and cusp cut");

    std::vector<std::vector<int>> rows; // top row first, chain last
    for (size_t r = 0; r < levels.size(); ++r) {
        const double t = levels[r];
        const int count = r == 0 ? n_boundary : row_count_at(t);
        std::vector<int> row(count + 1);
        for (int i = 0; i <= count; ++i) {
            const double q = static_cast<double>(i) / count;
            const double x = row_x_at(q, t);
            const double y = graph_rows ? (1.0 - t) * floor_y(x) + t * a
                                        : (1.0 - t) * chain_y_at(q) + t * a;
            row[i] = b.add_vertex(cplx(x, y));
            if (r == 0) b.tag(row[i], top.tag, x_lo + q * width);
        }
        rows.push_back(std::move(row));
    }
    rows.push_back(chain);
    b.arc_vertices[top.tag] = rows.front();

    // ---- side walls: tags, edges, and the side identification
    const BoundaryArc* left = side_arc_at(spec, spec.x_lo);
    const BoundaryArc* right = side_arc_at(spec, spec.x_hi);
    for (const auto& row : rows) {
        if (left) b.tag(row.front(), left->tag, b.mesh.vertices[row.front()][1]);
        if (right) b.tag(row.back(), right->tag, b.mesh.vertices[row.back()][1]);
    }
    if (left)
        for (const auto& row : rows) b.arc_vertices[left->tag].push_back(row.front());
    if (right)
        for (const auto& row : rows) b.arc_vertices[right->tag].push_back(row.back());
    if (left && right) {
        for (const auto& id : spec.identifications) {
            const bool lr = id.source == left->tag && id.target == right->tag;
            const bool rl = id.source == right->tag && id.target == left->tag;
            if (!lr && !rl) continue;
            for (const auto& row : rows)
                b.mesh.identified_pairs.push_back(
                    lr ? std::make_pair(row.front(), row.back())
                       : std::make_pair(row.back(), row.front()));
        }
    }

    // ---- triangles
    for (size_t r = 0; r + 1 < rows.size(); ++r) stitch_rows(b, rows[r], rows[r + 1]);

    // straight-blend rows can fold where the floor plunges almost vertically;
    // detect that here so the caller can retry on graph-surface rows
    if (!graph_rows) {
        for (const auto& tri : b.mesh.triangles) {
            const auto& p0 = b.mesh.vertices[tri[0]];
            const auto& p1 = b.mesh.vertices[tri[1]];
            const auto& p2 = b.mesh.vertices[tri[2]];
            const double area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                 (p1[1] - p0[1]) * (p2[0] - p0[0]);
            if (!(area2 > 0.0)) throw FoldDetected{};
        }
    }

    // ---- boundary edges
    auto emit_edges = [&](const std::vector<int>& ids, const BoundaryArc& arc) {
        for (size_t i = 0; i + 1 < ids.size(); ++i)
            b.mesh.boundary_edges.push_back(
                {ids[i], ids[i + 1], arc.tag,
                 arc.kind == ArcKind::HorocycleSegment ? arc.cusp : 0});
    };
    for (const auto& arc : spec.arcs) {
        if (arc.role == ArcRole::Bottom) {
            emit_edges(b.arc_vertices.at(arc.tag), arc);
        } else if (arc.role == ArcRole::Side) {
            std::vector<int> ids = b.arc_vertices.at(arc.tag);
            std::reverse(ids.begin(), ids.end()); // rows were collected top-down
            emit_edges(ids, arc);
        } else {
            emit_edges(rows.front(), arc);
        }
    }

    // ---- mesh improvement: angle-improving edge flips + guarded smoothing
    improve_mesh(b.mesh);

    b.mesh.spec = spec;
    build_cusp_traces(b.mesh, b, n_boundary);
    finalize_dofs(b.mesh);
    verify_mesh(b.mesh);
    return b.mesh;
}

Mesh triangulate(const SurfaceSpec& spec, double h, int n_boundary) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("triangulate: h must be positive");
    if (n_boundary < 64 || n_boundary % 2 != 0)
        throw std::invalid_argument("triangulate: n_boundary must be even and at least 64");
    try {
        return triangulate_attempt(spec, h, n_boundary, false);
    } catch (const FoldDetected&) {
        return triangulate_attempt(spec, h, n_boundary, true);
    }
}

// ---------------------------------------------------------------------------

namespace {

int64_t edge_key(int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    return static_cast<int64_t>(lo) * (1LL << 31) + hi;
}

} // namespace

Mesh refine(const Mesh& mesh) {
    Mesh out;
    out.spec = mesh.spec;
    out.h = mesh.h / 2.0;
    out.n_boundary = mesh.n_boundary * 2;
    out.vertices = mesh.vertices;
    out.vertex_tags = mesh.vertex_tags;
    out.identified_pairs = mesh.identified_pairs;

    std::unordered_map<int64_t, int> boundary_arc_of; // edge key -> boundary edge index
    for (size_t i = 0; i < mesh.boundary_edges.size(); ++i)
        boundary_arc_of[edge_key(mesh.boundary_edges[i].a, mesh.boundary_edges[i].b)] =
            static_cast<int>(i);

    auto param_on = [&](int v, const std::string& arc) {
        for (const auto& t : mesh.vertex_tags[v])
            if (t.arc == arc) return t.param;
        throw std::runtime_error("refine: boundary vertex lost its arc parameter");
    };

    std::unordered_map<int64_t, int> midpoint;
    auto mid_of = [&](int va, int vb) {
        const int64_t key = edge_key(va, vb);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        int v;
        auto be = boundary_arc_of.find(key);
        if (be != boundary_arc_of.end()) {
            const BoundaryEdge& e = mesh.boundary_edges[be->second];
            const BoundaryArc& arc = mesh.spec.arc(e.arc);
            const double lam =
                0.5 * (samp_coord(arc, param_on(va, e.arc)) + samp_coord(arc, param_on(vb, e.arc)));
            const double pm = samp_param(arc, lam);
            out.vertices.push_back({arc.point(pm).real(), arc.point(pm).imag()});
            out.vertex_tags.emplace_back();
            v = static_cast<int>(out.vertices.size()) - 1;
            out.vertex_tags[v].push_back({e.arc, pm});
        } else {
            const auto& pa = mesh.vertices[va];
            const auto& pb = mesh.vertices[vb];
            out.vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
            out.vertex_tags.emplace_back();
            v = static_cast<int>(out.vertices.size()) - 1;
        }
        midpoint.emplace(key, v);
        return v;
    };

    for (const auto& t : mesh.triangles) {
        const int m01 = mid_of(t[0], t[1]);
        const int m12 = mid_of(t[1], t[2]);
        const int m20 = mid_of(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({m01, t[1], m12});
        out.triangles.push_back({m20, m12, t[2]});
        out.triangles.push_back({m01, m12, m20});
    }

    // split boundary edges and pair up the new nodes on glued arcs
    std::unordered_multimap<int, int> partner;
    for (const auto& [u, v] : mesh.identified_pairs) {
        partner.emplace(u, v);
        partner.emplace(v, u);
    }
    std::set<std::pair<int, int>> new_pairs;
    for (const auto& e : mesh.boundary_edges) {
        const int m = midpoint.at(edge_key(e.a, e.b));
        out.boundary_edges.push_back({e.a, m, e.arc, e.cusp});
        out.boundary_edges.push_back({m, e.b, e.arc, e.cusp});

        // candidate glued edges connect a partner of one endpoint to a
        // partner of the other; an endpoint counts as its own partner so
        // that edges meeting the fixed point of a self-gluing pair up too
        auto candidates = [&](int v) {
            std::vector<int> c = {v};
            auto r = partner.equal_range(v);
            for (auto it = r.first; it != r.second; ++it) c.push_back(it->second);
            return c;
        };
        for (int ca : candidates(e.a)) {
            for (int cb : candidates(e.b)) {
                auto other = boundary_arc_of.find(edge_key(ca, cb));
                if (other == boundary_arc_of.end()) continue;
                const int mo = midpoint.at(edge_key(ca, cb));
                if (mo == m) continue;
                new_pairs.insert({std::min(m, mo), std::max(m, mo)});
            }
        }
    }
    for (const auto& pr : new_pairs) out.identified_pairs.push_back(pr);

    // consecutive trace vertices usually share a mesh edge; across the seam
    // between two pieces of a split cusp circle the edge instead connects
    // glued partners of the trace vertices
    auto trace_mid = [&](int u, int v) {
        auto it = midpoint.find(edge_key(u, v));
        if (it != midpoint.end()) return it->second;
        std::vector<int> us = {u}, vs = {v};
        auto ru = partner.equal_range(u);
        for (auto p = ru.first; p != ru.second; ++p) us.push_back(p->second);
        auto rv = partner.equal_range(v);
        for (auto p = rv.first; p != rv.second; ++p) vs.push_back(p->second);
        for (int cu : us)
            for (int cv : vs) {
                auto m = midpoint.find(edge_key(cu, cv));
                if (m != midpoint.end()) return m->second;
            }
        throw std::runtime_error("refine: cusp trace vertices are not mesh neighbours");
    };
    for (const auto& tr : mesh.cusp_traces) {
        CuspTrace nt;
        nt.k = tr.k;
        for (size_t i = 0; i < tr.vertices.size(); ++i) {
            nt.vertices.push_back(tr.vertices[i]);
            nt.x.push_back(tr.x[i]);
            if (i + 1 < tr.vertices.size()) {
                nt.vertices.push_back(trace_mid(tr.vertices[i], tr.vertices[i + 1]));
                nt.x.push_back(0.5 * (tr.x[i] + tr.x[i + 1]));
            }
        }
        out.cusp_traces.push_back(std::move(nt));
    }

    finalize_dofs(out);
    verify_mesh(out);
    return out;
}

double mesh_min_angle(const Mesh& mesh) {
    double worst = 180.0;
    for (const auto& t : mesh.triangles)
        worst = std::min(worst, min_triangle_angle_deg(mesh, t));
    return worst;
}

// ---------------------------------------------------------------------------

std::string mesh_to_json(const Mesh& mesh) {
    json j;
    j["format"] = "hsurf-mesh/1";
    j["h"] = mesh.h;
    j["n_boundary"] = mesh.n_boundary;
    j["spec"] = json::parse(surface_to_json(mesh.spec));
    j["vertices"] = json::array();
    for (const auto& v : mesh.vertices) j["vertices"].push_back({v[0], v[1]});
    j["triangles"] = json::array();
    for (const auto& t : mesh.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
    j["boundary_edges"] = json::array();
    for (const auto& e : mesh.boundary_edges)
        j["boundary_edges"].push_back({{"a", e.a}, {"b", e.b}, {"arc", e.arc}, {"cusp", e.cusp}});
    j["identified_pairs"] = json::array();
    for (const auto& [u, v] : mesh.identified_pairs) j["identified_pairs"].push_back({u, v});
    j["vertex_tags"] = json::array();
    for (const auto& tags : mesh.vertex_tags) {
        json jt = json::array();
        for (const auto& t : tags) jt.push_back({{"arc", t.arc}, {"param", t.param}});
        j["vertex_tags"].push_back(std::move(jt));
    }
    j["cusp_traces"] = json::array();
    for (const auto& tr : mesh.cusp_traces)
        j["cusp_traces"].push_back({{"k", tr.k}, {"vertices", tr.vertices}, {"x", tr.x}});
    j["dof_map"] = mesh.dof_map;
    j["num_dofs"] = mesh.num_dofs;
    return j.dump();
}

Mesh mesh_from_json(const std::string& doc) {
    json j = json::parse(doc);
    if (j.value("format", "") != std::string("hsurf-mesh/1"))
        throw std::invalid_argument("mesh_from_json: unrecognized document format");
    Mesh m;
    m.spec = surface_from_json(j.at("spec").dump());
    m.h = j.at("h").get<double>();
    m.n_boundary = j.at("n_boundary").get<int>();
    for (const auto& v : j.at("vertices"))
        m.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    for (const auto& t : j.at("triangles"))
        m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    for (const auto& e : j.at("boundary_edges"))
        m.boundary_edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(),
                                    e.at("arc").get<std::string>(), e.at("cusp").get<int>()});
    for (const auto& p : j.at("identified_pairs"))
        m.identified_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    for (const auto& jt : j.at("vertex_tags")) {
        std::vector<VertexTag> tags;
        for (const auto& t : jt)
            tags.push_back({t.at("arc").get<std::string>(), t.at("param").get<double>()});
        m.vertex_tags.push_back(std::move(tags));
    }
    for (const auto& jt : j.at("cusp_traces")) {
        CuspTrace tr;
        tr.k = jt.at("k").get<int>();
        tr.vertices = jt.at("vertices").get<std::vector<int>>();
        tr.x = jt.at("x").get<std::vector<double>>();
        m.cusp_traces.push_back(std::move(tr));
    }
    m.dof_map = j.at("dof_map").get<std::vector<int>>();
    m.num_dofs = j.at("num_dofs").get<int>();
    verify_mesh(m);
    return m;
}

} // namespace hsurf
