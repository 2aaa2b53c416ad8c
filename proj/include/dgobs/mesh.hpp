#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgobs/errors.hpp"
#include "dgobs/geometry.hpp"

namespace dgobs {

/// Triangle element. Vertices are counterclockwise; the refinement edge
/// index i in {0,1,2} designates the local edge opposite vertex i, i.e.
/// the edge (v[(i+1)%3], v[(i+2)%3]).
struct Element {
    std::array<int, 3> v{};
    int ref_edge = 0;
    int generation = 0;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<Element> elements;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }

    std::array<Vec2, 3> coords(int t) const {
        const Element& e = elements[t];
        return {vertices[e.v[0]], vertices[e.v[1]], vertices[e.v[2]]};
    }

    double area(int t) const {
        auto c = coords(t);
        return signed_area(c[0], c[1], c[2]);
    }
};

struct Edge {
    std::array<int, 2> v{};       // endpoint vertex ids, v[0] < v[1]
    std::array<int, 2> elems{-1, -1}; // adjacent element ids (second -1 on boundary)
    Vec2 normal;                  // unit; lower id -> higher id, or outward on boundary
    double length = 0.0;          // h_e
    bool boundary = false;
};

struct EdgeTopology {
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> element_edges; // per element, local edge i -> edge id
    std::vector<std::vector<int>> vertex_patch;    // per vertex, adjacent element ids (T_p)
    int num_interior = 0;
    int num_boundary = 0;
};

struct ElementGeometry {
    double h = 0.0;    // diameter = longest edge
    double area = 0.0;
    std::array<Vec2, 3> coords;
    std::array<Vec2, 3> edge_normals; // outward unit normal of local edge i
};

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace detail

inline ElementGeometry geometry_of(const Mesh& mesh, int t) {
    if (t < 0 || t >= mesh.num_elements())
        throw std::out_of_range("geometry_of: bad element id " + std::to_string(t));
    ElementGeometry g;
    g.coords = mesh.coords(t);
    g.area = signed_area(g.coords[0], g.coords[1], g.coords[2]);
    const Vec2 mid = centroid(g.coords[0], g.coords[1], g.coords[2]);
    for (int i = 0; i < 3; ++i) {
        const Vec2 a = g.coords[(i + 1) % 3];
        const Vec2 b = g.coords[(i + 2) % 3];
        const double len = dist(a, b);
        g.h = std::max(g.h, len);
        Vec2 n{(b - a).y / len, -(b - a).x / len};
        if (dot(n, mid - (a + b) * 0.5) > 0.0) n = n * -1.0;
        g.edge_normals[i] = n;
    }
    return g;
}

/// Structured triangulation of [xmin,xmax] x [ymin,ymax] with nx*ny cells,
/// each cell split along its lower-left/upper-right diagonal. Refinement
/// edges are initialized to the longest edge (ties broken by the smallest
/// opposite-vertex index), which pairs up the diagonals compatibly.
inline Mesh build_rect_mesh(double xmin, double xmax, double ymin, double ymax,
                            int nx, int ny) {
    if (!(xmax > xmin) || !(ymax > ymin))
        throw InvalidDomainError("build_rect_mesh: degenerate rectangle");
    if (nx < 1 || ny < 1)
        throw InvalidDomainError("build_rect_mesh: cell counts must be positive");

    Mesh mesh;
    mesh.vertices.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.emplace_back(xmin + (xmax - xmin) * i / nx,
                                       ymin + (ymax - ymin) * j / ny);

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    auto longest_edge = [&mesh](const std::array<int, 3>& v) {
        int best = 0;
        double best_len = -1.0;
        for (int i = 0; i < 3; ++i) {
            const double len = dist(mesh.vertices[v[(i + 1) % 3]], mesh.vertices[v[(i + 2) % 3]]);
            if (len > best_len + 1e-14 * (1.0 + best_len)) {
                best = i;
                best_len = len;
            }
        }
        return best;
    };

    mesh.elements.reserve(2 * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            for (std::array<int, 3> v : {std::array<int, 3>{a, b, c}, std::array<int, 3>{a, c, d}})
                mesh.elements.push_back({v, longest_edge(v), 0});
        }
    return mesh;
}

/// Newest-vertex bisection of the marked elements with recursive conforming
/// closure. The new midpoint becomes the newest vertex of both children, so
/// each child's refinement edge is the parent edge opposite the midpoint.
/// When `parent_of` is given it receives, per output element, the id of the
/// input element it descends from (identity for untouched elements).
inline Mesh refine_nvb(const Mesh& mesh, const std::set<int>& marked,
                       std::vector<int>* parent_of = nullptr) {
    if (parent_of) {
        parent_of->resize(mesh.num_elements());
        for (int t = 0; t < mesh.num_elements(); ++t) (*parent_of)[t] = t;
    }
    if (marked.empty()) return mesh;
    for (int id : marked)
        if (id < 0 || id >= mesh.num_elements())
            throw std::out_of_range("refine_nvb: marked id " + std::to_string(id) +
                                    " out of range");

    struct WorkElem {
        std::array<int, 3> v;
        int ref_edge;
        int generation;
        int root; // index of the input element this one descends from
        bool alive;
    };

    std::vector<Vec2> verts = mesh.vertices;
    std::vector<WorkElem> work;
    work.reserve(2 * mesh.elements.size());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const Element& e = mesh.elements[t];
        work.push_back({e.v, e.ref_edge, e.generation, t, true});
    }

    // live adjacency: sorted vertex pair -> element slots sharing the edge
    std::unordered_map<std::uint64_t, std::vector<int>> adj;
    adj.reserve(4 * work.size());
    auto link = [&](int t) {
        for (int i = 0; i < 3; ++i)
            adj[detail::edge_key(work[t].v[(i + 1) % 3], work[t].v[(i + 2) % 3])].push_back(t);
    };
    auto unlink = [&](int t) {
        for (int i = 0; i < 3; ++i) {
            auto& lst = adj[detail::edge_key(work[t].v[(i + 1) % 3], work[t].v[(i + 2) % 3])];
            lst.erase(std::find(lst.begin(), lst.end(), t));
        }
    };
    for (int t = 0; t < static_cast<int>(work.size()); ++t) link(t);

    auto ref_verts = [&](int t) {
        const WorkElem& e = work[t];
        return std::array<int, 2>{e.v[(e.ref_edge + 1) % 3], e.v[(e.ref_edge + 2) % 3]};
    };

    // Bisect element t at its refinement edge using midpoint vertex m.
    // Children keep counterclockwise order (p, a, m) and (p, m, b).
    auto bisect = [&](int t, int m) {
        const WorkElem e = work[t];
        const int p = e.v[e.ref_edge];
        const auto [a, b] = ref_verts(t);
        unlink(t);
        work[t].alive = false;
        work.push_back({{p, a, m}, 2, e.generation + 1, e.root, true});
        link(static_cast<int>(work.size()) - 1);
        work.push_back({{p, m, b}, 1, e.generation + 1, e.root, true});
        link(static_cast<int>(work.size()) - 1);
    };

    constexpr long kMaxBisections = 10'000'000;
    long ops = 0;
    std::vector<int> stack;
    for (int id : marked) {
        if (!work[id].alive) continue;
        stack.assign(1, id);
        while (!stack.empty()) {
            const int t = stack.back();
            if (!work[t].alive) {
                stack.pop_back();
                continue;
            }
            if (++ops > kMaxBisections)
                throw TopologyError("refine_nvb: closure did not terminate (iteration cap)");
            const auto [a, b] = ref_verts(t);
            const auto& share = adj[detail::edge_key(a, b)];
            int nb = -1;
            for (int s : share)
                if (s != t) nb = s;
            if (nb >= 0 && ref_verts(nb) != std::array<int, 2>{a, b} &&
                ref_verts(nb) != std::array<int, 2>{b, a}) {
                stack.push_back(nb); // neighbor must be made compatible first
                continue;
            }
            verts.push_back((verts[a] + verts[b]) * 0.5);
            const int m = static_cast<int>(verts.size()) - 1;
            bisect(t, m);
            if (nb >= 0) bisect(nb, m);
            stack.pop_back();
        }
    }

    Mesh out;
    out.vertices = std::move(verts);
    out.elements.reserve(work.size());
    if (parent_of) parent_of->clear();
    for (const WorkElem& e : work)
        if (e.alive) {
            out.elements.push_back({e.v, e.ref_edge, e.generation});
            if (parent_of) parent_of->push_back(e.root);
        }
    return out;
}

/// Derive the full edge/patch index. Throws TopologyError on non-conforming
/// input: an edge shared by more than two elements, or a single-sided edge
/// whose midpoint coincides with a mesh vertex (hanging node).
inline EdgeTopology topology(const Mesh& mesh) {
    EdgeTopology topo;
    topo.element_edges.resize(mesh.num_elements());
    topo.vertex_patch.resize(mesh.num_vertices());

    std::unordered_map<std::uint64_t, int> index;
    index.reserve(2 * mesh.elements.size());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto& v = mesh.elements[t].v;
        if (mesh.area(t) <= 0.0)
            throw TopologyError("topology: element " + std::to_string(t) +
                                " has non-positive area");
        for (int i = 0; i < 3; ++i) {
            const int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
            const auto key = detail::edge_key(a, b);
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(topo.edges.size()));
            if (inserted) {
                Edge e;
                e.v = {std::min(a, b), std::max(a, b)};
                e.length = dist(mesh.vertices[a], mesh.vertices[b]);
                e.elems = {t, -1};
                topo.edges.push_back(e);
            } else {
                Edge& e = topo.edges[it->second];
                if (e.elems[1] != -1)
                    throw TopologyError("topology: edge (" + std::to_string(e.v[0]) + "," +
                                        std::to_string(e.v[1]) + ") shared by >2 elements");
                e.elems[1] = t;
                if (e.elems[0] > e.elems[1]) std::swap(e.elems[0], e.elems[1]);
            }
            topo.element_edges[t][i] = it->second;
        }
        for (int i = 0; i < 3; ++i) topo.vertex_patch[v[i]].push_back(t);
    }

    // bit-exact vertex lookup catches midpoint hanging nodes
    std::unordered_multimap<std::uint64_t, int> vert_at;
    vert_at.reserve(mesh.vertices.size());
    auto coord_key = [](const Vec2& p) {
        std::uint64_t hx, hy;
        static_assert(sizeof(double) == 8);
        std::memcpy(&hx, &p.x, 8);
        std::memcpy(&hy, &p.y, 8);
        return hx * 0x9e3779b97f4a7c15ULL ^ (hy + 0x7f4a7c15u);
    };
    for (int i = 0; i < mesh.num_vertices(); ++i) vert_at.emplace(coord_key(mesh.vertices[i]), i);
    auto vertex_exists_at = [&](const Vec2& p) {
        auto [lo, hi] = vert_at.equal_range(coord_key(p));
        for (auto it = lo; it != hi; ++it) {
            const Vec2& q = mesh.vertices[it->second];
            if (q.x == p.x && q.y == p.y) return true;
        }
        return false;
    };

    for (Edge& e : topo.edges) {
        e.boundary = (e.elems[1] == -1);
        if (e.boundary) {
            const Vec2 mid = (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]) * 0.5;
            if (vertex_exists_at(mid))
                throw TopologyError("topology: hanging node on edge (" + std::to_string(e.v[0]) +
                                    "," + std::to_string(e.v[1]) + ")");
            ++topo.num_boundary;
        } else {
            ++topo.num_interior;
        }
        const Vec2 a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        Vec2 n{(b - a).y / e.length, -(b - a).x / e.length};
        const Vec2 mid = (a + b) * 0.5;
        const auto c0 = mesh.coords(e.elems[0]);
        const Vec2 toward0 = centroid(c0[0], c0[1], c0[2]) - mid;
        // interior: from the lower element id to the higher; boundary: outward
        if (dot(n, toward0) > 0.0) n = n * -1.0;
        e.normal = n;
    }

    if (2 * topo.num_interior + topo.num_boundary != 3 * mesh.num_elements())
        throw TopologyError("topology: edge/element count mismatch");
    return topo;
}

/// Minimum interior angle over all elements, in radians.
inline double min_interior_angle(const Mesh& mesh) {
    double best = 4.0;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        for (int i = 0; i < 3; ++i) {
            const Vec2 u = c[(i + 1) % 3] - c[i];
            const Vec2 w = c[(i + 2) % 3] - c[i];
            best = std::min(best, std::acos(dot(u, w) / (norm(u) * norm(w))));
        }
    }
    return best;
}

inline std::set<int> all_element_ids(const Mesh& mesh) {
    std::set<int> ids;
    for (int t = 0; t < mesh.num_elements(); ++t) ids.insert(t);
    return ids;
}

} // namespace dgobs
