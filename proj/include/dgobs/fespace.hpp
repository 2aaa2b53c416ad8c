#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "dgobs/errors.hpp"
#include "dgobs/mesh.hpp"
#include "dgobs/quadrature.hpp"

namespace dgobs {

using ScalarField = std::function<double(Vec2)>;

/// Fully discontinuous Lagrange space of degree 1 or 2. Degrees of freedom
/// are element-major blocks; no dof is shared between elements. Local node
/// order: vertices 0..2, then (degree 2) the midpoint of edge i (opposite
/// vertex i) as node 3+i.
struct SpaceDescriptor {
    int degree = 1;
    int dofs_per_element = 3;
    int num_elements = 0;

    int total_dofs() const { return dofs_per_element * num_elements; }
    int dof(int element, int local) const { return element * dofs_per_element + local; }
};

inline SpaceDescriptor make_space(const Mesh& mesh, int degree) {
    if (degree != 1 && degree != 2)
        throw ConfigError("make_space: degree must be 1 or 2");
    return {degree, degree == 1 ? 3 : 6, mesh.num_elements()};
}

struct DGFunction {
    SpaceDescriptor space;
    Eigen::VectorXd coeffs;

    explicit DGFunction(const SpaceDescriptor& s) : space(s) {
        coeffs = Eigen::VectorXd::Zero(s.total_dofs());
    }
};

struct PiecewiseConstant {
    std::vector<double> value; // one per element
};

/// Broken P1 field anchored at the s=2 quadrature-simplex vertices of each
/// element: value[3t+i] is the value at r_i of element t.
struct PiecewiseLinear {
    std::vector<double> value;

    double& at(int element, int i) { return value[3 * element + i]; }
    double at(int element, int i) const { return value[3 * element + i]; }
};

// ---------------------------------------------------------------------------
// Lagrange basis on a triangle, in barycentric coordinates.

inline std::array<double, 3> local_node_bary(int degree, int local) {
    if (local < 3) {
        std::array<double, 3> b{0, 0, 0};
        b[local] = 1.0;
        return b;
    }
    (void)degree;
    std::array<double, 3> b{0.5, 0.5, 0.5};
    b[local - 3] = 0.0;
    return b;
}

inline void shape_values(int degree, const std::array<double, 3>& b, double* out) {
    if (degree == 1) {
        out[0] = b[0];
        out[1] = b[1];
        out[2] = b[2];
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = b[i] * (2.0 * b[i] - 1.0);
    for (int i = 0; i < 3; ++i) out[3 + i] = 4.0 * b[(i + 1) % 3] * b[(i + 2) % 3];
}

/// Physical gradients of the barycentric coordinates.
inline std::array<Vec2, 3> lambda_gradients(const std::array<Vec2, 3>& c) {
    const double inv2a = 0.5 / signed_area(c[0], c[1], c[2]);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        const Vec2& p = c[(i + 1) % 3];
        const Vec2& q = c[(i + 2) % 3];
        g[i] = Vec2{(p.y - q.y) * inv2a, (q.x - p.x) * inv2a};
    }
    return g;
}

inline void shape_gradients(int degree, const std::array<Vec2, 3>& c,
                            const std::array<double, 3>& b, Vec2* out) {
    const auto gl = lambda_gradients(c);
    if (degree == 1) {
        out[0] = gl[0];
        out[1] = gl[1];
        out[2] = gl[2];
        return;
    }
    for (int i = 0; i < 3; ++i) out[i] = gl[i] * (4.0 * b[i] - 1.0);
    for (int i = 0; i < 3; ++i)
        out[3 + i] = 4.0 * (gl[(i + 2) % 3] * b[(i + 1) % 3] + gl[(i + 1) % 3] * b[(i + 2) % 3]);
}

/// Elementwise Laplacian of a P2 function is constant; for P1 it is zero.
inline double element_laplacian(const DGFunction& u, const std::array<Vec2, 3>& c, int t) {
    if (u.space.degree == 1) return 0.0;
    const auto gl = lambda_gradients(c);
    double lap = 0.0;
    for (int i = 0; i < 3; ++i) {
        lap += u.coeffs[u.space.dof(t, i)] * 4.0 * dot(gl[i], gl[i]);
        lap += u.coeffs[u.space.dof(t, 3 + i)] * 8.0 * dot(gl[(i + 1) % 3], gl[(i + 2) % 3]);
    }
    return lap;
}

inline double eval_dg(const DGFunction& u, const Mesh& mesh, int t, const Vec2& p) {
    const auto c = mesh.coords(t);
    const auto b = barycentric(c[0], c[1], c[2], p);
    double phi[6];
    shape_values(u.space.degree, b, phi);
    double val = 0.0;
    for (int i = 0; i < u.space.dofs_per_element; ++i)
        val += u.coeffs[u.space.dof(t, i)] * phi[i];
    return val;
}

inline double eval_dg_bary(const DGFunction& u, int t, const std::array<double, 3>& b) {
    double phi[6];
    shape_values(u.space.degree, b, phi);
    double val = 0.0;
    for (int i = 0; i < u.space.dofs_per_element; ++i)
        val += u.coeffs[u.space.dof(t, i)] * phi[i];
    return val;
}

inline Vec2 eval_dg_gradient(const DGFunction& u, const Mesh& mesh, int t, const Vec2& p) {
    const auto c = mesh.coords(t);
    const auto b = barycentric(c[0], c[1], c[2], p);
    Vec2 g[6];
    shape_gradients(u.space.degree, c, b, g);
    Vec2 grad{0.0, 0.0};
    for (int i = 0; i < u.space.dofs_per_element; ++i)
        grad += g[i] * u.coeffs[u.space.dof(t, i)];
    return grad;
}

// ---------------------------------------------------------------------------
// Quadrature simplex (shrink factor b = 1/sqrt(d+2) = 1/2 in 2D for s=2).

struct QuadratureSimplex {
    int element = -1;
    std::array<Vec2, 3> r;
    double shrink = 1.0;
    int order = 1; // s
    double weight = 0.0; // |T|/3
};

inline QuadratureSimplex quadrature_nodes(const Mesh& mesh, int t, int s) {
    if (s != 1 && s != 2) throw ConfigError("quadrature_nodes: s must be 1 or 2");
    const auto c = mesh.coords(t);
    QuadratureSimplex q;
    q.element = t;
    q.order = s;
    q.shrink = (s == 1) ? 1.0 : 0.5;
    q.weight = mesh.area(t) / 3.0;
    const Vec2 g = centroid(c[0], c[1], c[2]);
    for (int i = 0; i < 3; ++i) q.r[i] = c[i] * q.shrink + g * (1.0 - q.shrink);
    return q;
}

/// Vertex-based rule: |T|/3 * sum of values at the rule's nodes; exact on
/// P_s(T) for the order-s node set.
inline double integrate_simplex(const Mesh& mesh, int t, const std::array<double, 3>& values) {
    return mesh.area(t) / 3.0 * (values[0] + values[1] + values[2]);
}

/// Barycentric coordinates with respect to the s=2 quadrature simplex,
/// linearly extended outside of it: mu_i = 2*lambda_i - 1/3.
inline std::array<double, 3> quadsimplex_bary(const std::array<Vec2, 3>& c, const Vec2& p) {
    const auto l = barycentric(c[0], c[1], c[2], p);
    return {2.0 * l[0] - 1.0 / 3.0, 2.0 * l[1] - 1.0 / 3.0, 2.0 * l[2] - 1.0 / 3.0};
}

inline double eval_pwlinear(const PiecewiseLinear& f, const Mesh& mesh, int t, const Vec2& p) {
    const auto c = mesh.coords(t);
    const auto mu = quadsimplex_bary(c, p);
    return mu[0] * f.at(t, 0) + mu[1] * f.at(t, 1) + mu[2] * f.at(t, 2);
}

// ---------------------------------------------------------------------------
// Elementwise mean Q_h (degree-4 rule; exact for polynomials up to degree 4).

inline PiecewiseConstant q_h(const Mesh& mesh, const DGFunction& u) {
    PiecewiseConstant out;
    out.value.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        double s = 0.0;
        for (const auto& qp : quad::tri_deg4()) s += qp.w * eval_dg_bary(u, t, qp.bary);
        out.value[t] = s;
    }
    return out;
}

inline PiecewiseConstant q_h(const Mesh& mesh, const ScalarField& f) {
    PiecewiseConstant out;
    out.value.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        double s = 0.0;
        for (const auto& qp : quad::tri_deg4()) s += qp.w * f(bary_to_point(c, qp.bary));
        out.value[t] = s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Averaging (enriching) operator E_h: node-averaged conforming values with
// zero boundary trace.

struct ConformingNodalValues {
    std::vector<double> vertex; // one per mesh vertex
    std::vector<double> edge;   // one per edge midpoint (degree 2 only)
    int degree = 1;
};

inline ConformingNodalValues enrich_e_h(const Mesh& mesh, const EdgeTopology& topo,
                                        const DGFunction& u) {
    ConformingNodalValues out;
    out.degree = u.space.degree;
    out.vertex.assign(mesh.num_vertices(), 0.0);

    std::vector<char> boundary_vertex(mesh.num_vertices(), 0);
    for (const Edge& e : topo.edges)
        if (e.boundary) boundary_vertex[e.v[0]] = boundary_vertex[e.v[1]] = 1;

    for (int p = 0; p < mesh.num_vertices(); ++p) {
        if (boundary_vertex[p]) continue;
        const auto& patch = topo.vertex_patch[p];
        double sum = 0.0;
        for (int t : patch) {
            const auto& ev = mesh.elements[t].v;
            for (int i = 0; i < 3; ++i)
                if (ev[i] == p) sum += u.coeffs[u.space.dof(t, i)];
        }
        out.vertex[p] = sum / static_cast<double>(patch.size());
    }

    if (u.space.degree == 2) {
        out.edge.assign(topo.edges.size(), 0.0);
        for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
            if (topo.edges[e].boundary) continue;
            double sum = 0.0;
            int count = 0;
            for (int t : topo.edges[e].elems) {
                if (t < 0) continue;
                for (int i = 0; i < 3; ++i)
                    if (topo.element_edges[t][i] == e)
                        sum += u.coeffs[u.space.dof(t, 3 + i)];
                ++count;
            }
            out.edge[e] = sum / count;
        }
    }
    return out;
}

/// Embed averaged nodal values back into the DG space (result is conforming).
inline DGFunction conforming_to_dg(const Mesh& mesh, const EdgeTopology& topo,
                                   const ConformingNodalValues& nodes) {
    SpaceDescriptor space = make_space(mesh, nodes.degree);
    DGFunction out(space);
    for (int t = 0; t < mesh.num_elements(); ++t) {
        for (int i = 0; i < 3; ++i)
            out.coeffs[space.dof(t, i)] = nodes.vertex[mesh.elements[t].v[i]];
        if (nodes.degree == 2)
            for (int i = 0; i < 3; ++i)
                out.coeffs[space.dof(t, 3 + i)] = nodes.edge[topo.element_edges[t][i]];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local L2 projection onto the element polynomial space (dual-basis form:
// solve the local mass system against moments of v, degree-6 rule).

inline DGFunction local_project_pi_h(const Mesh& mesh, const SpaceDescriptor& space,
                                     const ScalarField& v) {
    DGFunction out(space);
    const int n = space.dofs_per_element;
    Eigen::MatrixXd mass(n, n);
    Eigen::VectorXd rhs(n);
    double phi[6];
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        const double area = signed_area(c[0], c[1], c[2]);
        mass.setZero();
        rhs.setZero();
        for (const auto& qp : quad::tri_deg6()) {
            shape_values(space.degree, qp.bary, phi);
            const double w = qp.w * area;
            const double fv = v(bary_to_point(c, qp.bary));
            for (int i = 0; i < n; ++i) {
                rhs[i] += w * fv * phi[i];
                for (int j = 0; j < n; ++j) mass(i, j) += w * phi[i] * phi[j];
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(mass);
        if (!lu.isInvertible())
            throw SolverError("local_project_pi_h: singular mass matrix on element " +
                              std::to_string(t));
        out.coeffs.segment(t * n, n) = lu.solve(rhs);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lumping maps between the broken P1 space (anchored at quadrature vertices)
// and the DG space.

/// Nodes of the quadrature layout: the s=2 simplex vertices, plus (degree 2)
/// their pairwise midpoints. This layout is unisolvent for the element space.
inline std::vector<Vec2> quad_layout_nodes(const Mesh& mesh, int t, int degree) {
    const auto qs = quadrature_nodes(mesh, t, 2);
    std::vector<Vec2> nodes(qs.r.begin(), qs.r.end());
    if (degree == 2)
        for (int i = 0; i < 3; ++i)
            nodes.push_back((qs.r[(i + 1) % 3] + qs.r[(i + 2) % 3]) * 0.5);
    return nodes;
}

/// Columns are the standard-basis coefficients of the quadrature-layout
/// Lagrange basis functions psi_z (z running over the layout nodes).
inline Eigen::MatrixXd quad_layout_basis(const Mesh& mesh, int t, int degree) {
    const auto nodes = quad_layout_nodes(mesh, t, degree);
    const int n = static_cast<int>(nodes.size());
    const auto c = mesh.coords(t);
    Eigen::MatrixXd vand(n, n);
    double phi[6];
    for (int k = 0; k < n; ++k) {
        const auto b = barycentric(c[0], c[1], c[2], nodes[k]);
        shape_values(degree, b, phi);
        for (int j = 0; j < n; ++j) vand(k, j) = phi[j];
    }
    return vand.inverse();
}

/// Values of a DG function at the s=2 quadrature vertices of every element.
inline PiecewiseLinear pi_tilde_inverse(const Mesh& mesh, const DGFunction& u) {
    PiecewiseLinear out;
    out.value.resize(3 * mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto qs = quadrature_nodes(mesh, t, 2);
        for (int i = 0; i < 3; ++i) out.at(t, i) = eval_dg(u, mesh, t, qs.r[i]);
    }
    return out;
}

} // namespace dgobs
