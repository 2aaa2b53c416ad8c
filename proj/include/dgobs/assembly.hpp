#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "dgobs/fespace.hpp"
#include "dgobs/mesh.hpp"

namespace dgobs {

/// Row-compressed operator matrix for the DG form A_h = a_h + b_h.
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// theta = 1 (SIPG), 0 (IIPG), -1 (NIPG); t picks the constraint set:
/// 1 = elementwise integral constraints, 2 = quadrature-vertex constraints.
struct MethodConfig {
    int theta = 1;
    double penalty = 45.0;
    int degree = 2;
    int constraint_kind = 1;

    void validate() const {
        if (theta != 1 && theta != 0 && theta != -1)
            throw ConfigError("MethodConfig: theta must be -1, 0 or 1");
        if (!(penalty > 0.0)) throw ConfigError("MethodConfig: penalty must be positive");
        if (degree != 1 && degree != 2) throw ConfigError("MethodConfig: degree must be 1 or 2");
        if (constraint_kind != 1 && constraint_kind != 2)
            throw ConfigError("MethodConfig: constraint kind must be 1 or 2");
    }
};

inline double default_penalty(int theta) {
    if (theta == 1) return 45.0;
    if (theta == -1) return 20.0;
    return 30.0; // IIPG is not covered by the experiments; value sits between the two
}

namespace detail {

struct EdgeTrace {
    int element = -1;
    std::array<double, 6> phi{};
    std::array<double, 6> dphi_dn{}; // n . grad(phi)
};

inline EdgeTrace edge_trace(const Mesh& mesh, const SpaceDescriptor& space, int t,
                            const Vec2& x, const Vec2& n) {
    EdgeTrace tr;
    tr.element = t;
    const auto c = mesh.coords(t);
    const auto b = barycentric(c[0], c[1], c[2], x);
    shape_values(space.degree, b, tr.phi.data());
    Vec2 g[6];
    shape_gradients(space.degree, c, b, g);
    for (int i = 0; i < space.dofs_per_element; ++i) tr.dphi_dn[i] = dot(n, g[i]);
    return tr;
}

} // namespace detail

/// Assemble the matrix of A_h(w, v) = a_h(w, v) + b_h(w, v), with
///   b_h(w,v) = -sum_e int {{grad w}}.[[v]] - theta sum_e int {{grad v}}.[[w]]
///              + sum_e int (eta/h_e) [[w]].[[v]],
/// one-sided jumps/means on the boundary. Row index = test function, column
/// = trial, so (A u) . v = A_h(u, v).
inline SparseOperator assemble_operator(const Mesh& mesh, const EdgeTopology& topo,
                                        const SpaceDescriptor& space, const MethodConfig& cfg) {
    cfg.validate();
    const int n = space.dofs_per_element;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * n * mesh.num_elements());

    // volume term: elementwise stiffness
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        const double area = signed_area(c[0], c[1], c[2]);
        Vec2 g[6];
        for (const auto& qp : quad::tri_deg4()) {
            shape_gradients(space.degree, c, qp.bary, g);
            const double w = qp.w * area;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    trip.emplace_back(space.dof(t, i), space.dof(t, j), w * dot(g[i], g[j]));
        }
    }

    // edge terms
    for (const Edge& e : topo.edges) {
        const Vec2 a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        const int nsides = e.boundary ? 1 : 2;
        const double mean_w = e.boundary ? 1.0 : 0.5;
        // jump sign: +1 seen from elems[0], -1 from elems[1]
        const double jsign[2] = {1.0, -1.0};

        for (const auto& qp : quad::edge_gl4()) {
            const Vec2 x = a + (b - a) * qp.s;
            const double w = qp.w * e.length;
            detail::EdgeTrace tr[2];
            for (int s = 0; s < nsides; ++s)
                tr[s] = detail::edge_trace(mesh, space, e.elems[s], x, e.normal);

            for (int sv = 0; sv < nsides; ++sv)
                for (int sw = 0; sw < nsides; ++sw)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            const double jump_v = jsign[sv] * tr[sv].phi[i];
                            const double jump_w = jsign[sw] * tr[sw].phi[j];
                            double val = -mean_w * tr[sw].dphi_dn[j] * jump_v;
                            val -= cfg.theta * mean_w * tr[sv].dphi_dn[i] * jump_w;
                            val += cfg.penalty / e.length * jump_w * jump_v;
                            trip.emplace_back(space.dof(e.elems[sv], i),
                                              space.dof(e.elems[sw], j), w * val);
                        }
        }
    }

    SparseOperator A(space.total_dofs(), space.total_dofs());
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// Load vector (f, phi_i), degree-6 rule.
inline Eigen::VectorXd assemble_load(const Mesh& mesh, const SpaceDescriptor& space,
                                     const ScalarField& f) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space.total_dofs());
    double phi[6];
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        const double area = signed_area(c[0], c[1], c[2]);
        for (const auto& qp : quad::tri_deg6()) {
            shape_values(space.degree, qp.bary, phi);
            const double w = qp.w * area * f(bary_to_point(c, qp.bary));
            for (int i = 0; i < space.dofs_per_element; ++i) F[space.dof(t, i)] += w * phi[i];
        }
    }
    return F;
}

/// Weakly imposed Dirichlet data: adds, for every boundary edge,
///   int_e g * (eta/h_e * phi_i - theta * n.grad(phi_i)) ds
/// to the load. With g = 0 this vanishes and the plain homogeneous form
/// remains.
inline Eigen::VectorXd assemble_dirichlet_load(const Mesh& mesh, const EdgeTopology& topo,
                                               const SpaceDescriptor& space,
                                               const MethodConfig& cfg, const ScalarField& g) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space.total_dofs());
    for (const Edge& e : topo.edges) {
        if (!e.boundary) continue;
        const Vec2 a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        for (const auto& qp : quad::edge_gl4()) {
            const Vec2 x = a + (b - a) * qp.s;
            const double w = qp.w * e.length * g(x);
            const auto tr = detail::edge_trace(mesh, space, e.elems[0], x, e.normal);
            for (int i = 0; i < space.dofs_per_element; ++i)
                F[space.dof(e.elems[0], i)] +=
                    w * (cfg.penalty / e.length * tr.phi[i] - cfg.theta * tr.dphi_dn[i]);
        }
    }
    return F;
}

/// Inequality system B u >= c realizing the discrete admissible set.
/// Kind 1: one row per element, row_T(v) = Q_T(v), c_T = Q_T(chi).
/// Kind 2: three rows per element, row (T,i) evaluates at the s=2
/// quadrature vertex r_i, c = chi(r_i).
struct ConstraintSystem {
    int kind = 1;
    SparseOperator B;
    Eigen::VectorXd c;
    std::vector<int> row_element;
    std::vector<int> row_qvertex; // kind 2 only: index of r_i within the element

    int rows() const { return static_cast<int>(B.rows()); }
};

inline ConstraintSystem build_constraints(const Mesh& mesh, const SpaceDescriptor& space,
                                          const MethodConfig& cfg, const ScalarField& chi) {
    cfg.validate();
    ConstraintSystem sys;
    sys.kind = cfg.constraint_kind;
    const int n = space.dofs_per_element;
    std::vector<Eigen::Triplet<double>> trip;
    double phi[6];

    if (sys.kind == 1) {
        sys.c.resize(mesh.num_elements());
        sys.row_element.resize(mesh.num_elements());
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const auto c = mesh.coords(t);
            double row[6] = {0, 0, 0, 0, 0, 0};
            for (const auto& qp : quad::tri_deg4()) {
                shape_values(space.degree, qp.bary, phi);
                for (int j = 0; j < n; ++j) row[j] += qp.w * phi[j];
            }
            for (int j = 0; j < n; ++j) trip.emplace_back(t, space.dof(t, j), row[j]);
            double mean_chi = 0.0;
            for (const auto& qp : quad::tri_deg6()) mean_chi += qp.w * chi(bary_to_point(c, qp.bary));
            sys.c[t] = mean_chi;
            sys.row_element[t] = t;
        }
        sys.B.resize(mesh.num_elements(), space.total_dofs());
    } else {
        const int rows = 3 * mesh.num_elements();
        sys.c.resize(rows);
        sys.row_element.resize(rows);
        sys.row_qvertex.resize(rows);
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const auto qs = quadrature_nodes(mesh, t, 2);
            const auto c = mesh.coords(t);
            for (int i = 0; i < 3; ++i) {
                const int r = 3 * t + i;
                const auto bary = barycentric(c[0], c[1], c[2], qs.r[i]);
                shape_values(space.degree, bary, phi);
                for (int j = 0; j < n; ++j) trip.emplace_back(r, space.dof(t, j), phi[j]);
                sys.c[r] = chi(qs.r[i]);
                sys.row_element[r] = t;
                sys.row_qvertex[r] = i;
            }
        }
        sys.B.resize(rows, space.total_dofs());
    }
    sys.B.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

} // namespace dgobs
