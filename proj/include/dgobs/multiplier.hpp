#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dgobs/assembly.hpp"
#include "dgobs/fespace.hpp"

namespace dgobs {

/// Discrete Lagrange multiplier recovered from the algebraic residual
/// F - A u: piecewise constant (kind 1) or piecewise linear on the
/// quadrature vertices (kind 2), together with its piecewise-constant
/// reduction B_h sigma.
struct MultiplierField {
    int kind = 1;
    PiecewiseConstant sigma1;
    PiecewiseLinear sigma2;
    PiecewiseConstant reduced;
};

/// sigma|_T = (1/|T|) (F - A u) . e_T with e_T the coefficient vector of the
/// element indicator function (a preimage of the V0 indicator under Q_h).
/// When the solver's active row set is supplied, inactive rows are written
/// as exact zeros: the residual equals B^T lambda with lambda = 0 there, and
/// evaluating it in floating point only adds solver roundoff amplified by
/// 1/|T|.
inline PiecewiseConstant recover_sigma1(const Mesh& mesh, const SpaceDescriptor& space,
                                        const SparseOperator& A, const Eigen::VectorXd& F,
                                        const Eigen::VectorXd& u,
                                        const std::vector<int>* active_rows = nullptr) {
    const Eigen::VectorXd residual = F - A * u;
    PiecewiseConstant out;
    out.value.assign(mesh.num_elements(), 0.0);
    std::vector<char> keep;
    if (active_rows) {
        keep.assign(mesh.num_elements(), 0);
        for (int r : *active_rows) keep[r] = 1;
    }
    const int n = space.dofs_per_element;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        if (active_rows && !keep[t]) continue;
        out.value[t] = residual.segment(t * n, n).sum() / mesh.area(t);
    }
    return out;
}

/// sigma(z) = (3/|T|) (F - A u) . e_{psi_z}, where psi_z is the
/// quadrature-layout Lagrange function of the vertex z expressed in
/// standard coefficients. Inactive rows are exact zeros when the active row
/// set is supplied (see recover_sigma1).
inline PiecewiseLinear recover_sigma2(const Mesh& mesh, const SpaceDescriptor& space,
                                      const SparseOperator& A, const Eigen::VectorXd& F,
                                      const Eigen::VectorXd& u,
                                      const std::vector<int>* active_rows = nullptr) {
    const Eigen::VectorXd residual = F - A * u;
    PiecewiseLinear out;
    out.value.assign(3 * mesh.num_elements(), 0.0);
    std::vector<char> keep;
    if (active_rows) {
        keep.assign(3 * mesh.num_elements(), 0);
        for (int r : *active_rows) keep[r] = 1;
    }
    const int n = space.dofs_per_element;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        if (active_rows && !keep[3 * t] && !keep[3 * t + 1] && !keep[3 * t + 2]) continue;
        const Eigen::MatrixXd psi = quad_layout_basis(mesh, t, space.degree);
        const double scale = 3.0 / mesh.area(t);
        for (int i = 0; i < 3; ++i)
            if (!active_rows || keep[3 * t + i])
                out.at(t, i) = scale * residual.segment(t * n, n).dot(psi.col(i));
    }
    return out;
}

/// B_h sigma: identity for kind 1; the exact elementwise mean for kind 2
/// (the mean of a linear function equals the average of its values at the
/// centroid-symmetric quadrature vertices).
inline PiecewiseConstant reduce_b_h(const MultiplierField& field) {
    if (field.kind == 1) return field.sigma1;
    PiecewiseConstant out;
    const int m = static_cast<int>(field.sigma2.value.size()) / 3;
    out.value.resize(m);
    for (int t = 0; t < m; ++t)
        out.value[t] = (field.sigma2.at(t, 0) + field.sigma2.at(t, 1) + field.sigma2.at(t, 2)) / 3.0;
    return out;
}

inline MultiplierField recover_multiplier(const Mesh& mesh, const SpaceDescriptor& space,
                                          const SparseOperator& A, const Eigen::VectorXd& F,
                                          const Eigen::VectorXd& u, int kind,
                                          const std::vector<int>* active_rows = nullptr) {
    MultiplierField field;
    field.kind = kind;
    if (kind == 1)
        field.sigma1 = recover_sigma1(mesh, space, A, F, u, active_rows);
    else
        field.sigma2 = recover_sigma2(mesh, space, A, F, u, active_rows);
    field.reduced = reduce_b_h(field);
    return field;
}

enum class ContactLabel { contact, noncontact, free_boundary };

struct ContactClassification {
    std::vector<ContactLabel> label; // one per element

    int count(ContactLabel l) const {
        int c = 0;
        for (auto x : label) c += (x == l);
        return c;
    }
};

/// Per-element contact state. Kind 1 compares elementwise means, kind 2 the
/// values at the quadrature vertices; equalities hold within a tolerance
/// relative to the obstacle magnitude. Free-boundary labels occur for
/// kind 2 only.
inline ContactClassification classify(const Mesh& mesh, const SpaceDescriptor& space,
                                      const DGFunction& u, const ScalarField& chi, int kind,
                                      double tol = 1e-9) {
    ContactClassification out;
    out.label.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        if (kind == 1) {
            const auto c = mesh.coords(t);
            double mean_u = 0.0, mean_chi = 0.0;
            for (const auto& qp : quad::tri_deg4()) mean_u += qp.w * eval_dg_bary(u, t, qp.bary);
            for (const auto& qp : quad::tri_deg6()) mean_chi += qp.w * chi(bary_to_point(c, qp.bary));
            const double eq_tol = tol * std::max(1.0, std::abs(mean_chi));
            out.label[t] = (mean_u - mean_chi <= eq_tol) ? ContactLabel::contact
                                                         : ContactLabel::noncontact;
        } else {
            const auto qs = quadrature_nodes(mesh, t, 2);
            int equal = 0;
            for (int i = 0; i < 3; ++i) {
                const double cz = chi(qs.r[i]);
                const double diff = eval_dg(u, mesh, t, qs.r[i]) - cz;
                if (diff <= tol * std::max(1.0, std::abs(cz))) ++equal;
            }
            out.label[t] = (equal == 3)   ? ContactLabel::contact
                           : (equal == 0) ? ContactLabel::noncontact
                                          : ContactLabel::free_boundary;
        }
    }
    return out;
}

/// Sign and complementarity checks from the discrete multiplier theory:
/// sigma <= tol everywhere it is sampled, and sigma * (u - chi) = 0 at the
/// constraint locations. Returns the number of violations.
struct MultiplierCheck {
    int sign_violations = 0;
    int complementarity_violations = 0;
    double worst_sign = 0.0;
    double worst_complementarity = 0.0;

    int total() const { return sign_violations + complementarity_violations; }
};

inline MultiplierCheck check_multiplier(const Mesh& mesh, const MultiplierField& field,
                                        const ConstraintSystem& K, const Eigen::VectorXd& Bu,
                                        double tol) {
    MultiplierCheck chk;
    auto sign = [&](double s) {
        chk.worst_sign = std::max(chk.worst_sign, s);
        if (s > tol) ++chk.sign_violations;
    };
    auto compl_ = [&](double prod) {
        chk.worst_complementarity = std::max(chk.worst_complementarity, std::abs(prod));
        if (std::abs(prod) > tol) ++chk.complementarity_violations;
    };

    const int m = mesh.num_elements();
    if (field.kind == 1) {
        for (int t = 0; t < m; ++t) {
            sign(field.sigma1.value[t]);
            compl_(field.sigma1.value[t] * (Bu[t] - K.c[t]));
        }
    } else {
        for (int t = 0; t < m; ++t)
            for (int i = 0; i < 3; ++i) {
                const int r = 3 * t + i;
                sign(field.sigma2.at(t, i));
                compl_(field.sigma2.at(t, i) * (Bu[r] - K.c[r]));
            }
    }
    for (double v : field.reduced.value) sign(v);
    return chk;
}

} // namespace dgobs
