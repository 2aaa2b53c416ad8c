#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dgobs/assembly.hpp"
#include "dgobs/fespace.hpp"
#include "dgobs/multiplier.hpp"

namespace dgobs {

/// Exact max of |p| for a quadratic on a unit-parametrized edge, given the
/// values at s = 0, 1/2, 1: endpoints plus the interior parabola vertex.
inline double edge_poly_linf_max(double v0, double vmid, double v1) {
    const double a = v0;
    const double b = -3.0 * v0 + 4.0 * vmid - v1;
    const double c = 2.0 * v0 - 4.0 * vmid + 2.0 * v1;
    double best = std::max(std::abs(v0), std::abs(v1));
    if (std::abs(c) > 1e-14 * (std::abs(a) + std::abs(b) + std::abs(c))) {
        const double s = -b / (2.0 * c);
        if (s > 0.0 && s < 1.0) best = std::max(best, std::abs(a + b * s + c * s * s));
    }
    return best;
}

/// Exact max of |p| for a quadratic on a triangle given its six nodal values
/// (P2 layout: vertices then edge midpoints). Candidates: vertices, the
/// per-edge interior extrema, and the interior critical point when the
/// (constant) Hessian is nonsingular and the point lies inside.
inline double tri_poly_linf_max(const std::array<Vec2, 3>& c, const std::array<double, 6>& v) {
    double best = 0.0;
    for (int i = 0; i < 3; ++i) {
        best = std::max(best, std::abs(v[i]));
        // edge i runs from vertex (i+1) to (i+2) with midpoint node 3+i
        best = std::max(best, edge_poly_linf_max(v[(i + 1) % 3], v[3 + i], v[(i + 2) % 3]));
    }

    const auto gl = lambda_gradients(c);
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec2 gi = gl[i];
        hxx += 4.0 * v[i] * gi.x * gi.x;
        hxy += 4.0 * v[i] * gi.x * gi.y;
        hyy += 4.0 * v[i] * gi.y * gi.y;
        const Vec2 ga = gl[(i + 1) % 3], gb = gl[(i + 2) % 3];
        hxx += 8.0 * v[3 + i] * ga.x * gb.x;
        hxy += 4.0 * v[3 + i] * (ga.x * gb.y + ga.y * gb.x);
        hyy += 8.0 * v[3 + i] * ga.y * gb.y;
    }
    const double det = hxx * hyy - hxy * hxy;
    const double scale = std::abs(hxx) + std::abs(hyy) + std::abs(hxy);
    if (std::abs(det) > 1e-12 * scale * scale) {
        // gradient at the centroid, then solve H (x* - xc) = -g
        const Vec2 xc = centroid(c[0], c[1], c[2]);
        const auto bc = barycentric(c[0], c[1], c[2], xc);
        double phi[6];
        Vec2 g[6];
        shape_gradients(2, c, bc, g);
        Vec2 grad{0, 0};
        for (int i = 0; i < 6; ++i) grad += g[i] * v[i];
        const Vec2 step{(-grad.x * hyy + grad.y * hxy) / det,
                        (-grad.y * hxx + grad.x * hxy) / det};
        const Vec2 xs = xc + step;
        const auto bs = barycentric(c[0], c[1], c[2], xs);
        if (bs[0] >= 0.0 && bs[1] >= 0.0 && bs[2] >= 0.0) {
            shape_values(2, bs, phi);
            double val = 0.0;
            for (int i = 0; i < 6; ++i) val += phi[i] * v[i];
            best = std::max(best, std::abs(val));
        }
    }
    return best;
}

/// Max of |field| over the degree-m barycentric lattice of the element
/// (a lower bound of the true sup for non-polynomial fields).
inline double field_linf_max(const std::function<double(Vec2)>& field,
                             const std::array<Vec2, 3>& c, int m = 6) {
    double best = 0.0;
    for (const auto& b : quad::tri_lattice(m))
        best = std::max(best, std::abs(field(bary_to_point(c, b))));
    return best;
}

/// Per-element estimator terms and the assembled global quantities of the
/// composite estimator.
struct EstimatorBreakdown {
    int kind = 1;
    double h_min = 0.0;
    std::vector<double> e1, e2, e3, e4, osc, obsplus, obsneg;
    std::vector<double> eta_T; // local marking indicator

    double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0, eta4 = 0.0, eta5 = 0.0;
    double obsplus_max = 0.0, obsneg_max = 0.0;
    double eta_h = 0.0;
};

/// Composite estimator
///   eta_h = |log h_min| (eta1 + eta2 + eta3 + (t-1) eta4)
///           + max obsplus + max obsneg,
/// natural log, floored at 1 so the factor cannot vanish on coarse meshes.
/// The local indicator uses the same combination elementwise.
inline void global_estimate(EstimatorBreakdown& b) {
    auto vmax = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    };
    b.eta1 = vmax(b.e1);
    b.eta2 = vmax(b.e2);
    b.eta3 = vmax(b.e3);
    b.eta4 = vmax(b.e4);
    b.eta5 = vmax(b.osc);
    b.obsplus_max = vmax(b.obsplus);
    b.obsneg_max = vmax(b.obsneg);

    const double logfac = std::max(std::abs(std::log(b.h_min)), 1.0);
    const double tgate = static_cast<double>(b.kind - 1);
    b.eta_h = logfac * (b.eta1 + b.eta2 + b.eta3 + tgate * b.eta4) + b.obsplus_max + b.obsneg_max;

    const size_t n = b.e1.size();
    b.eta_T.assign(n, 0.0);
    for (size_t t = 0; t < n; ++t)
        b.eta_T[t] = logfac * (b.e1[t] + b.e2[t] + b.e3[t] + tgate * b.e4[t]) + b.obsplus[t] +
                     b.obsneg[t];
}

/// Computes every per-element term:
///   e1 = h_T^2 ||Delta u_h + f - sigma_h||_inf   (lattice; Laplacian exact)
///   e2 = max over interior edges, h_e ||[[grad u_h]]||_inf  (exact poly max)
///   e3 = max over edges, ||[[u_h]]||_inf; on the boundary the jump is taken
///        against the Dirichlet data g
///   e4 = h_T^2 ||sigma2 - Q_h sigma2||_inf  (kind 2; exact at vertices)
///   osc = h_T^2 (max_T f - min_T f) / 2
///   obsplus = ||(chi - u_h)^+||_inf, obsneg = ||(u_h - chi)^+||_inf gated by
///   the strict-negativity set {B_h sigma < -1e-9}.
inline EstimatorBreakdown element_indicators(const Mesh& mesh, const EdgeTopology& topo,
                                             const DGFunction& u, const MultiplierField& mult,
                                             const ScalarField& f, const ScalarField& chi,
                                             const MethodConfig& cfg,
                                             const ScalarField& boundary_data = nullptr,
                                             int lattice_degree = 6) {
    if (mult.kind != cfg.constraint_kind)
        throw ConfigError("element_indicators: multiplier kind does not match the method");
    const int m = mesh.num_elements();
    EstimatorBreakdown b;
    b.kind = cfg.constraint_kind;
    b.e1.assign(m, 0.0);
    b.e2.assign(m, 0.0);
    b.e3.assign(m, 0.0);
    b.e4.assign(m, 0.0);
    b.osc.assign(m, 0.0);
    b.obsplus.assign(m, 0.0);
    b.obsneg.assign(m, 0.0);
    b.h_min = std::numeric_limits<double>::max();

    const auto lattice = quad::tri_lattice(lattice_degree);
    constexpr double kNegTol = 1e-9;

    for (int t = 0; t < m; ++t) {
        const auto g = geometry_of(mesh, t);
        b.h_min = std::min(b.h_min, g.h);
        const double h2 = g.h * g.h;
        const double lap = element_laplacian(u, g.coords, t);

        double res_max = 0.0, fmax = -std::numeric_limits<double>::max(), fmin = -fmax;
        double plus_max = 0.0, minus_max = 0.0;
        for (const auto& bary : lattice) {
            const Vec2 x = bary_to_point(g.coords, bary);
            const double fx = f(x);
            const double sig = (mult.kind == 1) ? mult.sigma1.value[t]
                                                : eval_pwlinear(mult.sigma2, mesh, t, x);
            res_max = std::max(res_max, std::abs(lap + fx - sig));
            fmax = std::max(fmax, fx);
            fmin = std::min(fmin, fx);
            const double diff = eval_dg_bary(u, t, bary) - chi(x);
            plus_max = std::max(plus_max, -diff);
            minus_max = std::max(minus_max, diff);
        }
        b.e1[t] = h2 * res_max;
        b.osc[t] = h2 * 0.5 * (fmax - fmin);
        b.obsplus[t] = std::max(0.0, plus_max);
        if (mult.reduced.value[t] < -kNegTol) b.obsneg[t] = std::max(0.0, minus_max);

        if (mult.kind == 2) {
            const double mean = mult.reduced.value[t];
            double dev = 0.0;
            for (int i = 0; i < 3; ++i)
                dev = std::max(dev, std::abs(eval_pwlinear(mult.sigma2, mesh, t, g.coords[i]) - mean));
            b.e4[t] = h2 * dev;
        }
    }

    // edge terms, computed once per edge and scattered to the adjacent elements
    for (const Edge& e : topo.edges) {
        const Vec2 pa = mesh.vertices[e.v[0]], pb = mesh.vertices[e.v[1]];
        const std::array<Vec2, 3> pts{pa, (pa + pb) * 0.5, pb};

        if (!e.boundary) {
            std::array<double, 3> jump_val{}, jump_grad{};
            for (int k = 0; k < 3; ++k) {
                jump_val[k] = eval_dg(u, mesh, e.elems[0], pts[k]) -
                              eval_dg(u, mesh, e.elems[1], pts[k]);
                jump_grad[k] = dot(e.normal, eval_dg_gradient(u, mesh, e.elems[0], pts[k]) -
                                                 eval_dg_gradient(u, mesh, e.elems[1], pts[k]));
            }
            const double ev = edge_poly_linf_max(jump_val[0], jump_val[1], jump_val[2]);
            const double eg = e.length * edge_poly_linf_max(jump_grad[0], jump_grad[1], jump_grad[2]);
            for (int s = 0; s < 2; ++s) {
                b.e3[e.elems[s]] = std::max(b.e3[e.elems[s]], ev);
                b.e2[e.elems[s]] = std::max(b.e2[e.elems[s]], eg);
            }
        } else {
            const int t = e.elems[0];
            double ev = 0.0;
            if (boundary_data) {
                // u_h - g is not polynomial in general: sample densely
                constexpr int kSamples = 13;
                for (int k = 0; k < kSamples; ++k) {
                    const Vec2 x = pa + (pb - pa) * (double(k) / (kSamples - 1));
                    ev = std::max(ev, std::abs(eval_dg(u, mesh, t, x) - boundary_data(x)));
                }
            } else {
                ev = edge_poly_linf_max(eval_dg(u, mesh, t, pts[0]), eval_dg(u, mesh, t, pts[1]),
                                        eval_dg(u, mesh, t, pts[2]));
            }
            b.e3[t] = std::max(b.e3[t], ev);
        }
    }

    global_estimate(b);
    return b;
}

} // namespace dgobs
