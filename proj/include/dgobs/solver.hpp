#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <random>
#include <unordered_set>
#include <vector>

#include "dgobs/assembly.hpp"

namespace dgobs {

struct PdasOptions {
    enum class Init { FromUnconstrained, Empty, All, Given };
    double c0 = 1.0;
    int max_iters = 200;
    Init init = Init::FromUnconstrained;
    std::vector<char> given_mask; // used by Init::Given (one flag per row)
};

/// Solution of the KKT system for the constrained problem:
/// A u + B^T lambda = F, lambda <= 0, B u >= c, lambda .* (B u - c) = 0.
struct PDASResult {
    Eigen::VectorXd u;
    Eigen::VectorXd lambda; // one per constraint row, nonpositive
    std::vector<int> active;
    int iterations = 0;
    bool converged = false;
};

struct NonconvergenceError : SolverError {
    PDASResult last;
    NonconvergenceError(const std::string& msg, PDASResult r)
        : SolverError(msg), last(std::move(r)) {}
};

namespace detail {

/// Solve [[A, B_A^T], [B_A, 0]] [u; y] = [F; c_A] with a sparse direct
/// factorization (A may be nonsymmetric). The multiplier block y carries the
/// nonpositive sign convention directly.
inline void solve_bordered(const SparseOperator& A, const ConstraintSystem& K,
                           const Eigen::VectorXd& F, const std::vector<int>& active,
                           Eigen::VectorXd& u, Eigen::VectorXd& y) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(active.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros() + 2 * m * 8);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseOperator::InnerIterator it(A, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int r = 0; r < m; ++r)
        for (SparseOperator::InnerIterator it(K.B, active[r]); it; ++it) {
            trip.emplace_back(n + r, static_cast<int>(it.col()), it.value());
            trip.emplace_back(static_cast<int>(it.col()), n + r, it.value());
        }

    Eigen::SparseMatrix<double> M(n + m, n + m);
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = F;
    for (int r = 0; r < m; ++r) rhs[n + r] = K.c[active[r]];

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
        throw SolverError("pdas: singular saddle system (|active| = " + std::to_string(m) + ")");
    const Eigen::VectorXd sol = lu.solve(rhs);
    u = sol.head(n);
    y = sol.tail(m);
}

inline std::uint64_t active_hash(const std::vector<char>& mask) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : mask) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace detail

/// Primal-dual active set iteration. The predictor marks row i active when
/// -lambda_i + c0*(c - B u)_i > 0; on the active rows (B u)_i = c_i is
/// enforced through the bordered saddle system. Terminates when the
/// predicted set is unchanged; a revisited set triggers a damped update
/// (the largest-index element of the symmetric difference keeps its
/// previous state).
inline PDASResult pdas_solve(const SparseOperator& A, const Eigen::VectorXd& F,
                             const ConstraintSystem& K, const PdasOptions& opts = {}) {
    const int n = static_cast<int>(A.rows());
    const int m = K.rows();

    PDASResult res;
    res.lambda = Eigen::VectorXd::Zero(m);

    std::vector<char> mask(m, 0);
    {
        Eigen::VectorXd u0, y0;
        if (opts.init == PdasOptions::Init::All) {
            std::fill(mask.begin(), mask.end(), 1);
        } else if (opts.init == PdasOptions::Init::Given) {
            if (static_cast<int>(opts.given_mask.size()) != m)
                throw ConfigError("pdas: given initial mask has wrong length");
            mask = opts.given_mask;
        } else if (opts.init == PdasOptions::Init::FromUnconstrained) {
            detail::solve_bordered(A, K, F, {}, u0, y0);
            const Eigen::VectorXd g = K.B * u0 - K.c;
            for (int i = 0; i < m; ++i) mask[i] = (g[i] < 0.0) ? 1 : 0;
        }
    }

    std::unordered_set<std::uint64_t> visited;
    visited.insert(detail::active_hash(mask));

    std::vector<int> active;
    for (int it = 1; it <= opts.max_iters; ++it) {
        active.clear();
        for (int i = 0; i < m; ++i)
            if (mask[i]) active.push_back(i);

        Eigen::VectorXd y;
        detail::solve_bordered(A, K, F, active, res.u, y);
        res.lambda.setZero();
        for (size_t r = 0; r < active.size(); ++r) res.lambda[active[r]] = y[r];
        res.iterations = it;

        const Eigen::VectorXd g = K.B * res.u - K.c;
        std::vector<char> next(m, 0);
        for (int i = 0; i < m; ++i)
            next[i] = (-res.lambda[i] - opts.c0 * g[i] > 0.0) ? 1 : 0;

        if (next == mask) {
            res.converged = true;
            res.active = std::move(active);
            return res;
        }
        while (visited.count(detail::active_hash(next)) && next != mask) {
            int last_diff = -1;
            for (int i = 0; i < m; ++i)
                if (next[i] != mask[i]) last_diff = i;
            next[last_diff] = mask[last_diff]; // freeze: keep the previous state
        }
        if (next == mask) {
            res.converged = true;
            res.active = std::move(active);
            return res;
        }
        mask = std::move(next);
        visited.insert(detail::active_hash(mask));
    }

    res.converged = false;
    res.active = std::move(active);
    throw NonconvergenceError("pdas: active set did not settle within " +
                                  std::to_string(opts.max_iters) + " iterations",
                              res);
}

/// Probes the variational inequality A_h(u, v-u) >= (F, v-u) with random
/// feasible v and returns the largest observed violation
/// (F, v-u) - (A u, v-u).  Feasible v are produced by elementwise mean
/// shifts (kind 1) or per-row corrections along the quadrature-vertex
/// Lagrange functions (kind 2).
inline double vi_residual_check(const Mesh& mesh, const SpaceDescriptor& space,
                                const SparseOperator& A, const Eigen::VectorXd& F,
                                const ConstraintSystem& K, const Eigen::VectorXd& u,
                                int probes, unsigned seed = 1234) {
    const double scale = std::max(1.0, F.lpNorm<Eigen::Infinity>());
    {
        const Eigen::VectorXd g = K.B * u - K.c;
        if (g.minCoeff() < -1e-8 * scale)
            throw FeasibilityError("vi_residual_check: u violates B u >= c by " +
                                   std::to_string(-g.minCoeff()));
    }
    if (probes <= 0) return 0.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    const Eigen::VectorXd residual = F - A * u;
    const int n = space.dofs_per_element;

    double worst = 0.0;
    Eigen::VectorXd v(space.total_dofs());
    for (int p = 0; p < probes; ++p) {
        for (int i = 0; i < v.size(); ++i) v[i] = u[i] + dist(rng);
        if (K.kind == 1) {
            const Eigen::VectorXd g = K.B * v - K.c;
            for (int t = 0; t < mesh.num_elements(); ++t)
                if (g[t] < 0.0) v.segment(t * n, n).array() -= g[t];
        } else {
            for (int t = 0; t < mesh.num_elements(); ++t) {
                std::array<double, 3> deficit{};
                bool any = false;
                for (int i = 0; i < 3; ++i) {
                    const int r = 3 * t + i;
                    double bv = 0.0;
                    for (SparseOperator::InnerIterator it(K.B, r); it; ++it)
                        bv += it.value() * v[it.col()];
                    deficit[i] = std::max(0.0, K.c[r] - bv);
                    any = any || deficit[i] > 0.0;
                }
                if (!any) continue;
                const Eigen::MatrixXd psi = quad_layout_basis(mesh, t, space.degree);
                for (int i = 0; i < 3; ++i)
                    if (deficit[i] > 0.0)
                        v.segment(t * n, n) += deficit[i] * psi.col(i);
            }
        }
        worst = std::max(worst, residual.dot(v - u));
    }
    return worst;
}

} // namespace dgobs
