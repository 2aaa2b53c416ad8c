#include <catch2/catch_amalgamated.hpp>

#include "dgobs/solver.hpp"
#include "oracles.hpp"

using namespace dgobs;

namespace {

struct Problem {
    Mesh mesh;
    EdgeTopology topo;
    SpaceDescriptor space;
    SparseOperator A;
    Eigen::VectorXd F;
    ConstraintSystem K;
};

Problem make_problem(const Mesh& mesh, const MethodConfig& cfg, double f_val, double chi_val) {
    Problem p{mesh, topology(mesh), make_space(mesh, cfg.degree), {}, {}, {}};
    p.A = assemble_operator(p.mesh, p.topo, p.space, cfg);
    p.F = assemble_load(p.mesh, p.space, [f_val](Vec2) { return f_val; });
    p.K = build_constraints(p.mesh, p.space, cfg, [chi_val](Vec2) { return chi_val; });
    return p;
}

void check_kkt(const Problem& p, const PDASResult& r) {
    const double scale = std::max(1.0, p.F.lpNorm<Eigen::Infinity>());
    const double tol = 1e-10 * scale;
    const Eigen::VectorXd g = p.K.B * r.u - p.K.c;
    for (int i = 0; i < p.K.rows(); ++i) {
        CHECK(r.lambda[i] <= tol);
        CHECK(g[i] >= -tol);
        CHECK(std::abs(r.lambda[i] * g[i]) <= tol * scale);
    }
}

} // namespace

TEST_CASE("unconstrained limit: a far obstacle leaves lambda = 0") {
    const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 2, 2);
    const MethodConfig cfg{1, 45.0, 1, 1};
    const Problem p = make_problem(mesh, cfg, -2.0, -1e6);
    const PDASResult r = pdas_solve(p.A, p.F, p.K);
    CHECK(r.converged);
    CHECK(r.lambda.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.active.empty());

    Eigen::SparseMatrix<double> Ac(p.A);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(Ac);
    const Eigen::VectorXd uref = lu.solve(p.F);
    CHECK((r.u - uref).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("full contact on the two-triangle square") {
    const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 1, 1);
    const MethodConfig cfg{1, 45.0, 1, 1};
    const Problem p = make_problem(mesh, cfg, -40.0, -0.02);
    const PDASResult r = pdas_solve(p.A, p.F, p.K);
    REQUIRE(r.converged);
    CHECK(r.active.size() == 2);
    const Eigen::VectorXd g = p.K.B * r.u - p.K.c;
    CHECK(g.lpNorm<Eigen::Infinity>() < 1e-12); // B u = c exactly on full contact
    check_kkt(p, r);

    const auto oracle = oracles::enumerate_kkt(Eigen::MatrixXd(p.A), p.F, Eigen::MatrixXd(p.K.B),
                                               p.K.c);
    REQUIRE(oracle.has_value());
    CHECK((r.u - *oracle).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("active-set iteration matches exhaustive enumeration") {
    SECTION("integral constraints, meshes up to 8 elements") {
        for (auto [nx, ny] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
            const Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, nx, ny);
            for (int degree : {1, 2}) {
                const MethodConfig cfg{1, 45.0, degree, 1};
                const Problem p = make_problem(mesh, cfg, -2.0, -0.1);
                const PDASResult r = pdas_solve(p.A, p.F, p.K);
                REQUIRE(r.converged);
                check_kkt(p, r);
                const auto oracle = oracles::enumerate_kkt(Eigen::MatrixXd(p.A), p.F,
                                                           Eigen::MatrixXd(p.K.B), p.K.c);
                REQUIRE(oracle.has_value());
                CHECK((r.u - *oracle).lpNorm<Eigen::Infinity>() < 1e-8);
            }
        }
    }

    SECTION("quadrature-vertex constraints, meshes up to 4 elements") {
        for (auto [nx, ny] : {std::pair{1, 1}, std::pair{2, 1}}) {
            const Mesh mesh = build_rect_mesh(-1, 1, -1, 1, nx, ny);
            for (int degree : {1, 2}) {
                const MethodConfig cfg{1, 45.0, degree, 2};
                const Problem p = make_problem(mesh, cfg, -6.0, -0.05);
                const PDASResult r = pdas_solve(p.A, p.F, p.K);
                REQUIRE(r.converged);
                check_kkt(p, r);
                const auto oracle = oracles::enumerate_kkt(Eigen::MatrixXd(p.A), p.F,
                                                           Eigen::MatrixXd(p.K.B), p.K.c);
                REQUIRE(oracle.has_value());
                CHECK((r.u - *oracle).lpNorm<Eigen::Infinity>() < 1e-8);
            }
        }
    }
}

TEST_CASE("the fixed point does not depend on the initial active set") {
    const Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, 2, 2);
    const MethodConfig cfg{1, 45.0, 2, 1};
    const Problem p = make_problem(mesh, cfg, -2.0, -0.1);

    PdasOptions from_empty;
    from_empty.init = PdasOptions::Init::Empty;
    PdasOptions from_all;
    from_all.init = PdasOptions::Init::All;

    const PDASResult a = pdas_solve(p.A, p.F, p.K, from_empty);
    const PDASResult b = pdas_solve(p.A, p.F, p.K, from_all);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK((a.u - b.u).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(a.active == b.active);
}

TEST_CASE("NIPG produces a nonsymmetric system the solver still handles") {
    const Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, 2, 2);
    const MethodConfig cfg{-1, 20.0, 2, 1};
    const Problem p = make_problem(mesh, cfg, -2.0, -0.1);
    const PDASResult r = pdas_solve(p.A, p.F, p.K);
    REQUIRE(r.converged);
    check_kkt(p, r);
    CHECK(!r.active.empty()); // the interior dips below -0.1 on this data
}

TEST_CASE("iteration cap raises a nonconvergence error carrying the last iterate") {
    const Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, 2, 2);
    const MethodConfig cfg{1, 45.0, 1, 1};
    const Problem p = make_problem(mesh, cfg, -2.0, -0.05);

    PdasOptions opts;
    opts.init = PdasOptions::Init::Empty; // guarantees at least one set change
    opts.max_iters = 1;
    try {
        pdas_solve(p.A, p.F, p.K, opts);
        FAIL("expected NonconvergenceError");
    } catch (const NonconvergenceError& e) {
        CHECK_FALSE(e.last.converged);
        CHECK(e.last.u.size() == p.space.total_dofs());
        CHECK(e.last.iterations == 1);
    }
}

TEST_CASE("variational inequality residual check") {
    const Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, 2, 2);

    for (int kind : {1, 2}) {
        const MethodConfig cfg{1, 45.0, 2, kind};
        const Problem p = make_problem(mesh, cfg, -2.0, -0.1);
        const PDASResult r = pdas_solve(p.A, p.F, p.K);
        REQUIRE(r.converged);
        const double scale = std::max(1.0, p.F.lpNorm<Eigen::Infinity>());

        SECTION("exact solution passes, kind " + std::to_string(kind)) {
            CHECK(vi_residual_check(p.mesh, p.space, p.A, p.F, p.K, r.u, 100) <= 1e-8 * scale);
        }

        SECTION("a feasible perturbation is detected, kind " + std::to_string(kind)) {
            Eigen::VectorXd bad = r.u;
            // push one element up by a constant: stays feasible for a lower
            // obstacle, no longer solves the VI
            const Eigen::VectorXd g = p.K.B * r.u - p.K.c;
            int free_row = 0;
            for (int i = 0; i < g.size(); ++i)
                if (g[i] > g[free_row]) free_row = i;
            const int n = p.space.dofs_per_element;
            bad.segment(n * p.K.row_element[free_row], n).array() += 0.1;
            CHECK(vi_residual_check(p.mesh, p.space, p.A, p.F, p.K, bad, 200) > 1e-6);
        }

        SECTION("zero probes are vacuous, kind " + std::to_string(kind)) {
            CHECK(vi_residual_check(p.mesh, p.space, p.A, p.F, p.K, r.u, 0) == 0.0);
        }

        SECTION("infeasible input is rejected, kind " + std::to_string(kind)) {
            Eigen::VectorXd bad = r.u;
            bad.array() -= 1.0; // sinks below the obstacle somewhere
            CHECK_THROWS_AS(vi_residual_check(p.mesh, p.space, p.A, p.F, p.K, bad, 10),
                            FeasibilityError);
        }
    }
}
