#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dgobs/fespace.hpp"
#include "oracles.hpp"

using namespace dgobs;

namespace {

Mesh single_triangle(Vec2 a, Vec2 b, Vec2 c) {
    Mesh mesh;
    mesh.vertices = {a, b, c};
    mesh.elements = {{{0, 1, 2}, 0, 0}};
    return mesh;
}

Mesh reference_triangle() { return single_triangle({0, 0}, {1, 0}, {0, 1}); }

/// Interpolate a scalar field at the Lagrange nodes of every element.
DGFunction interpolate(const Mesh& mesh, const SpaceDescriptor& space, const ScalarField& f) {
    DGFunction u(space);
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        for (int i = 0; i < space.dofs_per_element; ++i) {
            const auto b = local_node_bary(space.degree, i);
            u.coeffs[space.dof(t, i)] = f(bary_to_point(c, b));
        }
    }
    return u;
}

} // namespace

TEST_CASE("space descriptor block layout") {
    const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 2, 2);
    const SpaceDescriptor p1 = make_space(mesh, 1);
    const SpaceDescriptor p2 = make_space(mesh, 2);
    CHECK(p1.total_dofs() == 3 * mesh.num_elements());
    CHECK(p2.total_dofs() == 6 * mesh.num_elements());
    CHECK(p2.dof(3, 4) == 22);
    CHECK_THROWS_AS(make_space(mesh, 3), ConfigError);
}

TEST_CASE("quadrature simplex nodes") {
    const Mesh ref = reference_triangle();

    SECTION("order 2 shrinks the vertices halfway to the centroid") {
        const auto q = quadrature_nodes(ref, 0, 2);
        CHECK(q.shrink == Catch::Approx(0.5)); // 1/sqrt(d+2), d = 2
        CHECK(q.r[0].x == Catch::Approx(1.0 / 6));
        CHECK(q.r[0].y == Catch::Approx(1.0 / 6));
        CHECK(q.r[1].x == Catch::Approx(2.0 / 3));
        CHECK(q.r[1].y == Catch::Approx(1.0 / 6));
        CHECK(q.r[2].x == Catch::Approx(1.0 / 6));
        CHECK(q.r[2].y == Catch::Approx(2.0 / 3));
        CHECK(q.weight == Catch::Approx(ref.area(0) / 3));
    }

    SECTION("order 1 uses the vertices") {
        const auto q = quadrature_nodes(ref, 0, 1);
        for (int i = 0; i < 3; ++i) {
            CHECK(q.r[i].x == Catch::Approx(ref.vertices[i].x).margin(1e-15));
            CHECK(q.r[i].y == Catch::Approx(ref.vertices[i].y).margin(1e-15));
        }
    }

    SECTION("node mean is the centroid for random triangles") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> d(-2, 2);
        for (int k = 0; k < 25; ++k) {
            Vec2 a{d(rng), d(rng)}, b{d(rng), d(rng)}, c{d(rng), d(rng)};
            if (signed_area(a, b, c) < 0.05) continue;
            const Mesh m = single_triangle(a, b, c);
            for (int s : {1, 2}) {
                const auto q = quadrature_nodes(m, 0, s);
                const Vec2 mean = (q.r[0] + q.r[1] + q.r[2]) / 3.0;
                const Vec2 g = centroid(a, b, c);
                CHECK(mean.x == Catch::Approx(g.x).margin(1e-12));
                CHECK(mean.y == Catch::Approx(g.y).margin(1e-12));
            }
        }
    }

    CHECK_THROWS_AS(quadrature_nodes(ref, 0, 3), ConfigError);
}

TEST_CASE("integrate_simplex agrees with the closed-form monomial oracle") {
    const Mesh ref = reference_triangle();

    SECTION("frozen values on the reference triangle") {
        const auto q2 = quadrature_nodes(ref, 0, 2);
        auto sq = [](Vec2 p) { return p.x * p.x; };
        CHECK(integrate_simplex(ref, 0, {sq(q2.r[0]), sq(q2.r[1]), sq(q2.r[2])}) ==
              Catch::Approx(1.0 / 12).epsilon(1e-13));
        CHECK(integrate_simplex(ref, 0, {1.0, 1.0, 1.0}) == Catch::Approx(0.5).epsilon(1e-14));
        const auto q1 = quadrature_nodes(ref, 0, 1);
        CHECK(integrate_simplex(ref, 0, {q1.r[0].x, q1.r[1].x, q1.r[2].x}) ==
              Catch::Approx(1.0 / 6).epsilon(1e-13));
    }

    SECTION("s=2 exact on 100 random quadratics over random triangles") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> d(-2, 2);
        for (int k = 0; k < 100; ++k) {
            std::array<oracles::Pt, 3> p;
            Vec2 a, b, c;
            do {
                a = {d(rng), d(rng)};
                b = {d(rng), d(rng)};
                c = {d(rng), d(rng)};
            } while (signed_area(a, b, c) < 0.05);
            p = {oracles::Pt{a.x, a.y}, {b.x, b.y}, {c.x, c.y}};
            double coef[6];
            for (double& x : coef) x = d(rng);
            auto poly = [&coef](Vec2 q) {
                return coef[0] + coef[1] * q.x + coef[2] * q.y + coef[3] * q.x * q.x +
                       coef[4] * q.x * q.y + coef[5] * q.y * q.y;
            };
            const int aa[6] = {0, 1, 0, 2, 1, 0}, bb[6] = {0, 0, 1, 0, 1, 2};
            double exact = 0.0;
            for (int i = 0; i < 6; ++i) exact += coef[i] * oracles::monomial_integral(p, aa[i], bb[i]);

            const Mesh m = single_triangle(a, b, c);
            const auto q = quadrature_nodes(m, 0, 2);
            const double got = integrate_simplex(m, 0, {poly(q.r[0]), poly(q.r[1]), poly(q.r[2])});
            CHECK(got == Catch::Approx(exact).epsilon(1e-12).margin(1e-13));
        }
    }
}

TEST_CASE("eval_dg reproduces local polynomials") {
    const Mesh ref = reference_triangle();

    SECTION("P1 centroid value is the vertex mean") {
        DGFunction u(make_space(ref, 1));
        u.coeffs << 2.0, -1.0, 5.0;
        CHECK(eval_dg(u, ref, 0, {1.0 / 3, 1.0 / 3}) == Catch::Approx((2.0 - 1.0 + 5.0) / 3));
    }

    SECTION("P2 reproduces x^2") {
        const SpaceDescriptor space = make_space(ref, 2);
        const DGFunction u = interpolate(ref, space, [](Vec2 p) { return p.x * p.x; });
        CHECK(eval_dg(u, ref, 0, {0.5, 0.0}) == Catch::Approx(0.25).margin(1e-14));
        CHECK(eval_dg(u, ref, 0, {0.3, 0.4}) == Catch::Approx(0.09).margin(1e-14));
        const Vec2 g = eval_dg_gradient(u, ref, 0, {0.3, 0.4});
        CHECK(g.x == Catch::Approx(0.6).margin(1e-13));
        CHECK(g.y == Catch::Approx(0.0).margin(1e-13));
    }

    SECTION("gradient of the P1 interpolant of x") {
        const SpaceDescriptor space = make_space(ref, 1);
        const DGFunction u = interpolate(ref, space, [](Vec2 p) { return p.x; });
        const Vec2 g = eval_dg_gradient(u, ref, 0, {0.2, 0.2});
        CHECK(g.x == Catch::Approx(1.0).margin(1e-14));
        CHECK(g.y == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("q_h computes elementwise means") {
    const Mesh ref = reference_triangle();

    const PiecewiseConstant mx = q_h(ref, ScalarField([](Vec2 p) { return p.x; }));
    CHECK(mx.value[0] == Catch::Approx(1.0 / 3).epsilon(1e-13));

    const Mesh grid = build_rect_mesh(0, 1, 0, 1, 2, 2);
    const PiecewiseConstant mk = q_h(grid, ScalarField([](Vec2) { return 7.5; }));
    for (double v : mk.value) CHECK(v == Catch::Approx(7.5).epsilon(1e-14));

    // idempotence: Q_h of the piecewise-constant embedding equals itself
    const SpaceDescriptor space = make_space(grid, 2);
    const DGFunction u = interpolate(grid, space, [](Vec2 p) { return p.x * p.y + p.x * p.x; });
    const PiecewiseConstant q1 = q_h(grid, u);
    DGFunction embedded(space);
    for (int t = 0; t < grid.num_elements(); ++t)
        for (int i = 0; i < space.dofs_per_element; ++i)
            embedded.coeffs[space.dof(t, i)] = q1.value[t];
    const PiecewiseConstant q2 = q_h(grid, embedded);
    for (int t = 0; t < grid.num_elements(); ++t)
        CHECK(q2.value[t] == Catch::Approx(q1.value[t]).epsilon(1e-13));
}

TEST_CASE("averaging operator E_h") {
    const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 1, 1);
    const EdgeTopology topo = topology(mesh);
    const SpaceDescriptor space = make_space(mesh, 2);

    SECTION("indicator jump averages to 1/2 at interior nodes, 0 on the boundary") {
        DGFunction u(space);
        for (int i = 0; i < 6; ++i) u.coeffs[space.dof(1, i)] = 1.0; // 1 on T1, 0 on T0
        const ConformingNodalValues nodes = enrich_e_h(mesh, topo, u);
        for (int v = 0; v < mesh.num_vertices(); ++v) CHECK(nodes.vertex[v] == 0.0);
        int interior_edges = 0;
        for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
            if (topo.edges[e].boundary) {
                CHECK(nodes.edge[e] == 0.0);
            } else {
                CHECK(nodes.edge[e] == Catch::Approx(0.5));
                ++interior_edges;
            }
        }
        CHECK(interior_edges == 1);
    }

    SECTION("conforming functions with zero boundary nodes are fixed points") {
        const Mesh grid = refine_nvb(build_rect_mesh(0, 1, 0, 1, 2, 2), {0, 1, 2});
        const EdgeTopology gtopo = topology(grid);
        const SpaceDescriptor gspace = make_space(grid, 2);
        const DGFunction u = interpolate(grid, gspace, [](Vec2 p) {
            return p.x * (1 - p.x) * p.y * (1 - p.y);
        });
        const ConformingNodalValues nodes = enrich_e_h(grid, gtopo, u);
        const DGFunction back = conforming_to_dg(grid, gtopo, nodes);
        for (int i = 0; i < gspace.total_dofs(); ++i)
            CHECK(back.coeffs[i] == Catch::Approx(u.coeffs[i]).margin(1e-13));
    }

    SECTION("enriched output is conforming across interior edges") {
        const Mesh grid = build_rect_mesh(0, 1, 0, 1, 2, 2);
        const EdgeTopology gtopo = topology(grid);
        const SpaceDescriptor gspace = make_space(grid, 2);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> d(-1, 1);
        DGFunction u(gspace);
        for (int i = 0; i < gspace.total_dofs(); ++i) u.coeffs[i] = d(rng);
        const DGFunction c = conforming_to_dg(grid, gtopo, enrich_e_h(grid, gtopo, u));
        for (const Edge& e : gtopo.edges) {
            if (e.boundary) continue;
            const Vec2 a = grid.vertices[e.v[0]], b = grid.vertices[e.v[1]];
            for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const Vec2 x = a + (b - a) * s;
                CHECK(eval_dg(c, grid, e.elems[0], x) ==
                      Catch::Approx(eval_dg(c, grid, e.elems[1], x)).margin(1e-12));
            }
        }
    }

    SECTION("P1 averages vertex nodes only") {
        const SpaceDescriptor p1 = make_space(mesh, 1);
        DGFunction u(p1);
        u.coeffs << 0, 0, 0, 1, 1, 1;
        const ConformingNodalValues nodes = enrich_e_h(mesh, topo, u);
        CHECK(nodes.edge.empty());
        for (double v : nodes.vertex) CHECK(v == 0.0); // all four vertices are boundary
    }
}

TEST_CASE("local projection onto the element space") {
    const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 1, 1);
    const SpaceDescriptor space = make_space(mesh, 2);

    SECTION("discrete functions are reproduced") {
        const DGFunction v = interpolate(mesh, space, [](Vec2 p) { return 1 + p.x - 2 * p.y + p.x * p.y; });
        const DGFunction proj = local_project_pi_h(mesh, space, [&](Vec2 p) {
            return 1 + p.x - 2 * p.y + p.x * p.y;
        });
        for (int i = 0; i < space.total_dofs(); ++i)
            CHECK(proj.coeffs[i] == Catch::Approx(v.coeffs[i]).margin(1e-12));
    }

    SECTION("constants are reproduced") {
        const DGFunction proj = local_project_pi_h(mesh, space, [](Vec2) { return 4.25; });
        for (int i = 0; i < space.total_dofs(); ++i)
            CHECK(proj.coeffs[i] == Catch::Approx(4.25).margin(1e-12));
    }

    SECTION("residual of x^3 is orthogonal to quadratics") {
        const Mesh ref = reference_triangle();
        const SpaceDescriptor rspace = make_space(ref, 2);
        auto cube = [](Vec2 p) { return p.x * p.x * p.x; };
        const DGFunction proj = local_project_pi_h(ref, rspace, cube);
        // moments against each standard basis function, degree-6 rule (exact:
        // integrand degree 5)
        double phi[6];
        const auto c = ref.coords(0);
        for (int j = 0; j < 6; ++j) {
            double moment = 0.0;
            for (const auto& qp : quad::tri_deg6()) {
                shape_values(2, qp.bary, phi);
                const Vec2 x = bary_to_point(c, qp.bary);
                moment += qp.w * ref.area(0) * (cube(x) - eval_dg_bary(proj, 0, qp.bary)) * phi[j];
            }
            CHECK(moment == Catch::Approx(0.0).margin(1e-10));
        }
    }

    SECTION("idempotence on a smooth field") {
        auto f = [](Vec2 p) { return std::sin(p.x) * std::exp(p.y); };
        const DGFunction once = local_project_pi_h(mesh, space, f);
        const DGFunction twice = local_project_pi_h(
            mesh, space, [&](Vec2 p) { return eval_dg(once, mesh, 0, p); });
        // the comparison is restricted to element 0
        for (const auto& b : quad::tri_lattice(4))
            CHECK(eval_dg_bary(twice, 0, b) ==
                  Catch::Approx(eval_dg_bary(once, 0, b)).margin(1e-10));
    }
}

TEST_CASE("pi_tilde_inverse anchors linears at quadrature vertices") {
    const Mesh mesh = build_rect_mesh(0, 2, 0, 1, 2, 1);
    const SpaceDescriptor space = make_space(mesh, 2);

    SECTION("linear functions are reproduced everywhere") {
        const DGFunction v = interpolate(mesh, space, [](Vec2 p) { return 2 * p.x - p.y + 1; });
        const PiecewiseLinear w = pi_tilde_inverse(mesh, v);
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const auto c = mesh.coords(t);
            for (const auto& b : quad::tri_lattice(3)) {
                const Vec2 x = bary_to_point(c, b);
                CHECK(eval_pwlinear(w, mesh, t, x) ==
                      Catch::Approx(2 * x.x - x.y + 1).margin(1e-12));
            }
        }
    }

    SECTION("constants are reproduced") {
        const DGFunction v = interpolate(mesh, space, [](Vec2) { return -3.5; });
        const PiecewiseLinear w = pi_tilde_inverse(mesh, v);
        for (double val : w.value) CHECK(val == Catch::Approx(-3.5).margin(1e-13));
    }

    SECTION("quadrature-vertex values match for random quadratics") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> d(-1, 1);
        for (int k = 0; k < 20; ++k) {
            double c0 = d(rng), c1 = d(rng), c2 = d(rng), c3 = d(rng), c4 = d(rng), c5 = d(rng);
            auto f = [&](Vec2 p) {
                return c0 + c1 * p.x + c2 * p.y + c3 * p.x * p.x + c4 * p.x * p.y + c5 * p.y * p.y;
            };
            const DGFunction v = interpolate(mesh, space, f);
            const PiecewiseLinear w = pi_tilde_inverse(mesh, v);
            for (int t = 0; t < mesh.num_elements(); ++t) {
                const auto qs = quadrature_nodes(mesh, t, 2);
                for (int i = 0; i < 3; ++i)
                    CHECK(w.at(t, i) == Catch::Approx(f(qs.r[i])).margin(1e-12));
            }
        }
    }
}

TEST_CASE("quadrature-layout Lagrange basis is dual to its nodes") {
    const Mesh mesh = refine_nvb(build_rect_mesh(0, 1, 0, 1, 1, 1), {0});
    for (int degree : {1, 2}) {
        const SpaceDescriptor space = make_space(mesh, degree);
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const Eigen::MatrixXd psi = quad_layout_basis(mesh, t, degree);
            const auto nodes = quad_layout_nodes(mesh, t, degree);
            const auto c = mesh.coords(t);
            for (size_t k = 0; k < nodes.size(); ++k) {
                double phi[6];
                const auto b = barycentric(c[0], c[1], c[2], nodes[k]);
                shape_values(degree, b, phi);
                for (int i = 0; i < space.dofs_per_element; ++i) {
                    double val = 0.0;
                    for (int j = 0; j < space.dofs_per_element; ++j) val += psi(j, i) * phi[j];
                    CHECK(val == Catch::Approx(i == static_cast<int>(k) ? 1.0 : 0.0).margin(1e-12));
                }
            }
        }
    }
}
