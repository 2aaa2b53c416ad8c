// Command-line driver: adaptive obstacle-problem runs (`run`) and a built-in
// self-verification battery (`verify`).

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <random>

#include "dgobs/driver.hpp"

namespace {

using namespace dgobs;

double monomial_integral(const std::array<Vec2, 3>& p, int a, int b) {
    const double A = signed_area(p[0], p[1], p[2]);
    const double x0 = p[0].x, x1 = p[1].x, x2 = p[2].x;
    const double y0 = p[0].y, y1 = p[1].y, y2 = p[2].y;
    if (a == 0 && b == 0) return A;
    if (a == 1 && b == 0) return A * (x0 + x1 + x2) / 3.0;
    if (a == 0 && b == 1) return A * (y0 + y1 + y2) / 3.0;
    if (a == 2 && b == 0) return A / 6.0 * (x0 * x0 + x1 * x1 + x2 * x2 + x0 * x1 + x0 * x2 + x1 * x2);
    if (a == 0 && b == 2) return A / 6.0 * (y0 * y0 + y1 * y1 + y2 * y2 + y0 * y1 + y0 * y2 + y1 * y2);
    return A / 6.0 * (x0 * y0 + x1 * y1 + x2 * y2) +
           A / 12.0 * (x0 * (y1 + y2) + x1 * (y0 + y2) + x2 * (y0 + y1));
}

int run_verify(unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int failures = 0;
    auto report = [&failures](const std::string& name, bool ok, const std::string& detail) {
        std::printf("%-44s %s  %s\n", name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
        if (!ok) ++failures;
    };

    { // quadrature-simplex rule vs closed-form monomial integrals
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            std::array<Vec2, 3> p;
            do {
                for (auto& q : p) q = {2.0 * unit(rng), 2.0 * unit(rng)};
            } while (signed_area(p[0], p[1], p[2]) < 0.05);
            Mesh mesh;
            mesh.vertices = {p[0], p[1], p[2]};
            mesh.elements = {{{0, 1, 2}, 0, 0}};
            double coef[6];
            for (double& c : coef) c = unit(rng);
            auto poly = [&coef](Vec2 q) {
                return coef[0] + coef[1] * q.x + coef[2] * q.y + coef[3] * q.x * q.x +
                       coef[4] * q.x * q.y + coef[5] * q.y * q.y;
            };
            double exact = 0.0;
            const int aa[6] = {0, 1, 0, 2, 1, 0}, bb[6] = {0, 0, 1, 0, 1, 2};
            for (int k = 0; k < 6; ++k) exact += coef[k] * monomial_integral(p, aa[k], bb[k]);
            const auto qs = quadrature_nodes(mesh, 0, 2);
            const double approx =
                integrate_simplex(mesh, 0, {poly(qs.r[0]), poly(qs.r[1]), poly(qs.r[2])});
            worst = std::max(worst, std::abs(approx - exact) / std::max(1.0, std::abs(exact)));
        }
        report("quadrature exactness (s=2, random P2)", worst < 1e-12,
               "max rel err " + std::to_string(worst));
    }

    { // NVB conformity, area preservation, generation bookkeeping
        Mesh mesh = build_rect_mesh(-1.5, 1.5, -1.5, 1.5, 4, 4);
        const double area0 = [&] {
            double s = 0.0;
            for (int t = 0; t < mesh.num_elements(); ++t) s += mesh.area(t);
            return s;
        }();
        bool ok = true;
        std::string why = "conformity + area preserved over 6 random refinements";
        for (int round = 0; round < 6 && ok; ++round) {
            std::set<int> marked;
            std::uniform_int_distribution<int> pick(0, mesh.num_elements() - 1);
            for (int k = 0; k < std::max(1, mesh.num_elements() / 4); ++k) marked.insert(pick(rng));
            mesh = refine_nvb(mesh, marked);
            try {
                topology(mesh);
            } catch (const TopologyError& err) {
                ok = false;
                why = err.what();
            }
            double s = 0.0;
            for (int t = 0; t < mesh.num_elements(); ++t) s += mesh.area(t);
            if (std::abs(s - area0) > 1e-12 * area0) {
                ok = false;
                why = "area drift";
            }
        }
        report("newest-vertex bisection closure", ok, why);
    }

    { // operator symmetry and quadratic-form consistency
        const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 2, 2);
        const EdgeTopology topo = topology(mesh);
        const SpaceDescriptor space = make_space(mesh, 2);
        MethodConfig cfg{1, 45.0, 2, 1};
        const SparseOperator A = assemble_operator(mesh, topo, space, cfg);
        const Eigen::MatrixXd D = Eigen::MatrixXd(A);
        const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
        report("SIPG operator symmetry", asym < 1e-10 * D.cwiseAbs().maxCoeff(),
               "max asymmetry " + std::to_string(asym));
    }

    { // PDAS against exhaustive active-set enumeration, two elements
        const Mesh mesh = build_rect_mesh(0, 1, 0, 1, 1, 1);
        const EdgeTopology topo = topology(mesh);
        bool ok = true;
        std::string why = "matches exhaustive KKT enumeration, kinds 1 and 2";
        for (int kind : {1, 2}) {
            MethodConfig cfg{1, 45.0, 1, kind};
            const SpaceDescriptor space = make_space(mesh, 1);
            const SparseOperator A = assemble_operator(mesh, topo, space, cfg);
            const Eigen::VectorXd F = assemble_load(mesh, space, [](Vec2) { return -4.0; });
            const ConstraintSystem K =
                build_constraints(mesh, space, cfg, [](Vec2) { return -0.05; });
            const PDASResult sol = pdas_solve(A, F, K);

            const Eigen::MatrixXd Ad(A);
            const Eigen::MatrixXd Bd(K.B);
            const int n = static_cast<int>(Ad.rows()), m = static_cast<int>(Bd.rows());
            bool found = false;
            for (int mask = 0; mask < (1 << m) && !found; ++mask) {
                std::vector<int> act;
                for (int i = 0; i < m; ++i)
                    if (mask & (1 << i)) act.push_back(i);
                const int k = static_cast<int>(act.size());
                Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + k, n + k);
                M.topLeftCorner(n, n) = Ad;
                for (int r = 0; r < k; ++r) {
                    M.block(n + r, 0, 1, n) = Bd.row(act[r]);
                    M.block(0, n + r, n, 1) = Bd.row(act[r]).transpose();
                }
                Eigen::VectorXd rhs(n + k);
                rhs.head(n) = F;
                for (int r = 0; r < k; ++r) rhs[n + r] = K.c[act[r]];
                const Eigen::VectorXd s = M.fullPivLu().solve(rhs);
                const Eigen::VectorXd g = Bd * s.head(n) - K.c;
                bool kkt = g.minCoeff() > -1e-10;
                for (int r = 0; r < k; ++r) kkt = kkt && s[n + r] <= 1e-10;
                if (kkt) {
                    found = true;
                    if ((s.head(n) - sol.u).lpNorm<Eigen::Infinity>() > 1e-8) {
                        ok = false;
                        why = "kind " + std::to_string(kind) + ": mismatch vs enumeration";
                    }
                }
            }
            if (!found) {
                ok = false;
                why = "enumeration found no KKT point";
            }
        }
        report("active-set solver vs enumeration", ok, why);
    }

    { // sign/complementarity and the variational inequality on a coarse run
        ProblemSpec spec = builtin_example(1);
        spec.method = MethodConfig{1, 45.0, 2, 1};
        spec.max_iters = 4;
        spec.max_dofs = 100000;
        const RunRecord rec = adaptive_solve(spec);
        bool ok = rec.total_violations == 0;
        std::string why = "0 violations over " + std::to_string(rec.rows.size()) + " iterations";

        const Mesh mesh = spec.initial_mesh();
        const EdgeTopology topo = topology(mesh);
        const SolveResult res = solve_once(mesh, topo, spec);
        const SparseOperator A = assemble_operator(mesh, topo, res.space, spec.method);
        Eigen::VectorXd F = assemble_load(mesh, res.space, spec.f);
        F += assemble_dirichlet_load(mesh, topo, res.space, spec.method, spec.boundary_data);
        const ConstraintSystem K = build_constraints(mesh, res.space, spec.method, spec.chi);
        const double viol =
            vi_residual_check(mesh, res.space, A, F, K, res.pdas.u, 50, seed);
        if (viol > 1e-8 * res.load_scale) {
            ok = false;
            why = "VI violation " + std::to_string(viol);
        }
        report("multiplier signs + variational inequality", ok, why);
    }

    std::printf("%s (%d failure%s)\n", failures == 0 ? "verify: all checks passed" : "verify: FAILED",
                failures, failures == 1 ? "" : "s");
    return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive interior-penalty DG solver for the 2D elliptic obstacle problem"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the adaptive SOLVE-ESTIMATE-MARK-REFINE loop");
    int example = 1;
    double f_variant = -15.0;
    int degree = 2;
    std::string constraints = "integral";
    std::string method = "sipg";
    double penalty = -1.0;
    double gamma = 0.4;
    int max_dofs = -1;
    int max_iters = 40;
    std::string out_dir = "out";
    bool emit_meshes = false;
    unsigned seed = 0;
    run->add_option("--example", example, "Benchmark id (1 or 2)")->check(CLI::Range(1, 2));
    run->add_option("--f-variant", f_variant, "Load for example 2: 0 or -15");
    run->add_option("--degree", degree, "Polynomial degree (1 or 2)")->check(CLI::Range(1, 2));
    run->add_option("--constraints", constraints, "integral | quadrature")
        ->check(CLI::IsMember({"integral", "quadrature"}));
    run->add_option("--method", method, "sipg | nipg | iipg")
        ->check(CLI::IsMember({"sipg", "nipg", "iipg"}));
    run->add_option("--penalty", penalty, "Interior penalty (default 45/20/30 per method)");
    run->add_option("--gamma", gamma, "Maximum-marking parameter in (0,1]");
    run->add_option("--max-dofs", max_dofs, "DOF cap (default 50000 for P1, 100000 for P2)");
    run->add_option("--max-iters", max_iters, "Adaptive iteration cap");
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--emit-meshes", emit_meshes, "Write a legacy-VTK mesh per iteration");
    run->add_option("--seed", seed, "RNG seed recorded in the config echo");

    auto* verify = app.add_subcommand("verify", "Run the built-in oracle/property checks");
    unsigned vseed = 20240915;
    verify->add_option("--seed", vseed, "RNG seed for the randomized checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (verify->parsed()) return run_verify(vseed);

        using namespace dgobs;
        ProblemSpec spec = builtin_example(example, f_variant);
        spec.method.degree = degree;
        spec.method.constraint_kind = (constraints == "integral") ? 1 : 2;
        spec.method.theta = (method == "sipg") ? 1 : (method == "nipg") ? -1 : 0;
        spec.method.penalty = (penalty > 0.0) ? penalty : default_penalty(spec.method.theta);
        spec.gamma = gamma;
        spec.max_dofs = (max_dofs > 0) ? max_dofs : (degree == 1 ? 50000 : 100000);
        spec.max_iters = max_iters;

        const RunRecord record = adaptive_solve(spec, emit_meshes);
        write_outputs(record, out_dir, emit_meshes, seed);

        const IterationRow& last = record.rows.back();
        std::printf("%s: %zu iterations, %d dofs, eta_h %.6g", spec.name.c_str(),
                    record.rows.size(), last.dofs, last.eta_total);
        if (last.error_linf) std::printf(", error %.6g", *last.error_linf);
        std::printf("\nresults in %s\n", out_dir.c_str());
        return 0;
    } catch (const dgobs::NonconvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const dgobs::ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
