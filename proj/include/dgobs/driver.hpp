#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgobs/estimator.hpp"
#include "dgobs/mesh_io.hpp"
#include "dgobs/multiplier.hpp"
#include "dgobs/problems.hpp"
#include "dgobs/solver.hpp"

namespace dgobs {

struct SolveResult {
    SpaceDescriptor space;
    DGFunction u;
    MultiplierField multiplier;
    EstimatorBreakdown breakdown;
    ContactClassification contact;
    PDASResult pdas;
    MultiplierCheck check;
    double load_scale = 1.0;

    SolveResult() : u(SpaceDescriptor{}) {}
};

/// One SOLVE + ESTIMATE pass on a fixed mesh: assemble, solve the discrete
/// variational inequality with the active-set method, recover the discrete
/// multiplier, classify contact, and evaluate the estimator terms. The
/// multiplier sign/complementarity checks run with
/// tol = 1e-9 * max(1, ||F||_inf) and are reported in `check`.
inline SolveResult solve_once(const Mesh& mesh, const EdgeTopology& topo,
                              const ProblemSpec& spec, const PdasOptions& opts = {}) {
    SolveResult res;
    res.space = make_space(mesh, spec.method.degree);
    const SparseOperator A = assemble_operator(mesh, topo, res.space, spec.method);
    Eigen::VectorXd F = assemble_load(mesh, res.space, spec.f);
    if (spec.boundary_data)
        F += assemble_dirichlet_load(mesh, topo, res.space, spec.method, spec.boundary_data);
    const ConstraintSystem K = build_constraints(mesh, res.space, spec.method, spec.chi);

    res.pdas = pdas_solve(A, F, K, opts);
    res.u = DGFunction(res.space);
    res.u.coeffs = res.pdas.u;
    res.load_scale = std::max(1.0, F.lpNorm<Eigen::Infinity>());

    res.multiplier = recover_multiplier(mesh, res.space, A, F, res.pdas.u,
                                        spec.method.constraint_kind, &res.pdas.active);
    res.check = check_multiplier(mesh, res.multiplier, K, K.B * res.pdas.u,
                                 1e-9 * res.load_scale);
    res.contact = classify(mesh, res.space, res.u, spec.chi, spec.method.constraint_kind);
    res.breakdown = element_indicators(mesh, topo, res.u, res.multiplier, spec.f, spec.chi,
                                       spec.method, spec.boundary_data);
    return res;
}

/// Maximum marking: every element whose indicator reaches Gamma times the
/// largest indicator. An all-zero field marks nothing.
inline std::set<int> mark_elements(const EstimatorBreakdown& b, double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("mark_elements: gamma not in (0,1]");
    double top = 0.0;
    for (double v : b.eta_T) top = std::max(top, v);
    std::set<int> marked;
    if (top == 0.0) return marked;
    for (int t = 0; t < static_cast<int>(b.eta_T.size()); ++t)
        if (b.eta_T[t] >= gamma * top) marked.insert(t);
    return marked;
}

/// Sup-norm error against a known solution, sampled on the degree-6 lattice
/// of every element (a documented lower bound of the true sup).
inline double linf_error(const Mesh& mesh, const DGFunction& u, const ScalarField& exact,
                         int lattice_degree = 6) {
    double err = 0.0;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto c = mesh.coords(t);
        for (const auto& b : quad::tri_lattice(lattice_degree)) {
            const Vec2 x = bary_to_point(c, b);
            err = std::max(err, std::abs(exact(x) - eval_dg_bary(u, t, b)));
        }
    }
    return err;
}

struct IterationRow {
    int iter = 0;
    int elements = 0;
    int dofs = 0;
    double h_min = 0.0;
    double eta1 = 0, eta2 = 0, eta3 = 0, eta4 = 0, eta5 = 0;
    double eta_total = 0;
    std::optional<double> error_linf;
    std::optional<double> efficiency;
    int pdas_iters = 0;
    double seconds = 0.0;
    // diagnostics, not part of the CSV
    int marked = 0;
    int sign_violations = 0;
    int complementarity_violations = 0;
    double fb_marked_fraction = -1.0; // kind 2 only
    int contact_elements = 0;
    int free_boundary_elements = 0;
};

struct RunRecord {
    ProblemSpec spec;
    std::vector<IterationRow> rows;
    std::vector<Mesh> meshes; // filled when requested
    bool stopped_zero_estimator = false;
    int total_violations = 0;
};

namespace detail {

/// Fraction of marked elements lying within one element layer (shared
/// vertex) of the free-boundary elements.
inline double marked_near_free_boundary(const Mesh& mesh, const EdgeTopology& topo,
                                        const ContactClassification& contact,
                                        const std::set<int>& marked) {
    if (marked.empty()) return -1.0;
    std::vector<char> near_vertex(mesh.num_vertices(), 0);
    bool any_fb = false;
    for (int t = 0; t < mesh.num_elements(); ++t)
        if (contact.label[t] == ContactLabel::free_boundary) {
            any_fb = true;
            for (int i = 0; i < 3; ++i) near_vertex[mesh.elements[t].v[i]] = 1;
        }
    if (!any_fb) return 0.0;
    int hits = 0;
    for (int t : marked) {
        const auto& v = mesh.elements[t].v;
        if (near_vertex[v[0]] || near_vertex[v[1]] || near_vertex[v[2]]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(marked.size());
}

} // namespace detail

/// SOLVE -> ESTIMATE -> MARK -> REFINE until the DOF or iteration cap, or a
/// zero estimator. On solver failure the rows collected so far are attached
/// to the rethrown error's message context.
inline RunRecord adaptive_solve(const ProblemSpec& spec, bool collect_meshes = false) {
    spec.validate();
    RunRecord record;
    record.spec = spec;

    Mesh mesh = spec.initial_mesh();
    PdasOptions opts; // the first mesh starts from the unconstrained residual
    for (int iter = 0;; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        const EdgeTopology topo = topology(mesh);
        const SolveResult res = solve_once(mesh, topo, spec, opts);
        const std::set<int> marked = mark_elements(res.breakdown, spec.gamma);
        const auto t1 = std::chrono::steady_clock::now();

        IterationRow row;
        row.iter = iter;
        row.elements = mesh.num_elements();
        row.dofs = res.space.total_dofs();
        row.h_min = res.breakdown.h_min;
        row.eta1 = res.breakdown.eta1;
        row.eta2 = res.breakdown.eta2;
        row.eta3 = res.breakdown.eta3;
        row.eta4 = res.breakdown.eta4;
        row.eta5 = res.breakdown.eta5;
        row.eta_total = res.breakdown.eta_h;
        if (spec.exact) {
            row.error_linf = linf_error(mesh, res.u, spec.exact);
            if (*row.error_linf > 0.0) row.efficiency = res.breakdown.eta_h / *row.error_linf;
        }
        row.pdas_iters = res.pdas.iterations;
        row.seconds = std::chrono::duration<double>(t1 - t0).count();
        row.marked = static_cast<int>(marked.size());
        row.sign_violations = res.check.sign_violations;
        row.complementarity_violations = res.check.complementarity_violations;
        row.contact_elements = res.contact.count(ContactLabel::contact);
        row.free_boundary_elements = res.contact.count(ContactLabel::free_boundary);
        if (spec.method.constraint_kind == 2)
            row.fb_marked_fraction =
                detail::marked_near_free_boundary(mesh, topo, res.contact, marked);
        record.rows.push_back(row);
        record.total_violations += res.check.total();
        if (collect_meshes) record.meshes.push_back(mesh);

        if (row.dofs >= spec.max_dofs || iter + 1 >= spec.max_iters) break;
        if (marked.empty()) {
            record.stopped_zero_estimator = true;
            break;
        }
        std::vector<int> parent_of;
        mesh = refine_nvb(mesh, marked, &parent_of);

        // seed the next active set from this solve through the genealogy;
        // the fixed point does not depend on the seed, only the iteration
        // count does
        const int rows_per_elem = (spec.method.constraint_kind == 1) ? 1 : 3;
        std::vector<char> prev(rows_per_elem * res.space.num_elements, 0);
        for (int r : res.pdas.active) prev[r] = 1;
        opts.init = PdasOptions::Init::Given;
        opts.given_mask.assign(rows_per_elem * mesh.num_elements(), 0);
        for (int t = 0; t < mesh.num_elements(); ++t)
            for (int i = 0; i < rows_per_elem; ++i)
                opts.given_mask[rows_per_elem * t + i] = prev[rows_per_elem * parent_of[t] + i];
    }
    return record;
}

/// Least-squares slope of log(value) against log(DOFs) over the final
/// `window` rows.
inline double fit_slope(const std::vector<IterationRow>& rows,
                        const std::function<double(const IterationRow&)>& value,
                        int window = 5) {
    std::vector<std::pair<double, double>> pts;
    const int begin = std::max(0, static_cast<int>(rows.size()) - window);
    for (int i = begin; i < static_cast<int>(rows.size()); ++i) {
        const double y = value(rows[i]);
        if (y > 0.0) pts.emplace_back(std::log(double(rows[i].dofs)), std::log(y));
    }
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// convergence.csv + run.json config echo; per-iteration legacy-VTK meshes
/// when emit_meshes is set (requires the record to carry them).
inline void write_outputs(const RunRecord& record, const std::string& out_dir,
                          bool emit_meshes = false, unsigned seed = 0) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("write_outputs: cannot create " + out_dir);

    const std::string csv_path = out_dir + "/convergence.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("write_outputs: cannot open " + csv_path);
    csv << "iter,elements,dofs,h_min,eta1,eta2,eta3,eta4,eta5,eta_total,"
           "error_linf,efficiency,pdas_iters,seconds\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    for (const IterationRow& r : record.rows) {
        csv << r.iter << ',' << r.elements << ',' << r.dofs << ',' << fmt(r.h_min) << ','
            << fmt(r.eta1) << ',' << fmt(r.eta2) << ',' << fmt(r.eta3) << ',' << fmt(r.eta4)
            << ',' << fmt(r.eta5) << ',' << fmt(r.eta_total) << ','
            << (r.error_linf ? fmt(*r.error_linf) : "") << ','
            << (r.efficiency ? fmt(*r.efficiency) : "") << ',' << r.pdas_iters << ','
            << fmt(r.seconds) << '\n';
    }
    if (!csv) throw std::runtime_error("write_outputs: write failed: " + csv_path);
    csv.close();

    nlohmann::json cfg;
    cfg["problem"] = record.spec.name;
    cfg["domain"] = {record.spec.xmin, record.spec.xmax, record.spec.ymin, record.spec.ymax};
    cfg["initial_cells"] = {record.spec.nx, record.spec.ny};
    cfg["theta"] = record.spec.method.theta;
    cfg["penalty"] = record.spec.method.penalty;
    cfg["degree"] = record.spec.method.degree;
    cfg["constraint_kind"] = record.spec.method.constraint_kind;
    cfg["gamma"] = record.spec.gamma;
    cfg["max_dofs"] = record.spec.max_dofs;
    cfg["max_iters"] = record.spec.max_iters;
    cfg["seed"] = seed;
    cfg["emit_meshes"] = emit_meshes;
    cfg["iterations_run"] = record.rows.size();
    cfg["stopped_zero_estimator"] = record.stopped_zero_estimator;
    const std::string json_path = out_dir + "/run.json";
    std::ofstream js(json_path);
    if (!js) throw std::runtime_error("write_outputs: cannot open " + json_path);
    js << cfg.dump(2) << "\n";

    if (emit_meshes) {
        for (size_t i = 0; i < record.meshes.size(); ++i) {
            std::snprintf(buf, sizeof buf, "/mesh_%03zu.vtk", i);
            write_vtk(record.meshes[i], out_dir + buf);
        }
    }
}

} // namespace dgobs
