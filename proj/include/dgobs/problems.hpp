#pragma once

#include <cmath>
#include <string>

#include "dgobs/assembly.hpp"
#include "dgobs/fespace.hpp"

namespace dgobs {

/// A complete benchmark definition: domain rectangle with its initial cell
/// counts, data f and chi, optional exact solution, optional Dirichlet trace
/// (null means homogeneous), method and loop parameters.
struct ProblemSpec {
    std::string name;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    int nx = 1, ny = 1;
    ScalarField f;
    ScalarField chi;
    ScalarField exact;         // may be null
    ScalarField boundary_data; // may be null (u = 0 on the boundary)
    MethodConfig method;
    double gamma = 0.4;
    int max_dofs = 50000;
    int max_iters = 40;

    void validate() const {
        method.validate();
        if (!(gamma > 0.0) || gamma > 1.0)
            throw ConfigError("ProblemSpec: gamma must lie in (0, 1]");
        if (!f || !chi) throw ConfigError("ProblemSpec: f and chi are required");
        // compatibility: chi <= boundary trace on the domain boundary,
        // sampled on a boundary lattice
        constexpr int kSamples = 33;
        for (int k = 0; k < kSamples; ++k) {
            const double sx = xmin + (xmax - xmin) * k / (kSamples - 1);
            const double sy = ymin + (ymax - ymin) * k / (kSamples - 1);
            for (const Vec2 p : {Vec2{sx, ymin}, Vec2{sx, ymax}, Vec2{xmin, sy}, Vec2{xmax, sy}}) {
                const double trace = boundary_data ? boundary_data(p) : 0.0;
                if (chi(p) > trace + 1e-12)
                    throw ConfigError("ProblemSpec: obstacle exceeds the boundary data at (" +
                                      std::to_string(p.x) + "," + std::to_string(p.y) + ")");
            }
        }
    }

    Mesh initial_mesh() const { return build_rect_mesh(xmin, xmax, ymin, ymax, nx, ny); }
};

/// Benchmark 1: constant obstacle chi = 0 on (-3/2, 3/2)^2 with f = -2.
/// The solution is radially symmetric, u = r^2/2 - log r - 1/2 outside the
/// unit disk and 0 inside; its (nonzero) trace supplies the Dirichlet data.
/// Benchmark 2: chi = 10 - 6(x^2-1)^2 - 20 y^2 on (-2,2) x (-1,1), f = 0 or
/// f = -15, exact solution unknown, homogeneous boundary.
inline ProblemSpec builtin_example(int id, double f_variant = -15.0) {
    ProblemSpec spec;
    if (id == 1) {
        spec.name = "example1";
        spec.xmin = spec.ymin = -1.5;
        spec.xmax = spec.ymax = 1.5;
        spec.nx = spec.ny = 4;
        spec.f = [](Vec2) { return -2.0; };
        spec.chi = [](Vec2) { return 0.0; };
        spec.exact = [](Vec2 p) {
            const double r2 = p.x * p.x + p.y * p.y;
            if (r2 <= 1.0) return 0.0;
            return 0.5 * r2 - 0.5 * std::log(r2) - 0.5;
        };
        spec.boundary_data = spec.exact;
    } else if (id == 2) {
        if (f_variant != 0.0 && f_variant != -15.0)
            throw ConfigError("builtin_example: example 2 uses f = 0 or f = -15");
        spec.name = (f_variant == 0.0) ? "example2_f0" : "example2_fm15";
        spec.xmin = -2.0;
        spec.xmax = 2.0;
        spec.ymin = -1.0;
        spec.ymax = 1.0;
        spec.nx = 4;
        spec.ny = 2;
        spec.f = [f_variant](Vec2) { return f_variant; };
        spec.chi = [](Vec2 p) {
            const double q = p.x * p.x - 1.0;
            return 10.0 - 6.0 * q * q - 20.0 * p.y * p.y;
        };
    } else {
        throw ConfigError("builtin_example: id must be 1 or 2");
    }
    return spec;
}

} // namespace dgobs
