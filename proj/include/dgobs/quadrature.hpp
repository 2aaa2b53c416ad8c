#pragma once

#include <array>
#include <vector>

#include "dgobs/geometry.hpp"

namespace dgobs {

/// Barycentric quadrature point; weights are normalized (sum to 1), so the
/// physical weight is w * |T|.
struct TriQuadPoint {
    std::array<double, 3> bary;
    double w;
};

namespace quad {

// Dunavant degree-4 rule, 6 points.
inline const std::array<TriQuadPoint, 6>& tri_deg4() {
    static const std::array<TriQuadPoint, 6> pts = [] {
        std::array<TriQuadPoint, 6> p{};
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        int k = 0;
        for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}})
            for (int i = 0; i < 3; ++i) {
                std::array<double, 3> b{a, a, a};
                b[i] = 1.0 - 2.0 * a;
                p[k++] = {b, w};
            }
        return p;
    }();
    return pts;
}

// Dunavant degree-6 rule, 12 points.
inline const std::array<TriQuadPoint, 12>& tri_deg6() {
    static const std::array<TriQuadPoint, 12> pts = [] {
        std::array<TriQuadPoint, 12> p{};
        const double a1 = 0.249286745170910, w1 = 0.116786275726379;
        const double a2 = 0.063089014491502, w2 = 0.050844906370207;
        const double a3 = 0.310352451033785, b3 = 0.053145049844816, w3 = 0.082851075618374;
        int k = 0;
        for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}})
            for (int i = 0; i < 3; ++i) {
                std::array<double, 3> b{a, a, a};
                b[i] = 1.0 - 2.0 * a;
                p[k++] = {b, w};
            }
        const double c3 = 1.0 - a3 - b3;
        for (auto [x, y, z] : {std::array{a3, b3, c3}, std::array{b3, c3, a3},
                               std::array{c3, a3, b3}, std::array{a3, c3, b3},
                               std::array{c3, b3, a3}, std::array{b3, a3, c3}})
            p[k++] = {{x, y, z}, w3};
        return p;
    }();
    return pts;
}

/// 4-point Gauss-Legendre rule on [0,1] (exact to degree 7); weights sum to 1.
struct EdgeQuadPoint {
    double s;
    double w;
};

inline const std::array<EdgeQuadPoint, 4>& edge_gl4() {
    static const std::array<EdgeQuadPoint, 4> pts = [] {
        const double x1 = 0.3399810435848563, w1 = 0.6521451548625461;
        const double x2 = 0.8611363115940526, w2 = 0.3478548451374538;
        return std::array<EdgeQuadPoint, 4>{{{0.5 * (1.0 - x2), 0.5 * w2},
                                             {0.5 * (1.0 - x1), 0.5 * w1},
                                             {0.5 * (1.0 + x1), 0.5 * w1},
                                             {0.5 * (1.0 + x2), 0.5 * w2}}};
    }();
    return pts;
}

/// Uniform barycentric lattice of degree m: (m+1)(m+2)/2 points including
/// the vertices and edges.
inline std::vector<std::array<double, 3>> tri_lattice(int m) {
    std::vector<std::array<double, 3>> pts;
    pts.reserve((m + 1) * (m + 2) / 2);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m - i; ++j)
            pts.push_back({double(i) / m, double(j) / m, double(m - i - j) / m});
    return pts;
}

} // namespace quad

inline Vec2 bary_to_point(const std::array<Vec2, 3>& tri, const std::array<double, 3>& b) {
    return tri[0] * b[0] + tri[1] * b[1] + tri[2] * b[2];
}

} // namespace dgobs
