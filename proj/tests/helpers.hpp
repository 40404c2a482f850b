#pragma once

#include <cmath>

#include "spinlab/demag.hpp"
#include "spinlab/grid.hpp"
#include "spinlab/rng.hpp"

namespace spinlab::testing {

struct KernelBundle {
    GridPtr grid;
    DemagKernel kernel;
};

inline KernelBundle make_bundle(ShapeKind kind, std::array<double, 3> aspect,
                                std::array<int, 3> res) {
    GridPtr g = build_grid({kind, aspect}, res);
    DemagKernel k = DemagKernel::build(g);
    return {std::move(g), std::move(k)};
}

// shared slow-to-build kernels, constructed once per test binary
inline const KernelBundle& sphere32() {
    static KernelBundle b = make_bundle(ShapeKind::ellipsoid, {1, 1, 1}, {32, 32, 32});
    return b;
}
inline const KernelBundle& prolate32() {
    static KernelBundle b = make_bundle(ShapeKind::ellipsoid, {2, 1, 1}, {32, 32, 32});
    return b;
}
inline const KernelBundle& prolate8() {
    static KernelBundle b = make_bundle(ShapeKind::ellipsoid, {2, 1, 1}, {8, 8, 8});
    return b;
}
inline const KernelBundle& sphere8() {
    static KernelBundle b = make_bundle(ShapeKind::ellipsoid, {1, 1, 1}, {8, 8, 8});
    return b;
}
inline const KernelBundle& cube4() {
    static KernelBundle b = make_bundle(ShapeKind::cuboid, {1, 1, 1}, {4, 4, 4});
    return b;
}
inline const KernelBundle& prolate_small() {  // coarse prolate for shooting tests
    static KernelBundle b = make_bundle(ShapeKind::ellipsoid, {2, 1, 1}, {8, 4, 4});
    return b;
}

inline VectorField random_unit_field(GridPtr g, Rng& rng) {
    VectorField f = make_field(std::move(g));
    for (int c = 0; c < f.cells(); ++c) f.set(c, rng.unit_vec3());
    f.unit_flag = true;
    return f;
}

inline VectorField random_field(GridPtr g, Rng& rng) {
    VectorField f = make_field(std::move(g));
    for (int c = 0; c < f.cells(); ++c) f.set(c, rng.normal_vec3());
    return f;
}

// pointwise-tangent random field at base m, L2-normalized
inline VectorField random_tangent_field(const VectorField& m, Rng& rng) {
    VectorField u = make_field(m.grid);
    for (int c = 0; c < u.cells(); ++c) {
        const Vec3 mc = m.at(c);
        Vec3 w = rng.normal_vec3();
        w = w - dot(w, mc) * mc;
        u.set(c, w);
    }
    const double n = norm_l2(u);
    for (double& x : u.v) x /= n;
    return u;
}

// smooth low-mode field: constant direction modulated by one cosine mode
inline VectorField smooth_unit_field(GridPtr g, double tilt) {
    VectorField f = make_field(g);
    for (int c = 0; c < f.cells(); ++c) {
        const Vec3 x = g->center(c);
        const double a = tilt * std::cos(3.0 * x.x) * std::cos(2.0 * x.y);
        const double b = tilt * std::sin(2.0 * x.z);
        f.set(c, normalized(Vec3{1.0, a, b}));
    }
    f.unit_flag = true;
    return f;
}

// Analytic demag factor of a prolate spheroid along the long axis (a > b = c).
inline double prolate_long_factor(double ratio /* a/b > 1 */) {
    const double e = std::sqrt(1.0 - 1.0 / (ratio * ratio));
    return (1.0 - e * e) / (e * e * e) * (std::atanh(e) - e);
}

// Analytic demag factor of a rectangular prism with semi-edges (a, b, c)
// along the c-axis (Aharoni's closed form).
inline double prism_factor_z(double a, double b, double c) {
    const double a2 = a * a, b2 = b * b, c2 = c * c;
    const double r = std::sqrt(a2 + b2 + c2);
    const double rab = std::sqrt(a2 + b2);
    const double rbc = std::sqrt(b2 + c2);
    const double rac = std::sqrt(a2 + c2);
    double v = 0.0;
    v += (b2 - c2) / (2.0 * b * c) * std::log((r - a) / (r + a));
    v += (a2 - c2) / (2.0 * a * c) * std::log((r - b) / (r + b));
    v += b / (2.0 * c) * std::log((rab + a) / (rab - a));
    v += a / (2.0 * c) * std::log((rab + b) / (rab - b));
    v += c / (2.0 * a) * std::log((rbc - b) / (rbc + b));
    v += c / (2.0 * b) * std::log((rac - a) / (rac + a));
    v += 2.0 * std::atan2(a * b, c * r);
    v += (a * a2 + b * b2 - 2.0 * c * c2) / (3.0 * a * b * c);
    v += (a2 + b2 - 2.0 * c2) * r / (3.0 * a * b * c);
    v += c / (a * b) * (rac + rbc);
    v -= (rab * rab * rab + rbc * rbc * rbc + rac * rac * rac) / (3.0 * a * b * c);
    return v / std::numbers::pi;
}

// Point-dipole interaction tensor scaled by the source volume.
inline Eigen::Matrix3d dipole_tensor(Vec3 r, double volume) {
    const double rn = norm(r);
    const Vec3 rh = (1.0 / rn) * r;
    Eigen::Matrix3d out;
    const double pref = volume / (4.0 * std::numbers::pi * rn * rn * rn);
    const double rhv[3] = {rh.x, rh.y, rh.z};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out(i, j) = pref * (3.0 * rhv[i] * rhv[j] - (i == j ? 1.0 : 0.0));
        }
    }
    return out;
}

}  // namespace spinlab::testing
