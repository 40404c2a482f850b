#include "spinlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spinlab {

namespace {

void validate_shape(const ShapeSpec& shape, const std::array<int, 3>& res) {
    for (double a : shape.aspect) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw ShapeError("shape aspect entries must be positive and finite");
        }
    }
    for (int r : res) {
        if (r < 2) throw ShapeError("resolution must be at least 2 cells per axis");
    }
}

}  // namespace

GridPtr build_grid(const ShapeSpec& shape, std::array<int, 3> resolution) {
    validate_shape(shape, resolution);
    auto grid = std::make_shared<Grid>();
    Grid& g = *grid;
    g.n = resolution;
    g.shape = shape;

    const double a0 = shape.aspect[0], a1 = shape.aspect[1], a2 = shape.aspect[2];
    std::array<double, 3> half_extent{};  // semi-extent of the bounding box
    if (shape.kind == ShapeKind::cuboid) {
        // scale so the box volume a0*a1*a2*s^3 is 1
        const double s = std::cbrt(1.0 / (a0 * a1 * a2));
        half_extent = {0.5 * s * a0, 0.5 * s * a1, 0.5 * s * a2};
    } else {
        // semi-axes r_i = s*a_i with (4pi/3) a0 a1 a2 s^3 = 1
        const double s = std::cbrt(3.0 / (4.0 * std::numbers::pi * a0 * a1 * a2));
        half_extent = {s * a0, s * a1, s * a2};
    }
    for (int d = 0; d < 3; ++d) g.h[d] = 2.0 * half_extent[d] / g.n[d];

    const std::size_t total =
        static_cast<std::size_t>(g.n[0]) * g.n[1] * g.n[2];
    g.mask.assign(total, 1);
    if (shape.kind == ShapeKind::ellipsoid) {
        for (int k = 0; k < g.n[2]; ++k) {
            for (int j = 0; j < g.n[1]; ++j) {
                for (int i = 0; i < g.n[0]; ++i) {
                    const double x = (i + 0.5) * g.h[0] - half_extent[0];
                    const double y = (j + 0.5) * g.h[1] - half_extent[1];
                    const double z = (k + 0.5) * g.h[2] - half_extent[2];
                    const double q = (x / half_extent[0]) * (x / half_extent[0]) +
                                     (y / half_extent[1]) * (y / half_extent[1]) +
                                     (z / half_extent[2]) * (z / half_extent[2]);
                    g.mask[g.full_index(i, j, k)] = q <= 1.0 ? 1 : 0;
                }
            }
        }
    }

    g.packed_of.assign(total, -1);
    for (std::size_t f = 0; f < total; ++f) {
        if (g.mask[f]) {
            g.packed_of[f] = static_cast<std::int32_t>(g.full_of.size());
            g.full_of.push_back(static_cast<std::int32_t>(f));
        }
    }
    g.interior_count = static_cast<int>(g.full_of.size());
    if (g.interior_count < 1) throw ShapeError("mask has no interior cells at this resolution");

    // second, isotropic rescale: make interior_count * cell_volume exactly 1
    const double v_disc = g.interior_count * g.h[0] * g.h[1] * g.h[2];
    g.staircase_factor = std::cbrt(1.0 / v_disc);
    for (double& hh : g.h) hh *= g.staircase_factor;
    g.cell_volume = g.h[0] * g.h[1] * g.h[2];

    g.nbr.resize(g.interior_count);
    const std::array<std::int64_t, 3> stride = {1, g.n[0],
                                                static_cast<std::int64_t>(g.n[0]) * g.n[1]};
    for (int c = 0; c < g.interior_count; ++c) {
        const auto ijk = g.decode(g.full_of[c]);
        for (int d = 0; d < 3; ++d) {
            for (int s = 0; s < 2; ++s) {
                const int step = s == 0 ? -1 : 1;
                std::int32_t packed = -1;
                const int pos = ijk[d] + step;
                if (pos >= 0 && pos < g.n[d]) {
                    packed = g.packed_of[g.full_of[c] + step * stride[d]];
                }
                g.nbr[c][2 * d + s] = packed;
            }
        }
    }
    return grid;
}

VectorField make_field(GridPtr g, Vec3 fill) {
    VectorField f;
    f.grid = std::move(g);
    f.v.resize(3 * static_cast<std::size_t>(f.grid->interior_count));
    for (int c = 0; c < f.cells(); ++c) f.set(c, fill);
    return f;
}

VectorField make_unit_field(GridPtr g, Vec3 direction) {
    VectorField f = make_field(std::move(g), normalized(direction));
    f.unit_flag = true;
    return f;
}

void require_same_grid(const VectorField& a, const VectorField& b) {
    if (a.grid.get() != b.grid.get()) throw UsageError("fields live on different grids");
}

void require_unit(const VectorField& m, double tol) {
    if (!m.unit_flag) throw UsageError("field is not unit-flagged");
    if (max_unit_deviation(m) > tol) throw UsageError("unit flag violated beyond tolerance");
}

VectorField laplacian_neumann(const VectorField& m) {
    const Grid& g = *m.grid;
    VectorField out = make_field(m.grid);
    const std::array<double, 3> inv_h2 = {1.0 / (g.h[0] * g.h[0]), 1.0 / (g.h[1] * g.h[1]),
                                          1.0 / (g.h[2] * g.h[2])};
    for (int c = 0; c < g.interior_count; ++c) {
        const Vec3 mc = m.at(c);
        Vec3 acc{};
        for (int d = 0; d < 3; ++d) {
            // mirror ghost: a missing neighbor contributes zero flux
            for (int s = 0; s < 2; ++s) {
                const std::int32_t nb = g.nbr[c][2 * d + s];
                if (nb >= 0) acc = acc + inv_h2[d] * (m.at(nb) - mc);
            }
        }
        out.set(c, acc);
    }
    return out;
}

double inner_l2(const VectorField& u, const VectorField& v) {
    require_same_grid(u, v);
    double acc = 0.0;
    const std::size_t n = u.v.size();
    for (std::size_t i = 0; i < n; ++i) acc += u.v[i] * v.v[i];
    return acc * u.grid->cell_volume;
}

double norm_l2(const VectorField& u) { return std::sqrt(std::max(0.0, inner_l2(u, u))); }

double grad_inner_l2(const VectorField& u, const VectorField& v) {
    require_same_grid(u, v);
    const Grid& g = *u.grid;
    const std::array<double, 3> inv_h2 = {1.0 / (g.h[0] * g.h[0]), 1.0 / (g.h[1] * g.h[1]),
                                          1.0 / (g.h[2] * g.h[2])};
    double acc = 0.0;
    for (int c = 0; c < g.interior_count; ++c) {
        for (int d = 0; d < 3; ++d) {
            const std::int32_t nb = g.nbr[c][2 * d + 1];  // +direction edges only, each once
            if (nb >= 0) {
                const Vec3 du = u.at(nb) - u.at(c);
                const Vec3 dv = v.at(nb) - v.at(c);
                acc += inv_h2[d] * dot(du, dv);
            }
        }
    }
    return acc * g.cell_volume;
}

Vec3 field_mean(const VectorField& u) {
    // uniform cells and discrete |Omega| = 1, so the volume average is the cell average
    Vec3 acc{};
    for (int c = 0; c < u.cells(); ++c) acc = acc + u.at(c);
    return (1.0 / u.cells()) * acc;
}

MeanFluct mean_fluct_split(const VectorField& u) {
    MeanFluct r;
    r.mean = field_mean(u);
    r.fluct = u;
    r.fluct.unit_flag = false;
    for (int c = 0; c < u.cells(); ++c) r.fluct.set(c, u.at(c) - r.mean);
    return r;
}

double max_unit_deviation(const VectorField& m) {
    double worst = 0.0;
    for (int c = 0; c < m.cells(); ++c) {
        worst = std::max(worst, std::abs(norm(m.at(c)) - 1.0));
    }
    return worst;
}

double normalize_cells(VectorField& m) {
    double worst = 0.0;
    for (int c = 0; c < m.cells(); ++c) {
        const double n = norm(m.at(c));
        if (!(n > 0.5) || !std::isfinite(n)) {
            throw ComputeError("cell magnetization collapsed during normalization");
        }
        worst = std::max(worst, std::abs(n - 1.0));
        m.set(c, (1.0 / n) * m.at(c));
    }
    m.unit_flag = true;
    return worst;
}

void add_scaled(VectorField& y, double a, const VectorField& x) {
    require_same_grid(y, x);
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
    y.unit_flag = false;
}

VectorField lin_comb(double a, const VectorField& x, double b, const VectorField& y) {
    require_same_grid(x, y);
    VectorField out = make_field(x.grid);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a * x.v[i] + b * y.v[i];
    return out;
}

bool all_finite(const VectorField& m) {
    for (double x : m.v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double max_abs_dot(const VectorField& u, const VectorField& m) {
    require_same_grid(u, m);
    double worst = 0.0;
    for (int c = 0; c < u.cells(); ++c) worst = std::max(worst, std::abs(dot(u.at(c), m.at(c))));
    return worst;
}

double max_norm_diff(const VectorField& a, const VectorField& b) {
    require_same_grid(a, b);
    double worst = 0.0;
    for (int c = 0; c < a.cells(); ++c) worst = std::max(worst, norm(a.at(c) - b.at(c)));
    return worst;
}

}  // namespace spinlab
