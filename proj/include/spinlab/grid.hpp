#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "spinlab/errors.hpp"
#include "spinlab/vec3.hpp"

namespace spinlab {

enum class ShapeKind { cuboid, ellipsoid };

/// Particle shape before volume normalization: relative side lengths
/// (cuboid) or semi-axes (ellipsoid). All entries must be positive.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::cuboid;
    std::array<double, 3> aspect = {1.0, 1.0, 1.0};
    bool operator==(const ShapeSpec&) const = default;
};

/// Masked uniform Cartesian discretization of the particle, normalized so
/// the discrete volume interior_count * cell_volume equals 1. Interior cells
/// are packed densely; masked-out cells store no data. Immutable after
/// construction and safe to share across threads.
struct Grid {
    std::array<int, 3> n = {0, 0, 0};       // cells per axis
    std::array<double, 3> h = {0, 0, 0};    // spacings
    std::vector<std::uint8_t> mask;         // full grid, x-fastest
    std::vector<std::int32_t> packed_of;    // full index -> packed cell or -1
    std::vector<std::int32_t> full_of;      // packed cell -> full index
    std::vector<std::array<std::int32_t, 6>> nbr;  // packed: -x +x -y +y -z +z, -1 = wall
    double cell_volume = 0.0;
    int interior_count = 0;
    double staircase_factor = 1.0;  // isotropic spacing rescale that fixed the discrete volume
    ShapeSpec shape;

    std::size_t full_index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(n[1]) * k);
    }
    std::array<int, 3> decode(std::int32_t full) const {
        const int i = static_cast<int>(full % n[0]);
        const int j = static_cast<int>((full / n[0]) % n[1]);
        const int k = static_cast<int>(full / (static_cast<std::int64_t>(n[0]) * n[1]));
        return {i, j, k};
    }
    /// Cell-center coordinates with the domain centered at the origin.
    Vec3 center(int cell) const {
        const auto ijk = decode(full_of[cell]);
        return {(ijk[0] + 0.5) * h[0] - 0.5 * n[0] * h[0],
                (ijk[1] + 0.5) * h[1] - 0.5 * n[1] * h[1],
                (ijk[2] + 0.5) * h[2] - 0.5 * n[2] * h[2]};
    }
    double min_spacing() const { return std::min(h[0], std::min(h[1], h[2])); }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the masked grid for a shape at the given per-axis resolution.
/// Throws ShapeError for degenerate aspects or resolution < 2.
GridPtr build_grid(const ShapeSpec& shape, std::array<int, 3> resolution);

/// One 3-vector per interior cell, packed in mask order. unit_flag asserts
/// max | |m|-1 | <= 1e-12 over cells.
struct VectorField {
    GridPtr grid;
    std::vector<double> v;  // 3 * interior_count, cell-major
    bool unit_flag = false;

    int cells() const { return grid ? grid->interior_count : 0; }
    Vec3 at(int c) const { return {v[3 * c], v[3 * c + 1], v[3 * c + 2]}; }
    void set(int c, Vec3 a) {
        v[3 * c] = a.x;
        v[3 * c + 1] = a.y;
        v[3 * c + 2] = a.z;
    }
};

VectorField make_field(GridPtr g, Vec3 fill = {0, 0, 0});
VectorField make_unit_field(GridPtr g, Vec3 direction);

void require_same_grid(const VectorField& a, const VectorField& b);
void require_unit(const VectorField& m, double tol = 1e-12);

/// 7-point Laplacian with mirror ghost cells across the masked boundary
/// (discrete homogeneous Neumann condition). Exactly zero on constants.
VectorField laplacian_neumann(const VectorField& m);

/// Volume-weighted inner product, Sum_cells u.v * cell_volume.
double inner_l2(const VectorField& u, const VectorField& v);
double norm_l2(const VectorField& u);

/// Edge-based <grad u, grad v>; equals -<Lap u, v> by summation by parts.
double grad_inner_l2(const VectorField& u, const VectorField& v);

struct MeanFluct {
    Vec3 mean;
    VectorField fluct;
};

/// Splits u into its volume average and the mean-free remainder.
MeanFluct mean_fluct_split(const VectorField& u);
Vec3 field_mean(const VectorField& u);

double max_unit_deviation(const VectorField& m);

/// Renormalizes every cell to the unit sphere; returns the max deviation
/// found before renormalization. Throws ComputeError on vanishing cells.
double normalize_cells(VectorField& m);

// In-place y += a*x and out-of-place linear combination.
void add_scaled(VectorField& y, double a, const VectorField& x);
VectorField lin_comb(double a, const VectorField& x, double b, const VectorField& y);

bool all_finite(const VectorField& m);

double max_abs_dot(const VectorField& u, const VectorField& m);  // max_c |u_c . m_c|
double max_norm_diff(const VectorField& a, const VectorField& b);  // max_c |a_c - b_c|

}  // namespace spinlab
