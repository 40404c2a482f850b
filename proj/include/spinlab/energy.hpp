#pragma once

#include "spinlab/demag.hpp"
#include "spinlab/grid.hpp"

namespace spinlab {

enum class FieldKind { none, uniform_oscillating, uniform_rotating };

/// Spatially uniform T-periodic external field family. Rotating fields use
/// an orthonormal pair (u, v); oscillating fields a single direction.
struct ExternalFieldSpec {
    FieldKind kind = FieldKind::none;
    Vec3 u = {0, 1, 0};  // rotating frame / oscillating direction
    Vec3 v = {0, 0, 1};  // rotating frame, second axis
    double amplitude = 1.0;
    double period = 1.0;
    bool operator==(const ExternalFieldSpec&) const = default;
};

/// Validates orthonormality of the rotating frame; throws UsageError.
void validate_field_spec(const ExternalFieldSpec& spec);

/// h(t): exactly T-periodic for arguments with exact reductions mod T.
/// Rotating convention: amplitude * (cos(2 pi t/T) u + sin(2 pi t/T) v).
Vec3 external_field(double t, const ExternalFieldSpec& spec);

/// Physics parameters of the rescaled problem (exchange length d = 1).
struct SimParams {
    double eta = 0.1;     // particle size parameter
    double alpha = 1.0;   // gyromagnetic parameter
    double lambda = 0.0;  // external field amplitude
    double period = 1.0;  // forcing period T
    ExternalFieldSpec field;
    static constexpr double exchange_length = 1.0;
    bool operator==(const SimParams&) const = default;
};

struct EnergyBreakdown {
    double exchange;  // ||grad m||_L2^2
    double stray;     // eta^2 * stray energy
    double zeeman;    // -2 eta^2 lambda <h(t), m>
    double total;
};

/// Exchange part alone (edge-based ||grad m||^2; equals -<Lap m, m>).
double exchange_energy(const VectorField& m);

EnergyBreakdown energy_breakdown(const VectorField& m, const SimParams& p, double t,
                                 const DemagKernel& k);

/// The rescaled energy at time t; requires a unit field.
double energy(const VectorField& m, const SimParams& p, double t, const DemagKernel& k);

/// H_eff = Lap m + eta^2 H[m] + eta^2 lambda h(t); the L2 gradient of the
/// energy along unconstrained variations is -2 H_eff.
VectorField effective_field(const VectorField& m, const SimParams& p, double t,
                            const DemagKernel& k);

/// Pointwise projection -m x (m x v) = v - (m.v) m onto the tangent planes.
VectorField tangent_project(const VectorField& v, const VectorField& m);

struct ElResidual {
    VectorField field;  // tangent_project(Lap m + eta^2 H[m], m)
    double norm;        // its L2 norm
};

/// Euler-Lagrange residual of the autonomous problem (lambda ignored).
/// Zero exactly when m is parallel to Lap m + eta^2 H[m] pointwise.
ElResidual el_residual(const VectorField& m, const SimParams& p, const DemagKernel& k);

}  // namespace spinlab
