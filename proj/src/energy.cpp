#include "spinlab/energy.hpp"

#include <cmath>
#include <numbers>

namespace spinlab {

void validate_field_spec(const ExternalFieldSpec& spec) {
    if (spec.kind == FieldKind::none) return;
    if (!(spec.period > 0.0)) throw UsageError("external field period must be positive");
    const double nu = norm(spec.u);
    if (std::abs(nu - 1.0) > 1e-9) throw UsageError("external field direction is not unit length");
    if (spec.kind == FieldKind::uniform_rotating) {
        const double nv = norm(spec.v);
        if (std::abs(nv - 1.0) > 1e-9 || std::abs(dot(spec.u, spec.v)) > 1e-9) {
            throw UsageError("rotating field frame is not orthonormal");
        }
    }
}

Vec3 external_field(double t, const ExternalFieldSpec& spec) {
    if (spec.kind == FieldKind::none) return {0, 0, 0};
    // reduce the phase through fmod so t and t+T give bit-identical samples
    double frac = std::fmod(t, spec.period);
    if (frac < 0) frac += spec.period;
    const double phase = 2.0 * std::numbers::pi * (frac / spec.period);
    if (spec.kind == FieldKind::uniform_oscillating) {
        return (spec.amplitude * std::sin(phase)) * spec.u;
    }
    return spec.amplitude * (std::cos(phase) * spec.u + std::sin(phase) * spec.v);
}

double exchange_energy(const VectorField& m) { return grad_inner_l2(m, m); }

EnergyBreakdown energy_breakdown(const VectorField& m, const SimParams& p, double t,
                                 const DemagKernel& k) {
    require_unit(m);
    EnergyBreakdown e;
    e.exchange = exchange_energy(m);
    e.stray = p.eta * p.eta * k.stray_energy(m);
    e.zeeman = 0.0;
    if (p.lambda != 0.0 && p.field.kind != FieldKind::none) {
        const Vec3 h = external_field(t, p.field);
        const Vec3 mean = field_mean(m);
        e.zeeman = -2.0 * p.eta * p.eta * p.lambda * dot(h, mean);
    }
    e.total = e.exchange + e.stray + e.zeeman;
    return e;
}

double energy(const VectorField& m, const SimParams& p, double t, const DemagKernel& k) {
    return energy_breakdown(m, p, t, k).total;
}

VectorField effective_field(const VectorField& m, const SimParams& p, double t,
                            const DemagKernel& k) {
    VectorField heff = laplacian_neumann(m);
    const double eta2 = p.eta * p.eta;
    if (eta2 != 0.0) {
        add_scaled(heff, eta2, k.stray_field(m));
        if (p.lambda != 0.0 && p.field.kind != FieldKind::none) {
            const Vec3 h = (eta2 * p.lambda) * external_field(t, p.field);
            for (int c = 0; c < heff.cells(); ++c) heff.set(c, heff.at(c) + h);
        }
    }
    return heff;
}

VectorField tangent_project(const VectorField& v, const VectorField& m) {
    require_same_grid(v, m);
    require_unit(m);
    VectorField out = make_field(v.grid);
    for (int c = 0; c < v.cells(); ++c) {
        const Vec3 mc = m.at(c);
        const Vec3 vc = v.at(c);
        out.set(c, vc - dot(mc, vc) * mc);
    }
    return out;
}

ElResidual el_residual(const VectorField& m, const SimParams& p, const DemagKernel& k) {
    require_unit(m);
    VectorField f = laplacian_neumann(m);
    if (p.eta != 0.0) add_scaled(f, p.eta * p.eta, k.stray_field(m));
    ElResidual r{tangent_project(f, m), 0.0};
    r.norm = norm_l2(r.field);
    return r;
}

}  // namespace spinlab
