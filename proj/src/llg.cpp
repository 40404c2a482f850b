#include "spinlab/llg.hpp"

#include <cmath>

namespace spinlab {

namespace {

// rhs from precomputed Laplacian and stray field, shared by llg_rhs and the
// integrator stages
VectorField combine_rhs(const VectorField& m, const VectorField& lap, const VectorField* stray,
                        double t, const SimParams& p, LlgMode mode) {
    VectorField out = make_field(m.grid);
    const double eta2 = p.eta * p.eta;
    const Vec3 h = (p.lambda != 0.0 && p.field.kind != FieldKind::none)
                       ? p.lambda * external_field(t, p.field)
                       : Vec3{};
    for (int c = 0; c < m.cells(); ++c) {
        const Vec3 mc = m.at(c);
        const Vec3 lc = lap.at(c);
        Vec3 rhs{};
        if (mode == LlgMode::full) {
            // heat part with the compatible |grad m|^2 m = -(Lap m . m) m
            rhs = lc - dot(lc, mc) * mc;
        }
        rhs = rhs + p.alpha * cross(mc, lc);
        if (eta2 != 0.0) {
            const Vec3 g = (stray ? stray->at(c) : Vec3{}) + h;
            if (mode == LlgMode::full) rhs = rhs - eta2 * cross(mc, cross(mc, g));
            rhs = rhs + (p.alpha * eta2) * cross(mc, g);
        }
        out.set(c, rhs);
    }
    return out;
}

}  // namespace

VectorField llg_rhs(const VectorField& m, double t, const SimParams& p, const DemagKernel& k,
                    LlgMode mode) {
    require_unit(m, 1e-9);
    const VectorField lap = laplacian_neumann(m);
    if (p.eta != 0.0) {
        const VectorField stray = k.stray_field(m);
        return combine_rhs(m, lap, &stray, t, p, mode);
    }
    return combine_rhs(m, lap, nullptr, t, p, mode);
}

double default_dt(const Grid& g, double alpha) {
    const double h = g.min_spacing();
    return 0.2 * h * h / (1.0 + std::abs(alpha));
}

double dt_stability_bound(const Grid& g, double alpha) {
    const double h = g.min_spacing();
    return 0.22 * h * h / std::sqrt(1.0 + alpha * alpha);
}

Trajectory evolve(const VectorField& m0, double t0, double t1, const SimParams& p,
                  const DemagKernel& k, const EvolveOptions& opts) {
    require_unit(m0);
    if (!(t1 >= t0)) throw UsageError("evolve needs t1 >= t0");
    const Grid& g = *m0.grid;
    const double bound = dt_stability_bound(g, p.alpha);
    double dt = opts.dt > 0.0 ? opts.dt : default_dt(g, p.alpha);
    if (dt > bound * (1.0 + 1e-12)) {
        throw UsageError("dt exceeds the explicit stability bound of the scheme");
    }

    const double horizon = t1 - t0;
    int nsteps = 0;
    if (horizon > 0.0) nsteps = static_cast<int>(std::ceil(horizon / dt * (1.0 - 1e-12)));
    const double dt_eff = nsteps > 0 ? horizon / nsteps : 0.0;

    Trajectory traj;
    traj.dt = dt_eff;
    traj.steps = nsteps;

    const double eta2 = p.eta * p.eta;
    VectorField m = m0;
    m.unit_flag = true;

    auto stage_rhs = [&](const VectorField& state, double t) {
        const VectorField lap = laplacian_neumann(state);
        if (eta2 != 0.0) {
            const VectorField stray = k.stray_field(state);
            return combine_rhs(state, lap, &stray, t, p, opts.mode);
        }
        return combine_rhs(state, lap, nullptr, t, p, opts.mode);
    };
    auto state_energy = [&](const VectorField& state, double t) {
        return energy(state, p, t, k);
    };
    auto record_sample = [&](double t, const VectorField& state) {
        traj.times.push_back(t);
        traj.snapshots.push_back(state);
    };

    if (opts.record_series) {
        traj.step_times.push_back(t0);
        traj.energy_series.push_back(state_energy(m, t0));
    }
    if (opts.sample_every > 0) record_sample(t0, m);

    for (int step = 0; step < nsteps; ++step) {
        const double t = t0 + step * dt_eff;
        const VectorField s1 = stage_rhs(m, t);
        VectorField mid = lin_comb(1.0, m, 0.5 * dt_eff, s1);
        const VectorField s2 = stage_rhs(mid, t + 0.5 * dt_eff);
        mid = lin_comb(1.0, m, 0.5 * dt_eff, s2);
        const VectorField s3 = stage_rhs(mid, t + 0.5 * dt_eff);
        mid = lin_comb(1.0, m, dt_eff, s3);
        const VectorField s4 = stage_rhs(mid, t + dt_eff);

        add_scaled(m, dt_eff / 6.0, s1);
        add_scaled(m, dt_eff / 3.0, s2);
        add_scaled(m, dt_eff / 3.0, s3);
        add_scaled(m, dt_eff / 6.0, s4);

        if (!all_finite(m)) {
            throw IntegrationError("LLG integration blew up", t);
        }
        const double raw = normalize_cells(m);
        const double t_next = t0 + (step + 1) * dt_eff;
        if (opts.record_series) {
            traj.raw_drift_series.push_back(raw);
            traj.post_drift_series.push_back(max_unit_deviation(m));
            traj.step_times.push_back(t_next);
            traj.energy_series.push_back(state_energy(m, t_next));
        }
        if (opts.sample_every > 0 && ((step + 1) % opts.sample_every == 0) &&
            step + 1 != nsteps) {
            record_sample(t_next, m);
        }
    }
    record_sample(t0 + nsteps * dt_eff, m);
    return traj;
}

double norm_drift(const Trajectory& traj) {
    double worst = 0.0;
    for (double d : traj.raw_drift_series) worst = std::max(worst, d);
    return worst;
}

}  // namespace spinlab
