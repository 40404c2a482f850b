#pragma once

#include "spinlab/demag.hpp"
#include "spinlab/energy.hpp"
#include "spinlab/grid.hpp"

namespace spinlab {

/// Sampled discrete trajectory. Energy and norm-drift are recorded at every
/// step; snapshots only at the sampling stride (and always at the endpoint).
struct Trajectory {
    std::vector<double> times;            // sample times
    std::vector<VectorField> snapshots;   // unit-flagged states at sample times
    std::vector<double> step_times;       // t_0 .. t_nsteps
    std::vector<double> energy_series;    // energy at every step time
    std::vector<double> raw_drift_series;   // max | |m|-1 | before each renormalization
    std::vector<double> post_drift_series;  // same, after renormalization
    double dt = 0.0;
    int steps = 0;
};

enum class LlgMode {
    full,             // damping + precession (the cross-product-free form)
    precession_only,  // diagnostic: m_t = alpha m x H_eff, energy-conserving
};

/// Right-hand side of the cross-product-free rescaled LLG,
///   m_t = Lap m + alpha m x Lap m + |grad m|^2 m
///         + alpha eta^2 m x (H[m] + lambda h) - eta^2 m x (m x (H[m] + lambda h)),
/// with the gradient-square discretized compatibly as -(Lap m . m), which
/// makes rhs . m vanish identically on unit fields.
VectorField llg_rhs(const VectorField& m, double t, const SimParams& p, const DemagKernel& k,
                    LlgMode mode = LlgMode::full);

struct EvolveOptions {
    double dt = 0.0;        // <= 0 selects the default step
    int sample_every = 0;   // 0: endpoint only
    LlgMode mode = LlgMode::full;
    bool record_series = true;
};

/// Default explicit step 0.2 h_min^2 / (1 + |alpha|) and the hard stability
/// bound 0.22 h_min^2 / sqrt(1 + alpha^2) of the 4-stage scheme.
double default_dt(const Grid& g, double alpha);
double dt_stability_bound(const Grid& g, double alpha);

/// Classical 4-stage explicit integration with renormalization after every
/// step. Rejects dt above the stability bound; throws IntegrationError with
/// the last good time if the state stops being finite.
Trajectory evolve(const VectorField& m0, double t0, double t1, const SimParams& p,
                  const DemagKernel& k, const EvolveOptions& opts = {});

/// Max raw (pre-renormalization) norm drift over the run.
double norm_drift(const Trajectory& traj);

}  // namespace spinlab
