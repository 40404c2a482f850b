#pragma once

#include <optional>

#include "spinlab/linop.hpp"
#include "spinlab/llg.hpp"

namespace spinlab {

struct PeriodicOrbit {
    VectorField initial;  // unit-flagged, on-manifold
    double lambda = 0.0;
    double period = 0.0;
    double residual = 0.0;  // || m(T) - m(0) ||_L2
    int newton_iters = 0;
    double motion = 0.0;  // max_t ||m_t||_L2 proxy over one period
    double energy_min = 0.0;
    double energy_max = 0.0;
};

/// Newton shooting failed; carries the best iterate found.
struct ShootError : ComputeError {
    PeriodicOrbit best;
    ShootError(const std::string& what, PeriodicOrbit best_in)
        : ComputeError(what), best(std::move(best_in)) {}
};

/// u -> m(T, u, lambda): one forcing period of the flow with a fixed step
/// that divides T exactly. Output is unit-flagged.
VectorField poincare_map(const VectorField& u, double lambda, const SimParams& p,
                         const DemagKernel& k, double dt_hint = 0.0);

/// Differential of the Poincare map at m (lambda = 0) in frame coordinates,
/// by one-sided finite differences with eps = 1e-6. Columns are independent
/// and may run in parallel.
Eigen::MatrixXd monodromy(const VectorField& m, const SimParams& p, const DemagKernel& k,
                          const TangentFrame& frame, double dt_hint = 0.0, int thread_count = 1);

struct ShootOptions {
    double tol = 1e-8;        // residual target, L2
    int max_newton = 20;
    double gmres_tol = 1e-4;  // relative inner-solve target
    int gmres_max = 80;
    double fd_eps = 1e-6;
    double dt_hint = 0.0;
    double gap_tol = 1e-3;           // shape-condition gate
    bool skip_shape_check = false;
    bool skip_spectral_check = false;  // dense clearance gate (2N <= cap only)
    int thread_count = 1;
};

/// Damped Newton-Krylov on F(u) = map(u) - u in tangent-frame coordinates,
/// with renormalization to the manifold after every update. Refuses to run
/// when the shape condition is violated (ShapeConditionError) and throws
/// ShootError with the best iterate on stagnation.
PeriodicOrbit shoot(double lambda, const VectorField& init, const SimParams& p,
                    const DemagKernel& k, const ShootOptions& opts = {});

struct ContinuationResult {
    std::vector<PeriodicOrbit> orbits;      // converged prefix
    std::optional<double> failed_lambda;    // first lambda that was lost
    std::string failure_reason;
};

/// Natural continuation along an increasing lambda ladder starting at 0;
/// each orbit seeds the next shoot. A failure at the first lambda is an
/// error (inconsistent setup); later failures end the branch gracefully.
ContinuationResult continuation(const std::vector<double>& lambdas, const SimParams& p,
                                const DemagKernel& k, const VectorField& minimizer,
                                const ShootOptions& opts = {});

}  // namespace spinlab
