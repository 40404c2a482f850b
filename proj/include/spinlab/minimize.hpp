#pragma once

#include <optional>

#include "spinlab/demag.hpp"
#include "spinlab/energy.hpp"

namespace spinlab {

struct MinimizeOptions {
    double tol = 1e-8;      // Euler-Lagrange tangent residual target (L2)
    int max_iters = 200000;
    double energy_slack = 1e-12;  // per accepted step, non-increase tolerance
};

struct MinimizerResult {
    VectorField m;  // unit-flagged, sign-aligned
    double energy;
    double el_residual_norm;
    int iterations;
    double eta;
    int aligned_sign;  // +1 or -1, sign applied so mean(m) . long_axis >= 0
    bool converged;
};

/// Projected gradient descent with a safeguarded Barzilai-Borwein step and
/// per-step renormalization; the search direction is the LLG damping term
/// (alpha = 0 right-hand side). Energy never increases across accepted
/// steps. Default init is the constant field along the demag long axis.
MinimizerResult minimize(const SimParams& p, const DemagKernel& k,
                         std::optional<VectorField> init = std::nullopt,
                         const MinimizeOptions& opts = {});

struct ScalingPoint {
    double eta;
    double grad_l2;    // ||grad m||_L2
    double grad_linf;  // ||grad m||_Linf
    double dev_linf;   // ||m - e1||_Linf, e1 = demag long axis
    double energy;
    double residual;
    int iterations;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    double slope_grad_l2;     // log-log slope against eta
    double slope_grad_linf;
    double slope_dev_linf;
    double prefactor_grad_l2;   // measured C0 in ||grad m|| ~ C0 eta^slope
    double prefactor_grad_linf;
    double prefactor_dev_linf;
};

/// Least-squares log-log slopes over an eta ladder of minimizers on one
/// grid. Requires at least 3 distinct eta values.
ScalingReport regularity_report(const std::vector<MinimizerResult>& runs,
                                const DemagKernel& kernel);

}  // namespace spinlab
