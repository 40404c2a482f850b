#pragma once

#include <Eigen/Dense>
#include <complex>

#include "spinlab/demag.hpp"
#include "spinlab/energy.hpp"

namespace spinlab {

/// Per-cell orthonormal tangent pair (e_theta, e_phi) spanning the planes
/// {v : v . m = 0}, built by Gram-Schmidt against the least-aligned
/// coordinate axis (ties broken by axis index).
struct TangentFrame {
    GridPtr grid;
    std::vector<Vec3> e_theta;
    std::vector<Vec3> e_phi;
};

TangentFrame build_tangent_frame(const VectorField& m);

/// frame coordinates of an ambient field (2 entries per cell) and back.
Eigen::VectorXd frame_coords(const TangentFrame& frame, const VectorField& u);
VectorField frame_lift(const TangentFrame& frame, const Eigen::VectorXd& coords);

/// The linearization of the autonomous (lambda = 0) LLG right-hand side at
/// base point m. Exact Jacobian of llg_rhs under the compatible
/// gradient-square discretization; linear in u.
VectorField apply_linearization(const VectorField& u, const VectorField& m, const SimParams& p,
                                const DemagKernel& k);

/// || (L u) . m ||_L2 for tangent u; the operator maps the tangent space
/// into {v . m = 0}, so this is small at a converged minimizer. Rejects
/// non-tangent input.
double tangent_check(const VectorField& u, const VectorField& m, const SimParams& p,
                     const DemagKernel& k);

inline constexpr int kDenseCap = 4096;  // max 2N for dense assembly

/// Frame-projected dense matrix of the linearization, size 2N x 2N.
/// Columns may be evaluated in parallel; the result is identical for any
/// thread count.
Eigen::MatrixXd assemble_matrix(const VectorField& m, const SimParams& p, const DemagKernel& k,
                                const TangentFrame& frame, int thread_count = 1);

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double min_abs_real;             // min |Re mu| over all eigenvalues
    double min_abs_real_nonzero_im;  // same, restricted to |Im mu| >= 1e-6
    int dimension;                   // 2N
    double eta;
    double alpha;
    double clearance_tol;
    bool clearance_pass;  // min_abs_real > clearance_tol
};

/// Dense spectrum of the frame-projected linearization with the
/// imaginary-axis clearance verdict.
SpectrumReport spectrum(const VectorField& m, const SimParams& p, const DemagKernel& k,
                        double clearance_tol = 1e-8, int thread_count = 1);

/// w[u] = (0, -u3, u2); satisfies u . w[u] = 0 pointwise and
/// <grad u, grad w[u]> = 0 in exact arithmetic.
VectorField test_function_w(const VectorField& u);

struct CoercivityProbe {
    double q1;       // <-L u, u>
    double q2;       // <-L u, alpha w[u]>
    double grad_sq;  // ||grad u||^2
    Vec3 mean_u;     // volume average of u
};

/// Raw bilinear forms behind the kernel-exclusion estimates; rejects
/// non-tangent input.
CoercivityProbe coercivity_probe(const VectorField& u, const VectorField& m, const SimParams& p,
                                 const DemagKernel& k);

}  // namespace spinlab
