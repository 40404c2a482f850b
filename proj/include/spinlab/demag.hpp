#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <mutex>
#include <vector>

#include "spinlab/grid.hpp"

namespace spinlab {

/// Translation kernel of the cellwise stray-field operator: one symmetric
/// 3x3 block N(i-j) per index offset, built from closed-form cuboid-cell
/// integrals of the Newtonian potential. The field on the particle is the
/// discrete convolution H_i = -Sum_j N(i-j) m_j, evaluated either through
/// zero-padded FFTs (fast path) or by the direct double sum (test oracle).
/// Immutable after construction; convolutions on a shared kernel are safe
/// to call concurrently.
class DemagKernel {
  public:
    static DemagKernel build(GridPtr grid);
    ~DemagKernel();

    DemagKernel(DemagKernel&&) noexcept;
    DemagKernel& operator=(DemagKernel&&) = delete;
    DemagKernel(const DemagKernel&) = delete;
    DemagKernel& operator=(const DemagKernel&) = delete;

    const GridPtr& grid() const { return grid_; }

    /// Stray field restricted to the particle, FFT-accelerated.
    VectorField stray_field(const VectorField& m) const;

    /// Direct O(N^2) double-sum evaluation; oracle for the fast path.
    VectorField stray_field_direct(const VectorField& m) const;

    /// -<H[m], m>_Omega, the discrete stray-field energy (>= 0 up to round-off).
    double stray_energy(const VectorField& m) const;

    /// Interaction block N(k) for an index offset (|k_d| <= n_d - 1).
    Eigen::Matrix3d block(int kx, int ky, int kz) const;

  private:
    DemagKernel() = default;

    GridPtr grid_;
    std::array<int, 3> pad_ = {0, 0, 0};     // 2n per axis
    std::size_t real_size_ = 0;              // pad0*pad1*pad2
    std::size_t spec_size_ = 0;              // pad0*pad1*(pad2/2+1)
    // component order: xx yy zz xy xz yz, wrap-around offset layout
    std::array<std::vector<double>, 6> blocks_;
    std::array<std::vector<double>, 6> spectra_;  // real-valued kernel transforms

    struct FftWorkspace;
    std::unique_ptr<FftWorkspace> fft_;
    mutable std::mutex fft_mutex_;

    std::size_t wrap_index(int kx, int ky, int kz) const;
};

/// The 3x3 demagnetizing tensor: minus the volume average of the stray
/// field of the three unit magnetizations. Eigenvalues sorted ascending.
struct DemagTensor {
    Eigen::Matrix3d tensor;
    std::array<double, 3> eigvals;  // lambda1 <= lambda2 <= lambda3
    Eigen::Matrix3d eigvecs;        // columns, matching eigvals
    double trace_defect;            // |trace - 1|
};

DemagTensor demag_tensor(const DemagKernel& kernel);

enum class ShapeCondition { satisfied, violated };

struct ShapeConditionReport {
    ShapeCondition verdict;
    double margin;   // lambda2 - lambda1
    Vec3 long_axis;  // eigenvector of lambda1, sign-fixed
};

/// The paper's shape condition: the smallest demag eigenvalue is simple.
ShapeConditionReport shape_condition(const DemagTensor& d, double gap_tol = 1e-3);

}  // namespace spinlab
