#include "spinlab/demag.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>

namespace spinlab {

namespace {

// Newell cell-pair primitives, evaluated in extended precision to control
// the cancellation in the 27-point second-difference stencil.
using Real = long double;

Real newell_f(Real x, Real y, Real z) {
    x = fabsl(x);
    y = fabsl(y);
    z = fabsl(z);
    const Real x2 = x * x, y2 = y * y, z2 = z * z;
    const Real r2 = x2 + y2 + z2;
    if (r2 <= 0) return 0;
    const Real r = sqrtl(r2);
    Real result = (2 * x2 - y2 - z2) * r / 6;
    if (x2 + z2 > 0) result += y * (z2 - x2) / 2 * asinhl(y / sqrtl(x2 + z2));
    if (x2 + y2 > 0) result += z * (y2 - x2) / 2 * asinhl(z / sqrtl(x2 + y2));
    if (x > 0 && y > 0 && z > 0) result -= x * y * z * atanl(y * z / (x * r));
    return result;
}

Real newell_g(Real x, Real y, Real z) {
    Real sign = 1;
    if (x < 0) sign = -sign;
    if (y < 0) sign = -sign;
    x = fabsl(x);
    y = fabsl(y);
    z = fabsl(z);
    const Real x2 = x * x, y2 = y * y, z2 = z * z;
    const Real r2 = x2 + y2 + z2;
    if (r2 <= 0) return 0;
    const Real r = sqrtl(r2);
    Real result = -x * y * r / 3;
    if (x > 0 && y > 0) result += x * y * z * asinhl(z / sqrtl(x2 + y2));
    if (y > 0 && (y2 + z2) > 0) result += y * (3 * z2 - y2) / 6 * asinhl(x / sqrtl(y2 + z2));
    if (x > 0 && (x2 + z2) > 0) result += x * (3 * z2 - x2) / 6 * asinhl(y / sqrtl(x2 + z2));
    if (z > 0) {
        if (x > 0 && y > 0) result -= z * z2 / 6 * atanl(x * y / (z * r));
        if (y > 0) result -= z * y2 / 2 * atanl(x * z / (y * r));
        if (x > 0) result -= z * x2 / 2 * atanl(y * z / (x * r));
    }
    return sign * result;
}

// component -> (base function with permuted arguments, parity per original axis)
struct ComponentRule {
    int perm[3];       // argument order: base(args[perm[0]], args[perm[1]], args[perm[2]])
    bool use_g;        // f for diagonal components, g for off-diagonal
    int odd_mask;      // bit d set when the component is odd in axis d
};

constexpr ComponentRule kRules[6] = {
    {{0, 1, 2}, false, 0},       // xx
    {{1, 0, 2}, false, 0},       // yy
    {{2, 1, 0}, false, 0},       // zz
    {{0, 1, 2}, true, 0b011},    // xy, odd in x and y
    {{0, 2, 1}, true, 0b101},    // xz, odd in x and z
    {{1, 2, 0}, true, 0b110},    // yz, odd in y and z
};

}  // namespace

struct DemagKernel::FftWorkspace {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    double* real_buf = nullptr;
    fftw_complex* spec_buf = nullptr;
    std::array<std::vector<std::complex<double>>, 3> m_hat;

    ~FftWorkspace() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        if (real_buf) fftw_free(real_buf);
        if (spec_buf) fftw_free(spec_buf);
    }
};

DemagKernel::~DemagKernel() = default;

DemagKernel::DemagKernel(DemagKernel&& other) noexcept
    : grid_(std::move(other.grid_)),
      pad_(other.pad_),
      real_size_(other.real_size_),
      spec_size_(other.spec_size_),
      blocks_(std::move(other.blocks_)),
      spectra_(std::move(other.spectra_)),
      fft_(std::move(other.fft_)) {}  // the mutex is freshly default-constructed

std::size_t DemagKernel::wrap_index(int kx, int ky, int kz) const {
    const int a = kx >= 0 ? kx : kx + pad_[0];
    const int b = ky >= 0 ? ky : ky + pad_[1];
    const int c = kz >= 0 ? kz : kz + pad_[2];
    return static_cast<std::size_t>(a) +
           static_cast<std::size_t>(pad_[0]) *
               (static_cast<std::size_t>(b) + static_cast<std::size_t>(pad_[1]) * c);
}

DemagKernel DemagKernel::build(GridPtr grid) {
    DemagKernel k;
    k.grid_ = std::move(grid);
    const Grid& g = *k.grid_;
    k.pad_ = {2 * g.n[0], 2 * g.n[1], 2 * g.n[2]};
    k.real_size_ = static_cast<std::size_t>(k.pad_[0]) * k.pad_[1] * k.pad_[2];

    const Real dx = g.h[0], dy = g.h[1], dz = g.h[2];
    const Real scale = 1 / (4 * std::numbers::pi_v<Real> * dx * dy * dz);

    // tabulate each base function once on the octant lattice, then form every
    // offset value as a weighted 27-point fetch (weights -1,2,-1 per axis)
    const int tab0 = g.n[0] + 2, tab1 = g.n[1] + 2, tab2 = g.n[2] + 2;
    std::vector<Real> table(static_cast<std::size_t>(tab0) * tab1 * tab2);
    auto tab_at = [&](int i, int j, int l) -> Real& {
        return table[static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(tab0) *
                         (static_cast<std::size_t>(j) + static_cast<std::size_t>(tab1) * l)];
    };

    for (int comp = 0; comp < 6; ++comp) {
        const ComponentRule& rule = kRules[comp];
        for (int l = 0; l < tab2; ++l) {
            for (int j = 0; j < tab1; ++j) {
                for (int i = 0; i < tab0; ++i) {
                    const Real args[3] = {i * dx, j * dy, l * dz};
                    const Real a0 = args[rule.perm[0]];
                    const Real a1 = args[rule.perm[1]];
                    const Real a2 = args[rule.perm[2]];
                    tab_at(i, j, l) = rule.use_g ? newell_g(a0, a1, a2) : newell_f(a0, a1, a2);
                }
            }
        }
        // fetch with axis parity: index -1 maps to +1 with the component's sign
        auto fetch = [&](int i, int j, int l) -> Real {
            Real s = 1;
            if (i < 0) {
                i = -i;
                if (rule.odd_mask & 1) s = -s;
            }
            if (j < 0) {
                j = -j;
                if (rule.odd_mask & 2) s = -s;
            }
            if (l < 0) {
                l = -l;
                if (rule.odd_mask & 4) s = -s;
            }
            return s * tab_at(i, j, l);
        };
        std::vector<double>& out = k.blocks_[comp];
        out.assign(k.real_size_, 0.0);
        for (int kz = 0; kz < g.n[2]; ++kz) {
            for (int ky = 0; ky < g.n[1]; ++ky) {
                for (int kx = 0; kx < g.n[0]; ++kx) {
                    Real acc = 0;
                    for (int a = -1; a <= 1; ++a) {
                        const Real wa = a == 0 ? 2 : -1;
                        for (int b = -1; b <= 1; ++b) {
                            const Real wb = b == 0 ? 2 : -1;
                            for (int c = -1; c <= 1; ++c) {
                                const Real wc = c == 0 ? 2 : -1;
                                acc += wa * wb * wc * fetch(kx + a, ky + b, kz + c);
                            }
                        }
                    }
                    const double val = static_cast<double>(scale * acc);
                    // extend by parity to all octants in the wrap-around layout
                    for (int sx = 0; sx < (kx ? 2 : 1); ++sx) {
                        for (int sy = 0; sy < (ky ? 2 : 1); ++sy) {
                            for (int sz = 0; sz < (kz ? 2 : 1); ++sz) {
                                double s = 1.0;
                                if (sx && (rule.odd_mask & 1)) s = -s;
                                if (sy && (rule.odd_mask & 2)) s = -s;
                                if (sz && (rule.odd_mask & 4)) s = -s;
                                out[k.wrap_index(sx ? -kx : kx, sy ? -ky : ky, sz ? -kz : kz)] =
                                    s * val;
                            }
                        }
                    }
                }
            }
        }
    }

    // FFT workspace: the wrap layout is x-fastest, and FFTW's row-major r2c
    // halves the last (contiguous) dimension, so the transform dims are
    // (pz, py, px). FFTW_ESTIMATE keeps planning deterministic.
    k.spec_size_ = static_cast<std::size_t>(k.pad_[2]) * k.pad_[1] * (k.pad_[0] / 2 + 1);
    k.fft_ = std::make_unique<FftWorkspace>();
    FftWorkspace& w = *k.fft_;
    w.real_buf = fftw_alloc_real(k.real_size_);
    w.spec_buf = fftw_alloc_complex(k.spec_size_);
    w.forward = fftw_plan_dft_r2c_3d(k.pad_[2], k.pad_[1], k.pad_[0], w.real_buf, w.spec_buf,
                                     FFTW_ESTIMATE);
    w.backward = fftw_plan_dft_c2r_3d(k.pad_[2], k.pad_[1], k.pad_[0], w.spec_buf, w.real_buf,
                                      FFTW_ESTIMATE);
    if (!w.forward || !w.backward) throw ComputeError("FFTW planning failed");
    for (int b = 0; b < 3; ++b) w.m_hat[b].resize(k.spec_size_);

    for (int comp = 0; comp < 6; ++comp) {
        for (std::size_t i = 0; i < k.real_size_; ++i) w.real_buf[i] = k.blocks_[comp][i];
        fftw_execute(w.forward);
        k.spectra_[comp].resize(k.spec_size_);
        // symmetric real kernels have real spectra; drop the round-off imaginary part
        for (std::size_t i = 0; i < k.spec_size_; ++i) k.spectra_[comp][i] = w.spec_buf[i][0];
    }
    return k;
}

Eigen::Matrix3d DemagKernel::block(int kx, int ky, int kz) const {
    Eigen::Matrix3d b;
    const std::size_t idx = wrap_index(kx, ky, kz);
    b(0, 0) = blocks_[0][idx];
    b(1, 1) = blocks_[1][idx];
    b(2, 2) = blocks_[2][idx];
    b(0, 1) = b(1, 0) = blocks_[3][idx];
    b(0, 2) = b(2, 0) = blocks_[4][idx];
    b(1, 2) = b(2, 1) = blocks_[5][idx];
    return b;
}

VectorField DemagKernel::stray_field(const VectorField& m) const {
    if (m.grid.get() != grid_.get()) throw UsageError("field does not live on the kernel's grid");
    const Grid& g = *grid_;
    std::lock_guard<std::mutex> lock(fft_mutex_);
    FftWorkspace& w = *fft_;

    for (int b = 0; b < 3; ++b) {
        for (std::size_t i = 0; i < real_size_; ++i) w.real_buf[i] = 0.0;
        for (int c = 0; c < g.interior_count; ++c) {
            const auto ijk = g.decode(g.full_of[c]);
            w.real_buf[wrap_index(ijk[0], ijk[1], ijk[2])] = m.v[3 * c + b];
        }
        fftw_execute(w.forward);
        for (std::size_t i = 0; i < spec_size_; ++i) {
            w.m_hat[b][i] = {w.spec_buf[i][0], w.spec_buf[i][1]};
        }
    }

    // row a of the symmetric block: indices into the component table
    static constexpr int kRow[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
    VectorField out = make_field(grid_);
    const double inv_count = 1.0 / static_cast<double>(real_size_);
    for (int a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < spec_size_; ++i) {
            std::complex<double> acc = 0.0;
            for (int b = 0; b < 3; ++b) acc += spectra_[kRow[a][b]][i] * w.m_hat[b][i];
            w.spec_buf[i][0] = -acc.real() * inv_count;
            w.spec_buf[i][1] = -acc.imag() * inv_count;
        }
        fftw_execute(w.backward);
        for (int c = 0; c < g.interior_count; ++c) {
            const auto ijk = g.decode(g.full_of[c]);
            out.v[3 * c + a] = w.real_buf[wrap_index(ijk[0], ijk[1], ijk[2])];
        }
    }
    return out;
}

VectorField DemagKernel::stray_field_direct(const VectorField& m) const {
    if (m.grid.get() != grid_.get()) throw UsageError("field does not live on the kernel's grid");
    const Grid& g = *grid_;
    VectorField out = make_field(grid_);
    for (int ci = 0; ci < g.interior_count; ++ci) {
        const auto a = g.decode(g.full_of[ci]);
        Vec3 acc{};
        for (int cj = 0; cj < g.interior_count; ++cj) {
            const auto b = g.decode(g.full_of[cj]);
            const std::size_t idx = wrap_index(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
            const Vec3 mj = m.at(cj);
            acc.x += blocks_[0][idx] * mj.x + blocks_[3][idx] * mj.y + blocks_[4][idx] * mj.z;
            acc.y += blocks_[3][idx] * mj.x + blocks_[1][idx] * mj.y + blocks_[5][idx] * mj.z;
            acc.z += blocks_[4][idx] * mj.x + blocks_[5][idx] * mj.y + blocks_[2][idx] * mj.z;
        }
        out.set(ci, -acc);
    }
    return out;
}

double DemagKernel::stray_energy(const VectorField& m) const {
    return -inner_l2(stray_field(m), m);
}

DemagTensor demag_tensor(const DemagKernel& kernel) {
    DemagTensor d;
    for (int axis = 0; axis < 3; ++axis) {
        const VectorField h = kernel.stray_field(make_unit_field(kernel.grid(), axis_vec(axis)));
        const Vec3 mean = field_mean(h);
        d.tensor(0, axis) = -mean.x;
        d.tensor(1, axis) = -mean.y;
        d.tensor(2, axis) = -mean.z;
    }
    d.tensor = 0.5 * (d.tensor + d.tensor.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(d.tensor);
    if (es.info() != Eigen::Success) throw ComputeError("demag tensor eigensolve failed");
    for (int i = 0; i < 3; ++i) d.eigvals[i] = es.eigenvalues()(i);
    d.eigvecs = es.eigenvectors();
    // deterministic sign: largest-magnitude entry of each eigenvector positive
    for (int i = 0; i < 3; ++i) {
        int arg = 0;
        for (int r = 1; r < 3; ++r) {
            if (std::abs(d.eigvecs(r, i)) > std::abs(d.eigvecs(arg, i))) arg = r;
        }
        if (d.eigvecs(arg, i) < 0) d.eigvecs.col(i) *= -1.0;
    }
    d.trace_defect = std::abs(d.tensor.trace() - 1.0);
    if (!(d.eigvals[0] > 0.0)) throw ComputeError("demag tensor is not positive definite");
    return d;
}

ShapeConditionReport shape_condition(const DemagTensor& d, double gap_tol) {
    ShapeConditionReport r;
    r.margin = d.eigvals[1] - d.eigvals[0];
    r.verdict = r.margin > gap_tol ? ShapeCondition::satisfied : ShapeCondition::violated;
    r.long_axis = {d.eigvecs(0, 0), d.eigvecs(1, 0), d.eigvecs(2, 0)};
    return r;
}

}  // namespace spinlab
