#include "spinlab/linop.hpp"

#include <cmath>
#include <limits>
#include <thread>

namespace spinlab {

TangentFrame build_tangent_frame(const VectorField& m) {
    require_unit(m);
    TangentFrame frame;
    frame.grid = m.grid;
    frame.e_theta.resize(m.cells());
    frame.e_phi.resize(m.cells());
    for (int c = 0; c < m.cells(); ++c) {
        const Vec3 mc = m.at(c);
        const double a[3] = {std::abs(mc.x), std::abs(mc.y), std::abs(mc.z)};
        int axis = 0;
        if (a[1] < a[axis]) axis = 1;
        if (a[2] < a[axis]) axis = 2;
        const Vec3 e = axis_vec(axis);
        const Vec3 t = e - dot(e, mc) * mc;
        frame.e_theta[c] = normalized(t);
        frame.e_phi[c] = cross(mc, frame.e_theta[c]);
    }
    return frame;
}

Eigen::VectorXd frame_coords(const TangentFrame& frame, const VectorField& u) {
    if (frame.grid.get() != u.grid.get()) throw UsageError("frame/field grid mismatch");
    Eigen::VectorXd x(2 * u.cells());
    for (int c = 0; c < u.cells(); ++c) {
        const Vec3 uc = u.at(c);
        x(2 * c) = dot(uc, frame.e_theta[c]);
        x(2 * c + 1) = dot(uc, frame.e_phi[c]);
    }
    return x;
}

VectorField frame_lift(const TangentFrame& frame, const Eigen::VectorXd& coords) {
    VectorField u = make_field(frame.grid);
    if (coords.size() != 2 * u.cells()) throw UsageError("frame coordinate size mismatch");
    for (int c = 0; c < u.cells(); ++c) {
        u.set(c, coords(2 * c) * frame.e_theta[c] + coords(2 * c + 1) * frame.e_phi[c]);
    }
    return u;
}

VectorField apply_linearization(const VectorField& u, const VectorField& m, const SimParams& p,
                                const DemagKernel& k) {
    require_same_grid(u, m);
    require_unit(m);
    const double eta2 = p.eta * p.eta;
    const VectorField lap_u = laplacian_neumann(u);
    const VectorField lap_m = laplacian_neumann(m);
    VectorField out = make_field(u.grid);
    if (eta2 != 0.0) {
        const VectorField h_u = k.stray_field(u);
        const VectorField h_m = k.stray_field(m);
        for (int c = 0; c < u.cells(); ++c) {
            const Vec3 uc = u.at(c), mc = m.at(c);
            const Vec3 lu = lap_u.at(c), lm = lap_m.at(c);
            const Vec3 hu = h_u.at(c), hm = h_m.at(c);
            Vec3 r = lu + p.alpha * cross(mc, lu);
            r = r - (dot(lu, mc) + dot(lm, uc)) * mc;  // derivative of |grad m|^2 m, part 1
            r = r - dot(lm, mc) * uc;                  // part 2
            r = r + p.alpha * cross(uc, lm);
            r = r + (p.alpha * eta2) * (cross(mc, hu) + cross(uc, hm));
            r = r - eta2 * (cross(mc, cross(mc, hu)) + cross(mc, cross(uc, hm)) +
                            cross(uc, cross(mc, hm)));
            out.set(c, r);
        }
    } else {
        for (int c = 0; c < u.cells(); ++c) {
            const Vec3 uc = u.at(c), mc = m.at(c);
            const Vec3 lu = lap_u.at(c), lm = lap_m.at(c);
            Vec3 r = lu + p.alpha * cross(mc, lu);
            r = r - (dot(lu, mc) + dot(lm, uc)) * mc;
            r = r - dot(lm, mc) * uc;
            r = r + p.alpha * cross(uc, lm);
            out.set(c, r);
        }
    }
    return out;
}

double tangent_check(const VectorField& u, const VectorField& m, const SimParams& p,
                     const DemagKernel& k) {
    if (max_abs_dot(u, m) > 1e-10 * std::max(1.0, norm_l2(u))) {
        throw UsageError("tangent_check input is not pointwise tangent to m");
    }
    const VectorField lu = apply_linearization(u, m, p, k);
    double acc = 0.0;
    for (int c = 0; c < u.cells(); ++c) {
        const double d = dot(lu.at(c), m.at(c));
        acc += d * d;
    }
    return std::sqrt(acc * u.grid->cell_volume);
}

Eigen::MatrixXd assemble_matrix(const VectorField& m, const SimParams& p, const DemagKernel& k,
                                const TangentFrame& frame, int thread_count) {
    require_unit(m);
    const int dim = 2 * m.cells();
    if (dim > kDenseCap) {
        throw UsageError("dense assembly refused above 2N = " + std::to_string(kDenseCap) +
                         "; use the matrix-free path");
    }
    Eigen::MatrixXd a(dim, dim);
    auto run_columns = [&](int begin, int end) {
        for (int j = begin; j < end; ++j) {
            VectorField basis = make_field(m.grid);
            const int c = j / 2;
            basis.set(c, (j % 2 == 0) ? frame.e_theta[c] : frame.e_phi[c]);
            const VectorField lb = apply_linearization(basis, m, p, k);
            for (int r = 0; r < m.cells(); ++r) {
                const Vec3 v = lb.at(r);
                a(2 * r, j) = dot(v, frame.e_theta[r]);
                a(2 * r + 1, j) = dot(v, frame.e_phi[r]);
            }
        }
    };
    const int threads = std::max(1, std::min(thread_count, dim));
    if (threads == 1) {
        run_columns(0, dim);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (dim + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(dim, begin + chunk);
            if (begin < end) pool.emplace_back(run_columns, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return a;
}

SpectrumReport spectrum(const VectorField& m, const SimParams& p, const DemagKernel& k,
                        double clearance_tol, int thread_count) {
    const TangentFrame frame = build_tangent_frame(m);
    const Eigen::MatrixXd a = assemble_matrix(m, p, k, frame, thread_count);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw ComputeError("dense eigensolve failed");

    SpectrumReport rep;
    rep.dimension = static_cast<int>(a.rows());
    rep.eta = p.eta;
    rep.alpha = p.alpha;
    rep.clearance_tol = clearance_tol;
    rep.min_abs_real = std::numeric_limits<double>::infinity();
    rep.min_abs_real_nonzero_im = std::numeric_limits<double>::infinity();
    rep.eigenvalues.reserve(rep.dimension);
    for (int i = 0; i < rep.dimension; ++i) {
        const std::complex<double> mu = es.eigenvalues()(i);
        rep.eigenvalues.push_back(mu);
        rep.min_abs_real = std::min(rep.min_abs_real, std::abs(mu.real()));
        if (std::abs(mu.imag()) >= 1e-6) {
            rep.min_abs_real_nonzero_im = std::min(rep.min_abs_real_nonzero_im,
                                                   std::abs(mu.real()));
        }
    }
    rep.clearance_pass = rep.min_abs_real > clearance_tol;
    return rep;
}

VectorField test_function_w(const VectorField& u) {
    VectorField w = make_field(u.grid);
    for (int c = 0; c < u.cells(); ++c) {
        const Vec3 uc = u.at(c);
        w.set(c, {0.0, -uc.z, uc.y});
    }
    return w;
}

CoercivityProbe coercivity_probe(const VectorField& u, const VectorField& m, const SimParams& p,
                                 const DemagKernel& k) {
    if (max_abs_dot(u, m) > 1e-10 * std::max(1.0, norm_l2(u))) {
        throw UsageError("coercivity probe input is not tangent to m");
    }
    const VectorField lu = apply_linearization(u, m, p, k);
    CoercivityProbe probe;
    probe.q1 = -inner_l2(lu, u);
    probe.q2 = -p.alpha * inner_l2(lu, test_function_w(u));
    probe.grad_sq = grad_inner_l2(u, u);
    probe.mean_u = field_mean(u);
    return probe;
}

}  // namespace spinlab
