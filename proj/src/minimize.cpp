#include "spinlab/minimize.hpp"

#include <algorithm>
#include <cmath>

namespace spinlab {

namespace {

struct PointEval {
    double energy;        // autonomous energy (lambda = 0)
    VectorField residual; // tangent_project(Lap m + eta^2 H[m], m)
    double residual_norm;
};

// one stray field + one Laplacian per evaluation; energy and residual share them
PointEval evaluate(const VectorField& m, double eta, const DemagKernel& k) {
    PointEval e;
    const VectorField lap = laplacian_neumann(m);
    const double eta2 = eta * eta;
    double stray_e = 0.0;
    VectorField force = lap;
    if (eta2 != 0.0) {
        const VectorField h = k.stray_field(m);
        stray_e = -inner_l2(h, m);
        add_scaled(force, eta2, h);
    }
    e.energy = exchange_energy(m) + eta2 * stray_e;
    e.residual = tangent_project(force, m);
    e.residual_norm = norm_l2(e.residual);
    return e;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                    double* intercept) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (intercept) *intercept = std::exp((sy - slope * sx) / n);
    return slope;
}

}  // namespace

MinimizerResult minimize(const SimParams& p, const DemagKernel& k,
                         std::optional<VectorField> init, const MinimizeOptions& opts) {
    if (!(p.eta > 0.0)) throw UsageError("minimize needs eta > 0");
    if (p.eta > 0.5) throw UsageError("minimize is restricted to the small-particle regime eta <= 0.5");
    const GridPtr grid = k.grid();

    const DemagTensor tensor = demag_tensor(k);
    const Vec3 long_axis{tensor.eigvecs(0, 0), tensor.eigvecs(1, 0), tensor.eigvecs(2, 0)};

    VectorField m;
    if (init) {
        require_unit(*init);
        if (init->grid.get() != grid.get()) throw UsageError("init field lives on another grid");
        m = std::move(*init);
    } else {
        m = make_unit_field(grid, long_axis);
    }

    const double h2 = grid->min_spacing() * grid->min_spacing();
    const double tau0 = 0.2 * h2;  // safe explicit scale for the heat part
    const double tau_max = 1e3 * tau0;
    const double tau_min = 1e-8 * tau0;

    PointEval cur = evaluate(m, p.eta, k);
    MinimizerResult out;
    out.eta = p.eta;
    out.iterations = 0;
    out.converged = cur.residual_norm <= opts.tol;

    VectorField prev_m = m;
    VectorField prev_res = cur.residual;
    double tau = tau0;
    bool have_history = false;

    while (!out.converged && out.iterations < opts.max_iters) {
        if (have_history) {
            // BB1 step from s = m_k - m_{k-1}, y = r_{k-1} - r_k (gradient = -r)
            const VectorField s = lin_comb(1.0, m, -1.0, prev_m);
            const VectorField y = lin_comb(1.0, prev_res, -1.0, cur.residual);
            const double sy = inner_l2(s, y);
            const double ss = inner_l2(s, s);
            tau = sy > 0.0 ? std::clamp(ss / sy, tau_min, tau_max) : tau0;
        }

        prev_m = m;
        prev_res = cur.residual;

        // backtrack until the energy is non-increasing within the slack
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            VectorField trial = lin_comb(1.0, m, tau, cur.residual);
            normalize_cells(trial);
            PointEval te = evaluate(trial, p.eta, k);
            if (te.energy <= cur.energy + opts.energy_slack * std::max(1.0, std::abs(cur.energy))) {
                m = std::move(trial);
                cur = std::move(te);
                accepted = true;
                break;
            }
            tau *= 0.5;
            if (tau < tau_min) break;
        }
        ++out.iterations;
        if (!accepted) break;  // stagnated at the step floor
        have_history = true;
        out.converged = cur.residual_norm <= opts.tol;
    }

    // sign alignment: mean(m) . long_axis >= 0
    out.aligned_sign = 1;
    if (dot(field_mean(m), long_axis) < 0.0) {
        out.aligned_sign = -1;
        for (double& x : m.v) x = -x;
    }
    out.m = std::move(m);
    out.m.unit_flag = true;
    out.energy = cur.energy;
    out.el_residual_norm = cur.residual_norm;
    return out;
}

ScalingReport regularity_report(const std::vector<MinimizerResult>& runs,
                                const DemagKernel& kernel) {
    if (runs.size() < 3) throw UsageError("regularity report needs at least 3 eta values");
    {
        std::vector<double> etas;
        for (const auto& r : runs) etas.push_back(r.eta);
        std::sort(etas.begin(), etas.end());
        for (std::size_t i = 1; i < etas.size(); ++i) {
            if (etas[i] == etas[i - 1]) throw UsageError("eta values must be distinct");
        }
    }
    const DemagTensor tensor = demag_tensor(kernel);
    const Vec3 e1{tensor.eigvecs(0, 0), tensor.eigvecs(1, 0), tensor.eigvecs(2, 0)};

    ScalingReport rep;
    for (const auto& r : runs) {
        if (r.m.grid.get() != kernel.grid().get()) {
            throw UsageError("scaling runs must share the kernel's grid");
        }
        ScalingPoint pt;
        pt.eta = r.eta;
        pt.energy = r.energy;
        pt.residual = r.el_residual_norm;
        pt.iterations = r.iterations;
        pt.grad_l2 = std::sqrt(std::max(0.0, exchange_energy(r.m)));
        // pointwise |grad m|^2 through the compatible -(Lap m . m)
        const VectorField lap = laplacian_neumann(r.m);
        double worst_grad = 0.0;
        double worst_dev = 0.0;
        for (int c = 0; c < r.m.cells(); ++c) {
            worst_grad = std::max(worst_grad, -dot(lap.at(c), r.m.at(c)));
            worst_dev = std::max(worst_dev, norm(r.m.at(c) - e1));
        }
        pt.grad_linf = std::sqrt(std::max(0.0, worst_grad));
        pt.dev_linf = worst_dev;
        rep.points.push_back(pt);
    }
    std::sort(rep.points.begin(), rep.points.end(),
              [](const ScalingPoint& a, const ScalingPoint& b) { return a.eta < b.eta; });

    std::vector<double> etas, g2, gi, dv;
    for (const auto& pt : rep.points) {
        etas.push_back(pt.eta);
        g2.push_back(pt.grad_l2);
        gi.push_back(pt.grad_linf);
        dv.push_back(pt.dev_linf);
    }
    rep.slope_grad_l2 = loglog_slope(etas, g2, &rep.prefactor_grad_l2);
    rep.slope_grad_linf = loglog_slope(etas, gi, &rep.prefactor_grad_linf);
    rep.slope_dev_linf = loglog_slope(etas, dv, &rep.prefactor_dev_linf);
    return rep;
}

}  // namespace spinlab
