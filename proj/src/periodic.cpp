#include "spinlab/periodic.hpp"

#include <cmath>
#include <functional>
#include <thread>

namespace spinlab {

namespace {

double map_dt(const Grid& g, const SimParams& p, double dt_hint) {
    const double want = dt_hint > 0.0 ? dt_hint : default_dt(g, p.alpha);
    const int nsteps = std::max(1, static_cast<int>(std::ceil(p.period / want * (1.0 - 1e-12))));
    return p.period / nsteps;
}

// GMRES without restarts on R^n; matvec is any linear action.
Eigen::VectorXd gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
                      const Eigen::VectorXd& rhs, double rel_tol, int max_iters) {
    const int n = static_cast<int>(rhs.size());
    const double beta = rhs.norm();
    if (beta == 0.0) return Eigen::VectorXd::Zero(n);
    const int m = std::min(max_iters, n);

    std::vector<Eigen::VectorXd> basis;
    basis.push_back(rhs / beta);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = beta;
    std::vector<double> cs(m), sn(m);
    int k = 0;
    for (; k < m; ++k) {
        Eigen::VectorXd w = matvec(basis[k]);
        for (int i = 0; i <= k; ++i) {
            hess(i, k) = w.dot(basis[i]);
            w -= hess(i, k) * basis[i];
        }
        hess(k + 1, k) = w.norm();
        if (hess(k + 1, k) > 1e-14 * beta) basis.push_back(w / hess(k + 1, k));

        for (int i = 0; i < k; ++i) {
            const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
            hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
            hess(i, k) = t;
        }
        const double denom = std::hypot(hess(k, k), hess(k + 1, k));
        cs[k] = denom > 0 ? hess(k, k) / denom : 1.0;
        sn[k] = denom > 0 ? hess(k + 1, k) / denom : 0.0;
        hess(k, k) = denom;
        hess(k + 1, k) = 0.0;
        g(k + 1) = -sn[k] * g(k);
        g(k) = cs[k] * g(k);

        if (std::abs(g(k + 1)) <= rel_tol * beta ||
            static_cast<int>(basis.size()) == k + 1) {
            ++k;
            break;
        }
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
        double s = g(i);
        for (int j = i + 1; j < k; ++j) s -= hess(i, j) * y(j);
        y(i) = s / hess(i, i);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) x += y(i) * basis[i];
    return x;
}

}  // namespace

VectorField poincare_map(const VectorField& u, double lambda, const SimParams& p,
                         const DemagKernel& k, double dt_hint) {
    require_unit(u);
    SimParams run = p;
    run.lambda = lambda;
    EvolveOptions opts;
    opts.dt = map_dt(*u.grid, p, dt_hint);
    opts.record_series = false;
    Trajectory traj = evolve(u, 0.0, p.period, run, k, opts);
    return std::move(traj.snapshots.back());
}

Eigen::MatrixXd monodromy(const VectorField& m, const SimParams& p, const DemagKernel& k,
                          const TangentFrame& frame, double dt_hint, int thread_count) {
    require_unit(m);
    const int dim = 2 * m.cells();
    if (dim > kDenseCap) throw UsageError("monodromy refused above the dense cap");
    const double eps = 1e-6;
    const VectorField base_image = poincare_map(m, 0.0, p, k, dt_hint);

    Eigen::MatrixXd mono(dim, dim);
    auto run_columns = [&](int begin, int end) {
        for (int j = begin; j < end; ++j) {
            VectorField pert = m;
            const int c = j / 2;
            const Vec3 dir = (j % 2 == 0) ? frame.e_theta[c] : frame.e_phi[c];
            pert.set(c, pert.at(c) + eps * dir);
            normalize_cells(pert);
            const VectorField image = poincare_map(pert, 0.0, p, k, dt_hint);
            const VectorField diff = lin_comb(1.0 / eps, image, -1.0 / eps, base_image);
            const Eigen::VectorXd col = frame_coords(frame, diff);
            mono.col(j) = col;
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
    return mono;
}

namespace {

// orbit diagnostics from one sampled re-integration of the period
void fill_orbit_metrics(PeriodicOrbit& orbit, const SimParams& p, const DemagKernel& k,
                        double dt_hint) {
    SimParams run = p;
    run.lambda = orbit.lambda;
    EvolveOptions opts;
    opts.dt = map_dt(*orbit.initial.grid, p, dt_hint);
    const int nsteps = static_cast<int>(std::llround(p.period / opts.dt));
    opts.sample_every = std::max(1, nsteps / 32);
    opts.record_series = true;
    const Trajectory traj = evolve(orbit.initial, 0.0, p.period, run, k, opts);
    double motion = 0.0;
    for (std::size_t s = 1; s < traj.snapshots.size(); ++s) {
        const double dt = traj.times[s] - traj.times[s - 1];
        if (dt <= 0.0) continue;
        const VectorField d = lin_comb(1.0, traj.snapshots[s], -1.0, traj.snapshots[s - 1]);
        motion = std::max(motion, norm_l2(d) / dt);
    }
    orbit.motion = motion;
    orbit.energy_min = traj.energy_series.front();
    orbit.energy_max = traj.energy_series.front();
    for (double e : traj.energy_series) {
        orbit.energy_min = std::min(orbit.energy_min, e);
        orbit.energy_max = std::max(orbit.energy_max, e);
    }
}

}  // namespace

PeriodicOrbit shoot(double lambda, const VectorField& init, const SimParams& p,
                    const DemagKernel& k, const ShootOptions& opts) {
    require_unit(init);
    if (!opts.skip_shape_check) {
        const DemagTensor tensor = demag_tensor(k);
        const ShapeConditionReport sc = shape_condition(tensor, opts.gap_tol);
        if (sc.verdict == ShapeCondition::violated) {
            throw ShapeConditionError(
                "shape condition violated: lambda2 - lambda1 = " + std::to_string(sc.margin) +
                    " <= gap_tol = " + std::to_string(opts.gap_tol) +
                    "; the smallest demag eigenvalue must be simple",
                sc.margin);
        }
    }
    if (!opts.skip_spectral_check) {
        if (2 * init.cells() <= kDenseCap) {
            const SpectrumReport rep = spectrum(init, p, k, 1e-8, opts.thread_count);
            if (!rep.clearance_pass) {
                throw ComputeError("spectral clearance failed: an eigenvalue sits on the "
                                   "imaginary axis within tolerance");
            }
        } else {
            throw UsageError("spectral clearance needs 2N <= dense cap; pass "
                             "skip_spectral_check to waive it");
        }
    }

    const double dt = map_dt(*init.grid, p, opts.dt_hint);
    VectorField u = init;
    VectorField map_u = poincare_map(u, lambda, p, k, dt);
    VectorField f_ambient = lin_comb(1.0, map_u, -1.0, u);
    double res = norm_l2(f_ambient);

    PeriodicOrbit best;
    best.initial = u;
    best.lambda = lambda;
    best.period = p.period;
    best.residual = res;
    best.newton_iters = 0;

    int stagnant = 0;
    int iters = 0;
    while (res > opts.tol) {
        if (iters >= opts.max_newton) {
            throw ShootError("Newton shooting hit the iteration cap at residual " +
                                 std::to_string(res),
                             best);
        }
        const TangentFrame frame = build_tangent_frame(u);
        const Eigen::VectorXd rhs = -frame_coords(frame, f_ambient);
        auto matvec = [&](const Eigen::VectorXd& x) {
            VectorField dir = frame_lift(frame, x);
            VectorField pert = u;
            add_scaled(pert, opts.fd_eps, dir);
            normalize_cells(pert);
            const VectorField image = poincare_map(pert, lambda, p, k, dt);
            const VectorField dmap =
                lin_comb(1.0 / opts.fd_eps, image, -1.0 / opts.fd_eps, map_u);
            return (frame_coords(frame, dmap) - x).eval();
        };
        const Eigen::VectorXd delta = gmres(matvec, rhs, opts.gmres_tol, opts.gmres_max);
        const VectorField step = frame_lift(frame, delta);

        double damping = 1.0;
        bool improved = false;
        VectorField u_trial, map_trial, f_trial;
        double res_trial = res;
        for (int bt = 0; bt < 5; ++bt) {
            u_trial = u;
            add_scaled(u_trial, damping, step);
            normalize_cells(u_trial);
            map_trial = poincare_map(u_trial, lambda, p, k, dt);
            f_trial = lin_comb(1.0, map_trial, -1.0, u_trial);
            res_trial = norm_l2(f_trial);
            if (res_trial < res * (1.0 - 1e-4 * damping)) {
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        ++iters;
        if (improved) {
            u = std::move(u_trial);
            map_u = std::move(map_trial);
            f_ambient = std::move(f_trial);
            res = res_trial;
            stagnant = 0;
        } else {
            ++stagnant;
        }
        if (res < best.residual) {
            best.initial = u;
            best.residual = res;
            best.newton_iters = iters;
        }
        if (stagnant >= 5) {
            throw ShootError("Newton shooting stagnated (no residual reduction for 5 "
                             "iterations); best residual " +
                                 std::to_string(best.residual),
                             best);
        }
    }

    PeriodicOrbit orbit;
    orbit.initial = std::move(u);
    orbit.initial.unit_flag = true;
    orbit.lambda = lambda;
    orbit.period = p.period;
    orbit.residual = res;
    orbit.newton_iters = iters;
    fill_orbit_metrics(orbit, p, k, opts.dt_hint);
    return orbit;
}

ContinuationResult continuation(const std::vector<double>& lambdas, const SimParams& p,
                                const DemagKernel& k, const VectorField& minimizer,
                                const ShootOptions& opts) {
    if (lambdas.empty() || lambdas.front() != 0.0) {
        throw UsageError("continuation ladder must start at lambda = 0");
    }
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) {
            throw UsageError("continuation ladder must be strictly increasing");
        }
    }
    ContinuationResult out;
    VectorField seed = minimizer;
    ShootOptions run_opts = opts;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        try {
            PeriodicOrbit orbit = shoot(lambdas[i], seed, p, k, run_opts);
            seed = orbit.initial;
            out.orbits.push_back(std::move(orbit));
            // the expensive gates only need to run once per branch
            run_opts.skip_shape_check = true;
            run_opts.skip_spectral_check = true;
        } catch (const ShapeConditionError&) {
            throw;  // setup problem, not a branch loss
        } catch (const Error& e) {
            if (i == 0) {
                throw ComputeError(std::string("continuation failed already at lambda = 0: ") +
                                   e.what());
            }
            out.failed_lambda = lambdas[i];
            out.failure_reason = e.what();
            break;
        }
    }
    return out;
}

}  // namespace spinlab
