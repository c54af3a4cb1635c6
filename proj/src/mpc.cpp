#include "autopath/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace autopath {

namespace {

// Non-wrapping variant used for linearization, rollouts, and defects so the
// heading stays continuous across the horizon.
VehicleState step_dynamics_raw(const VehicleState& s, const ControlInput& u,
                               const MpcParams& p) {
    const double steer = s.psi + u.dpsi;
    VehicleState out;
    const double heading = p.paper_literal_dynamics ? steer : s.theta;
    out.x = s.x + p.step_distance * std::cos(heading);
    out.y = s.y + p.step_distance * std::sin(heading);
    out.theta = s.theta + p.step_distance * std::tan(steer) / p.wheelbase_ref;
    out.v = std::sqrt(std::max(s.v * s.v + 2.0 * u.a * p.step_distance, 0.0));
    out.psi = steer;
    return out;
}

double defect_norm(const VehicleState& predicted, const VehicleState& actual) {
    const double dth = angle_diff(predicted.theta, actual.theta);
    return std::sqrt((predicted.x - actual.x) * (predicted.x - actual.x) +
                     (predicted.y - actual.y) * (predicted.y - actual.y) + dth * dth +
                     (predicted.v - actual.v) * (predicted.v - actual.v) +
                     (predicted.psi - actual.psi) * (predicted.psi - actual.psi));
}

double max_trajectory_defect(const std::vector<VehicleState>& states,
                             const std::vector<ControlInput>& controls, const MpcParams& p) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        worst = std::max(worst, defect_norm(step_dynamics_raw(states[k], controls[k], p),
                                            states[k + 1]));
    }
    return worst;
}

Corridor truncate_corridor(const Corridor& corridor, int n) {
    Corridor out;
    out.sigma_buffer = corridor.sigma_buffer;
    out.min_clear_width = corridor.min_clear_width;
    out.steps.assign(corridor.steps.begin(), corridor.steps.begin() + n);
    out.candidates.assign(corridor.candidates.begin(), corridor.candidates.begin() + n);
    return out;
}

}  // namespace

VehicleState step_dynamics(const VehicleState& state, const ControlInput& control,
                           const MpcParams& params) {
    VehicleState out = step_dynamics_raw(state, control, params);
    out.theta = normalize_angle(out.theta);
    return out;
}

std::vector<AffineDynamics> linearize_dynamics(const std::vector<VehicleState>& states,
                                               const std::vector<ControlInput>& controls,
                                               const MpcParams& params) {
    std::vector<AffineDynamics> out(controls.size());
    const double d = params.step_distance;
    const double l = params.wheelbase_ref;
    for (std::size_t k = 0; k < controls.size(); ++k) {
        const VehicleState& s = states[k];
        const ControlInput& u = controls[k];
        const double steer = s.psi + u.dpsi;
        const double sec2 = 1.0 / (std::cos(steer) * std::cos(steer));
        const double root = std::sqrt(std::max(s.v * s.v + 2.0 * u.a * d, 0.0));
        const double denom = std::max(root, params.v_floor);

        AffineDynamics aff;
        aff.A.setIdentity();
        aff.B.setZero();
        if (params.paper_literal_dynamics) {
            aff.A(0, 2) = 0.0;
            aff.A(0, 4) = -d * std::sin(steer);
            aff.B(0, 1) = -d * std::sin(steer);
            aff.A(1, 4) = d * std::cos(steer);
            aff.B(1, 1) = d * std::cos(steer);
        } else {
            aff.A(0, 2) = -d * std::sin(s.theta);
            aff.A(1, 2) = d * std::cos(s.theta);
        }
        aff.A(2, 4) = d * sec2 / l;
        aff.B(2, 1) = d * sec2 / l;
        aff.A(3, 3) = s.v / denom;
        aff.B(3, 0) = d / denom;
        aff.B(4, 1) = 1.0;

        const VehicleState f = step_dynamics_raw(s, u, params);
        Eigen::Matrix<double, 5, 1> fx, xv;
        fx << f.x, f.y, f.theta, f.v, f.psi;
        xv << s.x, s.y, s.theta, s.v, s.psi;
        Eigen::Matrix<double, 2, 1> uv;
        uv << u.a, u.dpsi;
        aff.c = fx - aff.A * xv - aff.B * uv;
        out[k] = aff;
    }
    return out;
}

AssembledQp assemble_subproblem(const std::vector<VehicleState>& expansion_states,
                                const std::vector<ControlInput>& expansion_controls,
                                const Corridor& corridor, const MpcParams& params,
                                const std::vector<double>& v_ref,
                                const std::vector<AffineDynamics>& affine) {
    const int n_steps = static_cast<int>(std::min({corridor.steps.size() - 1,
                                                   expansion_controls.size(), v_ref.size(),
                                                   affine.size()}));
    if (n_steps < 2) throw HorizonTooShort("subproblem horizon shrank below 2 steps");

    QpLayout layout{n_steps};
    const int n = layout.num_vars();
    const auto& w = params.weights;

    std::vector<Eigen::Triplet<double>> p_trips;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    double constant = 0.0;

    std::vector<Eigen::Triplet<double>> a_trips;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(5 * n_steps);
    std::vector<Eigen::Triplet<double>> g_trips;
    std::vector<double> h;
    h.reserve(static_cast<std::size_t>(20) * n_steps);

    auto add_ineq = [&](std::initializer_list<std::pair<int, double>> coeffs, double bound) {
        const int row = static_cast<int>(h.size());
        for (const auto& [col, val] : coeffs) g_trips.emplace_back(row, col, val);
        h.push_back(bound);
    };

    for (int k = 1; k <= n_steps; ++k) {
        const int xs = layout.state_offset(k);
        const int us = layout.control_offset(k - 1);
        const int ss = layout.slack_offset(k);
        const CorridorStep& step = corridor.steps[k];

        // Objective.
        p_trips.emplace_back(xs + 3, xs + 3, 2.0 * w.w1);
        q[xs + 3] += -2.0 * w.w1 * v_ref[k - 1];
        constant += w.w1 * v_ref[k - 1] * v_ref[k - 1];
        p_trips.emplace_back(xs + 4, xs + 4, 2.0 * w.w2);
        p_trips.emplace_back(us + 0, us + 0, 2.0 * w.w3);
        p_trips.emplace_back(us + 1, us + 1, 2.0 * w.w4);
        if (step.has_reference && w.w5 > 0.0) {
            p_trips.emplace_back(xs + 0, xs + 0, 2.0 * w.w5);
            p_trips.emplace_back(xs + 1, xs + 1, 2.0 * w.w5);
            q[xs + 0] += -2.0 * w.w5 * step.reference_point.x();
            q[xs + 1] += -2.0 * w.w5 * step.reference_point.y();
            constant += w.w5 * step.reference_point.squaredNorm();
        }
        q[ss + 0] += w.w6;
        q[ss + 1] += w.w7;

        // Dynamics equality rows for x_k (block k-1): x_k - A x_{k-1} - B u_{k-1} = c.
        const AffineDynamics& aff = affine[k - 1];
        const int row0 = 5 * (k - 1);
        for (int r = 0; r < 5; ++r) {
            a_trips.emplace_back(row0 + r, xs + r, 1.0);
            for (int cc = 0; cc < 2; ++cc) {
                if (aff.B(r, cc) != 0.0) a_trips.emplace_back(row0 + r, us + cc, -aff.B(r, cc));
            }
            b[row0 + r] = aff.c(r);
        }
        if (k == 1) {
            const VehicleState& x0 = expansion_states[0];
            Eigen::Matrix<double, 5, 1> xv;
            xv << x0.x, x0.y, x0.theta, x0.v, x0.psi;
            const Eigen::Matrix<double, 5, 1> ax0 = aff.A * xv;
            for (int r = 0; r < 5; ++r) b[row0 + r] += ax0(r);
        } else {
            const int xp = layout.state_offset(k - 1);
            for (int r = 0; r < 5; ++r) {
                for (int cc = 0; cc < 5; ++cc) {
                    if (aff.A(r, cc) != 0.0) a_trips.emplace_back(row0 + r, xp + cc, -aff.A(r, cc));
                }
            }
        }

        // Box constraints.
        add_ineq({{xs + 3, 1.0}}, params.v_max);
        add_ineq({{xs + 3, -1.0}}, 0.0);
        add_ineq({{xs + 4, 1.0}}, params.psi_max);
        add_ineq({{xs + 4, -1.0}}, params.psi_max);
        add_ineq({{us + 0, 1.0}}, params.a_max);
        add_ineq({{us + 0, -1.0}}, params.a_max);
        add_ineq({{us + 1, 1.0}}, params.dpsi_max);
        add_ineq({{us + 1, -1.0}}, params.dpsi_max);
        add_ineq({{ss + 0, -1.0}}, 0.0);
        add_ineq({{ss + 0, 1.0}}, corridor.sigma_buffer);
        add_ineq({{ss + 1, -1.0}}, 0.0);
        add_ineq({{ss + 1, 1.0}}, corridor.sigma_buffer);

        // Corridor half-planes: body half-width and safety buffer folded in,
        // slack relaxed up to the buffer.
        const double inset = corridor.sigma_buffer + params.vehicle_half_width;
        add_ineq({{xs + 0, step.left.alpha}, {xs + 1, step.left.beta}, {ss + 0, -1.0}},
                 step.left.gamma - inset);
        add_ineq({{xs + 0, step.right.alpha}, {xs + 1, step.right.beta}, {ss + 1, -1.0}},
                 step.right.gamma - inset);

        if (params.trust_region.enabled) {
            const VehicleState& ref = expansion_states[k];
            add_ineq({{xs + 0, 1.0}}, ref.x + params.trust_region.position);
            add_ineq({{xs + 0, -1.0}}, -ref.x + params.trust_region.position);
            add_ineq({{xs + 1, 1.0}}, ref.y + params.trust_region.position);
            add_ineq({{xs + 1, -1.0}}, -ref.y + params.trust_region.position);
            add_ineq({{xs + 2, 1.0}}, ref.theta + params.trust_region.angle);
            add_ineq({{xs + 2, -1.0}}, -ref.theta + params.trust_region.angle);
        }
    }

    AssembledQp out;
    out.layout = layout;
    out.objective_constant = constant;
    out.problem.P.resize(n, n);
    out.problem.P.setFromTriplets(p_trips.begin(), p_trips.end());
    out.problem.q = q;
    out.problem.A.resize(5 * n_steps, n);
    out.problem.A.setFromTriplets(a_trips.begin(), a_trips.end());
    out.problem.b = b;
    out.problem.G.resize(static_cast<int>(h.size()), n);
    out.problem.G.setFromTriplets(g_trips.begin(), g_trips.end());
    out.problem.h = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    return out;
}

namespace {

struct Expansion {
    std::vector<VehicleState> states;    // x_0..x_N
    std::vector<ControlInput> controls;  // u_0..u_{N-1}
};

// Dynamically consistent rollout of the given controls from the initial state,
// with the heading kept continuous.
Expansion roll_out(const VehicleState& x0, const std::vector<ControlInput>& controls,
                   const MpcParams& params) {
    Expansion e;
    e.controls = controls;
    e.states.resize(controls.size() + 1);
    e.states[0] = x0;
    for (std::size_t k = 0; k < controls.size(); ++k) {
        e.states[k + 1] = step_dynamics_raw(e.states[k], e.controls[k], params);
    }
    return e;
}

// Initial guess: steer each rollout step at the path a short lookahead ahead
// (inverse kinematics of the pursuit bearing), so the expansion trajectory
// stays near the planner path even where the step limits bind.
std::vector<ControlInput> initial_controls(const VehicleState& x0, const PlannedPath& path,
                                           int n_steps, const MpcParams& params, double v_ref) {
    std::vector<ControlInput> controls(n_steps);
    auto pose_at = [&](int k) {
        const std::size_t i = std::min(static_cast<std::size_t>(k), path.points.size() - 1);
        return path.points[i].pose;
    };
    const int lookahead = 6;
    VehicleState sim = x0;
    for (int k = 0; k < n_steps; ++k) {
        const Pose2 target = pose_at(k + lookahead);
        const Vec2 to_target = target.position() - Vec2(sim.x, sim.y);
        const double dist = to_target.norm();
        double desired_steer = 0.0;
        if (dist > 1e-6) {
            const double bearing = std::atan2(to_target.y(), to_target.x());
            const double alpha = angle_diff(bearing, sim.theta);
            const double curvature = 2.0 * std::sin(alpha) / std::max(dist, 1.0);
            desired_steer = std::clamp(std::atan(params.wheelbase_ref * curvature),
                                       -params.psi_max, params.psi_max);
        }
        ControlInput u;
        u.dpsi = std::clamp(desired_steer - sim.psi, -params.dpsi_max, params.dpsi_max);
        const double dv2 = v_ref * v_ref - sim.v * sim.v;
        u.a = std::clamp(dv2 / (2.0 * params.step_distance), -params.a_max, params.a_max);
        controls[k] = u;
        sim = step_dynamics_raw(sim, u, params);
    }
    return controls;
}

}  // namespace

TrajectorySolution scp_solve(const VehicleState& initial_state, const PlannedPath& path,
                             const Corridor& corridor, const MpcParams& params, double v_ref,
                             const std::vector<ControlInput>& warm_controls) {
    const auto t_start = std::chrono::steady_clock::now();
    if (path.points.size() < 2) throw Error("scp_solve needs a path with at least 2 poses");
    const int n_steps = static_cast<int>(
        std::min(corridor.steps.size() - 1, static_cast<std::size_t>(params.horizon)));
    if (n_steps < 2) throw HorizonTooShort("corridor leaves fewer than 2 horizon steps");
    const Corridor base = truncate_corridor(corridor, n_steps + 1);
    const std::vector<double> vref(static_cast<std::size_t>(n_steps), v_ref);

    std::vector<ControlInput> guess;
    if (static_cast<int>(warm_controls.size()) >= n_steps) {
        guess.assign(warm_controls.begin(), warm_controls.begin() + n_steps);
    } else {
        guess = initial_controls(initial_state, path, n_steps, params, v_ref);
    }
    Expansion expansion = roll_out(initial_state, guess, params);

    TrajectorySolution sol;
    QpLayout layout{n_steps};

    for (int iter = 1; iter <= params.scp_iterations; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto affine = linearize_dynamics(expansion.states, expansion.controls, params);

        Corridor lin = base;
        if (iter > 1) {
            std::vector<Vec2> traj(n_steps + 1);
            for (int k = 0; k <= n_steps; ++k) {
                traj[k] = Vec2(expansion.states[k].x, expansion.states[k].y);
            }
            lin = relinearize(base, traj);
        }

        AssembledQp qp_prob =
            assemble_subproblem(expansion.states, expansion.controls, lin, params, vref, affine);

        qp::SolverOptions opts;
        opts.tolerance = params.qp_tolerance;
        Eigen::VectorXd z0 = Eigen::VectorXd::Zero(layout.num_vars());
        for (int k = 1; k <= n_steps; ++k) {
            const VehicleState& s = expansion.states[k];
            z0.segment<5>(layout.state_offset(k)) << s.x, s.y, s.theta, s.v, s.psi;
            z0.segment<2>(layout.control_offset(k - 1)) << expansion.controls[k - 1].a,
                expansion.controls[k - 1].dpsi;
            z0.segment<2>(layout.slack_offset(k)).setConstant(0.5 * corridor.sigma_buffer);
        }
        opts.initial_z = z0;

        const qp::Solution qsol = qp::solve(qp_prob.problem, opts);
        const bool usable =
            qsol.status == qp::SolveStatus::Solved ||
            (qsol.status == qp::SolveStatus::MaxIterations && qsol.stationarity < 1e-3 &&
             qsol.eq_residual < 1e-3 && qsol.ineq_residual < 1e-3);
        if (!usable) {
            throw SolverFailure("subproblem unsolved at SCP iteration " + std::to_string(iter) +
                                " (status " + std::to_string(static_cast<int>(qsol.status)) + ")");
        }

        for (int k = 1; k <= n_steps; ++k) {
            const auto xs = qsol.z.segment<5>(layout.state_offset(k));
            expansion.states[k] = {xs[0], xs[1], xs[2], xs[3], xs[4]};
            const auto us = qsol.z.segment<2>(layout.control_offset(k - 1));
            expansion.controls[k - 1] = {us[0], us[1]};
        }

        ScpIterationDiag diag;
        diag.qp_objective = qsol.objective + qp_prob.objective_constant;
        diag.max_defect = max_trajectory_defect(expansion.states, expansion.controls, params);
        diag.solve_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        diag.qp_iterations = qsol.iterations;
        diag.status = qsol.status;
        sol.iterations.push_back(diag);

        if (iter == params.scp_iterations) {
            sol.cost = diag.qp_objective;
            sol.slack_left.resize(n_steps);
            sol.slack_right.resize(n_steps);
            for (int k = 1; k <= n_steps; ++k) {
                sol.slack_left[k - 1] = qsol.z[layout.slack_offset(k)];
                sol.slack_right[k - 1] = qsol.z[layout.slack_offset(k) + 1];
            }
        }
    }

    sol.states.assign(expansion.states.begin() + 1, expansion.states.end());
    for (VehicleState& s : sol.states) s.theta = normalize_angle(s.theta);
    sol.controls = expansion.controls;
    sol.max_defect = max_trajectory_defect(expansion.states, expansion.controls, params);
    sol.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
}

MpcController::TickResult MpcController::tick(const VehicleState& measured,
                                              const PlannedPath& path, const Corridor& corridor,
                                              double v_ref) {
    TickResult result;
    try {
        result.solution = scp_solve(measured, path, corridor, params_, v_ref, warm_controls_);
        result.u0 = result.solution.controls.front();
        // Shift the solved sequence for the next tick's initial guess.
        warm_controls_.assign(result.solution.controls.begin() + 1,
                              result.solution.controls.end());
        warm_controls_.push_back(result.solution.controls.back());
    } catch (const SolverFailure&) {
        result.solution.fallback = true;
        result.u0 = {-params_.a_max, 0.0};
        warm_controls_.clear();
    } catch (const DegenerateCorridor&) {
        result.solution.fallback = true;
        result.u0 = {-params_.a_max, 0.0};
        warm_controls_.clear();
    }
    return result;
}

}  // namespace autopath
