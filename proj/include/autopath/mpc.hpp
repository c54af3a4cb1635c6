#pragma once

#include <optional>
#include <vector>

#include "autopath/corridor.hpp"
#include "autopath/planner.hpp"
#include "autopath/qp.hpp"

namespace autopath {

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;  // heading
    double v = 0.0;      // speed, >= 0
    double psi = 0.0;    // steering angle

    Vec2 position() const { return {x, y}; }
};

struct ControlInput {
    double a = 0.0;     // longitudinal acceleration
    double dpsi = 0.0;  // steering command (change in steering angle)
};

struct MpcWeights {
    double w1 = 1.0;     // speed tracking
    double w2 = 5.0;     // steering angle
    double w3 = 1.0;     // acceleration effort
    double w4 = 50.0;    // steering command effort
    double w5 = 0.5;     // position tracking (gated per step)
    double w6 = 1000.0;  // left slack
    double w7 = 1000.0;  // right slack
};

struct TrustRegion {
    bool enabled = true;
    double position = 2.0;  // metres around the expansion trajectory
    double angle = 0.2;     // radians on heading
};

struct MpcParams {
    int horizon = 30;            // N
    double step_distance = 1.0;  // d, metres between consecutive points
    double wheelbase_ref = 1.4;  // l, rear axle to centre of mass
    MpcWeights weights;
    double sigma_buffer = 0.3;
    double v_max = 10.0;
    double psi_max = 0.52;
    double a_max = 3.0;
    double dpsi_max = 0.05;
    int scp_iterations = 4;  // k
    double qp_tolerance = 1e-6;
    TrustRegion trust_region;
    // Position update from the printed discrete model (steering angle in the
    // trig terms) instead of the heading form.
    bool paper_literal_dynamics = false;
    double v_floor = 0.1;  // linearization floor for the speed update
    // Corridor lines pass through raw boundary points but constrain the
    // vehicle centre, so the rows are inset by half the body width.
    double vehicle_half_width = 0.9;
};

// One application of the discretized state model. The heading is renormalized;
// speed clamps at zero.
VehicleState step_dynamics(const VehicleState& state, const ControlInput& control,
                           const MpcParams& params);

struct AffineDynamics {
    Eigen::Matrix<double, 5, 5> A;
    Eigen::Matrix<double, 5, 2> B;
    Eigen::Matrix<double, 5, 1> c;
};

// First-order expansion of step_dynamics at each (state_k, control_k); exact
// at the expansion point. states has N+1 entries, controls N.
std::vector<AffineDynamics> linearize_dynamics(const std::vector<VehicleState>& states,
                                               const std::vector<ControlInput>& controls,
                                               const MpcParams& params);

// Decision vector layout: states x_1..x_N (5 each), controls u_0..u_{N-1}
// (2 each), slack pairs (left, right) per step (2 each).
struct QpLayout {
    int horizon = 0;
    int state_offset(int k) const { return (k - 1) * 5; }           // k in 1..N
    int control_offset(int k) const { return 5 * horizon + 2 * k; }  // k in 0..N-1
    int slack_offset(int k) const { return 7 * horizon + 2 * (k - 1); }
    int num_vars() const { return 9 * horizon; }
};

struct AssembledQp {
    qp::Problem problem;
    QpLayout layout;
    double objective_constant = 0.0;  // completes the tracking squares
};

// Convex subproblem around the expansion trajectory: affine dynamics
// equalities, corridor half-planes with buffered slack, box and trust-region
// constraints. Corridor step k constrains state x_k (step 0 sits at the
// current pose), so a horizon of N consumes N+1 corridor steps.
AssembledQp assemble_subproblem(const std::vector<VehicleState>& expansion_states,
                                const std::vector<ControlInput>& expansion_controls,
                                const Corridor& corridor, const MpcParams& params,
                                const std::vector<double>& v_ref,
                                const std::vector<AffineDynamics>& affine);

struct ScpIterationDiag {
    double qp_objective = 0.0;
    double max_defect = 0.0;  // nonlinear dynamics defect of the iterate
    double solve_time_s = 0.0;
    int qp_iterations = 0;
    qp::SolveStatus status = qp::SolveStatus::Solved;
};

struct TrajectorySolution {
    std::vector<VehicleState> states;    // x_1..x_N
    std::vector<ControlInput> controls;  // u_0..u_{N-1}
    std::vector<double> slack_left;
    std::vector<double> slack_right;
    double cost = 0.0;        // objective of the final subproblem (constants included)
    double max_defect = 0.0;  // max_k |x_{k+1} - step_dynamics(x_k, u_k)|
    std::vector<ScpIterationDiag> iterations;
    double solve_time_s = 0.0;
    bool fallback = false;
};

// k rounds of linearize -> (re)linearize corridor -> assemble -> solve.
// Iteration 1 uses the corridor as built from the planner path. Throws
// SolverFailure (with the iteration index) when a subproblem is unusable and
// DegenerateCorridor when relinearization pinches shut.
TrajectorySolution scp_solve(const VehicleState& initial_state, const PlannedPath& path,
                             const Corridor& corridor, const MpcParams& params, double v_ref,
                             const std::vector<ControlInput>& warm_controls = {});

struct SolverFailure : Error {
    using Error::Error;
};

// Receding-horizon wrapper: returns the first control of each solved sequence
// and warm-starts the next tick from the previous solution shifted by one
// step. On solver failure it reports a comfort-limited braking fallback.
class MpcController {
public:
    explicit MpcController(const MpcParams& params) : params_(params) {}

    struct TickResult {
        ControlInput u0;
        TrajectorySolution solution;
    };

    TickResult tick(const VehicleState& measured, const PlannedPath& path,
                    const Corridor& corridor, double v_ref);

    void reset() { warm_controls_.clear(); }
    const MpcParams& params() const { return params_; }

private:
    MpcParams params_;
    std::vector<ControlInput> warm_controls_;
};

}  // namespace autopath
