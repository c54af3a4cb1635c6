#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace autopath::qp {

// min 1/2 z'Pz + q'z  subject to  A z = b,  G z <= h.
// P must be symmetric positive semidefinite.
struct Problem {
    Eigen::SparseMatrix<double> P;
    Eigen::VectorXd q;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    Eigen::SparseMatrix<double> G;
    Eigen::VectorXd h;

    int num_vars() const { return static_cast<int>(q.size()); }
    int num_eq() const { return static_cast<int>(b.size()); }
    int num_ineq() const { return static_cast<int>(h.size()); }
};

enum class SolveStatus { Solved, MaxIterations, NumericalFailure };

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd z;
    Eigen::VectorXd y;       // equality multipliers
    Eigen::VectorXd lambda;  // inequality multipliers, nonnegative
    double objective = 0.0;
    double stationarity = 0.0;   // ||Pz + q + A'y + G'lambda||_inf
    double eq_residual = 0.0;    // ||Az - b||_inf
    double ineq_residual = 0.0;  // ||max(Gz - h, 0)||_inf
    double gap = 0.0;            // s'lambda / m
    int iterations = 0;
};

struct SolverOptions {
    double tolerance = 1e-6;
    int max_iterations = 100;
    // Optional primal warm start; sizes must match or it is ignored.
    Eigen::VectorXd initial_z;
};

// Mehrotra predictor-corrector primal-dual interior point method with a
// regularized sparse LDLT factorization of the full KKT system. Deterministic
// for fixed inputs. MaxIterations returns the best iterate found.
Solution solve(const Problem& problem, const SolverOptions& opts = {});

}  // namespace autopath::qp
