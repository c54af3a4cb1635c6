#include "autopath/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace autopath::qp {

namespace {

constexpr double kReg = 1e-9;          // static KKT regularization
constexpr double kStepFraction = 0.99;  // fraction-to-boundary

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Max alpha in [0, 1] with x + alpha*dx >= (1 - kStepFraction)*x elementwise.
double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (dx[i] < 0.0) alpha = std::min(alpha, -kStepFraction * x[i] / dx[i]);
    }
    return alpha;
}

}  // namespace

Solution solve(const Problem& prob, const SolverOptions& opts) {
    const int n = prob.num_vars();
    const int me = prob.num_eq();
    const int mi = prob.num_ineq();
    const int dim = n + me + mi;

    Solution sol;
    sol.z = Eigen::VectorXd::Zero(n);
    sol.y = Eigen::VectorXd::Zero(me);
    sol.lambda = Eigen::VectorXd::Zero(mi);

    Eigen::VectorXd z = (opts.initial_z.size() == n) ? opts.initial_z
                                                     : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    Eigen::VectorXd lambda = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd s(mi);
    if (mi > 0) {
        const Eigen::VectorXd slack0 = prob.h - prob.G * z;
        for (int i = 0; i < mi; ++i) s[i] = std::max(slack0[i], 1.0);
    }

    const Eigen::SparseMatrix<double> Gt = prob.G.transpose();
    const Eigen::SparseMatrix<double> At = prob.A.transpose();

    // KKT pattern is fixed; only the -s/lambda diagonal changes per iteration.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(prob.P.nonZeros() + 2 * prob.A.nonZeros() + 2 * prob.G.nonZeros() + dim);
    for (int k = 0; k < prob.P.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(prob.P, k); it; ++it) {
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
        }
    }
    for (int k = 0; k < prob.A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(prob.A, k); it; ++it) {
            trips.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
            trips.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                               it.value());
        }
    }
    for (int k = 0; k < prob.G.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(prob.G, k); it; ++it) {
            trips.emplace_back(n + me + static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
            trips.emplace_back(static_cast<int>(it.col()), n + me + static_cast<int>(it.row()),
                               it.value());
        }
    }
    for (int i = 0; i < dim; ++i) {
        trips.emplace_back(i, i, i < n ? kReg : -kReg);  // placeholder diagonal
    }

    Eigen::SparseMatrix<double> kkt(dim, dim);
    kkt.setFromTriplets(trips.begin(), trips.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.analyzePattern(kkt);

    const double scale_d = 1.0 + inf_norm(prob.q);
    const double scale_p = 1.0 + inf_norm(prob.b);
    const double scale_g = 1.0 + inf_norm(prob.h);

    auto record_best = [&](double rd, double rp, double rg, double gap) {
        sol.z = z;
        sol.y = y;
        sol.lambda = lambda;
        sol.stationarity = rd;
        sol.eq_residual = rp;
        sol.ineq_residual = rg;
        sol.gap = gap;
        sol.objective = 0.5 * z.dot(prob.P * z) + prob.q.dot(z);
    };

    for (int iter = 0; iter <= opts.max_iterations; ++iter) {
        const Eigen::VectorXd r_dual =
            prob.P * z + prob.q + (me ? Eigen::VectorXd(At * y) : Eigen::VectorXd::Zero(n)) +
            (mi ? Eigen::VectorXd(Gt * lambda) : Eigen::VectorXd::Zero(n));
        const Eigen::VectorXd r_eq = me ? Eigen::VectorXd(prob.A * z - prob.b) : Eigen::VectorXd();
        const Eigen::VectorXd r_in =
            mi ? Eigen::VectorXd(prob.G * z + s - prob.h) : Eigen::VectorXd();

        const double rd = inf_norm(r_dual);
        const double rp = inf_norm(r_eq);
        double rg_violation = 0.0;
        if (mi) rg_violation = std::max(0.0, (prob.G * z - prob.h).maxCoeff());
        const double mu = mi ? s.dot(lambda) / mi : 0.0;

        sol.iterations = iter;
        record_best(rd, rp, rg_violation, mu);
        if (rd <= opts.tolerance * scale_d && rp <= opts.tolerance * scale_p &&
            rg_violation <= opts.tolerance * scale_g &&
            mu <= opts.tolerance * std::max(1.0, std::abs(sol.objective))) {
            sol.status = SolveStatus::Solved;
            return sol;
        }
        if (iter == opts.max_iterations) break;

        // Refresh the W = s/lambda diagonal and refactorize.
        for (int i = 0; i < n; ++i) kkt.coeffRef(i, i) = prob.P.coeff(i, i) + kReg;
        for (int i = 0; i < me; ++i) kkt.coeffRef(n + i, n + i) = -kReg;
        for (int i = 0; i < mi; ++i) {
            kkt.coeffRef(n + me + i, n + me + i) = -(s[i] / lambda[i]) - kReg;
        }
        ldlt.factorize(kkt);
        if (ldlt.info() != Eigen::Success) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }

        auto solve_kkt = [&](const Eigen::VectorXd& rhs) {
            Eigen::VectorXd x = ldlt.solve(rhs);
            // One refinement pass against the unregularized operator.
            Eigen::VectorXd r = rhs;
            r.head(n) -= prob.P * x.head(n);
            if (me) {
                r.head(n) -= At * x.segment(n, me);
                r.segment(n, me) -= prob.A * x.head(n);
            }
            if (mi) {
                r.head(n) -= Gt * x.tail(mi);
                r.tail(mi) -= prob.G * x.head(n);
                r.tail(mi).array() += (s.array() / lambda.array()) * x.tail(mi).array();
            }
            x += ldlt.solve(r);
            return x;
        };

        // Affine (predictor) direction.
        Eigen::VectorXd rhs(dim);
        rhs.head(n) = -r_dual;
        if (me) rhs.segment(n, me) = -r_eq;
        if (mi) rhs.tail(mi) = -r_in + s;
        const Eigen::VectorXd d_aff = solve_kkt(rhs);
        Eigen::VectorXd ds_aff, dl_aff;
        double sigma = 0.0;
        if (mi) {
            dl_aff = d_aff.tail(mi);
            ds_aff = -r_in - prob.G * d_aff.head(n);
            const double alpha_aff = std::min(max_step(s, ds_aff), max_step(lambda, dl_aff));
            const double mu_aff =
                (s + alpha_aff * ds_aff).dot(lambda + alpha_aff * dl_aff) / mi;
            sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
            sigma = std::clamp(sigma, 0.0, 1.0);
        }

        // Combined (corrector) direction with the same factorization.
        Eigen::VectorXd dz, dy, dl, ds;
        if (mi) {
            Eigen::VectorXd comp = sigma * mu * Eigen::VectorXd::Ones(mi);
            comp -= ds_aff.cwiseProduct(dl_aff);
            rhs.tail(mi) = -r_in + s - comp.cwiseQuotient(lambda);
            const Eigen::VectorXd d = solve_kkt(rhs);
            dz = d.head(n);
            dy = me ? Eigen::VectorXd(d.segment(n, me)) : Eigen::VectorXd();
            dl = d.tail(mi);
            ds = -r_in - prob.G * dz;
        } else {
            const Eigen::VectorXd d = solve_kkt(rhs);
            dz = d.head(n);
            dy = me ? Eigen::VectorXd(d.segment(n, me)) : Eigen::VectorXd();
        }

        double alpha = 1.0;
        if (mi) alpha = std::min(max_step(s, ds), max_step(lambda, dl));
        if (!std::isfinite(alpha) || !dz.allFinite()) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }

        z += alpha * dz;
        if (me) y += alpha * dy;
        if (mi) {
            s += alpha * ds;
            lambda += alpha * dl;
        }
    }

    sol.status = SolveStatus::MaxIterations;
    return sol;
}

}  // namespace autopath::qp
