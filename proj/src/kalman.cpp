#include "wavefdi/kalman.hpp"

#include "csv.hpp"
#include "wavefdi/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <ostream>

namespace wavefdi {

std::string to_string(Discretization d) { return d == Discretization::euler ? "euler" : "exact"; }

std::optional<Discretization> parse_discretization(const std::string& s) {
    if (s == "euler") return Discretization::euler;
    if (s == "exact") return Discretization::exact;
    return std::nullopt;
}

void DiscreteModel::validate() const {
    const Eigen::Index n = Ad.rows();
    if (Ad.cols() != n || Bd.rows() != n || Cd.cols() != n)
        throw InvalidArgument("discrete model: inconsistent state dimension");
    if (Q.rows() != n || Q.cols() != n) throw InvalidArgument("discrete model: Q must be n x n");
    if (R.rows() != Cd.rows() || R.cols() != Cd.rows()) throw InvalidArgument("discrete model: R must be m x m");
    if (!Q.allFinite() || !R.allFinite()) throw DomainError("discrete model: non-finite noise covariance");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
        throw InvalidArgument("discrete model: Q is not symmetric");
    if (R.size() > 0) {
        if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + R.cwiseAbs().maxCoeff()))
            throw InvalidArgument("discrete model: R is not symmetric");
        Eigen::LLT<Mat> llt(R);
        if (llt.info() != Eigen::Success) throw InvalidArgument("discrete model: R is not positive definite");
    }
}

DiscreteModel discretize(const StateSpace& ss, double Ts, Discretization method) {
    if (!(Ts > 0.0) || !std::isfinite(Ts)) throw DomainError("discretize: Ts must be positive");
    const Eigen::Index n = ss.A.rows();
    const Eigen::Index nu = ss.B.cols();
    DiscreteModel dm;
    dm.Cd = ss.C;
    if (method == Discretization::euler) {
        dm.Ad = Mat::Identity(n, n) + ss.A * Ts;
        dm.Bd = ss.B * Ts;
    } else {
        Mat aug = Mat::Zero(n + nu, n + nu);
        aug.topLeftCorner(n, n) = ss.A * Ts;
        aug.topRightCorner(n, nu) = ss.B * Ts;
        const Mat E = aug.exp();
        dm.Ad = E.topLeftCorner(n, n);
        dm.Bd = E.topRightCorner(n, nu);
    }
    return dm;
}

FilterState initial_filter_state(const Vec& x0, const Mat& P0) {
    if (P0.rows() != x0.size() || P0.cols() != x0.size())
        throw InvalidArgument("initial covariance does not match the state dimension");
    FilterState fs;
    fs.xhat = x0;
    fs.P = P0;
    fs.xhat_prior = x0;
    fs.P_prior = P0;
    return fs;
}

CovarianceUpdate covariance_measurement_update(const Mat& P_prior, const Mat& C, const Mat& R) {
    const Eigen::Index m = C.rows();
    Mat S = C * P_prior * C.transpose() + R;
    S = (0.5 * (S + S.transpose())).eval();
    const Mat CP = C * P_prior;

    CovarianceUpdate out;
    Eigen::LLT<Mat> llt(S);
    if (llt.info() == Eigen::Success) {
        out.gain = llt.solve(CP).transpose();
    } else {
        const double ridge = m > 0 ? 1e-10 * S.trace() / static_cast<double>(m) : 0.0;
        if (ridge > 0.0) S.diagonal().array() += ridge;
        Eigen::LLT<Mat> retry(S);
        if (retry.info() == Eigen::Success) {
            out.gain = retry.solve(CP).transpose();
        } else {
            // still indefinite or identically zero: a rank-revealing solve
            // keeps the update finite
            out.gain = S.completeOrthogonalDecomposition().solve(CP).transpose();
        }
    }
    out.P = P_prior - out.gain * CP;
    out.P = (0.5 * (out.P + out.P.transpose())).eval();
    return out;
}

Mat covariance_time_update(const Mat& P, const Mat& Ad, const Mat& Q) {
    Mat Pn = Ad * P * Ad.transpose() + Q;
    return 0.5 * (Pn + Pn.transpose());
}

Vec mean_measurement_update(const Vec& prior, const Mat& gain, const Mat& C, const Vec& z, Vec& innovation) {
    innovation = z - C * prior;
    return prior + gain * innovation;
}

Vec mean_time_update(const Vec& posterior, const Mat& Ad, const Mat& Bd, const Vec& u) {
    return Ad * posterior + Bd * u;
}

FilterState kf_measurement_update(const FilterState& fs, const DiscreteModel& dm, const Vec& z) {
    if (z.size() != dm.Cd.rows()) throw InvalidArgument("measurement has wrong length");
    if (fs.xhat_prior.size() != dm.Ad.rows()) throw InvalidArgument("filter state has wrong dimension");
    FilterState out = fs;
    auto cov = covariance_measurement_update(fs.P_prior, dm.Cd, dm.R);
    out.xhat = mean_measurement_update(fs.xhat_prior, cov.gain, dm.Cd, z, out.innovation);
    out.gain = std::move(cov.gain);
    out.P = std::move(cov.P);
    return out;
}

FilterState kf_time_update(const FilterState& fs, const DiscreteModel& dm, const Vec& u) {
    if (u.size() != dm.Bd.cols()) throw InvalidArgument("input has wrong length");
    FilterState out = fs;
    out.P_prior = covariance_time_update(fs.P, dm.Ad, dm.Q);
    out.xhat_prior = mean_time_update(fs.xhat, dm.Ad, dm.Bd, u);
    return out;
}

Eigen::Index observability_rank(const Mat& Ad, const Mat& Cd, double rel_tol) {
    const Eigen::Index n = Ad.rows();
    Mat F = Ad - Mat::Identity(n, n);
    const double scale = F.norm();
    if (scale > 0.0) F /= scale;

    Mat basis(n, 0);
    // Gram-Schmidt twice against the accepted basis; returns the accepted vectors
    auto extend = [&](const Mat& candidates) {
        Mat accepted(n, 0);
        for (Eigen::Index j = 0; j < candidates.cols() && basis.cols() < n; ++j) {
            Vec w = candidates.col(j);
            const double norm0 = w.norm();
            if (!(norm0 > rel_tol)) continue;
            for (int pass = 0; pass < 2; ++pass) w -= basis * (basis.transpose() * w);
            const double norm1 = w.norm();
            if (norm1 <= rel_tol * norm0) continue;
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = w / norm1;
            accepted.conservativeResize(Eigen::NoChange, accepted.cols() + 1);
            accepted.col(accepted.cols() - 1) = basis.col(basis.cols() - 1);
        }
        return accepted;
    };

    Mat fresh = extend(Cd.transpose());
    while (fresh.cols() > 0 && basis.cols() < n) fresh = extend(F.transpose() * fresh);
    return basis.cols();
}

FilterRun run_filter(const DiscreteModel& dm, const WaveModel& model, const Mat& measurements,
                     const FilterState& init, double Ts, const FilterObserver& observer) {
    dm.validate();
    const Eigen::Index n = dm.state_dim();
    const Eigen::Index m = dm.output_dim();
    if (n != static_cast<Eigen::Index>(2 * model.N)) throw InvalidArgument("filter model does not match 2N states");
    if (measurements.cols() != m) throw InvalidArgument("measurement matrix has wrong number of columns");
    if (init.xhat_prior.size() != n || init.P_prior.rows() != n)
        throw InvalidArgument("initial filter state has wrong dimension");
    const Eigen::Index rank = observability_rank(dm.Ad, dm.Cd);
    if (rank != n)
        throw NotObservable("observability rank " + std::to_string(rank) + " < " + std::to_string(n) +
                            " for the chosen sensor set");

    const Eigen::Index steps = measurements.rows();
    FilterRun run;
    run.Ts = Ts;
    run.prior.resize(steps, n);
    run.posterior.resize(steps, n);
    run.innovations.resize(steps, m);
    run.inputs.resize(steps, static_cast<Eigen::Index>(model.N));
    run.trace_P.resize(steps);

    FilterState fs = init;
    for (Eigen::Index k = 0; k < steps; ++k) {
        fs = kf_measurement_update(fs, dm, measurements.row(k).transpose());
        const Vec v = virtual_inputs(model, positions_of(fs.xhat), velocities_of(fs.xhat));

        run.prior.row(k) = fs.xhat_prior.transpose();
        run.posterior.row(k) = fs.xhat.transpose();
        run.innovations.row(k) = fs.innovation.transpose();
        run.inputs.row(k) = v.transpose();
        run.trace_P[k] = fs.P.trace();
        if (observer) observer(static_cast<std::size_t>(k), fs);

        fs = kf_time_update(fs, dm, v);
    }
    return run;
}

void write_estimates_csv(std::ostream& os, const FilterRun& run) {
    const Eigen::Index n = run.posterior.cols();
    const Eigen::Index m = run.innovations.cols();
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",yhat_" << i;
    for (Eigen::Index j = 1; j <= m; ++j) os << ",innov_" << j;
    os << ",trace_P\n";
    for (Eigen::Index k = 0; k < run.posterior.rows(); ++k) {
        os << detail::num(static_cast<double>(k) * run.Ts);
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << detail::num(run.posterior(k, i));
        for (Eigen::Index j = 0; j < m; ++j) os << ',' << detail::num(run.innovations(k, j));
        os << ',' << detail::num(run.trace_P[k]) << '\n';
    }
}

}  // namespace wavefdi
