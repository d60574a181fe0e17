#include "wavefdi/fdi.hpp"

#include "wavefdi/armax.hpp"
#include "wavefdi/chi2.hpp"
#include "wavefdi/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace wavefdi {

namespace {

// Adds a ridge when the smallest eigenvalue falls below 1e-12 of the mean
// diagonal. An indefinite estimate (possible once lag terms enter S) is
// shifted just enough to become positive definite.
void regularize(Mat& A) {
    const Eigen::Index p = A.rows();
    const double level = A.trace() / static_cast<double>(p);
    if (!(level > 0.0)) throw DegenerateStatistics("matrix to invert has non-positive trace");
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()[0];
    if (lmin < 1e-12 * level) {
        const double ridge = std::max(1e-10 * level, -lmin + 1e-10 * level);
        A.diagonal().array() += ridge;
    }
}

Mat symmetrized(const Mat& A) { return 0.5 * (A + A.transpose()); }

// Row scaling by S's diagonal and column scaling by the column norms of Mq.
// Both leave every statistic below unchanged; they only keep the ridge
// thresholds meaningful when the regressors differ by orders of magnitude.
struct Equilibrated {
    Vec x;
    Mat m;
    Mat s;
};

Equilibrated equilibrate(const Vec& X, const Mat& Mq, const Mat& S) {
    const Eigen::Index p = S.rows();
    Vec d(p);
    for (Eigen::Index i = 0; i < p; ++i) d[i] = S(i, i) > 0.0 ? 1.0 / std::sqrt(S(i, i)) : 1.0;
    Vec e(Mq.cols());
    for (Eigen::Index j = 0; j < Mq.cols(); ++j) {
        const double n = Mq.col(j).norm();
        e[j] = n > 0.0 ? 1.0 / n : 1.0;
    }
    Equilibrated q;
    q.x = d.asDiagonal() * X;
    q.m = d.asDiagonal() * Mq * e.asDiagonal();
    q.s = symmetrized(d.asDiagonal() * S * d.asDiagonal());
    return q;
}

void check_shapes(const Vec& X, const Mat& M, const Mat& S) {
    const Eigen::Index p = X.size();
    if (p == 0) throw InvalidArgument("empty normalized residual");
    if (S.rows() != p || S.cols() != p) throw InvalidArgument("S must be p x p");
    if (M.rows() != p) throw InvalidArgument("M must have p rows");
    if (!X.allFinite() || !M.allFinite() || !S.allFinite()) throw DomainError("non-finite test inputs");
}

// With S = L L^T, b = L^-1 X and W = L^-1 Mq every statistic is the squared
// norm of a projection of b, t = b^T W (W^T W)^-1 W^T b = |P_W b|^2.
// Projecting through a QR of W avoids forming W^T W, whose condition number is
// the square of W's: the ARMAX regressors zhat(k) and zhat(k-1) are nearly
// collinear, and the squared system loses the small directions to rounding.
struct Whitened {
    Vec b;
    Mat W;
};

Whitened whiten(const Vec& X, const Mat& Mq, const Mat& S) {
    auto q = equilibrate(X, Mq, S);
    regularize(q.s);
    Eigen::LLT<Mat> llt(q.s);
    if (llt.info() != Eigen::Success) throw DegenerateStatistics("covariance matrix S is not positive definite");
    Whitened w;
    w.b = llt.matrixL().solve(q.x);
    w.W = llt.matrixL().solve(q.m);
    return w;
}

// |P_W b|^2 with the rank of W decided by a column-pivoted QR
double projected_norm2(const Mat& W, const Vec& b) {
    Eigen::ColPivHouseholderQR<Mat> qr(W);
    qr.setThreshold(1e-10);
    const Eigen::Index r = qr.rank();
    if (r == 0) return 0.0;
    const Vec qb = qr.householderQ().transpose() * b;
    return qb.head(r).squaredNorm();
}

double quadratic_test(const Vec& X, const Mat& Mq, const Mat& S) {
    check_shapes(X, Mq, S);
    if (Mq.cols() == 0) throw InvalidArgument("empty parameter selection");
    if (X.isZero(0.0)) return 0.0;
    if (S.isZero(0.0)) throw DegenerateStatistics("covariance matrix S is zero but the residual is not");
    const auto w = whiten(X, Mq, S);
    return projected_norm2(w.W, w.b);
}

}  // namespace

void ResidualBatch::validate() const {
    if (regressors.rows() != residuals.size())
        throw InvalidArgument("residual batch: regressor rows do not match residual count");
    if (regressors.cols() < 1) throw InvalidArgument("residual batch: no parameters");
    if (residuals.size() < regressors.cols())
        throw InvalidArgument("residual batch: need Nb >= p, got Nb = " + std::to_string(residuals.size()));
    if (!residuals.allFinite() || !regressors.allFinite()) throw DomainError("residual batch: non-finite entries");
}

Mat primary_residuals(const ResidualBatch& batch) {
    batch.validate();
    return batch.residuals.asDiagonal() * batch.regressors;
}

Vec normalized_residual(const Mat& H) {
    if (H.rows() < 1) throw InvalidArgument("normalized residual needs at least one row");
    return H.colwise().sum().transpose() / std::sqrt(static_cast<double>(H.rows()));
}

Mat sensitivity_matrix(const Mat& regressors) {
    if (regressors.rows() < 1) throw InvalidArgument("sensitivity matrix needs at least one regressor");
    return symmetrized(regressors.transpose() * regressors / static_cast<double>(regressors.rows()));
}

Mat covariance_matrix(const Mat& H, int lags) {
    const Eigen::Index nb = H.rows();
    if (lags < 0) throw InvalidArgument("lags must be >= 0");
    if (nb <= lags) throw InvalidArgument("covariance needs more rows than lags");
    Mat S = H.transpose() * H / static_cast<double>(nb);
    for (int m = 1; m <= lags; ++m) {
        const Eigen::Index n = nb - m;
        const Mat G = H.topRows(n).transpose() * H.bottomRows(n) / static_cast<double>(n);
        S += G + G.transpose();
    }
    return symmetrized(S);
}

double global_chi2_test(const Vec& X, const Mat& M, const Mat& S) { return quadratic_test(X, M, S); }

double sensitivity_test(const Vec& X, const Mat& M, const Mat& S, const Mat& A) {
    if (A.cols() == 0) throw InvalidArgument("sensitivity test: empty parameter selection");
    if (A.rows() != M.cols()) throw InvalidArgument("sensitivity test: A must have p rows");
    return quadratic_test(X, M * A, S);
}

Mat selection_columns(std::size_t p, const Subset& subset) {
    if (subset.empty()) throw InvalidArgument("empty parameter subset");
    std::set<std::size_t> seen;
    Mat A = Mat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j) {
        if (subset[j] >= p) throw InvalidArgument("subset index " + std::to_string(subset[j] + 1) + " exceeds p");
        if (!seen.insert(subset[j]).second) throw InvalidArgument("duplicate index in parameter subset");
        A(static_cast<Eigen::Index>(subset[j]), static_cast<Eigen::Index>(j)) = 1.0;
    }
    return A;
}

double sensitivity_test(const Vec& X, const Mat& M, const Mat& S, const Subset& phi) {
    return sensitivity_test(X, M, S, selection_columns(static_cast<std::size_t>(M.cols()), phi));
}

double minmax_test(const Vec& X, const Mat& M, const Mat& S, const Subset& phi) {
    check_shapes(X, M, S);
    const auto p = static_cast<std::size_t>(M.cols());
    selection_columns(p, phi);  // validates phi
    if (phi.size() == p) return global_chi2_test(X, M, S);
    if (X.isZero(0.0)) return 0.0;
    if (S.isZero(0.0)) throw DegenerateStatistics("covariance matrix S is zero but the residual is not");

    std::vector<Eigen::Index> in_phi, in_psi;
    std::vector<bool> chosen(p, false);
    for (auto i : phi) chosen[i] = true;
    for (std::size_t i = 0; i < p; ++i)
        (chosen[i] ? in_phi : in_psi).push_back(static_cast<Eigen::Index>(i));

    // The robust statistic projects the phi columns away from the nuisance
    // columns first: with W~ = (I - P_psi) W_phi, X*_phi = W~^T b and
    // I*_phi = W~^T W~, so tau* = |P_W~ b|^2.
    const auto w = whiten(X, M, S);
    const Mat W_phi = w.W(Eigen::all, in_phi);
    const Mat W_psi = w.W(Eigen::all, in_psi);
    Eigen::ColPivHouseholderQR<Mat> qr_psi(W_psi);
    qr_psi.setThreshold(1e-10);
    const Mat Q_psi = qr_psi.householderQ() * Mat::Identity(W_psi.rows(), qr_psi.rank());
    const Mat W_eff = W_phi - Q_psi * (Q_psi.transpose() * W_phi);

    // identifiability: smallest singular value of the residual phi block,
    // relative to the phi columns before projection
    Mat W_eff_n = W_eff;
    for (Eigen::Index j = 0; j < W_eff.cols(); ++j) {
        const double n = W_phi.col(j).norm();
        if (!(n > 0.0))
            throw UnidentifiableSubset("subset " + subset_name(phi) + " has no sensitivity at all");
        W_eff_n.col(j) /= n;
    }
    Eigen::JacobiSVD<Mat> svd(W_eff_n);
    if (svd.singularValues().minCoeff() < 1e-6)
        throw UnidentifiableSubset("subset " + subset_name(phi) +
                                   " is not identifiable once the other parameters are free");
    return projected_norm2(W_eff, w.b);
}

std::string to_string(ThresholdMode m) { return m == ThresholdMode::quantile ? "quantile" : "dof-mean"; }

std::string to_string(IsolationMode m) {
    switch (m) {
    case IsolationMode::none: return "none";
    case IsolationMode::sensitivity: return "sensitivity";
    case IsolationMode::minmax: return "minmax";
    }
    return "?";
}

std::optional<ThresholdMode> parse_threshold_mode(const std::string& s) {
    if (s == "quantile") return ThresholdMode::quantile;
    if (s == "dof-mean") return ThresholdMode::dof_mean;
    return std::nullopt;
}

std::optional<IsolationMode> parse_isolation_mode(const std::string& s) {
    for (auto m : {IsolationMode::none, IsolationMode::sensitivity, IsolationMode::minmax})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::vector<Subset> default_subsets(std::size_t p) {
    std::vector<Subset> out;
    for (std::size_t i = 0; i < p; ++i) out.push_back({i});
    if (p >= 3) out.push_back({1, 2});
    return out;
}

std::string subset_name(const Subset& s) {
    std::string out;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j) out += '+';
        out += 'w' + std::to_string(s[j] + 1);
    }
    return out;
}

double fdi_threshold(const FdiOptions& opt, std::size_t dof) {
    if (opt.threshold == ThresholdMode::dof_mean) return static_cast<double>(dof);
    return chi2_threshold(opt.alpha, static_cast<int>(dof));
}

FdiReport run_fdi_pipeline(const ResidualBatch& batch, const FdiOptions& opt) {
    batch.validate();
    const auto p = static_cast<std::size_t>(batch.params());

    FdiReport r;
    const Mat H = primary_residuals(batch);
    r.X = normalized_residual(H);
    r.M = sensitivity_matrix(batch.regressors);
    r.S = covariance_matrix(H, opt.lags);
    r.t = global_chi2_test(r.X, r.M, r.S);
    r.alpha = opt.alpha;
    r.lambda = fdi_threshold(opt, p);
    r.faulty = r.t > r.lambda;

    if (r.faulty && opt.isolation != IsolationMode::none) {
        const auto subsets = opt.subsets.empty() ? default_subsets(p) : opt.subsets;
        for (const auto& s : subsets) {
            const double stat = opt.isolation == IsolationMode::sensitivity ? sensitivity_test(r.X, r.M, r.S, s)
                                                                             : minmax_test(r.X, r.M, r.S, s);
            r.isolation.push_back({s, stat});
            if (!r.best || stat > r.isolation[*r.best].statistic) r.best = r.isolation.size() - 1;
        }
    }
    return r;
}

std::vector<std::size_t> window_starts(std::size_t steps, const WindowPlan& plan) {
    if (plan.window < 1) throw InvalidArgument("window must be >= 1");
    if (!(plan.overlap >= 0.0 && plan.overlap < 1.0)) throw InvalidArgument("overlap must lie in [0, 1)");
    const auto stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(plan.window * (1.0 - plan.overlap))));
    std::vector<std::size_t> out;
    for (std::size_t s = std::max<std::size_t>(plan.burn_in, 2); s + plan.window + 1 <= steps; s += stride)
        out.push_back(s);
    return out;
}

ResidualBatch subsystem_batch(const SubsystemSeries& series, std::size_t start, std::size_t window) {
    if (start + window + 1 > series.size())
        throw InsufficientHistory("window [" + std::to_string(start) + ", " + std::to_string(start + window) +
                                  ") needs " + std::to_string(start + window + 1) + " samples");
    ResidualBatch b;
    const auto nb = static_cast<Eigen::Index>(window);
    b.residuals.resize(nb);
    b.regressors.resize(nb, ArmaxModel::kOrder);
    for (Eigen::Index j = 0; j < nb; ++j) {
        const std::size_t k = start + static_cast<std::size_t>(j);
        b.regressors.row(j) = build_regressor(series.zhat, series.v, series.innov, k).transpose();
        b.residuals[j] = -series.innov[k + 1];
    }
    return b;
}

}  // namespace wavefdi
