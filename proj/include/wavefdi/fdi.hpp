#pragma once

#include "wavefdi/wave_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wavefdi {

/// Residuals e_k and regressors X_k (rows) of one test window.
struct ResidualBatch {
    Vec residuals;   ///< Nb
    Mat regressors;  ///< Nb x p

    Eigen::Index size() const { return residuals.size(); }
    Eigen::Index params() const { return regressors.cols(); }
    /// Nb >= p, matching row counts, finite entries.
    void validate() const;
};

/// Weight subset, 0-based indices into the parameter vector.
using Subset = std::vector<std::size_t>;

/// H_k = e_k X_k (the output gradient of a linear-in-weights model is X_k).
Mat primary_residuals(const ResidualBatch& batch);

/// (1/sqrt(Nb)) sum_k H_k.
Vec normalized_residual(const Mat& H);

/// (1/Nb) sum_k X_k X_k^T.
Mat sensitivity_matrix(const Mat& regressors);

/// Lag-0 second moment (1/Nb) sum H_k H_k^T plus, for m = 1..lags,
/// (1/(Nb-m)) sum_k (H_k H_{k+m}^T + H_{k+m} H_k^T).
Mat covariance_matrix(const Mat& H, int lags = 3);

/// t = X^T S^-1 M (M^T S^-1 M)^-1 M^T S^-1 X.
/// X = 0 gives 0 without touching S. S = 0 otherwise is DegenerateStatistics.
double global_chi2_test(const Vec& X, const Mat& M, const Mat& S);

/// Same quadratic form with M replaced by M A. A (p x q) selects the tested
/// parameter directions.
double sensitivity_test(const Vec& X, const Mat& M, const Mat& S, const Mat& A);
double sensitivity_test(const Vec& X, const Mat& M, const Mat& S, const Subset& phi);

/// Min-max (robust) test of the subset phi against nuisance changes in the
/// remaining parameters. Throws UnidentifiableSubset when the effective
/// information of phi is singular.
double minmax_test(const Vec& X, const Mat& M, const Mat& S, const Subset& phi);

/// p x |subset| column selection.
Mat selection_columns(std::size_t p, const Subset& subset);

enum class ThresholdMode { quantile, dof_mean };
enum class IsolationMode { none, sensitivity, minmax };

std::string to_string(ThresholdMode m);
std::string to_string(IsolationMode m);
std::optional<ThresholdMode> parse_threshold_mode(const std::string& s);
std::optional<IsolationMode> parse_isolation_mode(const std::string& s);

/// Singletons {0}..{p-1} followed by the pair {1, 2} (second and third weight).
std::vector<Subset> default_subsets(std::size_t p = 5);

/// Subset written with 1-based weight numbers, e.g. "w2+w3".
std::string subset_name(const Subset& s);

struct FdiOptions {
    double alpha = 0.01;
    ThresholdMode threshold = ThresholdMode::quantile;
    IsolationMode isolation = IsolationMode::none;
    std::vector<Subset> subsets;  ///< empty: default_subsets(p)
    int lags = 3;
};

struct SubsetStatistic {
    Subset subset;
    double statistic = 0.0;
};

struct FdiReport {
    Vec X;
    Mat M;
    Mat S;
    double t = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    bool faulty = false;
    std::vector<SubsetStatistic> isolation;  ///< filled only when faulty and isolation requested
    std::optional<std::size_t> best;         ///< index into `isolation`
    std::size_t window_start = 0;
    std::size_t window_end = 0;              ///< exclusive

    std::string verdict() const { return faulty ? "faulty" : "healthy"; }
};

double fdi_threshold(const FdiOptions& opt, std::size_t dof);

/// Residuals, normalized residual, M, S, global test, threshold, verdict and,
/// when faulty, the requested isolation test over the subsets.
FdiReport run_fdi_pipeline(const ResidualBatch& batch, const FdiOptions& opt);

// =============================================================================
// Residual streams from a filter run
// =============================================================================

/// Per-step quantities of the monitored subsystem i:
/// zhat(k) = prior position estimate, innov(k) = z(k) - zhat(k) at the sensor
/// on grid point i, v(k) = a (phi_{i-1} + phi_{i+1}) + f at the posterior.
struct SubsystemSeries {
    std::vector<double> zhat;
    std::vector<double> innov;
    std::vector<double> v;

    std::size_t size() const { return zhat.size(); }
    void push(double zhat_k, double innov_k, double v_k) {
        zhat.push_back(zhat_k);
        innov.push_back(innov_k);
        v.push_back(v_k);
    }
};

struct WindowPlan {
    std::size_t window = 1000;
    double overlap = 0.5;
    std::size_t burn_in = 2000;
};

/// Window starts s with pairs (X(k), e(k+1)) for k in [s, s + window); needs
/// s + window <= steps - 1.
std::vector<std::size_t> window_starts(std::size_t steps, const WindowPlan& plan);

/// Residual e(k+1) = zhat(k+1) - z(k+1) = -innov(k+1) against regressor X(k).
ResidualBatch subsystem_batch(const SubsystemSeries& series, std::size_t start, std::size_t window);

}  // namespace wavefdi
