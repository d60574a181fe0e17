#include "wavefdi/chi2.hpp"
#include "wavefdi/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wavefdi;

namespace {

// CDF by composite Simpson after the substitution x = u^2, which removes the
// singularity of the density at zero for dof = 1.
double simpson_cdf(double x, int dof) {
    const double k = dof / 2.0;
    const double norm = std::pow(2.0, k) * std::tgamma(k);
    auto integrand = [&](double u) {
        if (u == 0.0) return dof == 1 ? 2.0 / norm : 0.0;
        const double t = u * u;
        return 2.0 * u * std::pow(t, k - 1.0) * std::exp(-t / 2.0) / norm;
    };
    const int n = 20000;
    const double b = std::sqrt(x), h = b / n;
    double s = integrand(0.0) + integrand(b);
    for (int i = 1; i < n; ++i) s += integrand(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST(Chi2, TwoDofClosedForm) {
    for (double alpha : {0.5, 0.1, 0.05, 0.01, 1e-4}) EXPECT_NEAR(chi2_threshold(alpha, 2), -2.0 * std::log(alpha), 1e-9);
}

TEST(Chi2, KnownQuantiles) {
    EXPECT_NEAR(chi2_threshold(0.05, 5), 11.0705, 1e-4);
    EXPECT_NEAR(chi2_threshold(0.5, 1), 0.4549, 1e-4);
}

TEST(Chi2, ThresholdsMatchQuadratureOracle) {
    for (int dof : {1, 2, 5, 6}) {
        for (double alpha : {0.5, 0.05, 0.01}) {
            const double lambda = chi2_threshold(alpha, dof);
            EXPECT_NEAR(1.0 - simpson_cdf(lambda, dof), alpha, 1e-8) << dof << " " << alpha;
            EXPECT_LT(std::abs(chi2_sf(lambda, dof) - alpha), 1e-10);
        }
    }
}

TEST(Chi2, Monotonicity) {
    for (int dof = 1; dof <= 8; ++dof) {
        double prev = 0.0;
        for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01, 0.001}) {
            const double l = chi2_threshold(alpha, dof);
            EXPECT_GT(l, prev);
            prev = l;
        }
        EXPECT_GT(chi2_threshold(0.05, dof + 1), chi2_threshold(0.05, dof));
    }
}

TEST(Chi2, IncompleteGammaComplement) {
    for (double a : {0.5, 1.0, 2.5, 7.0})
        for (double x : {0.01, 0.5, 3.0, 12.0, 40.0}) EXPECT_NEAR(gamma_p(a, x) + gamma_q(a, x), 1.0, 1e-14);
    EXPECT_NEAR(gamma_p(1.0, 2.0), 1.0 - std::exp(-2.0), 1e-14);
    EXPECT_EQ(chi2_cdf(0.0, 3), 0.0);
}

TEST(Chi2, RejectsInvalidInput) {
    EXPECT_THROW(chi2_threshold(0.0, 5), DomainError);
    EXPECT_THROW(chi2_threshold(1.0, 5), DomainError);
    EXPECT_THROW(chi2_threshold(0.05, 0), DomainError);
    EXPECT_THROW(gamma_p(-1.0, 1.0), DomainError);
}
