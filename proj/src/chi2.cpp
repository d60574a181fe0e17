#include "wavefdi/chi2.hpp"

#include "wavefdi/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wavefdi {

namespace {

constexpr int kMaxIter = 10000;
constexpr double kEps = 1e-16;

// power series, converges fast for x < a + 1
double series_p(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q, modified Lentz; used for x >= a + 1
double continued_fraction_q(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_args(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: a must be positive");
    if (!(x >= 0.0) || std::isnan(x)) throw DomainError("incomplete gamma: x must be >= 0");
}

}  // namespace

double gamma_p(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return x < a + 1.0 ? series_p(a, x) : 1.0 - continued_fraction_q(a, x);
}

double gamma_q(double a, double x) {
    check_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return x < a + 1.0 ? 1.0 - series_p(a, x) : continued_fraction_q(a, x);
}

double chi2_cdf(double x, int dof) {
    if (dof < 1) throw DomainError("chi-square dof must be >= 1");
    return x <= 0.0 ? 0.0 : gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, int dof) {
    if (dof < 1) throw DomainError("chi-square dof must be >= 1");
    return x <= 0.0 ? 1.0 : gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_threshold(double alpha, int dof) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    if (dof < 1) throw DomainError("chi-square dof must be >= 1");

    // bracket [lo, hi] with sf(lo) > alpha > sf(hi)
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi2_sf(hi, dof) > alpha) {
        lo = hi;
        hi *= 2.0;
    }

    const double k = 0.5 * dof;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double err = chi2_sf(x, dof) - alpha;
        if (std::abs(err) < 1e-13) break;
        if (err > 0.0) lo = x; else hi = x;
        // Newton on sf: d sf/dx = -density
        const double density = std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
        double next = density > 0.0 ? x + err / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

}  // namespace wavefdi
