#include "edgartext/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace edgartext {

namespace {

/// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEpsilon = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEpsilon) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    if (df <= 0.0) return 1.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("welch_t_test: need at least two observations per sample");
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());

    WelchResult result;
    for (double v : a) result.mean_a += v;
    result.mean_a /= na;
    for (double v : b) result.mean_b += v;
    result.mean_b /= nb;

    double var_a = 0.0;
    for (double v : a) var_a += (v - result.mean_a) * (v - result.mean_a);
    var_a /= (na - 1.0);
    double var_b = 0.0;
    for (double v : b) var_b += (v - result.mean_b) * (v - result.mean_b);
    var_b /= (nb - 1.0);

    const double se2 = var_a / na + var_b / nb;
    if (se2 <= 0.0) {
        // No sampling variance at all: the test degenerates.
        result.t = 0.0;
        result.df = na + nb - 2.0;
        result.p_value = (result.mean_a == result.mean_b) ? 1.0 : 0.0;
        if (result.mean_a != result.mean_b) {
            result.t = std::numeric_limits<double>::infinity();
        }
        return result;
    }
    result.t = (result.mean_a - result.mean_b) / std::sqrt(se2);
    const double ra = var_a / na;
    const double rb = var_b / nb;
    result.df = (ra + rb) * (ra + rb) / (ra * ra / (na - 1.0) + rb * rb / (nb - 1.0));
    result.p_value = student_t_two_tailed_p(result.t, result.df);
    return result;
}

}  // namespace edgartext
