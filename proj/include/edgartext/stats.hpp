#pragma once

#include <vector>

namespace edgartext {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation, accurate to ~1e-14 for the argument ranges used here.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-tailed p-value for Student's t with `df` degrees of freedom.
double student_t_two_tailed_p(double t, double df);

struct WelchResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Two-sample unequal-variance (Welch) t-test, two-tailed.  Requires at
/// least two observations per side; throws std::invalid_argument otherwise.
/// Zero variance on both sides degenerates to p = 1 for equal means and
/// p = 0 for unequal means.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace edgartext
