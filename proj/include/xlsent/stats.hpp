#pragma once

namespace xlsent::stats {

// Regularized lower incomplete gamma P(a, x) and upper Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Survival function of the chi-squared distribution: Pr[X >= x] with df degrees.
double chi_squared_sf(double x, double df);

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace xlsent::stats
