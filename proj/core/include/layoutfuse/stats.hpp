#pragma once

namespace layoutfuse::stats {

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
[[nodiscard]] double incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with `dof` degrees of freedom.
[[nodiscard]] double student_t_cdf(double t, double dof);

/// Inverse CDF by bisection on student_t_cdf.
[[nodiscard]] double student_t_quantile(double p, double dof);

}  // namespace layoutfuse::stats
