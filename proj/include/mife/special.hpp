#pragma once

namespace mife::special {

double normal_cdf(double z);
// Upper tail 1 - Phi(z), accurate for large z.
double normal_sf(double z);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) of Student's t with df degrees of
// freedom.
double student_t_two_sided(double t, double df);

// Upper tail P(F >= f) of the F distribution.
double f_sf(double f, double df1, double df2);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// CDF of the studentized range for k groups and df error degrees of freedom
// (df = +inf allowed), by Gauss-Legendre quadrature over the normal and the
// scaled chi densities.
double studentized_range_cdf(double q, int k, double df);
double studentized_range_sf(double q, int k, double df);

}  // namespace mife::special
