#ifndef ORTHOFUSE_STATS_HPP_
#define ORTHOFUSE_STATS_HPP_

#include <vector>

namespace orthofuse {

//! Inverse standard normal CDF (Wichura's AS 241 rational approximation,
//! accurate to well below 1e-8 over (0,1)).
double norm_ppf(double p);

double norm_cdf(double x);

//! Regularized incomplete beta function I_x(a, b).
double beta_inc(double a, double b, double x);

//! Inverse of the regularized incomplete beta: x with I_x(a, b) = p.
double beta_inc_inv(double a, double b, double p);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // population variance (1/n)
double median(std::vector<double> v);           // by value; sorts a copy

}  // namespace orthofuse

#endif  // ORTHOFUSE_STATS_HPP_
