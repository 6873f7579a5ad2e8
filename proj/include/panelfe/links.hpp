#pragma once

#include <string_view>

namespace panelfe {

enum class Family { Probit, Logit };

std::string_view to_string(Family family);

// Pointwise link values at an index z.
struct LinkBundle {
  double F = 0.0;      // probability
  double dF = 0.0;     // density
  double d2F = 0.0;
  double d3F = 0.0;
  double H = 0.0;      // dF / (F (1 - F))
  double omega = 0.0;  // H * dF
};

// Probit evaluation switches from erfc-based to continued-fraction Mills
// ratios beyond this absolute index.
inline constexpr double kProbitTailCrossover = 6.0;

LinkBundle link_eval(double z, Family family);

// log F(z) and log(1 - F(z)) without forming F.
double log_cdf(double z, Family family);
double log_ccdf(double z, Family family);

// y log F(z) + (1 - y) log(1 - F(z)).
double loglik_obs(double y, double z, Family family);

// First and negated second derivative of loglik_obs in z.
struct IndexDerivatives {
  double loglik = 0.0;
  double score = 0.0;
  double curvature = 0.0;  // -d2 loglik / dz2, strictly positive
};

IndexDerivatives index_derivatives(double y, double z, Family family);

// F^{-1}(p) for p in (0, 1).
double link_quantile(double p, Family family);

namespace detail {
// (1 - Phi(x)) / phi(x) for x >= 0.
double mills_ratio(double x);
}  // namespace detail

}  // namespace panelfe
