#pragma once

#include "flexlp/rng.hpp"

namespace flexlp {

// Scaled inverse chi-square, the single parameterization used for sigma^2:
//   sigma^2 ~ Scaled-Inv-chi2(nu, lambda)  <=>  sigma^2 = nu * lambda / X,  X ~ chi2(nu)
//                                          <=>  sigma^2 ~ Inv-Gamma(shape = nu/2, scale = nu*lambda/2)
// so "inverse Gamma" draws in the sampler are exactly this family.

double draw_scaled_inv_chi2(RngStream& rng, double nu, double lambda);

/// P(sigma^2 <= x) under Scaled-Inv-chi2(nu, lambda).
double scaled_inv_chi2_cdf(double x, double nu, double lambda);

/// Quantile of the chi-square distribution with `nu` degrees of freedom.
double chi2_quantile(double p, double nu);

}  // namespace flexlp
