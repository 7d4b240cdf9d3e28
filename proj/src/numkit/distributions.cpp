#include "flexlp/distributions.hpp"

#include "flexlp/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

namespace flexlp {

double draw_scaled_inv_chi2(RngStream& rng, double nu, double lambda) {
  if (!(nu > 0.0) || !(lambda > 0.0)) {
    throw ParameterError("scaled inverse chi-square needs nu > 0 and lambda > 0 (got nu=" +
                         std::to_string(nu) + ", lambda=" + std::to_string(lambda) + ")");
  }
  double chi2 = 0.0;
  do {
    chi2 = 2.0 * rng.gamma(0.5 * nu);
  } while (chi2 <= 0.0);
  return nu * lambda / chi2;
}

double scaled_inv_chi2_cdf(double x, double nu, double lambda) {
  if (!(nu > 0.0) || !(lambda > 0.0)) throw ParameterError("scaled_inv_chi2_cdf: nu, lambda must be > 0");
  if (x <= 0.0) return 0.0;
  // P(nu*lambda/X <= x) = P(X >= nu*lambda/x)
  return boost::math::gamma_q(0.5 * nu, 0.5 * nu * lambda / x);
}

double chi2_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0) || !(nu > 0.0)) throw ParameterError("chi2_quantile: need p in (0,1), nu > 0");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(nu), p);
}

}  // namespace flexlp
