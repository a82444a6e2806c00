#include "shipbow/random.hpp"

#include <cmath>
#include <numbers>

namespace shipbow {

double Rng::normal(double mean, double stddev) {
  // Box-Muller; u1 is kept away from zero.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace shipbow
