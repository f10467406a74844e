#include "sindyrl/tolerance.hpp"

#include <cmath>
#include <stdexcept>

namespace sindyrl {

double tolerance(double v, double lo, double hi, double margin, double value_at_margin,
                 ToleranceShape shape) {
  if (!(lo <= hi)) throw std::invalid_argument("tolerance: lower bound exceeds upper bound");
  if (!(margin > 0.0)) throw std::invalid_argument("tolerance: margin must be positive");
  if (shape == ToleranceShape::kGaussian && !(value_at_margin > 0.0 && value_at_margin < 1.0))
    throw std::invalid_argument("tolerance: gaussian value_at_margin must lie in (0, 1)");
  if (shape == ToleranceShape::kQuadratic && !(value_at_margin >= 0.0 && value_at_margin < 1.0))
    throw std::invalid_argument("tolerance: quadratic value_at_margin must lie in [0, 1)");
  if (v >= lo && v <= hi) return 1.0;
  const double delta = (v < lo ? lo - v : v - hi) / margin;
  switch (shape) {
    case ToleranceShape::kGaussian: {
      const double scale = std::sqrt(-2.0 * std::log(value_at_margin));
      const double s = delta * scale;
      return std::exp(-0.5 * s * s);
    }
    case ToleranceShape::kQuadratic: {
      const double s = delta * std::sqrt(1.0 - value_at_margin);
      return std::abs(s) < 1.0 ? 1.0 - s * s : 0.0;
    }
  }
  return 0.0;
}

}  // namespace sindyrl
