#pragma once

namespace sindyrl {

enum class ToleranceShape { kGaussian, kQuadratic };

/// Bounded shaping kernel: 1 on [lo, hi], decaying with the distance beyond
/// the nearest bound so that it equals `value_at_margin` exactly one margin
/// away. Gaussian shape needs value_at_margin in (0, 1); quadratic accepts
/// [0, 1) and is clamped at 0.
double tolerance(double v, double lo, double hi, double margin, double value_at_margin,
                 ToleranceShape shape);

}  // namespace sindyrl
