#pragma once

#include <functional>
#include <span>

namespace sllab::quadrature {

struct Estimate {
    double value = 0.0;
    /// |difference| between the last two refinement levels
    double error = 0.0;
    int levels = 0;
};

/// Composite Simpson rule refined by interval halving with Richardson
/// extrapolation (Romberg table), stopping once successive extrapolants agree
/// to `tolerance` relative. Integrals that cancel to zero stop once the change
/// is negligible against width * max|f| or below `absolute_floor`.
Estimate romberg(const std::function<double(double)>& f, double lo, double hi, double tolerance = 1e-13,
                 int max_levels = 24, double absolute_floor = 0.0);

/// Tensor-product Romberg integration over [-half_width, half_width]^d. Each
/// nested level also stops once its change is below tolerance * (sub-box
/// volume) * (peak |f| on a coarse probe grid).
Estimate box_integral(const std::function<double(std::span<const double>)>& f, int d, double half_width,
                      double tolerance = 1e-13);

}  // namespace sllab::quadrature
