#include "sllab/quadrature.hpp"

#include <cmath>
#include <vector>

#include "sllab/error.hpp"

namespace sllab::quadrature {

Estimate romberg(const std::function<double(double)>& f, double lo, double hi, double tolerance,
                 int max_levels, double absolute_floor) {
    std::vector<double> previous;
    std::vector<double> current;
    const double width = hi - lo;
    double peak = 0.0;
    auto sample = [&](double x) {
        const double v = f(x);
        peak = std::max(peak, std::abs(v));
        return v;
    };
    double trapezoid = 0.5 * width * (sample(lo) + sample(hi));
    previous.push_back(trapezoid);

    Estimate out{trapezoid, std::abs(trapezoid), 1};
    long panels = 1;
    for (int level = 1; level < max_levels; ++level) {
        const double h = width / static_cast<double>(panels);
        double midpoints = 0.0;
        for (long i = 0; i < panels; ++i) midpoints += sample(lo + (static_cast<double>(i) + 0.5) * h);
        panels *= 2;
        trapezoid = 0.5 * trapezoid + 0.5 * h * midpoints;

        current.assign(1, trapezoid);
        double factor = 1.0;
        for (int j = 1; j <= level; ++j) {
            factor *= 4.0;
            current.push_back(current[j - 1] + (current[j - 1] - previous[j - 1]) / (factor - 1.0));
        }
        const double best = current.back();
        const double delta = std::abs(best - previous.back());
        out = Estimate{best, delta, level + 1};
        // Level 1 only holds a single Simpson value; require at least two comparable estimates.
        // Integrals that cancel to zero converge against the integrand scale instead.
        const bool relative_ok = delta <= tolerance * std::abs(best);
        const bool absolute_ok = delta <= tolerance * std::abs(width) * peak || delta <= absolute_floor;
        if (level >= 2 && (relative_ok || absolute_ok)) return out;
        previous.swap(current);
    }
    return out;
}

namespace {

Estimate nested(const std::function<double(std::span<const double>)>& f, std::vector<double>& point, int axis,
                double half_width, double tolerance, double scale) {
    const int d = static_cast<int>(point.size());
    double worst = 0.0;
    int levels = 0;
    auto inner = [&](double t) {
        point[axis] = t;
        if (axis + 1 == d) return f(point);
        const Estimate e = nested(f, point, axis + 1, half_width, tolerance, scale);
        worst = std::max(worst, e.error);
        return e.value;
    };
    const double floor = tolerance * scale * std::pow(2.0 * half_width, d - axis);
    Estimate e = romberg(inner, -half_width, half_width, tolerance, 24, floor);
    levels = e.levels;
    e.error = std::max(e.error, worst);
    e.levels = levels;
    return e;
}

}  // namespace

Estimate box_integral(const std::function<double(std::span<const double>)>& f, int d, double half_width,
                      double tolerance) {
    if (d < 1) throw Error("quadrature", "dimension must be >= 1");
    std::vector<double> point(static_cast<std::size_t>(d), 0.0);
    constexpr int probes = 5;
    double scale = 0.0;
    std::vector<int> index(static_cast<std::size_t>(d), 0);
    while (true) {
        for (int k = 0; k < d; ++k) point[k] = half_width * (-1.0 + 2.0 * (index[k] + 0.5) / probes);
        scale = std::max(scale, std::abs(f(point)));
        int k = 0;
        while (k < d && ++index[k] == probes) index[k++] = 0;
        if (k == d) break;
    }
    return nested(f, point, 0, half_width, tolerance, scale);
}

}  // namespace sllab::quadrature
