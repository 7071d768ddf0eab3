#include "obh/benchmarks.hpp"

#include <cmath>

#include "obh/errors.hpp"

namespace obh::ais {

namespace {

std::vector<Interval> symmetric_bounds(std::size_t dims, double half_range) {
    if (dims == 0) {
        throw ConfigError("benchmark: dims must be positive");
    }
    if (!(half_range > 0.0)) {
        throw ConfigError("benchmark: bound half-range must be positive");
    }
    return std::vector<Interval>(dims, Interval{-half_range, half_range});
}

} // namespace

Objective negated_sphere(std::size_t dims, double half_range) {
    Objective obj;
    obj.bounds = symmetric_bounds(dims, half_range);
    obj.fitness = [](const std::vector<double>& x) {
        double sum = 0.0;
        for (double v : x) {
            sum += v * v;
        }
        return -sum;
    };
    return obj;
}

Objective negated_ackley(std::size_t dims, double half_range) {
    Objective obj;
    obj.bounds = symmetric_bounds(dims, half_range);
    obj.fitness = [](const std::vector<double>& x) {
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double n = static_cast<double>(x.size());
        double sum_sq = 0.0;
        double sum_cos = 0.0;
        for (double v : x) {
            sum_sq += v * v;
            sum_cos += std::cos(two_pi * v);
        }
        const double value = -20.0 * std::exp(-0.2 * std::sqrt(sum_sq / n)) -
                             std::exp(sum_cos / n) + 20.0 + std::exp(1.0);
        return -value;
    };
    return obj;
}

} // namespace obh::ais
