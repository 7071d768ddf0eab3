#pragma once

#include <cstddef>

#include "obh/ais.hpp"

namespace obh::ais {

// Standard test functions, negated so the optimum is a maximum of 0 at the
// origin. Bounds default to the customary ranges for each function.

Objective negated_sphere(std::size_t dims, double half_range = 5.12);

Objective negated_ackley(std::size_t dims, double half_range = 32.768);

} // namespace obh::ais
