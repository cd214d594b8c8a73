#pragma once

// Seeded generators for the test distributions.

#include <cstddef>
#include <cstdint>

#include "gridot/geometry.hpp"
#include "gridot/reference.hpp"

namespace gridot {

SampleSet sample_gaussian(const Gaussian& g, std::size_t n, std::uint64_t seed);

/// Uniform on [0,1]^2.
SampleSet sample_uniform_square(std::size_t n, std::uint64_t seed);

/// Uniform on [0,1]x[1/3,2/3] union [1/3,2/3]x[0,1].
SampleSet sample_uniform_cross(std::size_t n, std::uint64_t seed);

/// Coordinatewise cube roots of standard normal draws in `dim` dimensions.
SampleSet sample_cuberoot_target(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace gridot
