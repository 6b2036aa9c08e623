#pragma once

#include <cstddef>
#include <vector>

#include "mem2seq/rng.hpp"
#include "mem2seq/tensor.hpp"

namespace m2s {

/// Uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng);

}  // namespace m2s
