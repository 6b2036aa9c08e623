#include "mem2seq/init.hpp"

#include <cmath>

namespace m2s {

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace m2s
